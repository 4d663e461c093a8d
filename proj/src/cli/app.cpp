#include "app.hpp"

#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace iqp::cli {

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Train and evaluate parameterised IQP circuits with MMD losses", "iqpmmd"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every command");

    GlobalOptions global;
    std::uint64_t seed = 0;
    app.add_option("--config", global.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    auto* seed_opt = app.add_option("--seed", seed, "Master seed (overrides the config)");
    app.add_option("--threads", global.threads, "Worker threads (0 keeps the runtime default)");
    app.add_option("--exact-limit", global.exact_limit, "Largest qubit count for exact simulation")
        ->check(CLI::Range(1, 62));

    GenDataArgs gen;
    auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic dataset");
    gen_cmd->add_option("kind", gen.kind, "blobs, ising or scale-free")->required();
    gen_cmd->add_option("--out", gen.out, "Dataset path (.iqpb for packed)")->required();
    gen_cmd->add_option("--test-out", gen.test_out, "Test split path when data.test_fraction > 0");
    gen_cmd->add_option("--spec-out", gen.spec_out, "Write the Ising specification here");

    TrainArgs tr;
    auto* train_cmd = app.add_subcommand("train", "Train a circuit on a dataset");
    train_cmd->add_option("--data", tr.data, "Training dataset")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--out", tr.out, "Checkpoint path")->required();
    train_cmd->add_option("--history", tr.history, "Loss history CSV");

    EvalArgs ev;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a test set");
    eval_cmd->add_option("--checkpoint", ev.checkpoint, "Checkpoint path")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--test", ev.test, "Test dataset")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--out", ev.out, "Test MMD CSV; other outputs are written beside it")->required();

    SampleArgs sa;
    auto* sample_cmd = app.add_subcommand("sample", "Draw samples from a checkpoint");
    sample_cmd->add_option("--checkpoint", sa.checkpoint, "Checkpoint path")->required()->check(CLI::ExistingFile);
    sample_cmd->add_option("--count", sa.count, "Number of samples")->required();
    sample_cmd->add_option("--out", sa.out, "Output dataset path")->required();

    GradcheckArgs gc;
    auto* grad_cmd = app.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients");
    grad_cmd->add_option("--data", gc.data, "Dataset")->required()->check(CLI::ExistingFile);
    grad_cmd->add_option("--checkpoint", gc.checkpoint, "Use these parameters instead of a seeded instance")
        ->check(CLI::ExistingFile);
    grad_cmd->add_flag("--inject-sign-flip", gc.inject_sign_flip, "Negate the analytic gradient (self-test)");

    GridArgs gr;
    auto* grid_cmd = app.add_subcommand("grid", "Hyperparameter grid search");
    grid_cmd->add_option("--data", gr.data, "Dataset")->required()->check(CLI::ExistingFile);
    grid_cmd->add_option("--out", gr.out, "Ranked results CSV")->required();
    grid_cmd->add_option("--checkpoint", gr.checkpoint, "Retrain the best cell on all data and save it here");

    BenchArgs be;
    auto* bench_cmd = app.add_subcommand("bench", "Time loss and gradient evaluation");
    bench_cmd->add_option("--out", be.out, "Timing CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitConfig;
    }
    if (seed_opt->count() > 0) global.seed = seed;

    return run_guarded(
        [&]() -> int {
            if (*gen_cmd) return cmd_gen_data(global, gen, out);
            if (*train_cmd) return cmd_train(global, tr, out);
            if (*eval_cmd) return cmd_eval(global, ev, out);
            if (*sample_cmd) return cmd_sample(global, sa, out);
            if (*grad_cmd) return cmd_gradcheck(global, gc, out);
            if (*grid_cmd) return cmd_grid(global, gr, out);
            if (*bench_cmd) return cmd_bench(global, be, out);
            return kExitConfig;
        },
        err);
}

}  // namespace iqp::cli
