#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

#include "checkpoint.hpp"
#include "gatespec.hpp"
#include "iqp/datasets.hpp"
#include "iqp/evaluation.hpp"
#include "iqp/exact.hpp"
#include "iqp/expval.hpp"
#include "iqp/mmd.hpp"
#include "iqp/rng.hpp"
#include "iqp/training.hpp"

#ifdef IQP_HAVE_OPENMP
#include <omp.h>
#endif

#ifndef IQP_DEFAULT_DATA_DIR
#define IQP_DEFAULT_DATA_DIR "data"
#endif

namespace iqp::cli {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    return out;
}

BitMatrix load_any(const std::string& path) { return load_dataset(path, format_for_path(path)); }

void save_any(const std::string& path, const BitMatrix& data) { save_dataset(path, data, format_for_path(path)); }

std::size_t resolve_n(const RunConfig& cfg, const BitMatrix& data) {
    if (cfg.model.n_qubits != 0 && cfg.model.n_qubits != data.width())
        throw ConfigError("dataset width " + std::to_string(data.width()) + " does not match model.n_qubits " +
                          std::to_string(cfg.model.n_qubits));
    return data.width();
}

TrainConfig make_train_config(const RunConfig& cfg, const std::vector<double>& sigmas) {
    TrainConfig tc;
    tc.max_steps = cfg.train.steps;
    tc.learning_rate = cfg.train.learning_rate;
    tc.batch_a = cfg.train.batch_a;
    tc.batch_z = cfg.train.batch_z;
    tc.minibatch = cfg.train.minibatch;
    tc.schedule = BandwidthSchedule(sigmas);
    tc.convergence_window = cfg.train.convergence_window;
    tc.convergence_rel_tol = cfg.train.convergence_rel_tol;
    tc.seed = cfg.seed;
    return tc;
}

void write_history(const std::string& path, const TrainReport& report) {
    auto out = open_out(path);
    out << "step,loss\n";
    for (const auto& p : report.loss_history) out << p.step << ',' << format_double(p.loss) << '\n';
}

std::vector<long long> read_labels(const std::string& path, std::size_t rows) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open label file " + path);
    std::vector<long long> labels;
    long long v = 0;
    while (in >> v) labels.push_back(v);
    if (!in.eof()) throw FormatError("label file " + path + ": non-integer entry");
    if (labels.size() != rows)
        throw ConfigError("label file has " + std::to_string(labels.size()) + " entries for " + std::to_string(rows) +
                          " test rows");
    return labels;
}

// Witness rows: round-robin over labels when given, else uniform over rows.
BitMatrix pick_witnesses(const BitMatrix& test, std::size_t count, const std::vector<long long>* labels,
                         std::uint64_t seed) {
    Rng rng = make_rng(seed, Stream::Witness);
    std::vector<std::size_t> idx;
    if (labels != nullptr) {
        std::map<long long, std::vector<std::size_t>> by_label;
        for (std::size_t i = 0; i < labels->size(); ++i) by_label[(*labels)[i]].push_back(i);
        std::vector<const std::vector<std::size_t>*> groups;
        for (const auto& [label, rows] : by_label) groups.push_back(&rows);
        for (std::size_t w = 0; w < count; ++w) {
            const auto& rows = *groups[w % groups.size()];
            idx.push_back(rows[uniform_index(rng, rows.size())]);
        }
    } else {
        for (std::size_t w = 0; w < count; ++w) idx.push_back(uniform_index(rng, test.rows()));
    }
    return test.select_rows(idx);
}

void write_matrix_csv(const std::string& path, const CovarianceMatrix& c) {
    auto out = open_out(path);
    out << "i";
    for (std::size_t j = 0; j < c.n; ++j) out << ',' << j;
    out << '\n';
    for (std::size_t i = 0; i < c.n; ++i) {
        out << i;
        for (std::size_t j = 0; j < c.n; ++j) out << ',' << format_double(c(i, j));
        out << '\n';
    }
}

double mean_of_means(const std::vector<TestMmd>& v) {
    double acc = 0.0;
    for (const auto& t : v) acc += t.mean;
    return acc / static_cast<double>(v.size());
}

}  // namespace

std::string sibling_path(const std::string& path, const std::string& tag) {
    const auto slash = path.find_last_of('/');
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + "." + tag + ".csv";
    return path.substr(0, dot) + "." + tag + path.substr(dot);
}

RunConfig effective_config(const GlobalOptions& global) {
    RunConfig cfg = global.config_path.empty() ? parse_config("{}") : load_config(global.config_path);
    if (global.seed) cfg.seed = *global.seed;
    cfg.data.mcmc.seed = cfg.seed;
#ifdef IQP_HAVE_OPENMP
    if (global.threads > 0) omp_set_num_threads(static_cast<int>(global.threads));
#endif
    return cfg;
}

int cmd_gen_data(const GlobalOptions& global, const GenDataArgs& args, std::ostream& log) {
    const RunConfig cfg = effective_config(global);
    const DataSection& d = cfg.data;
    BitMatrix data;
    std::optional<IsingSpec> spec;
    if (args.kind == "blobs") {
        const std::string patterns = d.patterns.empty() ? std::string(IQP_DEFAULT_DATA_DIR) + "/blobs16.txt" : d.patterns;
        BlobSpec blobs{load_dataset(patterns, format_for_path(patterns)), d.flip_prob};
        data = gen_blobs(blobs, d.count, cfg.seed);
    } else if (args.kind == "ising") {
        auto [rows, s] = gen_ising_2d(d.side, d.temperature, d.coupling_low, d.coupling_high, d.mcmc);
        data = std::move(rows);
        spec = std::move(s);
    } else if (args.kind == "scale-free") {
        auto [rows, s] = gen_scale_free(d.nodes, d.connectivity, d.temperature, linear_degree_bias(d.bias_scale), d.mcmc,
                                        d.coupling);
        data = std::move(rows);
        spec = std::move(s);
    } else {
        throw ConfigError("unknown dataset kind '" + args.kind + "' (expected blobs, ising or scale-free)");
    }
    if (d.test_fraction > 0.0) {
        if (args.test_out.empty()) throw ConfigError("data.test_fraction is set but no --test-out path was given");
        auto [train, test] = train_test_split(data, d.test_fraction, cfg.seed);
        save_any(args.out, train);
        save_any(args.test_out, test);
        log << "wrote " << train.rows() << " train rows to " << args.out << " and " << test.rows() << " test rows to "
            << args.test_out << '\n';
    } else {
        save_any(args.out, data);
        log << "wrote " << data.rows() << " rows of width " << data.width() << " to " << args.out << '\n';
    }
    if (!args.spec_out.empty()) {
        if (!spec) throw ConfigError("--spec-out applies to ising and scale-free datasets only");
        auto out = open_out(args.spec_out);
        write_ising_spec(out, *spec);
    }
    return kExitOk;
}

int cmd_train(const GlobalOptions& global, const TrainArgs& args, std::ostream& log) {
    const RunConfig cfg = effective_config(global);
    const BitMatrix data = load_any(args.data);
    const std::size_t n = resolve_n(cfg, data);
    const GateSet gates = build_gates(cfg.model.gates, n);
    const ResolvedBandwidths bw = resolve_bandwidths(cfg.train.bandwidth, n, &data);
    const TrainConfig tc = make_train_config(cfg, bw.sigmas);
    log << "training " << gates.size() << " gates on " << data.rows() << " rows, sigmas";
    for (double s : bw.sigmas) log << ' ' << s;
    log << '\n';
    const TrainReport report = train(gates, data, cfg.init, tc, cfg.model.kind);
    Checkpoint ckpt{gates, report.final_params, cfg.model.kind,
                    {cfg.hash, cfg.seed, report.loss_history.size(), bw.sigmas, bw.description}};
    save_checkpoint(args.out, ckpt);
    if (!args.history.empty()) write_history(args.history, report);
    log << "stopped after " << report.loss_history.size() << " steps (" << to_string(report.stop_reason) << ")";
    if (!report.loss_history.empty()) log << ", final loss " << report.loss_history.back().loss;
    log << '\n';
    return kExitOk;
}

int cmd_eval(const GlobalOptions& global, const EvalArgs& args, std::ostream& log) {
    const RunConfig cfg = effective_config(global);
    const Checkpoint ckpt = load_checkpoint(args.checkpoint);
    const BitMatrix test = load_any(args.test);
    const std::size_t n = ckpt.gates.n_qubits();
    if (test.width() != n)
        throw ConfigError("test set width " + std::to_string(test.width()) + " does not match checkpoint n_qubits " +
                          std::to_string(n));

    std::vector<double> sigmas;
    if (cfg.eval.bandwidth) {
        sigmas = resolve_bandwidths(*cfg.eval.bandwidth, n, &test).sigmas;
    } else if (!ckpt.provenance.sigmas.empty()) {
        sigmas = ckpt.provenance.sigmas;
    } else {
        sigmas = resolve_bandwidths(cfg.train.bandwidth, n, &test).sigmas;
    }
    const BandwidthSchedule schedule(sigmas);
    const BatchSizes sizes{cfg.eval.batch_a, cfg.eval.batch_z};
    const auto mmd = test_mmd(ckpt.gates, ckpt.params, ckpt.kind, test, schedule, cfg.eval.repetitions, sizes,
                              derive_seed(cfg.seed, Stream::Repetition));
    {
        auto out = open_out(args.out);
        out << "sigma,mean,std\n";
        for (const auto& m : mmd) out << format_double(m.sigma) << ',' << format_double(m.mean) << ',' << format_double(m.std) << '\n';
    }
    for (const auto& m : mmd) log << "test mmd2 sigma=" << m.sigma << " mean=" << m.mean << " std=" << m.std << '\n';

    std::vector<std::pair<std::string, std::string>> summary;
    if (cfg.eval.covariance) {
        const auto cov = covariance_matrix(ckpt.gates, ckpt.params, ckpt.kind, cfg.eval.covariance_z,
                                           derive_seed(cfg.seed, Stream::ZSamples), global.exact_limit);
        write_matrix_csv(sibling_path(args.out, "covariance"), cov);
    }
    if (cfg.eval.log_likelihood && n <= global.exact_limit) {
        const auto ll = log_likelihood(ckpt.gates, ckpt.params, ckpt.kind, test, 1e-300, global.exact_limit);
        summary.emplace_back("log_likelihood", ll.zero_probability ? "-inf" : format_double(ll.value));
        summary.emplace_back("log_likelihood_zero_rows", std::to_string(ll.zero_rows));
        summary.emplace_back("mean_log_likelihood",
                             ll.zero_probability ? "-inf" : format_double(ll.value / static_cast<double>(test.rows())));
    }
    if (cfg.eval.kgel.enabled) {
        const KgelSection& k = cfg.eval.kgel;
        std::vector<long long> labels;
        if (!k.labels.empty()) labels = read_labels(k.labels, test.rows());
        const BitMatrix witnesses = pick_witnesses(test, k.witnesses, labels.empty() ? nullptr : &labels, cfg.seed);
        const KgelRhs rhs = k.exact_rhs
                                ? kgel_rhs_exact(ckpt.gates, ckpt.params, ckpt.kind, witnesses, k.sigma, global.exact_limit)
                                : kgel_rhs(ckpt.gates, ckpt.params, ckpt.kind, witnesses, k.sigma, {k.batch_a, k.batch_z},
                                           derive_seed(cfg.seed, Stream::Witness));
        KgelProblem problem{test, witnesses, k.sigma, rhs.value, k.tolerance, k.max_iterations};
        const KgelSolution sol = kgel_solve(problem);
        {
            auto out = open_out(sibling_path(args.out, "kgel_pi"));
            out << "index,pi\n";
            for (std::size_t i = 0; i < sol.pi.size(); ++i) out << i << ',' << format_double(sol.pi[i]) << '\n';
        }
        {
            // Cumulative mass in label order when labels are known, else row order.
            std::vector<std::size_t> order(sol.pi.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            if (!labels.empty())
                std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return labels[a] < labels[b]; });
            auto out = open_out(sibling_path(args.out, "kgel_cumulative"));
            out << "index,cumulative_pi\n";
            double acc = 0.0;
            for (std::size_t r = 0; r < order.size(); ++r) {
                acc += sol.pi[order[r]];
                out << r << ',' << format_double(acc) << '\n';
            }
        }
        if (!labels.empty()) {
            auto out = open_out(sibling_path(args.out, "kgel_labels"));
            out << "label,mass\n";
            for (const auto& b : bin_pi_by_label(sol.pi, labels)) out << b.label << ',' << format_double(b.mass) << '\n';
        }
        summary.emplace_back("kgel_kl", format_double(sol.kl_value));
        summary.emplace_back("kgel_residual", format_double(sol.residual));
        summary.emplace_back("kgel_feasible", sol.feasible ? "1" : "0");
        summary.emplace_back("kgel_iterations", std::to_string(sol.iterations));
        if (!sol.feasible)
            log << "kgel: solver could not meet the moment constraints (residual " << sol.residual << ")\n";
        else
            log << "kgel: kl=" << sol.kl_value << '\n';
    }
    if (!summary.empty()) {
        auto out = open_out(sibling_path(args.out, "summary"));
        out << "metric,value\n";
        for (const auto& [key, value] : summary) out << key << ',' << value << '\n';
    }
    return kExitOk;
}

int cmd_sample(const GlobalOptions& global, const SampleArgs& args, std::ostream& log) {
    const RunConfig cfg = effective_config(global);
    const Checkpoint ckpt = load_checkpoint(args.checkpoint);
    if (args.count == 0) throw ConfigError("--count must be positive");
    BitMatrix rows;
    if (ckpt.kind == ModelKind::Bitflip) {
        rows = sample_bitflip(ckpt.gates, ckpt.params, args.count, derive_seed(cfg.seed, Stream::ModelSamples));
    } else {
        if (ckpt.gates.n_qubits() > global.exact_limit)
            throw LimitError("sampling a " + std::to_string(ckpt.gates.n_qubits()) + "-qubit " +
                             std::string(to_string(ckpt.kind)) + " circuit exceeds the exact limit of " +
                             std::to_string(global.exact_limit) +
                             "; classical sampling is intractable at this size, so deploy the checkpoint on quantum "
                             "hardware to draw samples");
        rows = sample_exact(ckpt.gates, ckpt.params, ckpt.kind, args.count, derive_seed(cfg.seed, Stream::ModelSamples),
                            global.exact_limit);
    }
    save_any(args.out, rows);
    log << "wrote " << rows.rows() << " samples to " << args.out << '\n';
    return kExitOk;
}

int cmd_gradcheck(const GlobalOptions& global, const GradcheckArgs& args, std::ostream& log) {
    const RunConfig cfg = effective_config(global);
    const GradcheckSection& g = cfg.gradcheck;
    BitMatrix data = load_any(args.data);
    const std::size_t n = resolve_n(cfg, data);
    if (data.rows() > g.max_rows) {
        std::vector<std::size_t> idx(g.max_rows);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        data = data.select_rows(idx);
    }
    GateSet gates;
    ParamVector params;
    ModelKind kind = cfg.model.kind;
    if (!args.checkpoint.empty()) {
        const Checkpoint ckpt = load_checkpoint(args.checkpoint);
        gates = ckpt.gates;
        params = ckpt.params;
        kind = ckpt.kind;
    } else {
        gates = build_gates(cfg.model.gates, n);
        const ParamVector base = init_params_datadep(gates, data, cfg.init, cfg.seed);
        Rng rng = make_rng(cfg.seed, Stream::Witness, 1);
        std::vector<double> theta(base.values().begin(), base.values().end());
        for (double& t : theta) t += g.noise * standard_normal(rng);
        params = ParamVector(std::move(theta));
    }
    const double sigma = resolve_bandwidths(cfg.train.bandwidth, n, &data).sigmas.front();
    const BitMatrix a = sample_observables(ObservableDistribution::from_sigma(n, sigma), g.batch_a,
                                           derive_seed(cfg.seed, Stream::Observables));
    const BitMatrix z = sample_uniform(n, g.batch_z, derive_seed(cfg.seed, Stream::ZSamples));
    LossGrad lg = loss_and_grad(gates, params, data, a, z, kind);
    if (args.inject_sign_flip)
        for (double& v : lg.grad) v = -v;

    double worst = 0.0;
    std::size_t worst_j = 0;
    std::size_t checked = 0;
    std::vector<double> theta(params.values().begin(), params.values().end());
    for (std::size_t j = 0; j < theta.size(); ++j) {
        if (std::abs(lg.grad[j]) <= 1e-8) continue;
        const double saved = theta[j];
        theta[j] = saved + g.h;
        const double up = mmd2_unbiased(gates, ParamVector(theta), data, a, z, kind).value;
        theta[j] = saved - g.h;
        const double down = mmd2_unbiased(gates, ParamVector(theta), data, a, z, kind).value;
        theta[j] = saved;
        const double fd = (up - down) / (2.0 * g.h);
        const double rel = std::abs(fd - lg.grad[j]) / std::abs(lg.grad[j]);
        ++checked;
        if (rel > worst) {
            worst = rel;
            worst_j = j;
        }
    }
    const double threshold = kind == ModelKind::Bitflip ? g.bitflip_threshold : g.threshold;
    const bool pass = checked > 0 && worst <= threshold;
    log << "gradcheck kind=" << to_string(kind) << " gates=" << gates.size() << " checked=" << checked
        << " max_rel_error=" << std::scientific << std::setprecision(3) << worst << " (gate " << worst_j
        << ") threshold=" << threshold << std::defaultfloat << " -> " << (pass ? "PASS" : "FAIL") << '\n';
    return pass ? kExitOk : kExitRuntime;
}

int cmd_grid(const GlobalOptions& global, const GridArgs& args, std::ostream& log) {
    const RunConfig cfg = effective_config(global);
    const BitMatrix data = load_any(args.data);
    const std::size_t n = resolve_n(cfg, data);
    const GateSet gates = build_gates(cfg.model.gates, n);
    const ResolvedBandwidths bw = resolve_bandwidths(cfg.train.bandwidth, n, &data);
    auto [train_part, valid_part] = train_test_split(data, cfg.grid.validation_fraction, derive_seed(cfg.seed, Stream::Split));

    auto values = [](const std::vector<double>& list, double def) { return list.empty() ? std::vector<double>{def} : list; };
    const auto lrs = values(cfg.grid.learning_rate, cfg.train.learning_rate);
    const auto s2s = values(cfg.grid.scale_two_qubit, cfg.init.scale_two_qubit);
    const auto sos = values(cfg.grid.scale_other, cfg.init.scale_other);
    struct Cell {
        double lr, s2, so;
        std::string status = "ok";
        double score = 0.0;
    };
    std::vector<Cell> cells;
    for (double lr : lrs)
        for (double s2 : s2s)
            for (double so : sos) cells.push_back({lr, s2, so});

    const BandwidthSchedule schedule(bw.sigmas);
    const BatchSizes eval_sizes{cfg.eval.batch_a, cfg.eval.batch_z};
    auto run_cell = [&](Cell& c) {
        try {
            RunConfig cc = cfg;
            cc.train.learning_rate = c.lr;
            cc.init.scale_two_qubit = c.s2;
            cc.init.scale_other = c.so;
            const TrainReport r = train(gates, train_part, cc.init, make_train_config(cc, bw.sigmas), cfg.model.kind);
            const auto m = test_mmd(gates, r.final_params, cfg.model.kind, valid_part, schedule, cfg.eval.repetitions,
                                    eval_sizes, derive_seed(cfg.seed, Stream::GridCell));
            c.score = mean_of_means(m);
            if (!std::isfinite(c.score)) throw NumericError("non-finite validation score");
        } catch (const std::exception& e) {
            c.status = std::string("failed: ") + e.what();
            std::replace(c.status.begin(), c.status.end(), ',', ';');
        }
    };
#pragma omp parallel for schedule(dynamic, 1) if (cfg.grid.parallel)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(cells.size()); ++i) run_cell(cells[static_cast<std::size_t>(i)]);

    std::vector<std::size_t> order(cells.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const bool oka = cells[a].status == "ok";
        const bool okb = cells[b].status == "ok";
        if (oka != okb) return oka;
        return oka && cells[a].score < cells[b].score;
    });
    {
        auto out = open_out(args.out);
        out << "rank,cell,learning_rate,scale_two_qubit,scale_other,validation_mmd2,status\n";
        for (std::size_t r = 0; r < order.size(); ++r) {
            const Cell& c = cells[order[r]];
            out << r + 1 << ',' << order[r] << ',' << format_double(c.lr) << ',' << format_double(c.s2) << ','
                << format_double(c.so) << ',' << (c.status == "ok" ? format_double(c.score) : "") << ',' << c.status << '\n';
        }
    }
    const Cell& best = cells[order.front()];
    if (best.status != "ok") throw std::runtime_error("every grid cell failed");
    log << "best cell " << order.front() << ": lr=" << best.lr << " scale_two_qubit=" << best.s2
        << " scale_other=" << best.so << " validation mmd2=" << best.score << '\n';

    if (!args.checkpoint.empty()) {
        RunConfig fc = cfg;
        fc.train.learning_rate = best.lr;
        fc.init.scale_two_qubit = best.s2;
        fc.init.scale_other = best.so;
        if (cfg.grid.final_steps != 0) fc.train.steps = cfg.grid.final_steps;
        const TrainReport r = train(gates, data, fc.init, make_train_config(fc, bw.sigmas), cfg.model.kind);
        Checkpoint ckpt{gates, r.final_params, cfg.model.kind,
                        {cfg.hash, cfg.seed, r.loss_history.size(), bw.sigmas, bw.description}};
        save_checkpoint(args.checkpoint, ckpt);
        log << "retrained best cell for " << r.loss_history.size() << " steps on all " << data.rows() << " rows\n";
    }
    return kExitOk;
}

int cmd_bench(const GlobalOptions& global, const BenchArgs& args, std::ostream& log) {
    const RunConfig cfg = effective_config(global);
    const BenchSection& b = cfg.bench;
    auto out = open_out(args.out);
    out << "n,gates,seconds\n";
    for (std::size_t n : b.n) {
        const GateSet gates = two_local_all_to_all(n, b.gates == "two-local-all-to-all-plus-singles");
        const ParamVector params = init_params_uniform(gates.size(), cfg.seed);
        const BitMatrix x = sample_uniform(n, b.data_rows, derive_seed(cfg.seed, Stream::DataMinibatch));
        const double sigma = sigma_for_weight(n, b.weight);
        const BitMatrix a = sample_observables(ObservableDistribution::from_sigma(n, sigma), b.batch_a,
                                               derive_seed(cfg.seed, Stream::Observables));
        const BitMatrix z = sample_uniform(n, b.batch_z, derive_seed(cfg.seed, Stream::ZSamples));
        double best = 0.0;
        for (std::size_t r = 0; r < b.repeats; ++r) {
            const auto t0 = std::chrono::steady_clock::now();
            const LossGrad lg = loss_and_grad(gates, params, x, a, z, cfg.model.kind);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (!std::isfinite(lg.loss)) throw NumericError("non-finite loss in benchmark");
            best = r == 0 ? secs : std::min(best, secs);
        }
        out << n << ',' << gates.size() << ',' << format_double(best) << '\n';
        log << "n=" << n << " gates=" << gates.size() << " seconds=" << best << '\n';
    }
    return kExitOk;
}

}  // namespace iqp::cli
