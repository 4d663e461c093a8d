#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "config.hpp"
#include "iqp/exact.hpp"

namespace iqp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

/// Flags shared by every command. `seed` overrides the config seed.
struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::size_t threads = 0;
    std::size_t exact_limit = kDefaultExactLimit;
};

/// Loads the config named by the global flags (defaults when none) and
/// applies the seed override.
RunConfig effective_config(const GlobalOptions& global);

struct GenDataArgs {
    std::string kind;  // blobs | ising | scale-free
    std::string out;
    std::string test_out;
    std::string spec_out;
};

struct TrainArgs {
    std::string data;
    std::string out;
    std::string history;
};

struct EvalArgs {
    std::string checkpoint;
    std::string test;
    std::string out;
};

struct SampleArgs {
    std::string checkpoint;
    std::size_t count = 1000;
    std::string out;
};

struct GradcheckArgs {
    std::string data;
    std::string checkpoint;
    /// Mutation hook: negate the analytic gradient before comparing.
    bool inject_sign_flip = false;
};

struct GridArgs {
    std::string data;
    std::string out;
    std::string checkpoint;
};

struct BenchArgs {
    std::string out;
};

// Each command returns an exit code; errors propagate as exceptions and are
// mapped to codes by run_guarded.
int cmd_gen_data(const GlobalOptions& global, const GenDataArgs& args, std::ostream& log);
int cmd_train(const GlobalOptions& global, const TrainArgs& args, std::ostream& log);
int cmd_eval(const GlobalOptions& global, const EvalArgs& args, std::ostream& log);
int cmd_sample(const GlobalOptions& global, const SampleArgs& args, std::ostream& log);
int cmd_gradcheck(const GlobalOptions& global, const GradcheckArgs& args, std::ostream& log);
int cmd_grid(const GlobalOptions& global, const GridArgs& args, std::ostream& log);
int cmd_bench(const GlobalOptions& global, const BenchArgs& args, std::ostream& log);

/// Calls `fn`, mapping ConfigError, ShapeError, LimitError and
/// std::invalid_argument to exit 2 and other exceptions to exit 1.
template <typename Fn>
int run_guarded(Fn&& fn, std::ostream& err);

/// Sibling output path: "dir/eval.csv" + "covariance" -> "dir/eval.covariance.csv".
std::string sibling_path(const std::string& path, const std::string& tag);

}  // namespace iqp::cli

#include "commands_inl.hpp"
