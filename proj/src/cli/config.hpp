#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "iqp/bits.hpp"
#include "iqp/circuit.hpp"
#include "iqp/datasets.hpp"
#include "iqp/training.hpp"

namespace iqp::cli {

/// Invalid or unknown configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BandwidthSpec {
    enum class Mode { Sigmas, Weights, Median };
    Mode mode = Mode::Weights;
    /// Explicit sigmas or target Pauli weights.
    std::vector<double> values{2.0, 6.0};
    /// Median mode: weight that fixes sigma_1.
    double median_weight = 2.0;
};

struct ResolvedBandwidths {
    std::vector<double> sigmas;
    /// Human-readable record for checkpoint provenance.
    std::string description;
};

/// Median mode: sigma_1 from median_weight, sigma_3 = sqrt(median heuristic of
/// `data`), sigma_2 = sqrt((sigma_1^2 + sigma_3^2) / 2).
ResolvedBandwidths resolve_bandwidths(const BandwidthSpec& spec, std::size_t n, const BitMatrix* data);

struct GateSpecConfig {
    /// "two-local-all-to-all-plus-singles", "all-k-local", "graph-adjacent" or "explicit".
    std::string type = "two-local-all-to-all-plus-singles";
    std::size_t k = 2;
    std::string path;
    bool next_nearest = false;
};

struct ModelSection {
    std::size_t n_qubits = 0;
    GateSpecConfig gates;
    ModelKind kind = ModelKind::IQP;
};

struct TrainSection {
    std::size_t steps = 1000;
    double learning_rate = 0.01;
    std::size_t batch_a = 1000;
    std::size_t batch_z = 1000;
    std::size_t minibatch = 0;
    BandwidthSpec bandwidth;
    std::size_t convergence_window = 50;
    double convergence_rel_tol = 1e-3;
};

struct KgelSection {
    bool enabled = false;
    double sigma = 0.0;
    std::size_t witnesses = 10;
    double tolerance = 1e-6;
    std::size_t max_iterations = 500;
    /// Sum the right-hand side against exact probabilities (small n only).
    bool exact_rhs = false;
    std::size_t batch_a = 1000;
    std::size_t batch_z = 1000;
    /// Optional file of one integer label per test row.
    std::string labels;
};

struct EvalSection {
    /// Unset: reuse the training bandwidths.
    std::optional<BandwidthSpec> bandwidth;
    std::size_t repetitions = 10;
    std::size_t batch_a = 1000;
    std::size_t batch_z = 1000;
    bool covariance = true;
    std::size_t covariance_z = 1000;
    bool log_likelihood = true;
    KgelSection kgel;
};

struct DataSection {
    std::size_t count = 5000;
    double flip_prob = 0.05;
    std::string patterns;
    std::size_t side = 4;
    double temperature = 3.0;
    double coupling_low = 0.0;
    double coupling_high = 2.0;
    std::size_t nodes = 1000;
    std::size_t connectivity = 2;
    double bias_scale = 0.1;
    double coupling = 1.0;
    McmcConfig mcmc;
    /// 0 writes a single file; otherwise a seeded train/test split.
    double test_fraction = 0.0;
};

struct GridSection {
    std::vector<double> learning_rate;
    std::vector<double> scale_two_qubit;
    std::vector<double> scale_other;
    double validation_fraction = 0.2;
    /// 0 keeps train.steps for the final run.
    std::size_t final_steps = 0;
    bool parallel = false;
};

struct BenchSection {
    std::vector<std::size_t> n{125, 250, 500, 1000};
    std::size_t batch_a = 1000;
    std::size_t batch_z = 1000;
    double weight = 2.0;
    std::size_t data_rows = 1000;
    std::string gates = "two-local-all-to-all-plus-singles";
    std::size_t repeats = 1;
};

struct GradcheckSection {
    std::size_t batch_a = 64;
    std::size_t batch_z = 64;
    double h = 1e-5;
    double threshold = 1e-4;
    double bitflip_threshold = 1e-6;
    /// Std of the seeded perturbation added to the initialisation.
    double noise = 0.3;
    std::size_t max_rows = 200;
};

struct RunConfig {
    ModelSection model;
    InitConfig init;
    TrainSection train;
    EvalSection eval;
    DataSection data;
    GridSection grid;
    BenchSection bench;
    GradcheckSection gradcheck;
    std::uint64_t seed = 0;
    /// Directory of the config file, for resolving relative paths.
    std::string base_dir;
    /// FNV-1a of the config text, hex.
    std::string hash;
};

/// Parses JSON text. Unknown keys and out-of-range values throw ConfigError
/// naming the offending key.
RunConfig parse_config(const std::string& text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

std::string fnv1a_hex(const std::string& text);

/// Resolves `path` against base_dir unless it is absolute or empty.
std::string resolve_path(const std::string& base_dir, const std::string& path);

}  // namespace iqp::cli
