#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "iqp/bits.hpp"
#include "iqp/circuit.hpp"
#include "iqp/exact.hpp"
#include "iqp/mmd.hpp"

namespace iqp {

struct TestMmd {
    double sigma = 0.0;
    double mean = 0.0;
    /// Sample standard deviation across repetitions.
    double std = 0.0;
};

/// Per-sigma mean and spread of `repetitions` independent mmd2_unbiased
/// evaluations against the test set. Repetition r draws its observables and z
/// rows from derive_seed(seed, Repetition, r). Bitflip models are evaluated
/// from samples instead: each repetition draws |test| fresh model rows and
/// applies mmd2_samples.
std::vector<TestMmd> test_mmd(const GateSet& gates, const ParamVector& params, ModelKind kind,
                              const BitMatrix& test_set, const BandwidthSchedule& schedule, std::size_t repetitions,
                              const BatchSizes& sizes, std::uint64_t seed);

/// Same statistic for a model given only through samples: the sample rows are
/// split into `repetitions` disjoint batches and each is compared with the
/// test set by mmd2_samples.
std::vector<TestMmd> test_mmd_samples(const BitMatrix& model_samples, const BitMatrix& test_set,
                                      const BandwidthSchedule& schedule, std::size_t repetitions,
                                      std::uint64_t seed);

struct KgelRhs {
    std::vector<double> value;
    /// Zero in exact mode.
    std::vector<double> std_error;
};

/// E_{y ~ q}[k(y, t)] for each witness row t. Estimated mode averages
/// (-1)^{a.t} <Z_a> over `sizes.a` observables from P_sigma, with <Z_a> from
/// expval_estimate on `sizes.z` uniform z rows (closed form for Bitflip).
KgelRhs kgel_rhs(const GateSet& gates, const ParamVector& params, ModelKind kind, const BitMatrix& witnesses,
                 double sigma, const BatchSizes& sizes, std::uint64_t seed);

/// Exact mode: sums k(y, t) against exact_probabilities.
KgelRhs kgel_rhs_exact(const GateSet& gates, const ParamVector& params, ModelKind kind, const BitMatrix& witnesses,
                       double sigma, std::size_t exact_limit = kDefaultExactLimit);

struct KgelProblem {
    BitMatrix test_set;
    BitMatrix witnesses;
    double sigma = 1.0;
    std::vector<double> rhs;
    double tolerance = 1e-6;
    std::size_t max_iterations = 500;
};

struct KgelSolution {
    std::vector<double> pi;
    double kl_value = 0.0;
    /// Largest |sum_i pi_i k(x_i, t_w) - rhs_w|.
    double residual = 0.0;
    bool feasible = false;
    std::size_t iterations = 0;
    std::vector<double> lambda;
};

/// Minimises KL(pi || uniform) subject to the witness moment constraints via
/// the dual: pi_i proportional to exp(lambda . k_i), lambda from damped Newton
/// with a gradient-step fallback. `feasible` is false when the residual does
/// not reach the tolerance; the best iterate is still returned.
KgelSolution kgel_solve(const KgelProblem& problem);

/// n x n row-major matrix of spin covariances <Z_i Z_j> - <Z_i><Z_j>.
struct CovarianceMatrix {
    std::size_t n = 0;
    std::vector<double> values;
    /// Standard errors of the entries; zero where computed exactly.
    std::vector<double> std_error;

    double operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }
};

/// Model covariance. Bitflip is exact; IQP kinds use exact probabilities when
/// n <= exact_limit and otherwise expval_estimate on `z_batch` uniform z rows.
CovarianceMatrix covariance_matrix(const GateSet& gates, const ParamVector& params, ModelKind kind,
                                   std::size_t z_batch, std::uint64_t seed,
                                   std::size_t exact_limit = kDefaultExactLimit);

/// Empirical covariance of a sample set in the same convention.
CovarianceMatrix covariance_matrix(const BitMatrix& samples);

struct LogLikelihood {
    /// Sum over test rows of ln q(x); -infinity when any row is below the floor.
    double value = 0.0;
    bool zero_probability = false;
    std::size_t zero_rows = 0;
};

LogLikelihood log_likelihood(const GateSet& gates, const ParamVector& params, ModelKind kind,
                             const BitMatrix& test_set, double floor = 1e-300,
                             std::size_t exact_limit = kDefaultExactLimit);

/// Sum of pi over rows sharing a label; labels are arbitrary integers and
/// the result is ordered by ascending label.
struct LabelMass {
    long long label = 0;
    double mass = 0.0;
};
std::vector<LabelMass> bin_pi_by_label(std::span<const double> pi, std::span<const long long> labels);

}  // namespace iqp
