#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "iqp/bits.hpp"
#include "iqp/circuit.hpp"

namespace iqp {

/// Gaussian kernel bandwidth. sigma is the standard deviation of the
/// (unnormalised) Gaussian, not its variance.
class KernelConfig {
public:
    explicit KernelConfig(double sigma);
    double sigma() const noexcept { return sigma_; }

private:
    double sigma_;
};

class BandwidthSchedule {
public:
    explicit BandwidthSchedule(std::vector<double> sigmas);
    std::span<const double> sigmas() const noexcept { return sigmas_; }
    std::size_t size() const noexcept { return sigmas_.size(); }
    double operator[](std::size_t i) const { return sigmas_[i]; }

private:
    std::vector<double> sigmas_;
};

/// Product-Bernoulli law over observables a induced by a bandwidth.
class ObservableDistribution {
public:
    ObservableDistribution(std::size_t n, double p_sigma);
    static ObservableDistribution from_sigma(std::size_t n, double sigma);
    std::size_t n() const noexcept { return n_; }
    double p() const noexcept { return p_; }

private:
    std::size_t n_;
    double p_;
};

struct MmdEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// exp(-hamming(x, y) / (2 sigma^2)).
double gaussian_kernel(BitRow x, BitRow y, const KernelConfig& cfg);

/// Median over unordered pairs i < j of the Euclidean distance sqrt(hamming).
/// Even pair counts average the two central order statistics.
double median_heuristic(const BitMatrix& data);

/// p_sigma = (1 - exp(-1 / (2 sigma^2))) / 2.
double bernoulli_p(double sigma);

/// Bandwidth whose observable law has mean Pauli weight `weight` on n bits.
double sigma_for_weight(std::size_t n, double weight);

BitMatrix sample_observables(const ObservableDistribution& dist, std::size_t count, std::uint64_t seed);

struct SampleMmdOptions {
    /// Above |X| + |Y| > row_cap the estimate averages `batches` seeded
    /// subsamples of row_cap / 2 rows per side.
    std::size_t row_cap = 20000;
    std::size_t batches = 8;
    std::uint64_t seed = 0;
};

/// Three-term unbiased estimator from samples of both distributions
/// (diagonal pairs excluded from the within-set sums).
MmdEstimate mmd2_samples(const BitMatrix& x, const BitMatrix& y, const KernelConfig& cfg,
                         const SampleMmdOptions& options = {});

/// Unbiased MMD^2 estimate between data X and the circuit, from observables A
/// (drawn from P_sigma) and uniform z rows Z. std_error is the standard error
/// of the per-observable terms. For Bitflip the exact expectation replaces
/// the z average and Z is not read.
MmdEstimate mmd2_unbiased(const GateSet& gates, const ParamVector& params, const BitMatrix& x, const BitMatrix& a,
                          const BitMatrix& z, ModelKind kind);

struct BatchSizes {
    std::size_t a = 1000;
    std::size_t z = 1000;
};

/// One draw of the random batches behind a multi-bandwidth loss: a fresh
/// observable batch per bandwidth and one uniform z batch shared by all.
struct LossBatches {
    std::vector<BitMatrix> observables;
    BitMatrix z;
};

/// A_i uses derive_seed(seed, Observables, bit pattern of sigma_i), so equal
/// bandwidths share a batch; Z uses derive_seed(seed, ZSamples).
LossBatches draw_loss_batches(std::size_t n, const BandwidthSchedule& schedule, const BatchSizes& sizes,
                              std::uint64_t seed);

/// Mean of mmd2_unbiased over the schedule, on batches from draw_loss_batches.
double multi_bandwidth_loss(const GateSet& gates, const ParamVector& params, const BitMatrix& x,
                            const BandwidthSchedule& schedule, const BatchSizes& sizes, std::uint64_t seed,
                            ModelKind kind);

/// Exact MMD^2 between two fully enumerated distributions over n bits
/// (vectors of length 2^n), through the kernel double sum.
double mmd2_exact_kernel(std::span<const double> p, std::span<const double> q, std::size_t n, double sigma);

/// Same quantity as the P_sigma-weighted mixture of squared differences of
/// <Z_a> over all 2^n observables.
double mmd2_exact_mixture(std::span<const double> p, std::span<const double> q, std::size_t n, double sigma);

}  // namespace iqp
