#include "iqp/mmd.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "engine.hpp"
#include "iqp/errors.hpp"
#include "iqp/exact.hpp"
#include "iqp/expval.hpp"
#include "iqp/rng.hpp"
#include "mmd_core.hpp"

namespace iqp {

KernelConfig::KernelConfig(double sigma) : sigma_(sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw std::invalid_argument("kernel bandwidth must be positive and finite, got " + std::to_string(sigma));
}

BandwidthSchedule::BandwidthSchedule(std::vector<double> sigmas) : sigmas_(std::move(sigmas)) {
    if (sigmas_.empty()) throw std::invalid_argument("bandwidth schedule must be nonempty");
    for (double s : sigmas_) KernelConfig{s};
}

ObservableDistribution::ObservableDistribution(std::size_t n, double p_sigma) : n_(n), p_(p_sigma) {
    if (n == 0) throw ShapeError("observable distribution needs n > 0");
    if (!(p_sigma >= 0.0 && p_sigma < 0.5)) throw std::invalid_argument("p_sigma must lie in [0, 1/2)");
}

ObservableDistribution ObservableDistribution::from_sigma(std::size_t n, double sigma) {
    return {n, bernoulli_p(sigma)};
}

double gaussian_kernel(BitRow x, BitRow y, const KernelConfig& cfg) {
    if (x.size() != y.size()) throw ShapeError("kernel arguments differ in width");
    const double d = static_cast<double>(hamming_distance(x, y));
    return std::exp(-d / (2.0 * cfg.sigma() * cfg.sigma()));
}

namespace {

// counts[d] = number of unordered pairs (i < j) within `m` at Hamming distance d.
std::vector<std::uint64_t> within_distance_counts(const BitMatrix& m) {
    std::vector<std::uint64_t> counts(m.width() + 1, 0);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i + 1; j < m.rows(); ++j) ++counts[hamming_distance(m.row(i), m.row(j))];
    return counts;
}

std::vector<std::uint64_t> cross_distance_counts(const BitMatrix& a, const BitMatrix& b) {
    std::vector<std::uint64_t> counts(a.width() + 1, 0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.rows(); ++j) ++counts[hamming_distance(a.row(i), b.row(j))];
    return counts;
}

double kernel_sum(const std::vector<std::uint64_t>& counts, const std::vector<double>& table) {
    double acc = 0.0;
    for (std::size_t d = 0; d < counts.size(); ++d) acc += static_cast<double>(counts[d]) * table[d];
    return acc;
}

std::vector<double> kernel_table(std::size_t n, double sigma) {
    std::vector<double> table(n + 1);
    for (std::size_t d = 0; d <= n; ++d) table[d] = std::exp(-static_cast<double>(d) / (2.0 * sigma * sigma));
    return table;
}

double mmd2_samples_exact(const BitMatrix& x, const BitMatrix& y, double sigma) {
    const auto table = kernel_table(x.width(), sigma);
    const double nx = static_cast<double>(x.rows());
    const double ny = static_cast<double>(y.rows());
    const double kxx = 2.0 * kernel_sum(within_distance_counts(x), table);
    const double kyy = 2.0 * kernel_sum(within_distance_counts(y), table);
    const double kxy = kernel_sum(cross_distance_counts(x, y), table);
    return kxx / (nx * (nx - 1.0)) - 2.0 * kxy / (nx * ny) + kyy / (ny * (ny - 1.0));
}

BitMatrix subsample(const BitMatrix& m, std::size_t count, Rng& rng) {
    std::vector<std::size_t> idx(m.rows());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i) std::swap(idx[i], idx[i + uniform_index(rng, m.rows() - i)]);
    idx.resize(count);
    return m.select_rows(idx);
}

}  // namespace

double median_heuristic(const BitMatrix& data) {
    if (data.rows() < 2) throw ShapeError("median heuristic needs at least 2 rows");
    const auto counts = within_distance_counts(data);
    const std::uint64_t pairs = static_cast<std::uint64_t>(data.rows()) * (data.rows() - 1) / 2;
    // Distance at 0-based rank r among the sorted pair distances.
    auto at_rank = [&](std::uint64_t r) {
        std::uint64_t seen = 0;
        for (std::size_t d = 0; d < counts.size(); ++d) {
            seen += counts[d];
            if (r < seen) return std::sqrt(static_cast<double>(d));
        }
        return std::sqrt(static_cast<double>(counts.size() - 1));
    };
    if (pairs % 2 == 1) return at_rank(pairs / 2);
    return (at_rank(pairs / 2 - 1) + at_rank(pairs / 2)) / 2.0;
}

double bernoulli_p(double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("bandwidth must be positive, got " + std::to_string(sigma));
    return -std::expm1(-1.0 / (2.0 * sigma * sigma)) / 2.0;
}

double sigma_for_weight(std::size_t n, double weight) {
    const double nd = static_cast<double>(n);
    if (!(weight > 0.0) || !(weight < nd / 2.0))
        throw std::invalid_argument("target Pauli weight " + std::to_string(weight) + " must lie in (0, n/2) for n = " +
                                    std::to_string(n));
    return std::sqrt(1.0 / (-2.0 * std::log1p(-2.0 * weight / nd)));
}

BitMatrix sample_observables(const ObservableDistribution& dist, std::size_t count, std::uint64_t seed) {
    BitMatrix out(count, dist.n());
    Rng rng = make_rng(seed);
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t b = 0; b < dist.n(); ++b)
            if (bernoulli(rng, dist.p())) out.set(i, b, true);
    return out;
}

MmdEstimate mmd2_samples(const BitMatrix& x, const BitMatrix& y, const KernelConfig& cfg,
                         const SampleMmdOptions& options) {
    if (x.width() != y.width()) throw ShapeError("sample sets differ in width");
    if (x.rows() < 2 || y.rows() < 2) throw ShapeError("sample MMD needs at least 2 rows per set");
    if (x.rows() + y.rows() <= options.row_cap) return {mmd2_samples_exact(x, y, cfg.sigma()), 0.0};

    const std::size_t half = std::max<std::size_t>(2, options.row_cap / 2);
    const std::size_t batches = std::max<std::size_t>(2, options.batches);
    std::vector<double> values;
    for (std::size_t b = 0; b < batches; ++b) {
        Rng rng = make_rng(options.seed, Stream::Subsample, b);
        const BitMatrix xs = subsample(x, std::min(half, x.rows()), rng);
        const BitMatrix ys = subsample(y, std::min(half, y.rows()), rng);
        values.push_back(mmd2_samples_exact(xs, ys, cfg.sigma()));
    }
    const double m = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / m;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (m - 1.0) / m)};
}

MmdEstimate mmd2_unbiased(const GateSet& gates, const ParamVector& params, const BitMatrix& x, const BitMatrix& a,
                          const BitMatrix& z, ModelKind kind) {
    detail::check_mmd_inputs(gates, params, x, a, z, kind);
    const BitColumns xc(x);
    if (kind == ModelKind::Bitflip) {
        const auto r = detail::mmd_estimate(gates, params, xc, a, nullptr, kind, false);
        return {r.value, r.std_error};
    }
    const detail::PreparedZ zp(z);
    const auto r = detail::mmd_estimate(gates, params, xc, a, &zp, kind, false);
    return {r.value, r.std_error};
}

LossBatches draw_loss_batches(std::size_t n, const BandwidthSchedule& schedule, const BatchSizes& sizes,
                              std::uint64_t seed) {
    LossBatches batches;
    for (std::size_t i = 0; i < schedule.size(); ++i)
        batches.observables.push_back(sample_observables(ObservableDistribution::from_sigma(n, schedule[i]), sizes.a,
                                                         derive_seed(seed, Stream::Observables, std::bit_cast<std::uint64_t>(schedule[i]))));
    batches.z = sample_uniform(n, sizes.z, derive_seed(seed, Stream::ZSamples));
    return batches;
}

double multi_bandwidth_loss(const GateSet& gates, const ParamVector& params, const BitMatrix& x,
                            const BandwidthSchedule& schedule, const BatchSizes& sizes, std::uint64_t seed,
                            ModelKind kind) {
    const LossBatches batches = draw_loss_batches(gates.n_qubits(), schedule, sizes, seed);
    double total = 0.0;
    for (const auto& a : batches.observables) total += mmd2_unbiased(gates, params, x, a, batches.z, kind).value;
    return total / static_cast<double>(schedule.size());
}

double mmd2_exact_kernel(std::span<const double> p, std::span<const double> q, std::size_t n, double sigma) {
    const std::size_t size = std::size_t{1} << n;
    if (p.size() != size || q.size() != size) throw ShapeError("distribution length must be 2^n");
    const auto table = kernel_table(n, KernelConfig(sigma).sigma());
    double acc = 0.0;
    for (std::size_t x = 0; x < size; ++x) {
        const double rx = p[x] - q[x];
        if (rx == 0.0) continue;
        for (std::size_t y = 0; y < size; ++y)
            acc += rx * (p[y] - q[y]) * table[static_cast<std::size_t>(std::popcount(x ^ y))];
    }
    return acc;
}

double mmd2_exact_mixture(std::span<const double> p, std::span<const double> q, std::size_t n, double sigma) {
    const std::size_t size = std::size_t{1} << n;
    if (p.size() != size || q.size() != size) throw ShapeError("distribution length must be 2^n");
    const double ps = bernoulli_p(sigma);
    // <Z_a>_p - <Z_a>_q for every a is the Walsh-Hadamard transform of p - q.
    std::vector<double> diff(size);
    for (std::size_t x = 0; x < size; ++x) diff[x] = p[x] - q[x];
    walsh_hadamard(diff);
    double acc = 0.0;
    for (std::size_t a = 0; a < size; ++a) {
        const int w = std::popcount(a);
        const double weight = std::pow(ps, w) * std::pow(1.0 - ps, static_cast<double>(n) - w);
        acc += weight * diff[a] * diff[a];
    }
    return acc;
}

}  // namespace iqp
