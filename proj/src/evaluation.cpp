#include "iqp/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "engine.hpp"
#include "iqp/errors.hpp"
#include "iqp/expval.hpp"
#include "iqp/rng.hpp"

namespace iqp {

namespace {

void mean_and_std(const std::vector<double>& xs, double& mean, double& sd) {
    const double m = static_cast<double>(xs.size());
    mean = std::accumulate(xs.begin(), xs.end(), 0.0) / m;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    sd = xs.size() > 1 ? std::sqrt(ss / (m - 1.0)) : 0.0;
}

// Observables Z_i (rows 0..n-1) followed by Z_i Z_j for i < j in row-major order.
BitMatrix covariance_observables(std::size_t n) {
    BitMatrix obs(n + n * (n - 1) / 2, n);
    std::size_t r = 0;
    for (std::size_t i = 0; i < n; ++i) obs.set(r++, i, true);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            obs.set(r, i, true);
            obs.set(r, j, true);
            ++r;
        }
    return obs;
}

CovarianceMatrix assemble_covariance(std::size_t n, const std::vector<double>& e, const std::vector<double>& se) {
    CovarianceMatrix c;
    c.n = n;
    c.values.assign(n * n, 0.0);
    c.std_error.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        c.values[i * n + i] = 1.0 - e[i] * e[i];
        c.std_error[i * n + i] = 2.0 * std::abs(e[i]) * se[i];
    }
    std::size_t r = n;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j, ++r) {
            const double v = e[r] - e[i] * e[j];
            const double s = se[r] + std::abs(e[j]) * se[i] + std::abs(e[i]) * se[j];
            c.values[i * n + j] = c.values[j * n + i] = v;
            c.std_error[i * n + j] = c.std_error[j * n + i] = s;
        }
    return c;
}

}  // namespace

std::vector<TestMmd> test_mmd(const GateSet& gates, const ParamVector& params, ModelKind kind,
                              const BitMatrix& test_set, const BandwidthSchedule& schedule, std::size_t repetitions,
                              const BatchSizes& sizes, std::uint64_t seed) {
    if (repetitions < 2) throw std::invalid_argument("test MMD needs at least 2 repetitions");
    detail::require_width(test_set, gates.n_qubits(), "test set");
    std::vector<std::vector<double>> values(schedule.size(), std::vector<double>(repetitions));
    for (std::size_t r = 0; r < repetitions; ++r) {
        const std::uint64_t rep_seed = derive_seed(seed, Stream::Repetition, r);
        if (kind == ModelKind::Bitflip) {
            const BitMatrix samples = sample_bitflip(gates, params, test_set.rows(),
                                                     derive_seed(rep_seed, Stream::ModelSamples));
            for (std::size_t s = 0; s < schedule.size(); ++s) {
                SampleMmdOptions opts;
                opts.seed = derive_seed(rep_seed, Stream::Subsample, s);
                values[s][r] = mmd2_samples(samples, test_set, KernelConfig(schedule[s]), opts).value;
            }
            continue;
        }
        const LossBatches batches = draw_loss_batches(gates.n_qubits(), schedule, sizes, rep_seed);
        for (std::size_t s = 0; s < schedule.size(); ++s)
            values[s][r] = mmd2_unbiased(gates, params, test_set, batches.observables[s], batches.z, kind).value;
    }
    std::vector<TestMmd> out(schedule.size());
    for (std::size_t s = 0; s < schedule.size(); ++s) {
        out[s].sigma = schedule[s];
        mean_and_std(values[s], out[s].mean, out[s].std);
    }
    return out;
}

std::vector<TestMmd> test_mmd_samples(const BitMatrix& model_samples, const BitMatrix& test_set,
                                      const BandwidthSchedule& schedule, std::size_t repetitions,
                                      std::uint64_t seed) {
    if (repetitions < 2) throw std::invalid_argument("test MMD needs at least 2 repetitions");
    if (model_samples.width() != test_set.width()) throw ShapeError("model samples and test set differ in width");
    const std::size_t per = model_samples.rows() / repetitions;
    if (per < 2) throw ShapeError("too few model samples for the requested repetitions");
    std::vector<std::vector<double>> values(schedule.size(), std::vector<double>(repetitions));
    std::vector<std::size_t> idx(per);
    for (std::size_t r = 0; r < repetitions; ++r) {
        std::iota(idx.begin(), idx.end(), r * per);
        const BitMatrix batch = model_samples.select_rows(idx);
        for (std::size_t s = 0; s < schedule.size(); ++s) {
            SampleMmdOptions opts;
            opts.seed = derive_seed(seed, Stream::Subsample, r * schedule.size() + s);
            values[s][r] = mmd2_samples(batch, test_set, KernelConfig(schedule[s]), opts).value;
        }
    }
    std::vector<TestMmd> out(schedule.size());
    for (std::size_t s = 0; s < schedule.size(); ++s) {
        out[s].sigma = schedule[s];
        mean_and_std(values[s], out[s].mean, out[s].std);
    }
    return out;
}

KgelRhs kgel_rhs(const GateSet& gates, const ParamVector& params, ModelKind kind, const BitMatrix& witnesses,
                 double sigma, const BatchSizes& sizes, std::uint64_t seed) {
    detail::require_width(witnesses, gates.n_qubits(), "witnesses");
    if (sizes.a < 2) throw std::invalid_argument("KGEL right-hand side needs at least 2 observables");
    const std::size_t n = gates.n_qubits();
    const BitMatrix a = sample_observables(ObservableDistribution::from_sigma(n, sigma), sizes.a,
                                           derive_seed(seed, Stream::Observables));
    std::vector<double> ev(a.rows());
    if (kind == ModelKind::Bitflip) {
        ev = expval_bitflip(gates, params, a);
    } else {
        const BitMatrix z = sample_uniform(n, sizes.z, derive_seed(seed, Stream::ZSamples));
        const auto est = expval_estimate(gates, params, a, z, kind);
        for (std::size_t i = 0; i < ev.size(); ++i) ev[i] = est[i].value;
    }
    KgelRhs out;
    out.value.resize(witnesses.rows());
    out.std_error.resize(witnesses.rows());
    const double m = static_cast<double>(a.rows());
    for (std::size_t w = 0; w < witnesses.rows(); ++w) {
        double sum = 0.0;
        double sum_sq = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) {
            const double t = and_parity(a.row(i), witnesses.row(w)) ? -ev[i] : ev[i];
            sum += t;
            sum_sq += t * t;
        }
        out.value[w] = sum / m;
        out.std_error[w] = std::sqrt(std::max(0.0, (sum_sq - sum * sum / m) / (m - 1.0)) / m);
    }
    return out;
}

KgelRhs kgel_rhs_exact(const GateSet& gates, const ParamVector& params, ModelKind kind, const BitMatrix& witnesses,
                       double sigma, std::size_t exact_limit) {
    detail::require_width(witnesses, gates.n_qubits(), "witnesses");
    const KernelConfig cfg(sigma);
    const auto probs = exact_probabilities(gates, params, kind, exact_limit);
    std::vector<double> table(gates.n_qubits() + 1);
    for (std::size_t d = 0; d < table.size(); ++d)
        table[d] = std::exp(-static_cast<double>(d) / (2.0 * cfg.sigma() * cfg.sigma()));
    KgelRhs out;
    out.value.assign(witnesses.rows(), 0.0);
    out.std_error.assign(witnesses.rows(), 0.0);
    for (std::size_t w = 0; w < witnesses.rows(); ++w) {
        const std::uint64_t t = row_mask(witnesses.row(w));
        double acc = 0.0;
        for (std::size_t y = 0; y < probs.size(); ++y) acc += probs[y] * table[std::popcount(y ^ t)];
        out.value[w] = acc;
    }
    return out;
}

CovarianceMatrix covariance_matrix(const GateSet& gates, const ParamVector& params, ModelKind kind,
                                   std::size_t z_batch, std::uint64_t seed, std::size_t exact_limit) {
    check_bound(gates, params);
    const std::size_t n = gates.n_qubits();
    const BitMatrix obs = covariance_observables(n);
    std::vector<double> e(obs.rows());
    std::vector<double> se(obs.rows(), 0.0);
    if (kind == ModelKind::Bitflip) {
        e = expval_bitflip(gates, params, obs);
    } else if (n <= exact_limit && n <= 62) {
        // <Z_a> for every a is the Walsh-Hadamard transform of the distribution.
        auto p = exact_probabilities(gates, params, kind, exact_limit);
        walsh_hadamard(p);
        for (std::size_t r = 0; r < obs.rows(); ++r) e[r] = p[row_mask(obs.row(r))];
    } else {
        if (z_batch < 2) throw std::invalid_argument("covariance estimate needs at least 2 z rows");
        const BitMatrix z = sample_uniform(n, z_batch, derive_seed(seed, Stream::ZSamples));
        const auto est = expval_estimate(gates, params, obs, z, kind);
        for (std::size_t r = 0; r < obs.rows(); ++r) {
            e[r] = est[r].value;
            se[r] = est[r].std_error;
        }
    }
    return assemble_covariance(n, e, se);
}

CovarianceMatrix covariance_matrix(const BitMatrix& samples) {
    if (samples.empty()) throw ShapeError("covariance of an empty sample set");
    const std::size_t n = samples.width();
    const double rows = static_cast<double>(samples.rows());
    const BitColumns cols(samples);
    std::vector<Word> scratch;
    const BitMatrix obs = covariance_observables(n);
    std::vector<double> e(obs.rows());
    std::vector<double> se(obs.rows());
    for (std::size_t r = 0; r < obs.rows(); ++r) {
        const auto bits = set_bits(obs.row(r));
        e[r] = (rows - 2.0 * static_cast<double>(cols.count_odd(bits, scratch))) / rows;
        se[r] = std::sqrt(std::max(0.0, 1.0 - e[r] * e[r]) / rows);
    }
    return assemble_covariance(n, e, se);
}

LogLikelihood log_likelihood(const GateSet& gates, const ParamVector& params, ModelKind kind,
                             const BitMatrix& test_set, double floor, std::size_t exact_limit) {
    detail::require_width(test_set, gates.n_qubits(), "test set");
    const auto probs = exact_probabilities(gates, params, kind, exact_limit);
    LogLikelihood out;
    double acc = 0.0;
    for (std::size_t i = 0; i < test_set.rows(); ++i) {
        const double p = probs[row_mask(test_set.row(i))];
        if (p < floor) {
            ++out.zero_rows;
            continue;
        }
        acc += std::log(p);
    }
    out.zero_probability = out.zero_rows > 0;
    out.value = out.zero_probability ? -std::numeric_limits<double>::infinity() : acc;
    return out;
}

std::vector<LabelMass> bin_pi_by_label(std::span<const double> pi, std::span<const long long> labels) {
    if (pi.size() != labels.size()) throw ShapeError("pi and labels differ in length");
    std::map<long long, double> bins;
    for (std::size_t i = 0; i < pi.size(); ++i) bins[labels[i]] += pi[i];
    std::vector<LabelMass> out;
    out.reserve(bins.size());
    for (const auto& [label, mass] : bins) out.push_back({label, mass});
    return out;
}

}  // namespace iqp
