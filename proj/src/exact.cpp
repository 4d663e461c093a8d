#include "iqp/exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>

#include "engine.hpp"
#include "iqp/errors.hpp"
#include "iqp/rng.hpp"

namespace iqp {

namespace {

void check_limit(const GateSet& gates, std::size_t exact_limit) {
    if (gates.n_qubits() > exact_limit || gates.n_qubits() > 62)
        throw LimitError("exact simulation of " + std::to_string(gates.n_qubits()) +
                         " qubits exceeds the exact limit of " + std::to_string(exact_limit));
}

template <typename T>
void fwht(std::span<T> values) {
    const std::size_t size = values.size();
    for (std::size_t h = 1; h < size; h <<= 1) {
        for (std::size_t i = 0; i < size; i += h << 1) {
            for (std::size_t j = i; j < i + h; ++j) {
                const T a = values[j];
                const T b = values[j + h];
                values[j] = a + b;
                values[j + h] = a - b;
            }
        }
    }
}

std::vector<double> bitflip_probabilities(const GateSet& gates, const ParamVector& params) {
    const std::size_t size = std::size_t{1} << gates.n_qubits();
    std::vector<double> p(size, 0.0);
    std::vector<double> next(size);
    p[0] = 1.0;
    for (std::size_t j = 0; j < gates.size(); ++j) {
        const std::uint64_t g = gates.small_mask(j);
        const double c = std::cos(params[j]);
        const double keep = c * c;
        const double flip = 1.0 - keep;
        for (std::size_t x = 0; x < size; ++x) next[x] = keep * p[x] + flip * p[x ^ g];
        p.swap(next);
    }
    return p;
}

}  // namespace

void walsh_hadamard(std::span<double> values) {
    if (!std::has_single_bit(values.size())) throw ShapeError("Walsh-Hadamard size must be a power of two");
    fwht(values);
}

PhaseTable exact_phase_table(const GateSet& gates, const ParamVector& params, std::size_t exact_limit) {
    check_bound(gates, params);
    check_limit(gates, exact_limit);
    PhaseTable table;
    table.n = gates.n_qubits();
    table.phases.assign(std::size_t{1} << table.n, 0.0);
    for (std::size_t j = 0; j < gates.size(); ++j) table.phases[gates.small_mask(j)] += params[j];
    fwht(std::span<double>(table.phases));
    return table;
}

std::vector<double> exact_probabilities(const GateSet& gates, const ParamVector& params, ModelKind kind,
                                        std::size_t exact_limit) {
    check_bound(gates, params);
    check_limit(gates, exact_limit);
    if (kind == ModelKind::Bitflip) return bitflip_probabilities(gates, params);

    const PhaseTable table = exact_phase_table(gates, params, exact_limit);
    const std::size_t size = table.phases.size();
    // In the Hadamard-conjugated picture the input is |+>^n for IQP and the
    // even-weight superposition sqrt(2) 2^{-n/2} sum_{|z| even} |z> for the
    // GHZ-initialised model; amplitude(x) = 2^{-n/2} sum_z (-1)^{x.z} lambda_z psi_z.
    std::vector<std::complex<double>> amp(size);
    const bool symmetric = kind == ModelKind::IQPSymmetrized;
    const double scale = symmetric ? std::sqrt(2.0) : 1.0;
    for (std::size_t z = 0; z < size; ++z) {
        if (symmetric && (std::popcount(z) & 1)) continue;
        amp[z] = std::polar(scale, table.phases[z]);
    }
    fwht(std::span<std::complex<double>>(amp));
    const double norm = 1.0 / static_cast<double>(size);
    std::vector<double> probs(size);
    for (std::size_t x = 0; x < size; ++x) probs[x] = std::norm(amp[x] * norm);
    return probs;
}

double exact_expval(const GateSet& gates, const ParamVector& params, std::uint64_t observable, ModelKind kind,
                    std::size_t exact_limit) {
    check_bound(gates, params);
    check_limit(gates, exact_limit);
    if (gates.n_qubits() < 64 && (observable >> gates.n_qubits()) != 0)
        throw ShapeError("observable has bits beyond n_qubits");
    if (kind == ModelKind::Bitflip) {
        double prod = 1.0;
        for (std::size_t j = 0; j < gates.size(); ++j)
            if (std::popcount(gates.small_mask(j) & observable) & 1) prod *= std::cos(2.0 * params[j]);
        return prod;
    }
    const PhaseTable table = exact_phase_table(gates, params, exact_limit);
    const double base = (std::popcount(observable) % 2 == 0) ? 1.0 : 0.0;
    double acc = 0.0;
    for (std::size_t z = 0; z < table.phases.size(); ++z) {
        const double term = std::cos(table.phases[z] - table.phases[z ^ observable]);
        if (kind == ModelKind::IQPSymmetrized) {
            acc += (base + ((std::popcount(z) & 1) ? -1.0 : 1.0)) * term;
        } else {
            acc += term;
        }
    }
    return acc / static_cast<double>(table.phases.size());
}

std::vector<double> exact_expvals(const GateSet& gates, const ParamVector& params, const BitMatrix& observables,
                                  ModelKind kind, std::size_t exact_limit) {
    detail::require_width(observables, gates.n_qubits(), "observables");
    check_limit(gates, exact_limit);
    std::vector<double> out(observables.rows());
    if (kind == ModelKind::Bitflip) {
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = exact_expval(gates, params, row_mask(observables.row(i)), kind, exact_limit);
        return out;
    }
    // Reuse one phase table across the batch.
    const PhaseTable table = exact_phase_table(gates, params, exact_limit);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const std::uint64_t a = row_mask(observables.row(i));
        const double base = (std::popcount(a) % 2 == 0) ? 1.0 : 0.0;
        double acc = 0.0;
        for (std::size_t z = 0; z < table.phases.size(); ++z) {
            const double term = std::cos(table.phases[z] - table.phases[z ^ a]);
            acc += kind == ModelKind::IQPSymmetrized ? (base + ((std::popcount(z) & 1) ? -1.0 : 1.0)) * term : term;
        }
        out[i] = acc / static_cast<double>(table.phases.size());
    }
    return out;
}

BitMatrix sample_bitflip(const GateSet& gates, const ParamVector& params, std::size_t count, std::uint64_t seed) {
    check_bound(gates, params);
    BitMatrix out(count, gates.n_qubits());
    std::vector<double> flip(gates.size());
    for (std::size_t j = 0; j < gates.size(); ++j) {
        const double s = std::sin(params[j]);
        flip[j] = s * s;
    }
    Rng rng = make_rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t j = 0; j < gates.size(); ++j) {
            if (!bernoulli(rng, flip[j])) continue;
            for (auto q : gates.generator(j)) out.flip(i, q);
        }
    }
    return out;
}

BitMatrix sample_distribution(std::span<const double> probabilities, std::size_t n, std::size_t count,
                              std::uint64_t seed) {
    if (probabilities.size() != (std::size_t{1} << n)) throw ShapeError("probability vector length must be 2^n");
    std::vector<double> cdf(probabilities.size());
    std::partial_sum(probabilities.begin(), probabilities.end(), cdf.begin());
    const double total = cdf.back();
    BitMatrix out(count, n);
    Rng rng = make_rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        const double u = uniform01(rng) * total;
        // upper_bound lands on an entry where the cdf strictly increases.
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        std::size_t x = static_cast<std::size_t>(it - cdf.begin());
        if (x >= cdf.size()) {
            x = cdf.size() - 1;
            while (probabilities[x] <= 0.0 && x > 0) --x;
        }
        out.mutable_row(i)[0] = static_cast<Word>(x);
    }
    return out;
}

BitMatrix sample_exact(const GateSet& gates, const ParamVector& params, ModelKind kind, std::size_t count,
                       std::uint64_t seed, std::size_t exact_limit) {
    const auto probs = exact_probabilities(gates, params, kind, exact_limit);
    return sample_distribution(probs, gates.n_qubits(), count, seed);
}

}  // namespace iqp
