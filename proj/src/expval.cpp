#include "iqp/expval.hpp"

#include <cmath>

#include "engine.hpp"
#include "iqp/errors.hpp"
#include "iqp/rng.hpp"

namespace iqp {

std::vector<ExpvalEstimate> expval_estimate(const GateSet& gates, const ParamVector& params,
                                            const BitMatrix& observables, const BitMatrix& z_samples,
                                            ModelKind kind) {
    check_bound(gates, params);
    detail::require_width(observables, gates.n_qubits(), "observables");
    std::vector<ExpvalEstimate> out(observables.rows());
    if (kind == ModelKind::Bitflip) {
        const auto exact = expval_bitflip(gates, params, observables);
        for (std::size_t i = 0; i < exact.size(); ++i) out[i] = {exact[i], 0.0, 0};
        return out;
    }
    detail::require_width(z_samples, gates.n_qubits(), "z_samples");
    if (z_samples.empty()) throw ShapeError("z_samples must be nonempty");

    const detail::PreparedZ z(z_samples);
    const auto n = static_cast<double>(z.count);
    const auto rows = static_cast<std::ptrdiff_t>(observables.rows());
#pragma omp parallel
    {
        detail::ObservableWorker worker(gates, params, &z, kind);
#pragma omp for schedule(dynamic, 4)
        for (std::ptrdiff_t i = 0; i < rows; ++i) {
            const auto bits = set_bits(observables.row(static_cast<std::size_t>(i)));
            worker.evaluate(bits, false);
            ExpvalEstimate& e = out[static_cast<std::size_t>(i)];
            e.value = worker.sum_f / n;
            e.n_samples = z.count;
            if (z.count > 1) {
                const double var = worker.sq_dev / (n - 1.0);
                e.std_error = std::sqrt(var / n);
            }
        }
    }
    return out;
}

std::vector<double> expval_bitflip(const GateSet& gates, const ParamVector& params, const BitMatrix& observables) {
    check_bound(gates, params);
    detail::require_width(observables, gates.n_qubits(), "observables");
    std::vector<double> out(observables.rows());
    detail::ObservableWorker worker(gates, params, nullptr, ModelKind::Bitflip);
    for (std::size_t i = 0; i < observables.rows(); ++i)
        out[i] = worker.evaluate_bitflip(set_bits(observables.row(i)), false);
    return out;
}

BitMatrix sample_uniform(std::size_t n, std::size_t count, std::uint64_t seed) {
    BitMatrix out(count, n);
    Rng rng = make_rng(seed);
    const std::size_t tail = n % kWordBits;
    const Word tail_mask = tail == 0 ? ~Word{0} : (Word{1} << tail) - 1;
    for (std::size_t i = 0; i < count; ++i) {
        auto row = out.mutable_row(i);
        for (auto& w : row) w = rng();
        row.back() &= tail_mask;
    }
    return out;
}

}  // namespace iqp
