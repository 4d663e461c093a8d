#include "mmd_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "iqp/errors.hpp"

namespace iqp::detail {

namespace {

// Observables per deterministic reduction block.
constexpr std::size_t kBlock = 64;

struct PerObservable {
    double term = 0.0;
    std::vector<std::uint32_t> gates;
    std::vector<double> dterm;
};

}  // namespace

void check_mmd_inputs(const GateSet& gates, const ParamVector& params, const BitMatrix& x, const BitMatrix& a,
                      const BitMatrix& z, ModelKind kind) {
    check_bound(gates, params);
    require_width(x, gates.n_qubits(), "data");
    require_width(a, gates.n_qubits(), "observables");
    if (x.rows() < 2) throw ShapeError("MMD estimate needs at least 2 data rows");
    if (a.rows() < 1) throw ShapeError("MMD estimate needs at least 1 observable");
    if (kind != ModelKind::Bitflip) {
        require_width(z, gates.n_qubits(), "z_samples");
        if (z.rows() < 2) throw ShapeError("MMD estimate needs at least 2 z rows");
    }
}

MmdResult mmd_estimate(const GateSet& gates, const ParamVector& params, const BitColumns& x, const BitMatrix& a,
                       const PreparedZ* z, ModelKind kind, bool want_grad) {
    const double nx = static_cast<double>(x.rows());
    const double nz = z != nullptr ? static_cast<double>(z->count) : 0.0;
    const std::size_t n_obs = a.rows();
    MmdResult result;
    if (want_grad) result.grad.assign(gates.size(), 0.0);

    std::vector<PerObservable> block(kBlock);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t begin = 0; begin < n_obs; begin += kBlock) {
        const std::size_t len = std::min(kBlock, n_obs - begin);
#pragma omp parallel
        {
            ObservableWorker worker(gates, params, z, kind);
            std::vector<Word> xs;
#pragma omp for schedule(dynamic, 1)
            for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(len); ++k) {
                PerObservable& out = block[static_cast<std::size_t>(k)];
                const auto bits = set_bits(a.row(begin + static_cast<std::size_t>(k)));
                const double sx = parity_sum(x, bits, xs);
                const double data_term = (sx * sx - nx) / (nx * (nx - 1.0));
                if (kind == ModelKind::Bitflip) {
                    const double e = worker.evaluate_bitflip(bits, want_grad);
                    out.term = e * e - 2.0 * e * sx / nx + data_term;
                    if (want_grad) {
                        const double coeff = 2.0 * e - 2.0 * sx / nx;
                        out.gates = worker.active();
                        out.dterm.resize(out.gates.size());
                        for (std::size_t i = 0; i < out.gates.size(); ++i) out.dterm[i] = coeff * worker.u[i];
                    }
                } else {
                    worker.evaluate(bits, want_grad);
                    const double f = worker.sum_f;
                    const double model_term = (f * f - worker.sum_f2) / (nz * (nz - 1.0));
                    const double cross_term = 2.0 * f * sx / (nz * nx);
                    out.term = model_term - cross_term + data_term;
                    if (want_grad) {
                        // d term / d f_j = alpha (F - f_j) - beta, d f_j / d theta_l = -2 s_lj d_j.
                        const double alpha = 2.0 / (nz * (nz - 1.0));
                        const double beta = 2.0 * sx / (nz * nx);
                        const double cu = alpha * f - beta;
                        out.gates = worker.active();
                        out.dterm.resize(out.gates.size());
                        for (std::size_t i = 0; i < out.gates.size(); ++i)
                            out.dterm[i] = -2.0 * (cu * worker.u[i] - alpha * worker.v[i]);
                    }
                }
            }
        }
        for (std::size_t k = 0; k < len; ++k) {
            const PerObservable& o = block[k];
            sum += o.term;
            sum_sq += o.term * o.term;
            if (want_grad)
                for (std::size_t i = 0; i < o.gates.size(); ++i) result.grad[o.gates[i]] += o.dterm[i];
        }
    }
    const double m = static_cast<double>(n_obs);
    result.value = sum / m;
    if (n_obs > 1) {
        const double var = std::max(0.0, (sum_sq - sum * sum / m) / (m - 1.0));
        result.std_error = std::sqrt(var / m);
    }
    if (want_grad)
        for (double& g : result.grad) g /= m;
    return result;
}

}  // namespace iqp::detail
