#pragma once

// Shared inner loop of the expectation, MMD and gradient estimators.

#include <cstdint>
#include <span>
#include <vector>

#include "iqp/bits.hpp"
#include "iqp/circuit.hpp"

namespace iqp::detail {

/// z rows handled per pass; 16 words of parity bits per active gate.
inline constexpr std::size_t kZChunk = 1024;
inline constexpr std::size_t kChunkWords = kZChunk / kWordBits;

/// A uniform z batch in transposed form plus the parity of each |z|.
struct PreparedZ {
    explicit PreparedZ(const BitMatrix& z);

    BitColumns columns;
    std::vector<std::uint8_t> odd_weight;
    std::size_t count = 0;
};

/// Per-thread scratch that evaluates f(a, z, theta) over a whole z batch for
/// one observable a:
///   f_j = w_j * cos(phi_j),  phi_j = sum_{l in S_a} 2 theta_l (-1)^{g_l . z_j}
/// where S_a are the gates anticommuting with Z_a and w_j is 1 for the plain
/// IQP model or 1/2 + (-1)^{|a|}/2 + (-1)^{|z_j|} for the symmetrised one.
/// With gradients requested it also returns, per active gate l,
///   U_l = sum_j s_lj d_j,  V_l = sum_j s_lj f_j d_j,  d_j = w_j sin(phi_j),
/// from which d f_j / d theta_l = -2 s_lj d_j gives every chain-rule term.
class ObservableWorker {
public:
    ObservableWorker(const GateSet& gates, const ParamVector& params, const PreparedZ* z, ModelKind kind);

    /// Fills active(), sum_f, sum_f2, sq_dev and (if want_grad) u, v.
    void evaluate(std::span<const std::uint32_t> observable_bits, bool want_grad);

    /// Bitflip closed form: product of cos(2 theta_l) over the active set.
    /// If want_grad, fills u with d(product)/d theta_l for each active gate.
    double evaluate_bitflip(std::span<const std::uint32_t> observable_bits, bool want_grad);

    const std::vector<std::uint32_t>& active() const noexcept { return active_; }

    double sum_f = 0.0;
    double sum_f2 = 0.0;
    /// Sum of squared deviations from the mean of f (Welford).
    double sq_dev = 0.0;
    std::vector<double> u;
    std::vector<double> v;

private:
    const GateSet& gates_;
    const ParamVector& params_;
    const PreparedZ* z_;
    ModelKind kind_;
    std::vector<std::uint8_t> scratch_;
    std::vector<std::uint32_t> active_;
    std::vector<Word> parity_;
    std::vector<double> phi_;
    std::vector<double> d_;
    std::vector<double> fd_;
    std::vector<double> prefix_;
};

/// Sum over rows x of (-1)^{x . a}, for a given as its set bits.
inline double parity_sum(const BitColumns& x, std::span<const std::uint32_t> observable_bits,
                         std::vector<Word>& scratch) {
    const std::size_t odd = x.count_odd(observable_bits, scratch);
    return static_cast<double>(x.rows()) - 2.0 * static_cast<double>(odd);
}

void require_width(const BitMatrix& m, std::size_t n, const char* what);

}  // namespace iqp::detail
