#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "iqp/bits.hpp"
#include "iqp/circuit.hpp"

namespace iqp {

struct ExpvalEstimate {
    double value = 0.0;
    /// Sample standard deviation of the per-z terms over sqrt(n_samples).
    double std_error = 0.0;
    /// z rows averaged; 0 for closed-form (bitflip) values.
    std::size_t n_samples = 0;
};

/// Monte-Carlo estimates of <Z_a> for each observable row a, averaging
///   w(a, z) cos( sum_j theta_j (-1)^{g_j . z} (1 - (-1)^{g_j . a}) )
/// over the given z rows (w = 1 for IQP, the GHZ weight for IQPSymmetrized).
/// Unbiased when the z rows are i.i.d. uniform. For Bitflip the closed form is
/// returned and z_samples is not read.
std::vector<ExpvalEstimate> expval_estimate(const GateSet& gates, const ParamVector& params,
                                            const BitMatrix& observables, const BitMatrix& z_samples,
                                            ModelKind kind);

/// Exact <Z_a> of the stochastic bitflip circuit: the product of cos(2 theta_j)
/// over generators with odd overlap with a.
std::vector<double> expval_bitflip(const GateSet& gates, const ParamVector& params, const BitMatrix& observables);

/// `count` i.i.d. uniform bitstrings of width n.
BitMatrix sample_uniform(std::size_t n, std::size_t count, std::uint64_t seed);

}  // namespace iqp
