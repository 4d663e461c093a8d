#pragma once

#include <vector>

#include "engine.hpp"
#include "iqp/bits.hpp"
#include "iqp/circuit.hpp"

namespace iqp::detail {

struct MmdResult {
    double value = 0.0;
    double std_error = 0.0;
    /// d value / d theta; empty unless requested.
    std::vector<double> grad;
};

/// Evaluates the unbiased MMD^2 estimator (and optionally its exact gradient)
/// for data columns X, observable rows A and a prepared z batch. The loss
/// arithmetic is identical whether or not the gradient is requested.
MmdResult mmd_estimate(const GateSet& gates, const ParamVector& params, const BitColumns& x, const BitMatrix& a,
                       const PreparedZ* z, ModelKind kind, bool want_grad);

void check_mmd_inputs(const GateSet& gates, const ParamVector& params, const BitMatrix& x, const BitMatrix& a,
                      const BitMatrix& z, ModelKind kind);

}  // namespace iqp::detail
