#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string_view>
#include <utility>
#include <vector>

#include "iqp/bits.hpp"
#include "iqp/circuit.hpp"
#include "iqp/mmd.hpp"

namespace iqp {

struct InitConfig {
    /// theta_{jk} = scale_two_qubit * cov(s_j, s_k) for two-qubit gates.
    double scale_two_qubit = 0.1;
    /// Standard deviation of the zero-mean normal used for larger gates.
    double scale_other = 0.0;
    /// Column means are clamped to [clamp_eps, 1 - clamp_eps] before arcsin.
    double clamp_eps = 1e-6;

    void validate() const;
};

struct TrainConfig {
    std::size_t max_steps = 1000;
    double learning_rate = 0.01;
    std::size_t batch_a = 1000;
    std::size_t batch_z = 1000;
    BandwidthSchedule schedule{{1.0}};
    std::size_t convergence_window = 50;
    /// 0 disables the convergence test.
    double convergence_rel_tol = 1e-3;
    /// Data rows per step; 0 uses the full training set.
    std::size_t minibatch = 0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct OptimizerState {
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    std::size_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static OptimizerState zeros(std::size_t n);
};

enum class StopReason { MaxSteps, Converged };
std::string_view to_string(StopReason reason);

struct LossPoint {
    std::size_t step = 0;
    double loss = 0.0;
};

struct TrainReport {
    ParamVector initial_params;
    ParamVector final_params;
    std::vector<LossPoint> loss_history;
    StopReason stop_reason = StopReason::MaxSteps;
};

struct LossGrad {
    double loss = 0.0;
    std::vector<double> grad;
};

/// arcsin(sqrt(mean)) on single-qubit gates, scaled spin covariance on
/// two-qubit gates, normal(0, scale_other) elsewhere.
ParamVector init_params_datadep(const GateSet& gates, const BitMatrix& data, const InitConfig& cfg,
                                std::uint64_t seed);

/// theta_j uniform on [0, 2 pi).
ParamVector init_params_uniform(std::size_t count, std::uint64_t seed);

/// mmd2_unbiased on the given batches together with its exact gradient.
LossGrad loss_and_grad(const GateSet& gates, const ParamVector& params, const BitMatrix& x, const BitMatrix& a,
                       const BitMatrix& z, ModelKind kind);

/// Mean of loss_and_grad over the observable batches of a multi-bandwidth
/// loss, with Z shared. The loss equals multi_bandwidth_loss on the same draw.
LossGrad loss_and_grad(const GateSet& gates, const ParamVector& params, const BitMatrix& x,
                       const LossBatches& batches, ModelKind kind);

/// Adam with bias correction. Returns the updated state and parameters.
std::pair<OptimizerState, ParamVector> adam_step(const OptimizerState& state, const ParamVector& params,
                                                 std::span<const double> grad, double lr);

/// Called after every step with (step, loss, params). Returning false stops training.
using TrainCallback = std::function<bool(std::size_t, double, const ParamVector&)>;

/// Data-dependent initialisation followed by Adam on fresh batches each step.
TrainReport train(const GateSet& gates, const BitMatrix& data, const InitConfig& init_cfg,
                  const TrainConfig& train_cfg, ModelKind kind, const TrainCallback& callback = {});

/// Same loop from explicit starting parameters.
TrainReport train_from(const GateSet& gates, const BitMatrix& data, ParamVector start, const TrainConfig& train_cfg,
                       ModelKind kind, const TrainCallback& callback = {});

struct Histogram {
    /// bins + 1 ascending edges; the last bin is closed on the right.
    std::vector<double> edges;
    std::vector<std::size_t> counts;
    std::vector<double> values;
};

/// Histogram of |dL/dtheta_j| for a single estimated gradient of the
/// multi-bandwidth loss at `params`.
Histogram gradient_magnitude_histogram(const GateSet& gates, const ParamVector& params, const BitMatrix& x,
                                       const BandwidthSchedule& schedule, const BatchSizes& sizes, std::size_t bins,
                                       std::uint64_t seed, ModelKind kind);

/// Histogram with equal-width bins spanning [min, max] of the values; a
/// degenerate range yields a single bin.
Histogram make_histogram(std::vector<double> values, std::size_t bins);

/// Largest relative error between the analytic gradient and central finite
/// differences of the same fixed-batch loss, over components whose magnitude
/// exceeds `floor`.
struct GradCheck {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
    std::size_t worst_index = 0;
};
GradCheck check_gradient(const GateSet& gates, const ParamVector& params, const BitMatrix& x, const BitMatrix& a,
                         const BitMatrix& z, ModelKind kind, double h = 1e-5, double floor = 1e-8);

}  // namespace iqp
