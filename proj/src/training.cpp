#include "iqp/training.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "engine.hpp"
#include "iqp/errors.hpp"
#include "iqp/rng.hpp"
#include "mmd_core.hpp"

namespace iqp {

void InitConfig::validate() const {
    if (!(scale_two_qubit >= 0.0) || !std::isfinite(scale_two_qubit))
        throw std::invalid_argument("scale_two_qubit must be finite and nonnegative");
    if (!(scale_other >= 0.0) || !std::isfinite(scale_other))
        throw std::invalid_argument("scale_other must be finite and nonnegative");
    if (!(clamp_eps > 0.0 && clamp_eps < 0.5)) throw std::invalid_argument("clamp_eps must lie in (0, 1/2)");
}

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        throw std::invalid_argument("learning_rate must be finite and nonnegative");
    if (batch_a < 1) throw std::invalid_argument("batch_a must be at least 1");
    if (batch_z < 2) throw std::invalid_argument("batch_z must be at least 2");
    if (convergence_window < 1) throw std::invalid_argument("convergence_window must be at least 1");
    if (!(convergence_rel_tol >= 0.0)) throw std::invalid_argument("convergence_rel_tol must be nonnegative");
    if (minibatch == 1) throw std::invalid_argument("minibatch must be 0 or at least 2");
}

OptimizerState OptimizerState::zeros(std::size_t n) {
    OptimizerState s;
    s.first_moment.assign(n, 0.0);
    s.second_moment.assign(n, 0.0);
    return s;
}

std::string_view to_string(StopReason reason) {
    return reason == StopReason::Converged ? "converged" : "max_steps";
}

ParamVector init_params_datadep(const GateSet& gates, const BitMatrix& data, const InitConfig& cfg,
                                std::uint64_t seed) {
    cfg.validate();
    detail::require_width(data, gates.n_qubits(), "data");
    if (data.empty()) throw ShapeError("data-dependent initialisation needs at least one row");
    const std::size_t n = gates.n_qubits();
    const double rows = static_cast<double>(data.rows());

    std::vector<double> mean(n, 0.0);
    for (std::size_t i = 0; i < data.rows(); ++i)
        for (std::size_t q = 0; q < n; ++q)
            if (data.get(i, q)) mean[q] += 1.0;
    for (double& m : mean) m /= rows;

    // Spin covariance only for the pairs that carry a two-qubit gate.
    const BitColumns cols(data);
    std::vector<Word> scratch;
    Rng rng = make_rng(seed, Stream::Init);
    std::vector<double> theta(gates.size(), 0.0);
    for (std::size_t j = 0; j < gates.size(); ++j) {
        const auto g = gates.generator(j);
        if (g.size() == 1) {
            const double m = std::clamp(mean[g[0]], cfg.clamp_eps, 1.0 - cfg.clamp_eps);
            theta[j] = std::asin(std::sqrt(m));
        } else if (g.size() == 2) {
            const double sj = 1.0 - 2.0 * mean[g[0]];
            const double sk = 1.0 - 2.0 * mean[g[1]];
            const double odd = static_cast<double>(cols.count_odd(g, scratch));
            const double sjk = (rows - 2.0 * odd) / rows;
            theta[j] = cfg.scale_two_qubit * (sjk - sj * sk);
        } else if (cfg.scale_other > 0.0) {
            theta[j] = cfg.scale_other * standard_normal(rng);
        }
    }
    return ParamVector(std::move(theta));
}

ParamVector init_params_uniform(std::size_t count, std::uint64_t seed) {
    Rng rng = make_rng(seed, Stream::Init);
    std::vector<double> theta(count);
    for (double& t : theta) t = 2.0 * std::numbers::pi * uniform01(rng);
    return ParamVector(std::move(theta));
}

LossGrad loss_and_grad(const GateSet& gates, const ParamVector& params, const BitMatrix& x, const BitMatrix& a,
                       const BitMatrix& z, ModelKind kind) {
    detail::check_mmd_inputs(gates, params, x, a, z, kind);
    const BitColumns xc(x);
    detail::MmdResult r;
    if (kind == ModelKind::Bitflip) {
        r = detail::mmd_estimate(gates, params, xc, a, nullptr, kind, true);
    } else {
        const detail::PreparedZ zp(z);
        r = detail::mmd_estimate(gates, params, xc, a, &zp, kind, true);
    }
    return {r.value, std::move(r.grad)};
}

LossGrad loss_and_grad(const GateSet& gates, const ParamVector& params, const BitMatrix& x,
                       const LossBatches& batches, ModelKind kind) {
    if (batches.observables.empty()) throw std::invalid_argument("loss batches hold no observable sets");
    for (const auto& a : batches.observables) detail::check_mmd_inputs(gates, params, x, a, batches.z, kind);
    const BitColumns xc(x);
    const bool bitflip = kind == ModelKind::Bitflip;
    const detail::PreparedZ zp(bitflip ? BitMatrix() : batches.z);
    LossGrad out;
    out.grad.assign(gates.size(), 0.0);
    for (const auto& a : batches.observables) {
        const auto r = detail::mmd_estimate(gates, params, xc, a, bitflip ? nullptr : &zp, kind, true);
        out.loss += r.value;
        for (std::size_t j = 0; j < out.grad.size(); ++j) out.grad[j] += r.grad[j];
    }
    const double m = static_cast<double>(batches.observables.size());
    out.loss /= m;
    for (double& g : out.grad) g /= m;
    return out;
}

std::pair<OptimizerState, ParamVector> adam_step(const OptimizerState& state, const ParamVector& params,
                                                 std::span<const double> grad, double lr) {
    const std::size_t n = params.size();
    if (grad.size() != n || state.first_moment.size() != n || state.second_moment.size() != n)
        throw ShapeError("adam_step: parameter, gradient and moment lengths differ");
    OptimizerState next = state;
    next.step = state.step + 1;
    const double t = static_cast<double>(next.step);
    const double c1 = 1.0 - std::pow(state.beta1, t);
    const double c2 = 1.0 - std::pow(state.beta2, t);
    std::vector<double> theta(params.values().begin(), params.values().end());
    for (std::size_t j = 0; j < n; ++j) {
        next.first_moment[j] = state.beta1 * state.first_moment[j] + (1.0 - state.beta1) * grad[j];
        next.second_moment[j] = state.beta2 * state.second_moment[j] + (1.0 - state.beta2) * grad[j] * grad[j];
        const double mhat = next.first_moment[j] / c1;
        const double vhat = next.second_moment[j] / c2;
        theta[j] -= lr * mhat / (std::sqrt(vhat) + state.epsilon);
    }
    return {std::move(next), ParamVector(std::move(theta))};
}

TrainReport train(const GateSet& gates, const BitMatrix& data, const InitConfig& init_cfg,
                  const TrainConfig& train_cfg, ModelKind kind, const TrainCallback& callback) {
    ParamVector start = init_params_datadep(gates, data, init_cfg, train_cfg.seed);
    return train_from(gates, data, std::move(start), train_cfg, kind, callback);
}

namespace {

BitMatrix draw_minibatch(const BitMatrix& data, std::size_t size, std::uint64_t seed, std::size_t step) {
    Rng rng = make_rng(seed, Stream::DataMinibatch, step);
    std::vector<std::size_t> idx(data.rows());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = 0; i < size; ++i) std::swap(idx[i], idx[i + uniform_index(rng, idx.size() - i)]);
    idx.resize(size);
    return data.select_rows(idx);
}

}  // namespace

TrainReport train_from(const GateSet& gates, const BitMatrix& data, ParamVector start, const TrainConfig& train_cfg,
                       ModelKind kind, const TrainCallback& callback) {
    train_cfg.validate();
    check_bound(gates, start);
    detail::require_width(data, gates.n_qubits(), "data");
    if (data.rows() < 2) throw ShapeError("training needs at least 2 data rows");

    TrainReport report;
    report.initial_params = start;
    ParamVector params = std::move(start);
    OptimizerState opt = OptimizerState::zeros(gates.size());
    const BatchSizes sizes{train_cfg.batch_a, train_cfg.batch_z};
    const bool use_minibatch = train_cfg.minibatch != 0 && train_cfg.minibatch < data.rows();
    const std::size_t window = train_cfg.convergence_window;

    // Window sums of the loss history for the moving-average test.
    double window_sum = 0.0;
    std::vector<double> moving;
    for (std::size_t step = 0; step < train_cfg.max_steps; ++step) {
        const std::uint64_t step_seed = derive_seed(train_cfg.seed, Stream::Repetition, step);
        const LossBatches batches = draw_loss_batches(gates.n_qubits(), train_cfg.schedule, sizes, step_seed);
        LossGrad lg = use_minibatch
                          ? loss_and_grad(gates, params, draw_minibatch(data, train_cfg.minibatch, train_cfg.seed, step),
                                          batches, kind)
                          : loss_and_grad(gates, params, data, batches, kind);
        if (!std::isfinite(lg.loss)) throw NumericError("non-finite loss at step " + std::to_string(step));
        report.loss_history.push_back({step, lg.loss});
        auto [next_opt, next_params] = adam_step(opt, params, lg.grad, train_cfg.learning_rate);
        opt = std::move(next_opt);
        params = std::move(next_params);

        if (callback && !callback(step, lg.loss, params)) break;

        window_sum += lg.loss;
        if (report.loss_history.size() > window) window_sum -= report.loss_history[report.loss_history.size() - 1 - window].loss;
        if (report.loss_history.size() >= window) moving.push_back(window_sum / static_cast<double>(window));
        if (train_cfg.convergence_rel_tol > 0.0 && moving.size() > window) {
            const double now = moving.back();
            const double before = moving[moving.size() - 1 - window];
            const double scale = std::max(std::abs(before), 1e-300);
            if (std::abs(now - before) / scale < train_cfg.convergence_rel_tol) {
                report.stop_reason = StopReason::Converged;
                break;
            }
        }
    }
    report.final_params = std::move(params);
    return report;
}

Histogram make_histogram(std::vector<double> values, std::size_t bins) {
    if (bins == 0) throw std::invalid_argument("histogram needs at least one bin");
    Histogram h;
    h.values = std::move(values);
    if (h.values.empty()) {
        h.edges = {0.0, 0.0};
        h.counts = {0};
        return h;
    }
    const auto [lo_it, hi_it] = std::minmax_element(h.values.begin(), h.values.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (!(hi > lo)) {
        h.edges = {lo, hi};
        h.counts = {h.values.size()};
        return h;
    }
    h.edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins);
    h.counts.assign(bins, 0);
    for (double v : h.values) {
        auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
        ++h.counts[std::min(b, bins - 1)];
    }
    return h;
}

Histogram gradient_magnitude_histogram(const GateSet& gates, const ParamVector& params, const BitMatrix& x,
                                       const BandwidthSchedule& schedule, const BatchSizes& sizes, std::size_t bins,
                                       std::uint64_t seed, ModelKind kind) {
    const LossBatches batches = draw_loss_batches(gates.n_qubits(), schedule, sizes, seed);
    LossGrad lg = loss_and_grad(gates, params, x, batches, kind);
    for (double& g : lg.grad) g = std::abs(g);
    return make_histogram(std::move(lg.grad), bins);
}

GradCheck check_gradient(const GateSet& gates, const ParamVector& params, const BitMatrix& x, const BitMatrix& a,
                         const BitMatrix& z, ModelKind kind, double h, double floor) {
    const LossGrad lg = loss_and_grad(gates, params, x, a, z, kind);
    GradCheck out;
    std::vector<double> theta(params.values().begin(), params.values().end());
    for (std::size_t j = 0; j < theta.size(); ++j) {
        const double saved = theta[j];
        theta[j] = saved + h;
        const double up = mmd2_unbiased(gates, ParamVector(theta), x, a, z, kind).value;
        theta[j] = saved - h;
        const double down = mmd2_unbiased(gates, ParamVector(theta), x, a, z, kind).value;
        theta[j] = saved;
        if (std::abs(lg.grad[j]) <= floor) continue;
        const double fd = (up - down) / (2.0 * h);
        const double rel = std::abs(fd - lg.grad[j]) / std::abs(lg.grad[j]);
        ++out.checked;
        if (rel > out.max_rel_error) {
            out.max_rel_error = rel;
            out.worst_index = j;
        }
    }
    return out;
}

}  // namespace iqp
