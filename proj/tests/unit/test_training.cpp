#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "iqp/datasets.hpp"
#include "iqp/errors.hpp"
#include "iqp/exact.hpp"
#include "iqp/expval.hpp"
#include "iqp/training.hpp"
#include "oracles.hpp"

using namespace iqp;

namespace {

std::vector<std::vector<std::uint32_t>> all_to_all(std::size_t n, bool singles) {
    std::vector<std::vector<std::uint32_t>> g;
    if (singles)
        for (std::uint32_t i = 0; i < n; ++i) g.push_back({i});
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = i + 1; j < n; ++j) g.push_back({i, j});
    return g;
}

double percentile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    return v[static_cast<std::size_t>(q * static_cast<double>(v.size() - 1))];
}

}  // namespace

TEST_CASE("config validation") {
    InitConfig ic;
    CHECK_NOTHROW(ic.validate());
    ic.scale_two_qubit = -1.0;
    CHECK_THROWS(ic.validate());
    TrainConfig tc;
    CHECK_NOTHROW(tc.validate());
    tc.batch_z = 1;
    CHECK_THROWS(tc.validate());
    tc.batch_z = 10;
    tc.learning_rate = std::nan("");
    CHECK_THROWS(tc.validate());
}

TEST_CASE("init_params_datadep rules") {
    SUBCASE("arcsin of the column mean") {
        const GateSet g(2, {{0}, {1}});
        const auto data = BitMatrix::from_strings({"10", "00", "00", "00"});
        const auto p = init_params_datadep(g, data, InitConfig{}, 1);
        CHECK(p[0] == doctest::Approx(std::numbers::pi / 6).epsilon(1e-14));
        CHECK(p[1] == doctest::Approx(std::asin(std::sqrt(1e-6))).epsilon(1e-12));
        CHECK(p[1] == doctest::Approx(0.001).epsilon(1e-3));
    }
    SUBCASE("perfectly correlated columns give scale times one") {
        const GateSet g(2, {{0, 1}});
        const auto data = BitMatrix::from_strings({"00", "11", "00", "11"});
        CHECK(init_params_datadep(g, data, InitConfig{}, 1)[0] == doctest::Approx(0.1).epsilon(1e-14));
        const auto anti = BitMatrix::from_strings({"01", "10"});
        CHECK(init_params_datadep(g, anti, InitConfig{}, 1)[0] == doctest::Approx(-0.1).epsilon(1e-14));
    }
    SUBCASE("two-qubit angle is the spin covariance") {
        std::mt19937_64 rng(4);
        const std::size_t rows = 300;
        BitMatrix data(rows, 5);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t b = 0; b < 5; ++b) data.set(i, b, (rng() % 3) == 0);
        const GateSet g(5, all_to_all(5, false));
        InitConfig cfg;
        cfg.scale_two_qubit = 0.7;
        const auto p = init_params_datadep(g, data, cfg, 1);
        for (std::size_t j = 0; j < g.size(); ++j) {
            const auto q = g.generator(j);
            double sj = 0, sk = 0, sjk = 0;
            for (std::size_t i = 0; i < rows; ++i) {
                const double a = data.get(i, q[0]) ? -1.0 : 1.0;
                const double b = data.get(i, q[1]) ? -1.0 : 1.0;
                sj += a;
                sk += b;
                sjk += a * b;
            }
            sj /= rows;
            sk /= rows;
            sjk /= rows;
            CHECK(p[j] == doctest::Approx(0.7 * (sjk - sj * sk)).epsilon(1e-12));
        }
    }
    SUBCASE("larger gates draw from the seeded normal") {
        const GateSet g(4, {{0, 1, 2}, {1, 2, 3}});
        const auto data = sample_uniform(4, 10, 1);
        CHECK(init_params_datadep(g, data, InitConfig{}, 1)[0] == 0.0);
        InitConfig cfg;
        cfg.scale_other = 0.5;
        const auto p1 = init_params_datadep(g, data, cfg, 7);
        CHECK(p1 == init_params_datadep(g, data, cfg, 7));
        CHECK(p1[0] != 0.0);
    }
    CHECK_THROWS_AS(init_params_datadep(GateSet(3, {{0}}), BitMatrix(2, 4), InitConfig{}, 1), ShapeError);
}

TEST_CASE("single-qubit initialisation reproduces the data marginals") {
    std::mt19937_64 rng(5);
    const std::size_t n = 6;
    BitMatrix data(500, n);
    for (std::size_t i = 0; i < data.rows(); ++i)
        for (std::size_t b = 0; b < n; ++b) data.set(i, b, (rng() % (b + 2)) == 0);
    const GateSet g(n, all_to_all(n, true));
    InitConfig cfg;
    cfg.scale_two_qubit = 0.0;
    const auto p = init_params_datadep(g, data, cfg, 1);
    const auto probs = exact_probabilities(g, p, ModelKind::IQP);
    for (std::size_t b = 0; b < n; ++b) {
        double mean = 0;
        for (std::size_t i = 0; i < data.rows(); ++i) mean += data.get(i, b);
        mean /= static_cast<double>(data.rows());
        double marginal = 0;
        for (std::size_t x = 0; x < probs.size(); ++x)
            if ((x >> b) & 1U) marginal += probs[x];
        CHECK(std::abs(marginal - std::clamp(mean, 1e-6, 1 - 1e-6)) < 1e-10);
    }
}

TEST_CASE("init_params_uniform") {
    const auto p = init_params_uniform(1000, 3);
    CHECK(p == init_params_uniform(1000, 3));
    for (double v : p.values()) {
        CHECK(v >= 0.0);
        CHECK(v < 2 * std::numbers::pi);
    }
}

TEST_CASE("loss_and_grad at the identity circuit") {
    const GateSet g(4, all_to_all(4, true));
    const auto lg = loss_and_grad(g, ParamVector::zeros(g.size()), BitMatrix(5, 4),
                                  sample_observables(ObservableDistribution(4, 0.3), 10, 1), sample_uniform(4, 10, 2),
                                  ModelKind::IQP);
    CHECK(lg.loss == 0.0);
    for (double v : lg.grad) CHECK(v == 0.0);
}

TEST_CASE("loss output equals mmd2_unbiased bit for bit") {
    std::mt19937_64 rng(6);
    const auto c = oracle::random_circuit(rng, 7, 15, 3);
    const GateSet g(7, c.gens);
    const ParamVector p(c.theta);
    const auto x = sample_uniform(7, 30, 1);
    const auto a = sample_observables(ObservableDistribution(7, 0.2), 150, 2);
    const auto z = sample_uniform(7, 40, 3);
    for (auto kind : {ModelKind::IQP, ModelKind::Bitflip, ModelKind::IQPSymmetrized})
        CHECK(loss_and_grad(g, p, x, a, z, kind).loss == mmd2_unbiased(g, p, x, a, z, kind).value);
}

TEST_CASE("analytic gradient matches central differences") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 6; ++trial) {
        const std::size_t n = 4 + rng() % 5;
        const auto c = oracle::random_circuit(rng, n, 12, 3);
        const GateSet g(n, c.gens);
        const auto x = sample_uniform(n, 20, 10 + trial);
        const auto a = sample_observables(ObservableDistribution(n, 0.25), 16, 20 + trial);
        const auto z = sample_uniform(n, 16, 30 + trial);
        for (auto kind : {ModelKind::IQP, ModelKind::Bitflip, ModelKind::IQPSymmetrized}) {
            const auto lg = loss_and_grad(g, ParamVector(c.theta), x, a, z, kind);
            const double h = 1e-5;
            for (std::size_t j = 0; j < c.theta.size(); ++j) {
                auto up = c.theta, down = c.theta;
                up[j] += h;
                down[j] -= h;
                const double fd = (mmd2_unbiased(g, ParamVector(up), x, a, z, kind).value -
                                   mmd2_unbiased(g, ParamVector(down), x, a, z, kind).value) /
                                  (2 * h);
                if (std::abs(lg.grad[j]) > 1e-8) CHECK(std::abs(fd - lg.grad[j]) / std::abs(lg.grad[j]) <= 1e-4);
            }
        }
    }
}

TEST_CASE("check_gradient flags agreement") {
    std::mt19937_64 rng(8);
    const auto c = oracle::random_circuit(rng, 6, 10, 2);
    const GateSet g(6, c.gens);
    const auto x = sample_uniform(6, 20, 1);
    const auto a = sample_observables(ObservableDistribution(6, 0.25), 16, 2);
    const auto z = sample_uniform(6, 16, 3);
    const auto gc = check_gradient(g, ParamVector(c.theta), x, a, z, ModelKind::IQP);
    CHECK(gc.checked > 0);
    CHECK(gc.max_rel_error <= 1e-4);
}

TEST_CASE("multi-batch loss_and_grad averages the batches") {
    std::mt19937_64 rng(9);
    const auto c = oracle::random_circuit(rng, 6, 10, 3);
    const GateSet g(6, c.gens);
    const ParamVector p(c.theta);
    const auto x = sample_uniform(6, 25, 1);
    const BandwidthSchedule sched({1.5, 0.8});
    const auto batches = draw_loss_batches(6, sched, {20, 20}, 4);
    const auto lg = loss_and_grad(g, p, x, batches, ModelKind::IQP);
    const auto l0 = loss_and_grad(g, p, x, batches.observables[0], batches.z, ModelKind::IQP);
    const auto l1 = loss_and_grad(g, p, x, batches.observables[1], batches.z, ModelKind::IQP);
    CHECK(lg.loss == doctest::Approx((l0.loss + l1.loss) / 2).epsilon(1e-13));
    for (std::size_t j = 0; j < g.size(); ++j)
        CHECK(lg.grad[j] == doctest::Approx((l0.grad[j] + l1.grad[j]) / 2).epsilon(1e-12).scale(1e-12));
    CHECK(lg.loss == doctest::Approx(multi_bandwidth_loss(g, p, x, sched, {20, 20}, 4, ModelKind::IQP)).epsilon(1e-13));
}

TEST_CASE("adam_step") {
    const ParamVector p({0.5, -0.2});
    const auto s0 = OptimizerState::zeros(2);
    const std::vector<double> zero{0.0, 0.0};
    CHECK(adam_step(s0, p, zero, 0.1).second == p);

    const auto [s1, p1] = adam_step(OptimizerState::zeros(1), ParamVector({0.0}), std::vector<double>{1.0}, 0.1);
    CHECK(p1[0] == doctest::Approx(-0.1 / (1 + 1e-8)).epsilon(1e-14));
    CHECK(s1.step == 1);

    // Two steps against a hand evaluation of the update formulas.
    const std::vector<double> g1{0.3}, g2{-0.1};
    auto [sa, pa] = adam_step(OptimizerState::zeros(1), ParamVector({1.0}), g1, 0.05);
    auto [sb, pb] = adam_step(sa, pa, g2, 0.05);
    double m = 0.1 * 0.3, v = 0.001 * 0.09;
    double theta = 1.0 - 0.05 * (m / 0.1) / (std::sqrt(v / 0.001) + 1e-8);
    m = 0.9 * m + 0.1 * -0.1;
    v = 0.999 * v + 0.001 * 0.01;
    theta -= 0.05 * (m / (1 - 0.81)) / (std::sqrt(v / (1 - 0.999 * 0.999)) + 1e-8);
    CHECK(pb[0] == doctest::Approx(theta).epsilon(1e-13));

    const auto r1 = adam_step(sa, pa, g2, 0.05);
    const auto r2 = adam_step(sa, pa, g2, 0.05);
    CHECK(r1.second == r2.second);
    CHECK(r1.first.first_moment == r2.first.first_moment);
    CHECK_THROWS_AS(adam_step(s0, p, std::vector<double>{1.0}, 0.1), ShapeError);
}

TEST_CASE("train basics") {
    const std::size_t n = 6;
    const GateSet g(n, all_to_all(n, true));
    const auto data = gen_blobs({BitMatrix::from_strings({"111000", "000111"}), 0.05}, 200, 3);
    InitConfig ic;
    TrainConfig tc;
    tc.batch_a = 50;
    tc.batch_z = 50;
    tc.schedule = BandwidthSchedule({1.0, 0.6});
    tc.seed = 11;

    SUBCASE("zero steps returns the initialisation") {
        tc.max_steps = 0;
        const auto r = train(g, data, ic, tc, ModelKind::IQP);
        CHECK(r.loss_history.empty());
        CHECK(r.final_params == r.initial_params);
        CHECK(r.initial_params == init_params_datadep(g, data, ic, tc.seed));
    }
    SUBCASE("deterministic and decreasing") {
        tc.max_steps = 150;
        tc.learning_rate = 0.05;
        tc.convergence_rel_tol = 0.0;
        const auto r1 = train_from(g, data, init_params_uniform(g.size(), 2), tc, ModelKind::IQP);
        const auto r2 = train_from(g, data, init_params_uniform(g.size(), 2), tc, ModelKind::IQP);
        CHECK(r1.final_params == r2.final_params);
        REQUIRE(r1.loss_history.size() == 150);
        for (std::size_t i = 0; i < 150; ++i) CHECK(r1.loss_history[i].loss == r2.loss_history[i].loss);
        double head = 0, tail = 0;
        for (std::size_t i = 0; i < 20; ++i) {
            head += r1.loss_history[i].loss;
            tail += r1.loss_history[130 + i].loss;
        }
        CHECK(tail < 0.5 * head);
        CHECK(r1.stop_reason == StopReason::MaxSteps);
    }
    SUBCASE("callback can stop training") {
        tc.max_steps = 100;
        std::size_t calls = 0;
        const auto r = train(g, data, ic, tc, ModelKind::IQP, [&](std::size_t step, double, const ParamVector&) {
            ++calls;
            return step < 4;
        });
        CHECK(calls == 5);
        CHECK(r.loss_history.size() == 5);
    }
    SUBCASE("convergence ends a flat run") {
        tc.max_steps = 1000;
        tc.learning_rate = 0.0;
        tc.convergence_window = 10;
        tc.convergence_rel_tol = 0.5;
        const auto r = train(g, data, ic, tc, ModelKind::IQP);
        CHECK(r.stop_reason == StopReason::Converged);
        CHECK(r.loss_history.size() < 1000);
    }
    SUBCASE("minibatches are deterministic") {
        tc.max_steps = 5;
        tc.minibatch = 32;
        const auto r1 = train(g, data, ic, tc, ModelKind::Bitflip);
        const auto r2 = train(g, data, ic, tc, ModelKind::Bitflip);
        CHECK(r1.final_params == r2.final_params);
    }
}

TEST_CASE("make_histogram") {
    const auto h = make_histogram({0.0, 0.0, 0.0}, 10);
    CHECK(h.counts.size() == 1);
    CHECK(h.counts[0] == 3);
    const auto h2 = make_histogram({0.0, 1.0, 2.0, 3.0, 4.0}, 4);
    CHECK(h2.edges.size() == 5);
    CHECK(h2.counts == std::vector<std::size_t>{1, 1, 1, 2});
    CHECK_THROWS(make_histogram({1.0}, 0));
}

TEST_CASE("gradient magnitude histograms") {
    SUBCASE("identity circuit and zero data") {
        const GateSet g(5, all_to_all(5, true));
        const auto h = gradient_magnitude_histogram(g, ParamVector::zeros(g.size()), BitMatrix(10, 5),
                                                    BandwidthSchedule({1.0}), {20, 20}, 10, 1, ModelKind::IQP);
        CHECK(h.counts.size() == 1);
        for (double v : h.values) CHECK(v == 0.0);
    }
    SUBCASE("random bitflip expectations decay with n") {
        auto median_abs = [](std::size_t n) {
            const GateSet g(n, all_to_all(n, false));
            std::vector<double> vals;
            BitMatrix obs(1, n);
            obs.set(0, 0, true);
            for (int draw = 0; draw < 100; ++draw)
                vals.push_back(std::abs(expval_bitflip(g, init_params_uniform(g.size(), 100 + draw), obs)[0]));
            return percentile(vals, 0.5);
        };
        const double m8 = median_abs(8), m64 = median_abs(64);
        // E|cos(2 theta)| = 2 / pi per factor; 63 factors at n = 64.
        CHECK(m64 < std::pow(2 / std::numbers::pi, 63) * 10);
        CHECK(m64 < m8);
    }
    SUBCASE("data-dependent init has a heavier tail than uniform init") {
        const std::size_t n = 16;
        const GateSet g(n, all_to_all(n, true));
        BitMatrix patterns(4, n);
        std::mt19937_64 rng(12);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t b = 0; b < n; ++b) patterns.set(i, b, rng() & 1);
        const auto data = gen_blobs({patterns, 0.05}, 1000, 5);
        const BandwidthSchedule sched({sigma_for_weight(n, 2)});
        const auto hd = gradient_magnitude_histogram(g, init_params_datadep(g, data, InitConfig{}, 1), data, sched,
                                                     {200, 200}, 20, 3, ModelKind::IQP);
        const auto hu = gradient_magnitude_histogram(g, init_params_uniform(g.size(), 1), data, sched, {200, 200}, 20,
                                                     3, ModelKind::IQP);
        CHECK(percentile(hd.values, 0.99) > percentile(hu.values, 0.99));
    }
}
