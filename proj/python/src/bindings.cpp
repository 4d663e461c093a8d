#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "iqp/datasets.hpp"
#include "iqp/errors.hpp"
#include "iqp/evaluation.hpp"
#include "iqp/exact.hpp"
#include "iqp/expval.hpp"
#include "iqp/mmd.hpp"
#include "iqp/training.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace iqp;

namespace {

using BitArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

BitMatrix to_bits(const BitArray& arr) {
    if (arr.ndim() != 2) throw ShapeError("bit arrays must be 2-D (rows, width)");
    const auto r = arr.unchecked<2>();
    BitMatrix m(static_cast<std::size_t>(r.shape(0)), static_cast<std::size_t>(r.shape(1)));
    for (py::ssize_t i = 0; i < r.shape(0); ++i)
        for (py::ssize_t b = 0; b < r.shape(1); ++b) {
            const std::uint8_t v = r(i, b);
            if (v > 1) throw ShapeError("bit arrays may only hold 0 and 1");
            if (v) m.set(static_cast<std::size_t>(i), static_cast<std::size_t>(b), true);
        }
    return m;
}

py::array_t<std::uint8_t> from_bits(const BitMatrix& m) {
    py::array_t<std::uint8_t> out({static_cast<py::ssize_t>(m.rows()), static_cast<py::ssize_t>(m.width())});
    auto w = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t b = 0; b < m.width(); ++b)
            w(static_cast<py::ssize_t>(i), static_cast<py::ssize_t>(b)) = m.get(i, b) ? 1 : 0;
    return out;
}

py::array_t<double> to_array(const std::vector<double>& v) {
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

ParamVector to_params(const std::vector<double>& v) { return ParamVector(v); }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Parameterised IQP circuit models trained with an MMD loss";

    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
    py::register_exception<LimitError>(m, "LimitError", PyExc_ValueError);

    py::enum_<ModelKind>(m, "ModelKind")
        .value("IQP", ModelKind::IQP)
        .value("BITFLIP", ModelKind::Bitflip)
        .value("IQP_SYMMETRIZED", ModelKind::IQPSymmetrized);

    py::class_<GateSet>(m, "GateSet")
        .def(py::init<std::size_t, const std::vector<std::vector<std::uint32_t>>&>(), "n_qubits"_a, "generators"_a)
        .def_property_readonly("n_qubits", &GateSet::n_qubits)
        .def("__len__", &GateSet::size)
        .def("generators", &GateSet::generators);

    m.def(
        "expval_estimate",
        [](const GateSet& g, const std::vector<double>& params, const BitArray& obs, const BitArray& z,
           ModelKind kind) {
            const auto est = expval_estimate(g, to_params(params), to_bits(obs), to_bits(z), kind);
            std::vector<double> v, se;
            for (const auto& e : est) {
                v.push_back(e.value);
                se.push_back(e.std_error);
            }
            return py::make_tuple(to_array(v), to_array(se));
        },
        "gates"_a, "params"_a, "observables"_a, "z_samples"_a, "kind"_a = ModelKind::IQP);
    m.def(
        "expval_bitflip",
        [](const GateSet& g, const std::vector<double>& params, const BitArray& obs) {
            return to_array(expval_bitflip(g, to_params(params), to_bits(obs)));
        },
        "gates"_a, "params"_a, "observables"_a);
    m.def(
        "exact_probabilities",
        [](const GateSet& g, const std::vector<double>& params, ModelKind kind, std::size_t limit) {
            return to_array(exact_probabilities(g, to_params(params), kind, limit));
        },
        "gates"_a, "params"_a, "kind"_a = ModelKind::IQP, "exact_limit"_a = kDefaultExactLimit);
    m.def(
        "exact_expvals",
        [](const GateSet& g, const std::vector<double>& params, const BitArray& obs, ModelKind kind,
           std::size_t limit) { return to_array(exact_expvals(g, to_params(params), to_bits(obs), kind, limit)); },
        "gates"_a, "params"_a, "observables"_a, "kind"_a = ModelKind::IQP, "exact_limit"_a = kDefaultExactLimit);

    m.def("sample_uniform", [](std::size_t n, std::size_t count, std::uint64_t seed) {
        return from_bits(sample_uniform(n, count, seed));
    }, "n"_a, "count"_a, "seed"_a);
    m.def(
        "sample_observables",
        [](std::size_t n, double sigma, std::size_t count, std::uint64_t seed) {
            return from_bits(sample_observables(ObservableDistribution::from_sigma(n, sigma), count, seed));
        },
        "n"_a, "sigma"_a, "count"_a, "seed"_a);
    m.def(
        "sample",
        [](const GateSet& g, const std::vector<double>& params, ModelKind kind, std::size_t count, std::uint64_t seed,
           std::size_t limit) {
            if (kind == ModelKind::Bitflip) return from_bits(sample_bitflip(g, to_params(params), count, seed));
            return from_bits(sample_exact(g, to_params(params), kind, count, seed, limit));
        },
        "gates"_a, "params"_a, "kind"_a, "count"_a, "seed"_a, "exact_limit"_a = kDefaultExactLimit);

    m.def("bernoulli_p", &bernoulli_p, "sigma"_a);
    m.def("sigma_for_weight", &sigma_for_weight, "n"_a, "weight"_a);
    m.def("median_heuristic", [](const BitArray& data) { return median_heuristic(to_bits(data)); }, "data"_a);
    m.def(
        "mmd2_samples",
        [](const BitArray& x, const BitArray& y, double sigma, std::uint64_t seed) {
            const auto r = mmd2_samples(to_bits(x), to_bits(y), KernelConfig(sigma), {20000, 8, seed});
            return py::make_tuple(r.value, r.std_error);
        },
        "x"_a, "y"_a, "sigma"_a, "seed"_a = 0);
    m.def(
        "mmd2_unbiased",
        [](const GateSet& g, const std::vector<double>& params, const BitArray& x, const BitArray& a, const BitArray& z,
           ModelKind kind) {
            const auto r = mmd2_unbiased(g, to_params(params), to_bits(x), to_bits(a), to_bits(z), kind);
            return py::make_tuple(r.value, r.std_error);
        },
        "gates"_a, "params"_a, "x"_a, "a"_a, "z"_a, "kind"_a = ModelKind::IQP);
    m.def(
        "loss_and_grad",
        [](const GateSet& g, const std::vector<double>& params, const BitArray& x, const BitArray& a, const BitArray& z,
           ModelKind kind) {
            const auto r = loss_and_grad(g, to_params(params), to_bits(x), to_bits(a), to_bits(z), kind);
            return py::make_tuple(r.loss, to_array(r.grad));
        },
        "gates"_a, "params"_a, "x"_a, "a"_a, "z"_a, "kind"_a = ModelKind::IQP);

    m.def(
        "init_params_datadep",
        [](const GateSet& g, const BitArray& data, double scale_two_qubit, double scale_other, std::uint64_t seed) {
            InitConfig cfg;
            cfg.scale_two_qubit = scale_two_qubit;
            cfg.scale_other = scale_other;
            const auto p = init_params_datadep(g, to_bits(data), cfg, seed);
            return to_array({p.values().begin(), p.values().end()});
        },
        "gates"_a, "data"_a, "scale_two_qubit"_a = 0.1, "scale_other"_a = 0.0, "seed"_a = 0);
    m.def(
        "train",
        [](const GateSet& g, const BitArray& data, const std::vector<double>& start, const std::vector<double>& sigmas,
           std::size_t steps, double learning_rate, std::size_t batch_a, std::size_t batch_z, std::uint64_t seed,
           ModelKind kind) {
            TrainConfig cfg;
            cfg.max_steps = steps;
            cfg.learning_rate = learning_rate;
            cfg.batch_a = batch_a;
            cfg.batch_z = batch_z;
            cfg.schedule = BandwidthSchedule(sigmas);
            cfg.convergence_rel_tol = 0.0;
            cfg.seed = seed;
            TrainReport rep;
            {
                py::gil_scoped_release release;
                rep = train_from(g, to_bits(data), to_params(start), cfg, kind);
            }
            std::vector<double> losses;
            for (const auto& p : rep.loss_history) losses.push_back(p.loss);
            const auto fp = rep.final_params.values();
            return py::make_tuple(to_array({fp.begin(), fp.end()}), to_array(losses));
        },
        "gates"_a, "data"_a, "start"_a, "sigmas"_a, "steps"_a, "learning_rate"_a = 0.01, "batch_a"_a = 1000,
        "batch_z"_a = 1000, "seed"_a = 0, "kind"_a = ModelKind::IQP);

    m.def(
        "test_mmd",
        [](const GateSet& g, const std::vector<double>& params, ModelKind kind, const BitArray& test,
           const std::vector<double>& sigmas, std::size_t reps, std::size_t batch_a, std::size_t batch_z,
           std::uint64_t seed) {
            const auto res = test_mmd(g, to_params(params), kind, to_bits(test), BandwidthSchedule(sigmas), reps,
                                      {batch_a, batch_z}, seed);
            py::list out;
            for (const auto& r : res) out.append(py::make_tuple(r.sigma, r.mean, r.std));
            return out;
        },
        "gates"_a, "params"_a, "kind"_a, "test"_a, "sigmas"_a, "repetitions"_a = 10, "batch_a"_a = 1000,
        "batch_z"_a = 1000, "seed"_a = 0);
    m.def(
        "kgel_solve",
        [](const BitArray& test, const BitArray& witnesses, double sigma, const std::vector<double>& rhs) {
            KgelProblem p;
            p.test_set = to_bits(test);
            p.witnesses = to_bits(witnesses);
            p.sigma = sigma;
            p.rhs = rhs;
            const auto s = kgel_solve(p);
            py::dict d;
            d["pi"] = to_array(s.pi);
            d["kl"] = s.kl_value;
            d["residual"] = s.residual;
            d["feasible"] = s.feasible;
            return d;
        },
        "test"_a, "witnesses"_a, "sigma"_a, "rhs"_a);

    m.def(
        "gen_blobs",
        [](const BitArray& patterns, double flip_prob, std::size_t count, std::uint64_t seed) {
            return from_bits(gen_blobs({to_bits(patterns), flip_prob}, count, seed));
        },
        "patterns"_a, "flip_prob"_a, "count"_a, "seed"_a);
}
