#include "config.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "iqp/mmd.hpp"

namespace iqp::cli {

using json = nlohmann::json;

namespace {

// Reads the keys of one JSON object and rejects anything left unread.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError("config key '" + path_ + "' must be an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json* get(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

    double number(const std::string& k, double def) {
        const json* v = get(k);
        if (!v) return def;
        if (!v->is_number()) throw ConfigError("config key '" + key(k) + "' must be a number");
        const double d = v->get<double>();
        if (!std::isfinite(d)) throw ConfigError("config key '" + key(k) + "' must be finite");
        return d;
    }

    double positive(const std::string& k, double def) {
        const double d = number(k, def);
        if (!(d > 0.0)) throw ConfigError("config key '" + key(k) + "' must be positive");
        return d;
    }

    double nonnegative(const std::string& k, double def) {
        const double d = number(k, def);
        if (!(d >= 0.0)) throw ConfigError("config key '" + key(k) + "' must be nonnegative");
        return d;
    }

    std::size_t count(const std::string& k, std::size_t def, std::size_t min = 0) {
        const json* v = get(k);
        if (!v) return def;
        if (!v->is_number_integer() || v->get<long long>() < 0)
            throw ConfigError("config key '" + key(k) + "' must be a nonnegative integer");
        const auto c = v->get<std::size_t>();
        if (c < min) throw ConfigError("config key '" + key(k) + "' must be at least " + std::to_string(min));
        return c;
    }

    bool boolean(const std::string& k, bool def) {
        const json* v = get(k);
        if (!v) return def;
        if (!v->is_boolean()) throw ConfigError("config key '" + key(k) + "' must be true or false");
        return v->get<bool>();
    }

    std::string string(const std::string& k, const std::string& def) {
        const json* v = get(k);
        if (!v) return def;
        if (!v->is_string()) throw ConfigError("config key '" + key(k) + "' must be a string");
        return v->get<std::string>();
    }

    std::vector<double> numbers(const std::string& k, const std::vector<double>& def) {
        const json* v = get(k);
        if (!v) return def;
        if (!v->is_array()) throw ConfigError("config key '" + key(k) + "' must be a list of numbers");
        std::vector<double> out;
        for (const auto& e : *v) {
            if (!e.is_number()) throw ConfigError("config key '" + key(k) + "' must be a list of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    std::vector<std::size_t> counts(const std::string& k, const std::vector<std::size_t>& def) {
        const json* v = get(k);
        if (!v) return def;
        if (!v->is_array()) throw ConfigError("config key '" + key(k) + "' must be a list of integers");
        std::vector<std::size_t> out;
        for (const auto& e : *v) {
            if (!e.is_number_integer() || e.get<long long>() <= 0)
                throw ConfigError("config key '" + key(k) + "' must be a list of positive integers");
            out.push_back(e.get<std::size_t>());
        }
        return out;
    }

    Section child(const std::string& k) {
        const json* v = get(k);
        static const json empty = json::object();
        return Section(v ? *v : empty, key(k));
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError("unknown config key '" + key(it.key()) + "'");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

BandwidthSpec parse_bandwidth(Section s) {
    BandwidthSpec spec;
    const int given = static_cast<int>(s.has("sigmas")) + static_cast<int>(s.has("weights")) +
                      static_cast<int>(s.has("rule"));
    if (given > 1) throw ConfigError("config key '" + s.key("") + "' takes one of sigmas, weights or rule");
    if (s.has("sigmas")) {
        spec.mode = BandwidthSpec::Mode::Sigmas;
        spec.values = s.numbers("sigmas", {});
        for (double v : spec.values)
            if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("config key '" + s.key("sigmas") + "' must hold positive values");
    } else if (s.has("rule")) {
        const std::string rule = s.string("rule", "");
        if (rule != "median") throw ConfigError("config key '" + s.key("rule") + "' must be \"median\"");
        spec.mode = BandwidthSpec::Mode::Median;
        spec.values.clear();
        spec.median_weight = s.positive("weight", 2.0);
    } else {
        spec.mode = BandwidthSpec::Mode::Weights;
        spec.values = s.numbers("weights", spec.values);
        for (double v : spec.values)
            if (!(v > 0.0)) throw ConfigError("config key '" + s.key("weights") + "' must hold positive values");
    }
    if (spec.mode != BandwidthSpec::Mode::Median && spec.values.empty())
        throw ConfigError("config key '" + s.key("") + "' needs at least one bandwidth");
    s.finish();
    return spec;
}

ModelKind parse_kind(Section& s) {
    const std::string text = s.string("kind", "iqp");
    try {
        return parse_model_kind(text);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + s.key("kind") + "' must be iqp, bitflip or iqp-symmetrized");
    }
}

}  // namespace

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string resolve_path(const std::string& base_dir, const std::string& path) {
    if (path.empty() || std::filesystem::path(path).is_absolute()) return path;
    return (std::filesystem::path(base_dir) / path).string();
}

ResolvedBandwidths resolve_bandwidths(const BandwidthSpec& spec, std::size_t n, const BitMatrix* data) {
    ResolvedBandwidths out;
    std::ostringstream desc;
    desc.precision(17);
    try {
        switch (spec.mode) {
            case BandwidthSpec::Mode::Sigmas:
                out.sigmas = spec.values;
                desc << "explicit";
                break;
            case BandwidthSpec::Mode::Weights:
                desc << "weights";
                for (double w : spec.values) {
                    out.sigmas.push_back(sigma_for_weight(n, w));
                    desc << ' ' << w;
                }
                break;
            case BandwidthSpec::Mode::Median: {
                if (data == nullptr) throw ConfigError("median bandwidth rule needs a dataset");
                const double s1 = sigma_for_weight(n, spec.median_weight);
                const double med = median_heuristic(*data);
                if (!(med > 0.0)) throw ConfigError("median heuristic is zero on this dataset; give explicit sigmas");
                const double s3 = std::sqrt(med);
                out.sigmas = {s1, std::sqrt((s1 * s1 + s3 * s3) / 2.0), s3};
                desc << "median weight " << spec.median_weight << " median " << med;
                break;
            }
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("bandwidth specification: ") + e.what());
    }
    out.description = desc.str();
    return out;
}

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig cfg;
    cfg.base_dir = base_dir;
    cfg.hash = fnv1a_hex(text);
    Section top(root, "");
    {
        const json* seed = top.get("seed");
        if (seed) {
            if (!seed->is_number_unsigned()) throw ConfigError("config key 'seed' must be a nonnegative integer");
            cfg.seed = seed->get<std::uint64_t>();
        }
    }
    {
        Section s = top.child("model");
        cfg.model.n_qubits = s.count("n_qubits", 0);
        cfg.model.kind = parse_kind(s);
        Section g = s.child("gates");
        cfg.model.gates.type = g.string("type", cfg.model.gates.type);
        cfg.model.gates.k = g.count("k", 2, 1);
        cfg.model.gates.path = resolve_path(base_dir, g.string("path", ""));
        cfg.model.gates.next_nearest = g.boolean("next_nearest", false);
        g.finish();
        static const std::set<std::string> types{"two-local-all-to-all-plus-singles", "two-local-all-to-all",
                                                 "all-k-local", "graph-adjacent",
                                                 "explicit"};
        if (!types.count(cfg.model.gates.type)) throw ConfigError("config key 'model.gates.type' has unknown value '" + cfg.model.gates.type + "'");
        if ((cfg.model.gates.type == "graph-adjacent" || cfg.model.gates.type == "explicit") && cfg.model.gates.path.empty())
            throw ConfigError("config key 'model.gates.path' is required for " + cfg.model.gates.type);
        s.finish();
    }
    {
        Section s = top.child("init");
        cfg.init.scale_two_qubit = s.nonnegative("scale_two_qubit", cfg.init.scale_two_qubit);
        cfg.init.scale_other = s.nonnegative("scale_other", cfg.init.scale_other);
        cfg.init.clamp_eps = s.positive("clamp_eps", cfg.init.clamp_eps);
        if (cfg.init.clamp_eps >= 0.5) throw ConfigError("config key 'init.clamp_eps' must be below 0.5");
        s.finish();
    }
    {
        Section s = top.child("train");
        cfg.train.steps = s.count("steps", cfg.train.steps);
        cfg.train.learning_rate = s.nonnegative("learning_rate", cfg.train.learning_rate);
        cfg.train.batch_a = s.count("batch_a", cfg.train.batch_a, 1);
        cfg.train.batch_z = s.count("batch_z", cfg.train.batch_z, 2);
        cfg.train.minibatch = s.count("minibatch", 0);
        if (cfg.train.minibatch == 1) throw ConfigError("config key 'train.minibatch' must be 0 or at least 2");
        if (s.has("bandwidth")) cfg.train.bandwidth = parse_bandwidth(s.child("bandwidth"));
        cfg.train.convergence_window = s.count("convergence_window", cfg.train.convergence_window, 1);
        cfg.train.convergence_rel_tol = s.nonnegative("convergence_rel_tol", cfg.train.convergence_rel_tol);
        s.finish();
    }
    {
        Section s = top.child("eval");
        if (s.has("bandwidth")) cfg.eval.bandwidth = parse_bandwidth(s.child("bandwidth"));
        cfg.eval.repetitions = s.count("repetitions", cfg.eval.repetitions, 2);
        cfg.eval.batch_a = s.count("batch_a", cfg.eval.batch_a, 1);
        cfg.eval.batch_z = s.count("batch_z", cfg.eval.batch_z, 2);
        cfg.eval.covariance = s.boolean("covariance", true);
        cfg.eval.covariance_z = s.count("covariance_z", cfg.eval.covariance_z, 2);
        cfg.eval.log_likelihood = s.boolean("log_likelihood", true);
        if (s.has("kgel")) {
            Section k = s.child("kgel");
            cfg.eval.kgel.enabled = k.boolean("enabled", true);
            cfg.eval.kgel.sigma = k.positive("sigma", 1.0);
            if (!k.has("sigma") && cfg.eval.kgel.enabled) throw ConfigError("config key 'eval.kgel.sigma' is required");
            cfg.eval.kgel.witnesses = k.count("witnesses", cfg.eval.kgel.witnesses, 1);
            cfg.eval.kgel.tolerance = k.positive("tolerance", cfg.eval.kgel.tolerance);
            cfg.eval.kgel.max_iterations = k.count("max_iterations", cfg.eval.kgel.max_iterations, 1);
            cfg.eval.kgel.exact_rhs = k.boolean("exact_rhs", false);
            cfg.eval.kgel.batch_a = k.count("batch_a", cfg.eval.kgel.batch_a, 2);
            cfg.eval.kgel.batch_z = k.count("batch_z", cfg.eval.kgel.batch_z, 2);
            cfg.eval.kgel.labels = resolve_path(base_dir, k.string("labels", ""));
            k.finish();
        }
        s.finish();
    }
    {
        Section s = top.child("data");
        auto& d = cfg.data;
        d.count = s.count("count", d.count, 1);
        d.flip_prob = s.nonnegative("flip_prob", d.flip_prob);
        if (d.flip_prob > 0.5) throw ConfigError("config key 'data.flip_prob' must be at most 0.5");
        d.patterns = resolve_path(base_dir, s.string("patterns", ""));
        d.side = s.count("side", d.side, 2);
        d.temperature = s.positive("temperature", d.temperature);
        d.coupling_low = s.number("coupling_low", d.coupling_low);
        d.coupling_high = s.number("coupling_high", d.coupling_high);
        if (d.coupling_low > d.coupling_high) throw ConfigError("config key 'data.coupling_low' exceeds 'data.coupling_high'");
        d.nodes = s.count("nodes", d.nodes, 2);
        d.connectivity = s.count("connectivity", d.connectivity, 1);
        if (d.connectivity >= d.nodes) throw ConfigError("config key 'data.connectivity' must be below 'data.nodes'");
        d.bias_scale = s.number("bias_scale", d.bias_scale);
        d.coupling = s.number("coupling", d.coupling);
        d.test_fraction = s.nonnegative("test_fraction", 0.0);
        if (d.test_fraction >= 1.0) throw ConfigError("config key 'data.test_fraction' must be below 1");
        Section m = s.child("mcmc");
        d.mcmc.n_chains = m.count("chains", d.mcmc.n_chains, 1);
        d.mcmc.burn_in_sweeps = m.count("burn_in", d.mcmc.burn_in_sweeps);
        d.mcmc.thinning = m.count("thinning", d.mcmc.thinning, 1);
        d.mcmc.samples = d.count;
        m.finish();
        s.finish();
    }
    {
        Section s = top.child("grid");
        cfg.grid.learning_rate = s.numbers("learning_rate", {});
        cfg.grid.scale_two_qubit = s.numbers("scale_two_qubit", {});
        cfg.grid.scale_other = s.numbers("scale_other", {});
        for (const auto* list : {&cfg.grid.learning_rate, &cfg.grid.scale_two_qubit, &cfg.grid.scale_other})
            for (double v : *list)
                if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("grid values must be finite and nonnegative");
        cfg.grid.validation_fraction = s.positive("validation_fraction", cfg.grid.validation_fraction);
        if (cfg.grid.validation_fraction >= 1.0) throw ConfigError("config key 'grid.validation_fraction' must be below 1");
        cfg.grid.final_steps = s.count("final_steps", 0);
        cfg.grid.parallel = s.boolean("parallel", false);
        s.finish();
    }
    {
        Section s = top.child("bench");
        cfg.bench.n = s.counts("n", cfg.bench.n);
        if (cfg.bench.n.empty()) throw ConfigError("config key 'bench.n' must be nonempty");
        cfg.bench.batch_a = s.count("batch_a", cfg.bench.batch_a, 1);
        cfg.bench.batch_z = s.count("batch_z", cfg.bench.batch_z, 2);
        cfg.bench.weight = s.positive("weight", cfg.bench.weight);
        cfg.bench.data_rows = s.count("data_rows", cfg.bench.data_rows, 2);
        cfg.bench.gates = s.string("gates", cfg.bench.gates);
        if (cfg.bench.gates != "two-local-all-to-all-plus-singles" && cfg.bench.gates != "two-local-all-to-all")
            throw ConfigError("config key 'bench.gates' must be two-local-all-to-all or two-local-all-to-all-plus-singles");
        cfg.bench.repeats = s.count("repeats", 1, 1);
        s.finish();
    }
    {
        Section s = top.child("gradcheck");
        auto& g = cfg.gradcheck;
        g.batch_a = s.count("batch_a", g.batch_a, 1);
        g.batch_z = s.count("batch_z", g.batch_z, 2);
        g.h = s.positive("h", g.h);
        g.threshold = s.positive("threshold", g.threshold);
        g.bitflip_threshold = s.positive("bitflip_threshold", g.bitflip_threshold);
        g.noise = s.nonnegative("noise", g.noise);
        g.max_rows = s.count("max_rows", g.max_rows, 2);
        s.finish();
    }
    top.finish();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::ostringstream text;
    text << in.rdbuf();
    const auto dir = std::filesystem::path(path).parent_path();
    return parse_config(text.str(), dir.empty() ? "." : dir.string());
}

}  // namespace iqp::cli
