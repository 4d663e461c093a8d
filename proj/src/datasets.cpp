#include "iqp/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "iqp/errors.hpp"
#include "iqp/rng.hpp"

namespace iqp {

void IsingSpec::validate() const {
    if (n_nodes == 0) throw std::invalid_argument("Ising spec needs at least one node");
    if (biases.size() != n_nodes) throw ShapeError("Ising biases must have one entry per node");
    if (!(temperature > 0.0)) throw std::invalid_argument("Ising temperature must be positive");
    for (const Edge& e : edges) {
        if (e.i >= n_nodes || e.j >= n_nodes) throw std::invalid_argument("Ising edge endpoint out of range");
        if (e.i == e.j) throw std::invalid_argument("Ising edge is a self-loop");
        if (!std::isfinite(e.weight)) throw std::invalid_argument("Ising coupling must be finite");
    }
    for (double b : biases)
        if (!std::isfinite(b)) throw std::invalid_argument("Ising bias must be finite");
}

double IsingSpec::energy(std::uint64_t x) const {
    auto spin = [x](std::uint32_t i) { return ((x >> i) & 1U) ? -1.0 : 1.0; };
    double e = 0.0;
    for (const Edge& edge : edges) e -= edge.weight * spin(edge.i) * spin(edge.j);
    for (std::size_t i = 0; i < n_nodes; ++i) e -= biases[i] * spin(static_cast<std::uint32_t>(i));
    return e;
}

void McmcConfig::validate() const {
    if (n_chains == 0) throw std::invalid_argument("MCMC needs at least one chain");
    if (samples == 0) throw std::invalid_argument("MCMC needs a positive sample count");
    if (thinning == 0) throw std::invalid_argument("MCMC thinning must be positive");
}

namespace {

struct Adjacency {
    std::vector<std::size_t> offsets;
    std::vector<std::uint32_t> nbr;
    std::vector<double> w;
};

Adjacency build_adjacency(const IsingSpec& spec) {
    Adjacency adj;
    std::vector<std::size_t> deg(spec.n_nodes, 0);
    for (const Edge& e : spec.edges) {
        ++deg[e.i];
        ++deg[e.j];
    }
    adj.offsets.assign(spec.n_nodes + 1, 0);
    for (std::size_t i = 0; i < spec.n_nodes; ++i) adj.offsets[i + 1] = adj.offsets[i] + deg[i];
    adj.nbr.resize(adj.offsets.back());
    adj.w.resize(adj.offsets.back());
    std::vector<std::size_t> fill(adj.offsets.begin(), adj.offsets.end() - 1);
    for (const Edge& e : spec.edges) {
        adj.nbr[fill[e.i]] = e.j;
        adj.w[fill[e.i]++] = e.weight;
        adj.nbr[fill[e.j]] = e.i;
        adj.w[fill[e.j]++] = e.weight;
    }
    return adj;
}

// Energy change of flipping spin i: 2 s_i (sum_j w_ij s_j + b_i).
inline double flip_delta(const Adjacency& adj, const IsingSpec& spec, const std::vector<signed char>& s,
                         std::size_t i) {
    double field = spec.biases[i];
    for (std::size_t k = adj.offsets[i]; k < adj.offsets[i + 1]; ++k) field += adj.w[k] * s[adj.nbr[k]];
    return 2.0 * s[i] * field;
}

inline double acceptance(double delta, double temperature) {
    if (delta <= 0.0 || std::isinf(temperature)) return 1.0;
    return std::exp(-delta / temperature);
}

}  // namespace

BitMatrix metropolis_sample(const IsingSpec& spec, const McmcConfig& cfg) {
    spec.validate();
    cfg.validate();
    const std::size_t n = spec.n_nodes;
    const Adjacency adj = build_adjacency(spec);
    BitMatrix out(cfg.samples, n);
    const std::size_t base = cfg.samples / cfg.n_chains;
    const std::size_t extra = cfg.samples % cfg.n_chains;

#pragma omp parallel for schedule(static, 1)
    for (std::ptrdiff_t cc = 0; cc < static_cast<std::ptrdiff_t>(cfg.n_chains); ++cc) {
        const auto c = static_cast<std::size_t>(cc);
        const std::size_t keep = base + (c < extra ? 1 : 0);
        const std::size_t first_row = c * base + std::min(c, extra);
        Rng rng = make_rng(cfg.seed, Stream::Mcmc, c);
        std::vector<signed char> s(n);
        for (auto& v : s) v = bernoulli(rng, 0.5) ? -1 : 1;
        auto sweep = [&]() {
            for (std::size_t step = 0; step < n; ++step) {
                const std::size_t i = uniform_index(rng, n);
                const double delta = flip_delta(adj, spec, s, i);
                const double acc = acceptance(delta, spec.temperature);
                if (acc >= 1.0 || uniform01(rng) < acc) s[i] = static_cast<signed char>(-s[i]);
            }
        };
        for (std::size_t b = 0; b < cfg.burn_in_sweeps; ++b) sweep();
        for (std::size_t k = 0; k < keep; ++k) {
            for (std::size_t t = 0; t < cfg.thinning; ++t) sweep();
            for (std::size_t i = 0; i < n; ++i)
                if (s[i] < 0) out.set(first_row + k, i, true);
        }
    }
    return out;
}

std::vector<double> metropolis_transition_matrix(const IsingSpec& spec) {
    spec.validate();
    const std::size_t n = spec.n_nodes;
    if (n > 12) throw LimitError("explicit transition kernel limited to 12 nodes");
    const std::size_t size = std::size_t{1} << n;
    std::vector<double> p(size * size, 0.0);
    const double pick = 1.0 / static_cast<double>(n);
    for (std::size_t x = 0; x < size; ++x) {
        const double ex = spec.energy(x);
        double stay = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t y = x ^ (std::size_t{1} << i);
            const double move = pick * acceptance(spec.energy(y) - ex, spec.temperature);
            p[x * size + y] = move;
            stay -= move;
        }
        p[x * size + x] = stay;
    }
    return p;
}

std::vector<double> boltzmann_distribution(const IsingSpec& spec) {
    spec.validate();
    if (spec.n_nodes > 24) throw LimitError("Boltzmann enumeration limited to 24 nodes");
    const std::size_t size = std::size_t{1} << spec.n_nodes;
    std::vector<double> p(size);
    if (std::isinf(spec.temperature)) {
        std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(size));
        return p;
    }
    double emin = std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < size; ++x) {
        p[x] = spec.energy(x);
        emin = std::min(emin, p[x]);
    }
    double z = 0.0;
    for (double& v : p) {
        v = std::exp(-(v - emin) / spec.temperature);
        z += v;
    }
    for (double& v : p) v /= z;
    return p;
}

std::pair<BitMatrix, IsingSpec> gen_ising_2d(std::size_t side, double temperature, double coupling_low,
                                             double coupling_high, const McmcConfig& mcmc) {
    if (side < 2) throw std::invalid_argument("lattice side must be at least 2");
    if (!(coupling_low <= coupling_high) || !std::isfinite(coupling_low) || !std::isfinite(coupling_high))
        throw std::invalid_argument("coupling bounds must be finite with low <= high");
    IsingSpec spec;
    spec.n_nodes = side * side;
    spec.biases.assign(spec.n_nodes, 0.0);
    spec.temperature = temperature;
    Rng rng = make_rng(mcmc.seed, Stream::Couplings);
    auto node = [side](std::size_t r, std::size_t c) { return static_cast<std::uint32_t>(r * side + c); };
    for (std::size_t r = 0; r < side; ++r) {
        for (std::size_t c = 0; c < side; ++c) {
            const std::uint32_t here = node(r, c);
            const std::uint32_t right = node(r, (c + 1) % side);
            const std::uint32_t down = node((r + 1) % side, c);
            // A 2-wide periodic lattice would duplicate its wrap-around bonds.
            if (side > 2 || c + 1 < side)
                spec.edges.push_back({here, right, coupling_low + (coupling_high - coupling_low) * uniform01(rng)});
            if (side > 2 || r + 1 < side)
                spec.edges.push_back({here, down, coupling_low + (coupling_high - coupling_low) * uniform01(rng)});
        }
    }
    BitMatrix data = metropolis_sample(spec, mcmc);
    return {std::move(data), std::move(spec)};
}

BitMatrix gen_blobs(const BlobSpec& spec, std::size_t count, std::uint64_t seed) {
    if (spec.patterns.empty()) throw std::invalid_argument("blob spec needs at least one pattern");
    if (!(spec.flip_prob >= 0.0 && spec.flip_prob <= 0.5)) throw std::invalid_argument("flip_prob must lie in [0, 1/2]");
    const std::size_t n = spec.patterns.width();
    BitMatrix out(count, n);
    Rng rng = make_rng(seed, Stream::Blobs);
    for (std::size_t r = 0; r < count; ++r) {
        out.copy_row(r, spec.patterns, uniform_index(rng, spec.patterns.rows()));
        for (std::size_t b = 0; b < n; ++b)
            if (bernoulli(rng, spec.flip_prob)) out.flip(r, b);
    }
    return out;
}

std::vector<Edge> barabasi_albert(std::size_t n_nodes, std::size_t m, std::uint64_t seed) {
    if (m < 1 || n_nodes <= m) throw std::invalid_argument("Barabasi-Albert needs n_nodes > connectivity >= 1");
    std::vector<Edge> edges;
    std::vector<std::uint32_t> repeated;  // node i appears degree(i) times
    for (std::uint32_t v = 1; v <= m; ++v) {
        edges.push_back({0, v, 1.0});
        repeated.push_back(0);
        repeated.push_back(v);
    }
    Rng rng = make_rng(seed, Stream::Graph);
    std::vector<std::uint32_t> targets;
    std::vector<char> chosen(n_nodes, 0);
    for (std::size_t src = m + 1; src < n_nodes; ++src) {
        targets.clear();
        while (targets.size() < m) {
            const std::uint32_t t = repeated[uniform_index(rng, repeated.size())];
            if (chosen[t]) continue;
            chosen[t] = 1;
            targets.push_back(t);
        }
        for (std::uint32_t t : targets) {
            chosen[t] = 0;
            edges.push_back({t, static_cast<std::uint32_t>(src), 1.0});
            repeated.push_back(t);
            repeated.push_back(static_cast<std::uint32_t>(src));
        }
    }
    return edges;
}

BiasFn linear_degree_bias(double c) {
    return [c](std::size_t degree) { return c * static_cast<double>(degree); };
}

std::pair<BitMatrix, IsingSpec> gen_scale_free(std::size_t n_nodes, std::size_t ba_connectivity, double temperature,
                                               const BiasFn& bias_fn, const McmcConfig& mcmc, double coupling) {
    IsingSpec spec;
    spec.n_nodes = n_nodes;
    spec.temperature = temperature;
    spec.edges = barabasi_albert(n_nodes, ba_connectivity, derive_seed(mcmc.seed, Stream::Graph));
    std::vector<std::size_t> degree(n_nodes, 0);
    for (Edge& e : spec.edges) {
        e.weight = coupling;
        ++degree[e.i];
        ++degree[e.j];
    }
    spec.biases.resize(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) spec.biases[i] = bias_fn ? bias_fn(degree[i]) : 0.0;
    BitMatrix data = metropolis_sample(spec, mcmc);
    return {std::move(data), std::move(spec)};
}

std::pair<BitMatrix, BitMatrix> train_test_split(const BitMatrix& data, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw std::invalid_argument("test_fraction must lie in (0, 1)");
    const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(data.rows()) * test_fraction));
    if (n_test == 0 || n_test == data.rows())
        throw ShapeError("train/test split of " + std::to_string(data.rows()) + " rows leaves an empty part");
    std::vector<std::size_t> idx(data.rows());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng rng = make_rng(seed, Stream::Split);
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[uniform_index(rng, i)]);
    const std::span<const std::size_t> all(idx);
    BitMatrix test = data.select_rows(all.first(n_test));
    BitMatrix train = data.select_rows(all.subspan(n_test));
    return {std::move(train), std::move(test)};
}

}  // namespace iqp
