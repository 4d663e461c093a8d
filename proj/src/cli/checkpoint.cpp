#include "checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "iqp/errors.hpp"

namespace iqp::cli {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
    check_bound(ckpt.gates, ckpt.params);
    out << "iqpmmd-checkpoint " << kCheckpointVersion << '\n';
    out << "n_qubits " << ckpt.gates.n_qubits() << '\n';
    out << "kind " << to_string(ckpt.kind) << '\n';
    out << "generators " << ckpt.gates.size() << '\n';
    for (std::size_t j = 0; j < ckpt.gates.size(); ++j) {
        const auto g = ckpt.gates.generator(j);
        for (std::size_t i = 0; i < g.size(); ++i) out << (i ? " " : "") << g[i];
        out << '\n';
    }
    out << "params " << ckpt.params.size() << '\n';
    for (double v : ckpt.params.values()) out << format_double(v) << '\n';
    const Provenance& p = ckpt.provenance;
    out << "provenance\n";
    out << "config_hash " << (p.config_hash.empty() ? "-" : p.config_hash) << '\n';
    out << "seed " << p.seed << '\n';
    out << "steps " << p.steps << '\n';
    out << "sigmas " << p.sigmas.size();
    for (double s : p.sigmas) out << ' ' << format_double(s);
    out << '\n';
    out << "bandwidth_rule " << (p.bandwidth_rule.empty() ? "-" : p.bandwidth_rule) << '\n';
    out << "end\n";
}

namespace {

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    std::string next() {
        std::string line;
        if (!std::getline(in_, line)) throw FormatError("checkpoint: unexpected end of file after line " + std::to_string(no_));
        ++no_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    }

    // "key value" with a fixed key; returns the value text.
    std::string field(const std::string& key) {
        const std::string line = next();
        if (line.rfind(key + " ", 0) != 0 && line != key)
            throw FormatError("checkpoint line " + std::to_string(no_) + ": expected '" + key + "'");
        return line.size() > key.size() ? line.substr(key.size() + 1) : std::string();
    }

    std::size_t no() const { return no_; }

private:
    std::istream& in_;
    std::size_t no_ = 0;
};

std::size_t parse_count(const std::string& text, const LineReader& r) {
    std::size_t pos = 0;
    try {
        const unsigned long long v = std::stoull(text, &pos);
        if (pos != text.size()) throw std::invalid_argument("trailing");
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw FormatError("checkpoint line " + std::to_string(r.no()) + ": bad integer '" + text + "'");
    }
}

double parse_double(const std::string& text, const LineReader& r) {
    std::size_t pos = 0;
    try {
        const double v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw FormatError("checkpoint line " + std::to_string(r.no()) + ": bad number '" + text + "'");
    }
}

}  // namespace

Checkpoint read_checkpoint(std::istream& in) {
    LineReader r(in);
    const std::string version = r.field("iqpmmd-checkpoint");
    if (parse_count(version, r) != static_cast<std::size_t>(kCheckpointVersion))
        throw FormatError("checkpoint: unsupported version " + version);
    const std::size_t n = parse_count(r.field("n_qubits"), r);
    Checkpoint ckpt;
    try {
        ckpt.kind = parse_model_kind(r.field("kind"));
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("checkpoint: ") + e.what());
    }
    const std::size_t m = parse_count(r.field("generators"), r);
    std::vector<std::vector<std::uint32_t>> gens(m);
    for (auto& g : gens) {
        std::istringstream s(r.next());
        long long q = 0;
        while (s >> q) {
            if (q < 0) throw FormatError("checkpoint line " + std::to_string(r.no()) + ": negative qubit index");
            g.push_back(static_cast<std::uint32_t>(q));
        }
        if (!s.eof()) throw FormatError("checkpoint line " + std::to_string(r.no()) + ": bad generator");
    }
    const std::size_t pm = parse_count(r.field("params"), r);
    if (pm != m) throw FormatError("checkpoint: generator count differs from parameter count");
    std::vector<double> theta(pm);
    for (double& t : theta) t = parse_double(r.next(), r);
    try {
        ckpt.gates = GateSet(n, gens);
        ckpt.params = ParamVector(std::move(theta));
    } catch (const std::exception& e) {
        throw FormatError(std::string("checkpoint: ") + e.what());
    }
    r.field("provenance");
    Provenance& p = ckpt.provenance;
    p.config_hash = r.field("config_hash");
    p.seed = parse_count(r.field("seed"), r);
    p.steps = parse_count(r.field("steps"), r);
    {
        std::istringstream s(r.field("sigmas"));
        std::size_t count = 0;
        s >> count;
        std::string tok;
        while (s >> tok) p.sigmas.push_back(parse_double(tok, r));
        if (p.sigmas.size() != count) throw FormatError("checkpoint: sigma count mismatch");
    }
    p.bandwidth_rule = r.field("bandwidth_rule");
    r.field("end");
    return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_checkpoint(out, ckpt);
    if (!out) throw std::runtime_error("write to " + path + " failed");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint " + path);
    return read_checkpoint(in);
}

}  // namespace iqp::cli
