#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "iqp/datasets.hpp"
#include "iqp/errors.hpp"

namespace iqp {

namespace {

constexpr std::array<char, 4> kMagic{'I', 'Q', 'P', 'B'};
constexpr std::uint32_t kPackedVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
    const std::array<unsigned char, 4> b{static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                         static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b.data()), 4);
}

std::uint32_t get_u32(std::istream& in) {
    std::array<unsigned char, 4> b{};
    if (!in.read(reinterpret_cast<char*>(b.data()), 4)) throw FormatError("packed dataset: truncated header");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

DatasetFormat format_for_path(const std::string& path) {
    return ends_with(path, ".iqpb") ? DatasetFormat::Packed : DatasetFormat::Text;
}

void write_text_dataset(std::ostream& out, const BitMatrix& data) {
    for (std::size_t i = 0; i < data.rows(); ++i) {
        out << data.row_string(i) << '\n';
    }
}

BitMatrix read_text_dataset(std::istream& in) {
    std::vector<std::string> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        for (char c : line)
            if (c != '0' && c != '1')
                throw FormatError("dataset line " + std::to_string(line_no) + ": unexpected character '" +
                                  std::string(1, c) + "'");
        if (!rows.empty() && line.size() != rows.front().size())
            throw FormatError("dataset line " + std::to_string(line_no) + ": width " + std::to_string(line.size()) +
                              " differs from " + std::to_string(rows.front().size()));
        rows.push_back(std::move(line));
    }
    if (rows.empty()) throw FormatError("dataset is empty");
    return BitMatrix::from_strings(rows);
}

void write_packed_dataset(std::ostream& out, const BitMatrix& data) {
    if (data.rows() > std::numeric_limits<std::uint32_t>::max() ||
        data.width() > std::numeric_limits<std::uint32_t>::max())
        throw ShapeError("dataset too large for the packed format");
    out.write(kMagic.data(), kMagic.size());
    put_u32(out, kPackedVersion);
    put_u32(out, static_cast<std::uint32_t>(data.width()));
    put_u32(out, static_cast<std::uint32_t>(data.rows()));
    const std::size_t row_bytes = (data.width() + 7) / 8;
    std::vector<char> buf(row_bytes);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        const BitRow row = data.row(i);
        for (std::size_t b = 0; b < row_bytes; ++b) buf[b] = static_cast<char>((row[b / 8] >> (8 * (b % 8))) & 0xFFU);
        out.write(buf.data(), static_cast<std::streamsize>(row_bytes));
    }
}

BitMatrix read_packed_dataset(std::istream& in) {
    std::array<char, 4> magic{};
    if (!in.read(magic.data(), 4) || magic != kMagic) throw FormatError("packed dataset: bad magic");
    const std::uint32_t version = get_u32(in);
    if (version != kPackedVersion) throw FormatError("packed dataset: unsupported version " + std::to_string(version));
    const std::uint32_t width = get_u32(in);
    const std::uint32_t rows = get_u32(in);
    if (width == 0) throw FormatError("packed dataset: zero width");
    BitMatrix out(rows, width);
    const std::size_t row_bytes = (width + 7) / 8;
    std::vector<unsigned char> buf(row_bytes);
    const unsigned tail = width % 8;
    for (std::size_t i = 0; i < rows; ++i) {
        if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(row_bytes)))
            throw FormatError("packed dataset: truncated payload at row " + std::to_string(i));
        if (tail != 0 && (buf.back() >> tail) != 0)
            throw FormatError("packed dataset: nonzero padding bits at row " + std::to_string(i));
        auto row = out.mutable_row(i);
        for (std::size_t b = 0; b < row_bytes; ++b) row[b / 8] |= static_cast<Word>(buf[b]) << (8 * (b % 8));
    }
    if (in.peek() != std::char_traits<char>::eof()) throw FormatError("packed dataset: trailing bytes after payload");
    return out;
}

void save_dataset(const std::string& path, const BitMatrix& data, DatasetFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    if (format == DatasetFormat::Packed) {
        write_packed_dataset(out, data);
    } else {
        write_text_dataset(out, data);
    }
    if (!out) throw std::runtime_error("write to " + path + " failed");
}

BitMatrix load_dataset(const std::string& path, DatasetFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return format == DatasetFormat::Packed ? read_packed_dataset(in) : read_text_dataset(in);
}

void write_ising_spec(std::ostream& out, const IsingSpec& spec) {
    auto num = [](double v) {
        std::ostringstream s;
        s.precision(17);
        s << v;
        return s.str();
    };
    out << "nodes " << spec.n_nodes << '\n';
    out << "temperature " << num(spec.temperature) << '\n';
    out << "edges " << spec.edges.size() << '\n';
    for (const Edge& e : spec.edges) out << e.i << ' ' << e.j << ' ' << num(e.weight) << '\n';
    out << "biases\n";
    for (double b : spec.biases) out << num(b) << '\n';
}

IsingSpec read_ising_spec(std::istream& in) {
    IsingSpec spec;
    std::string key;
    auto expect = [&](const char* name) {
        if (!(in >> key) || key != name) throw FormatError(std::string("Ising spec: expected '") + name + "'");
    };
    auto read_double = [&]() {
        std::string tok;
        if (!(in >> tok)) throw FormatError("Ising spec: truncated");
        try {
            return std::stod(tok);
        } catch (const std::exception&) {
            if (tok == "inf") return std::numeric_limits<double>::infinity();
            throw FormatError("Ising spec: bad number '" + tok + "'");
        }
    };
    expect("nodes");
    if (!(in >> spec.n_nodes)) throw FormatError("Ising spec: bad node count");
    expect("temperature");
    spec.temperature = read_double();
    expect("edges");
    std::size_t m = 0;
    if (!(in >> m)) throw FormatError("Ising spec: bad edge count");
    spec.edges.resize(m);
    for (Edge& e : spec.edges) {
        if (!(in >> e.i >> e.j)) throw FormatError("Ising spec: bad edge line");
        e.weight = read_double();
    }
    expect("biases");
    spec.biases.resize(spec.n_nodes);
    for (double& b : spec.biases) b = read_double();
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("Ising spec: ") + e.what());
    }
    return spec;
}

}  // namespace iqp
