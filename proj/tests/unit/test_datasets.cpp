#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "iqp/datasets.hpp"
#include "iqp/errors.hpp"
#include "iqp/expval.hpp"

using namespace iqp;

namespace {

IsingSpec chain3() {
    IsingSpec s;
    s.n_nodes = 3;
    s.edges = {{0, 1, 0.8}, {1, 2, -0.5}};
    s.biases = {0.3, 0.0, -0.2};
    s.temperature = 1.0;
    return s;
}

// Boltzmann weights written out from the energy definition.
std::vector<double> boltzmann_direct(const IsingSpec& s) {
    const std::size_t size = std::size_t{1} << s.n_nodes;
    std::vector<double> p(size);
    double z = 0.0;
    for (std::uint64_t x = 0; x < size; ++x) {
        auto spin = [&](std::size_t i) { return ((x >> i) & 1U) ? -1.0 : 1.0; };
        double e = 0.0;
        for (const auto& edge : s.edges) e -= edge.weight * spin(edge.i) * spin(edge.j);
        for (std::size_t i = 0; i < s.n_nodes; ++i) e -= s.biases[i] * spin(i);
        z += (p[x] = std::exp(-e / s.temperature));
    }
    for (double& v : p) v /= z;
    return p;
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("iqp_test_" + name);
}

}  // namespace

TEST_CASE("IsingSpec validation and energy") {
    auto s = chain3();
    CHECK_NOTHROW(s.validate());
    const auto p = boltzmann_direct(s);
    const auto q = boltzmann_distribution(s);
    for (std::size_t x = 0; x < 8; ++x) CHECK(q[x] == doctest::Approx(p[x]).epsilon(1e-12));
    // All spins +1 (x = 0): E = -(0.8 - 0.5) - (0.3 - 0.2).
    CHECK(s.energy(0) == doctest::Approx(-0.4));
    s.edges.push_back({1, 1, 1.0});
    CHECK_THROWS(s.validate());
    s = chain3();
    s.edges.push_back({0, 3, 1.0});
    CHECK_THROWS(s.validate());
    s = chain3();
    s.temperature = 0.0;
    CHECK_THROWS(s.validate());
    s = chain3();
    s.biases.pop_back();
    CHECK_THROWS(s.validate());
}

TEST_CASE("Metropolis kernel leaves the Boltzmann vector invariant") {
    for (double t : {0.5, 1.0, 3.0}) {
        auto s = chain3();
        s.temperature = t;
        const auto p = boltzmann_direct(s);
        const auto k = metropolis_transition_matrix(s);
        REQUIRE(k.size() == 64);
        for (std::size_t x = 0; x < 8; ++x) {
            double row = 0.0;
            for (std::size_t y = 0; y < 8; ++y) {
                row += k[x * 8 + y];
                // Detailed balance.
                CHECK(std::abs(p[x] * k[x * 8 + y] - p[y] * k[y * 8 + x]) < 1e-12);
            }
            CHECK(row == doctest::Approx(1.0).epsilon(1e-14));
        }
        for (std::size_t y = 0; y < 8; ++y) {
            double acc = 0.0;
            for (std::size_t x = 0; x < 8; ++x) acc += p[x] * k[x * 8 + y];
            CHECK(std::abs(acc - p[y]) < 1e-10);
        }
    }
}

TEST_CASE("Metropolis samples match the 3-spin Boltzmann distribution") {
    const auto s = chain3();
    McmcConfig cfg;
    cfg.n_chains = 8;
    cfg.burn_in_sweeps = 200;
    cfg.samples = 1000000;
    cfg.thinning = 2;
    cfg.seed = 3;
    const auto rows = metropolis_sample(s, cfg);
    REQUIRE(rows.rows() == cfg.samples);
    std::vector<double> emp(8, 0.0);
    for (std::size_t i = 0; i < rows.rows(); ++i) emp[rows.row(i)[0]] += 1.0;
    const auto p = boltzmann_direct(s);
    double tv = 0.0;
    for (std::size_t x = 0; x < 8; ++x) tv += std::abs(emp[x] / static_cast<double>(rows.rows()) - p[x]) / 2;
    CHECK(tv < 0.02);
    CHECK(rows == metropolis_sample(s, cfg));
}

TEST_CASE("Metropolis limits") {
    McmcConfig cfg;
    cfg.burn_in_sweeps = 5;
    cfg.samples = 20000;
    // Ten sweeps between kept rows make successive rows effectively independent.
    cfg.thinning = 10;
    cfg.seed = 8;
    SUBCASE("infinite temperature gives uniform bits") {
        IsingSpec s = chain3();
        s.temperature = std::numeric_limits<double>::infinity();
        const auto rows = metropolis_sample(s, cfg);
        for (std::size_t b = 0; b < 3; ++b) {
            double m = 0;
            for (std::size_t i = 0; i < rows.rows(); ++i) m += rows.get(i, b);
            m /= static_cast<double>(rows.rows());
            CHECK(std::abs(m - 0.5) < 4 * std::sqrt(0.25 / rows.rows()));
        }
    }
    SUBCASE("bias toward zero with no couplings") {
        IsingSpec s;
        s.n_nodes = 5;
        s.biases.assign(5, 4.0);
        s.temperature = 1.0;
        const auto rows = metropolis_sample(s, cfg);
        for (std::size_t b = 0; b < 5; ++b) {
            double m = 0;
            for (std::size_t i = 0; i < rows.rows(); ++i) m += rows.get(i, b);
            CHECK(m / static_cast<double>(rows.rows()) < 0.01);
        }
    }
    SUBCASE("chain row counts") {
        cfg.samples = 10;
        cfg.n_chains = 4;
        CHECK(metropolis_sample(chain3(), cfg).rows() == 10);
        cfg.samples = 0;
        CHECK_THROWS(metropolis_sample(chain3(), cfg));
    }
}

TEST_CASE("gen_ising_2d") {
    McmcConfig cfg;
    cfg.burn_in_sweeps = 50;
    cfg.samples = 4000;
    cfg.seed = 4;
    const auto [data, spec] = gen_ising_2d(4, 3.0, 0.0, 2.0, cfg);
    CHECK(data.width() == 16);
    CHECK(data.rows() == 4000);
    CHECK(spec.edges.size() == 32);
    for (const auto& e : spec.edges) {
        CHECK(e.weight >= 0.0);
        CHECK(e.weight <= 2.0);
    }
    for (double b : spec.biases) CHECK(b == 0.0);
    std::map<std::pair<std::uint32_t, std::uint32_t>, int> bonds;
    for (const auto& e : spec.edges) ++bonds[{std::min(e.i, e.j), std::max(e.i, e.j)}];
    CHECK(bonds.size() == 32);
    // Node 0 neighbours on the periodic lattice: 1, 3, 4, 12.
    for (auto nb : {1U, 3U, 4U, 12U}) CHECK(bonds.count({0U, nb}) == 1);

    const auto again = gen_ising_2d(4, 3.0, 0.0, 2.0, cfg);
    CHECK(again.first == data);
    CHECK(gen_ising_2d(2, 1.0, 1.0, 1.0, cfg).second.edges.size() == 4);
    CHECK_THROWS(gen_ising_2d(1, 1.0, 0.0, 1.0, cfg));
    CHECK_THROWS(gen_ising_2d(4, 1.0, 2.0, 1.0, cfg));
}

TEST_CASE("zero couplings give uncorrelated spins") {
    McmcConfig cfg;
    cfg.burn_in_sweeps = 20;
    cfg.samples = 20000;
    cfg.thinning = 10;
    cfg.seed = 5;
    const auto [data, spec] = gen_ising_2d(3, 1.0, 0.0, 0.0, cfg);
    const double n = static_cast<double>(data.rows());
    for (std::size_t i = 0; i < 9; ++i)
        for (std::size_t j = i + 1; j < 9; ++j) {
            double si = 0, sj = 0, sij = 0;
            for (std::size_t r = 0; r < data.rows(); ++r) {
                const double a = data.get(r, i) ? -1.0 : 1.0, b = data.get(r, j) ? -1.0 : 1.0;
                si += a;
                sj += b;
                sij += a * b;
            }
            const double cov = sij / n - (si / n) * (sj / n);
            CHECK(std::abs(cov) < 4 * std::sqrt(1.0 / n));
        }
}

TEST_CASE("gen_blobs") {
    BitMatrix patterns = BitMatrix::from_strings({"1111000000000000", "0000111100000000", "0000000011110000",
                                                  "0000000000001111", "1010101010101010", "0101010101010101",
                                                  "1100110011001100", "0011001100110011"});
    SUBCASE("no noise reproduces patterns") {
        const auto rows = gen_blobs({patterns, 0.0}, 500, 1);
        for (std::size_t i = 0; i < rows.rows(); ++i) {
            bool found = false;
            for (std::size_t p = 0; p < patterns.rows(); ++p) found |= rows.row_string(i) == patterns.row_string(p);
            CHECK(found);
        }
    }
    SUBCASE("flip noise") {
        const std::size_t count = 100000;
        const auto rows = gen_blobs({BitMatrix(1, 16), 0.05}, count, 2);
        double dist = 0.0;
        for (std::size_t i = 0; i < count; ++i) dist += static_cast<double>(hamming_weight(rows.row(i)));
        const double se = std::sqrt(16 * 0.05 * 0.95 / count);
        CHECK(std::abs(dist / count - 0.8) <= 4 * se);
    }
    SUBCASE("mode balance") {
        // Patterns are at least 8 apart, so the nearest pattern identifies the mode.
        const std::size_t count = 100000;
        const auto rows = gen_blobs({patterns, 0.05}, count, 2);
        std::vector<double> counts(8, 0.0);
        for (std::size_t i = 0; i < count; ++i) {
            std::size_t best = 0, best_d = 99;
            for (std::size_t p = 0; p < 8; ++p) {
                const auto d = hamming_distance(rows.row(i), patterns.row(p));
                if (d < best_d) best_d = d, best = p;
            }
            counts[best] += 1;
        }
        for (double c : counts) CHECK(std::abs(c - count / 8.0) <= 5 * std::sqrt(count * (1.0 / 8) * (7.0 / 8)));
        CHECK(rows == gen_blobs({patterns, 0.05}, count, 2));
    }
    SUBCASE("half flip probability gives uniform bits") {
        const auto rows = gen_blobs({BitMatrix::from_strings({"11110000"}), 0.5}, 40000, 3);
        for (std::size_t b = 0; b < 8; ++b) {
            double m = 0;
            for (std::size_t i = 0; i < rows.rows(); ++i) m += rows.get(i, b);
            CHECK(std::abs(m / rows.rows() - 0.5) <= 4 * std::sqrt(0.25 / rows.rows()));
        }
    }
    CHECK_THROWS(gen_blobs({BitMatrix(), 0.05}, 10, 1));
    CHECK_THROWS(gen_blobs({patterns, 0.7}, 10, 1));
}

TEST_CASE("barabasi_albert") {
    const auto edges = barabasi_albert(1000, 2, 7);
    CHECK(edges.size() == 1996);
    std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
    std::vector<std::size_t> degree(1000, 0);
    for (const auto& e : edges) {
        CHECK(e.i != e.j);
        CHECK(e.i < 1000);
        CHECK(e.j < 1000);
        CHECK(seen.insert({std::min(e.i, e.j), std::max(e.i, e.j)}).second);
        ++degree[e.i];
        ++degree[e.j];
    }
    for (auto d : degree) CHECK(d >= 2);
    CHECK(*std::max_element(degree.begin(), degree.end()) > 20);
    CHECK(edges == barabasi_albert(1000, 2, 7));
    CHECK(barabasi_albert(10, 3, 1).size() == 21);
    CHECK_THROWS(barabasi_albert(2, 2, 1));
    CHECK_THROWS(barabasi_albert(5, 0, 1));
}

TEST_CASE("gen_scale_free") {
    McmcConfig cfg;
    cfg.burn_in_sweeps = 20;
    cfg.samples = 2000;
    cfg.thinning = 10;
    cfg.seed = 6;
    const auto [data, spec] = gen_scale_free(60, 2, 1.0, linear_degree_bias(0.1), cfg);
    CHECK(data.width() == 60);
    CHECK(spec.edges.size() == 2 * 58);
    std::vector<std::size_t> degree(60, 0);
    for (const auto& e : spec.edges) {
        CHECK(e.weight == 1.0);
        ++degree[e.i];
        ++degree[e.j];
    }
    for (std::size_t i = 0; i < 60; ++i) CHECK(spec.biases[i] == doctest::Approx(0.1 * degree[i]));

    const auto [free_data, free_spec] = gen_scale_free(30, 2, 1.0, [](std::size_t) { return 0.0; }, cfg, 0.0);
    for (std::size_t b = 0; b < 30; ++b) {
        double m = 0;
        for (std::size_t i = 0; i < free_data.rows(); ++i) m += free_data.get(i, b);
        CHECK(std::abs(m / free_data.rows() - 0.5) <= 4 * std::sqrt(0.25 / free_data.rows()));
    }
    const auto [biased, bspec] = gen_scale_free(30, 2, 1.0, [](std::size_t) { return 5.0; }, cfg, 0.0);
    for (std::size_t b = 0; b < 30; ++b) {
        double m = 0;
        for (std::size_t i = 0; i < biased.rows(); ++i) m += biased.get(i, b);
        CHECK(m / biased.rows() < 0.01);
    }
}

TEST_CASE("text dataset IO") {
    std::istringstream in("0101\n0011\n");
    const auto m = read_text_dataset(in);
    CHECK(m.rows() == 2);
    CHECK(m.width() == 4);
    CHECK(m.row_string(1) == "0011");
    std::ostringstream out;
    write_text_dataset(out, m);
    CHECK(out.str() == "0101\n0011\n");
    std::istringstream bad("0101\n0021\n");
    CHECK_THROWS_AS(read_text_dataset(bad), FormatError);
    std::istringstream ragged("0101\n011\n");
    CHECK_THROWS_AS(read_text_dataset(ragged), FormatError);
}

TEST_CASE("packed dataset IO") {
    const auto m = BitMatrix::from_strings({"1000000000000001", "0110000000000000", "1111111111111111"});
    std::ostringstream out;
    write_packed_dataset(out, m);
    const std::string bytes = out.str();
    CHECK(bytes.size() == 16 + 3 * 2);
    CHECK(bytes.substr(0, 4) == "IQPB");
    CHECK(static_cast<unsigned char>(bytes[4]) == 1);
    CHECK(static_cast<unsigned char>(bytes[8]) == 16);
    CHECK(static_cast<unsigned char>(bytes[12]) == 3);
    // Row 0: bit 0 and bit 15 set, little-endian bit order within bytes.
    CHECK(static_cast<unsigned char>(bytes[16]) == 0x01);
    CHECK(static_cast<unsigned char>(bytes[17]) == 0x80);
    std::istringstream in(bytes);
    CHECK(read_packed_dataset(in) == m);

    std::string corrupt = bytes;
    corrupt[0] = 'X';
    std::istringstream c1(corrupt);
    CHECK_THROWS_AS(read_packed_dataset(c1), FormatError);
    std::istringstream c2(bytes.substr(0, bytes.size() - 1));
    CHECK_THROWS_AS(read_packed_dataset(c2), FormatError);
    std::istringstream c3(bytes + "x");
    CHECK_THROWS_AS(read_packed_dataset(c3), FormatError);

    const auto odd = BitMatrix::from_strings({"101", "011"});
    std::ostringstream o2;
    write_packed_dataset(o2, odd);
    std::string padded = o2.str();
    padded[16] = static_cast<char>(padded[16] | 0x80);
    std::istringstream c4(padded);
    CHECK_THROWS_AS(read_packed_dataset(c4), FormatError);
}

TEST_CASE("dataset files round trip") {
    std::mt19937_64 rng(1);
    for (std::size_t width : {1, 7, 64, 70, 130}) {
        BitMatrix m(37, width);
        for (std::size_t i = 0; i < m.rows(); ++i)
            for (std::size_t b = 0; b < width; ++b) m.set(i, b, rng() & 1);
        for (auto fmt : {DatasetFormat::Text, DatasetFormat::Packed}) {
            const auto path = temp_file("roundtrip" + std::to_string(width) + (fmt == DatasetFormat::Packed ? ".iqpb" : ".txt"));
            save_dataset(path.string(), m, fmt);
            CHECK(load_dataset(path.string(), fmt) == m);
            CHECK(format_for_path(path.string()) == fmt);
            std::filesystem::remove(path);
        }
    }
    CHECK_THROWS(load_dataset(temp_file("does_not_exist").string(), DatasetFormat::Text));
}

TEST_CASE("Ising spec IO round trip") {
    IsingSpec s = chain3();
    s.edges[0].weight = 0.1 + 1e-17;
    s.temperature = 3.0;
    std::ostringstream out;
    write_ising_spec(out, s);
    std::istringstream in(out.str());
    CHECK(read_ising_spec(in) == s);
    s.temperature = std::numeric_limits<double>::infinity();
    std::ostringstream out2;
    write_ising_spec(out2, s);
    std::istringstream in2(out2.str());
    CHECK(read_ising_spec(in2).temperature == s.temperature);
    std::istringstream bad("nodes 2\ntemperature 1\nedges 1\n0 5 1.0\nbiases\n0 0\n");
    CHECK_THROWS_AS(read_ising_spec(bad), FormatError);
}

TEST_CASE("train_test_split") {
    const auto data = sample_uniform(20, 5008, 1);
    const auto [train, test] = train_test_split(data, 1.0 / 3.0, 9);
    CHECK(test.rows() == 1669);
    CHECK(train.rows() == 5008 - 1669);
    std::multiset<std::string> all, parts;
    for (std::size_t i = 0; i < data.rows(); ++i) all.insert(data.row_string(i));
    for (std::size_t i = 0; i < train.rows(); ++i) parts.insert(train.row_string(i));
    for (std::size_t i = 0; i < test.rows(); ++i) parts.insert(test.row_string(i));
    CHECK(all == parts);
    const auto again = train_test_split(data, 1.0 / 3.0, 9);
    CHECK(again.first == train);
    CHECK(again.second == test);
    CHECK_THROWS(train_test_split(sample_uniform(4, 3, 1), 0.2, 1));
    CHECK_THROWS(train_test_split(data, 0.0, 1));
    CHECK_THROWS(train_test_split(data, 1.0, 1));
}
