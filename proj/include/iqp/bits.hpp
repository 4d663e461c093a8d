#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace iqp {

using Word = std::uint64_t;
inline constexpr std::size_t kWordBits = 64;

constexpr std::size_t words_for_bits(std::size_t bits) { return (bits + kWordBits - 1) / kWordBits; }

using BitRow = std::span<const Word>;

/// Parity of the bitwise AND of two packed rows of equal length.
inline int and_parity(BitRow a, BitRow b) {
    Word acc = 0;
    for (std::size_t w = 0; w < a.size(); ++w) acc ^= a[w] & b[w];
    return std::popcount(acc) & 1;
}

inline std::size_t hamming_distance(BitRow a, BitRow b) {
    std::size_t d = 0;
    for (std::size_t w = 0; w < a.size(); ++w) d += static_cast<std::size_t>(std::popcount(a[w] ^ b[w]));
    return d;
}

inline std::size_t hamming_weight(BitRow a) {
    std::size_t d = 0;
    for (Word w : a) d += static_cast<std::size_t>(std::popcount(w));
    return d;
}

/// Indices of the set bits of a packed row, ascending.
std::vector<std::uint32_t> set_bits(BitRow row);

/// A batch of equal-width bitstrings packed row-major, little-endian within
/// 64-bit words (bit i of a row lives in word i/64 at position i%64).
/// Padding bits past `width` are always zero.
class BitMatrix {
public:
    BitMatrix() = default;
    /// Zero-filled matrix. Throws std::invalid_argument on width 0.
    BitMatrix(std::size_t rows, std::size_t width);

    /// Parses rows of '0'/'1' characters; all rows must share one width.
    static BitMatrix from_strings(const std::vector<std::string>& rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t words_per_row() const noexcept { return words_per_row_; }
    bool empty() const noexcept { return rows_ == 0; }

    BitRow row(std::size_t i) const {
        return {words_.data() + i * words_per_row_, words_per_row_};
    }
    std::span<Word> mutable_row(std::size_t i) {
        return {words_.data() + i * words_per_row_, words_per_row_};
    }

    bool get(std::size_t i, std::size_t bit) const {
        return (words_[i * words_per_row_ + bit / kWordBits] >> (bit % kWordBits)) & 1U;
    }
    void set(std::size_t i, std::size_t bit, bool value) {
        Word& w = words_[i * words_per_row_ + bit / kWordBits];
        const Word m = Word{1} << (bit % kWordBits);
        w = value ? (w | m) : (w & ~m);
    }
    void flip(std::size_t i, std::size_t bit) {
        words_[i * words_per_row_ + bit / kWordBits] ^= Word{1} << (bit % kWordBits);
    }

    /// Copies row `src_row` of `src` (same width) into row `i`.
    void copy_row(std::size_t i, const BitMatrix& src, std::size_t src_row);

    /// New matrix made of the listed rows, in order.
    BitMatrix select_rows(std::span<const std::size_t> indices) const;

    std::string row_string(std::size_t i) const;
    std::span<const Word> data() const noexcept { return words_; }

    friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t width_ = 0;
    std::size_t words_per_row_ = 0;
    std::vector<Word> words_;
};

/// Column-major transpose of (a row range of) a BitMatrix: column q holds bit q
/// of every row, 64 rows per word. Row r of the range maps to bit r%64 of word
/// r/64; padding bits are zero. XOR-ing columns gives parities for all rows at
/// once, which is how every batched parity in the engine is computed.
class BitColumns {
public:
    BitColumns() = default;
    explicit BitColumns(const BitMatrix& m) : BitColumns(m, 0, m.rows()) {}
    BitColumns(const BitMatrix& m, std::size_t row_begin, std::size_t row_end);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t words() const noexcept { return words_per_col_; }

    const Word* column(std::size_t q) const { return bits_.data() + q * words_per_col_; }

    /// out[w] = XOR over q in `qubits` of column(q)[w] for w in [word_begin, word_begin + out.size()).
    void xor_columns(std::span<const std::uint32_t> qubits, std::size_t word_begin,
                     std::span<Word> out) const;

    /// Number of rows r with odd overlap between row r and the index set `qubits`.
    std::size_t count_odd(std::span<const std::uint32_t> qubits, std::vector<Word>& scratch) const;

private:
    std::size_t rows_ = 0;
    std::size_t width_ = 0;
    std::size_t words_per_col_ = 0;
    std::vector<Word> bits_;
};

}  // namespace iqp
