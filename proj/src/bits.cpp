#include "iqp/bits.hpp"

#include <algorithm>

#include "iqp/errors.hpp"

namespace iqp {

std::vector<std::uint32_t> set_bits(BitRow row) {
    std::vector<std::uint32_t> out;
    for (std::size_t w = 0; w < row.size(); ++w) {
        Word bits = row[w];
        while (bits != 0) {
            const int b = std::countr_zero(bits);
            out.push_back(static_cast<std::uint32_t>(w * kWordBits + static_cast<std::size_t>(b)));
            bits &= bits - 1;
        }
    }
    return out;
}

BitMatrix::BitMatrix(std::size_t rows, std::size_t width)
    : rows_(rows), width_(width), words_per_row_(words_for_bits(width)) {
    if (width == 0) throw ShapeError("BitMatrix width must be positive");
    words_.assign(rows_ * words_per_row_, 0);
}

BitMatrix BitMatrix::from_strings(const std::vector<std::string>& rows) {
    if (rows.empty()) throw ShapeError("cannot infer width from an empty row list");
    BitMatrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::string& r = rows[i];
        if (r.size() != m.width_)
            throw ShapeError("row " + std::to_string(i) + " has width " + std::to_string(r.size()) +
                             ", expected " + std::to_string(m.width_));
        for (std::size_t b = 0; b < r.size(); ++b) {
            if (r[b] == '1') {
                m.set(i, b, true);
            } else if (r[b] != '0') {
                throw FormatError("row " + std::to_string(i) + " contains non-binary character");
            }
        }
    }
    return m;
}

void BitMatrix::copy_row(std::size_t i, const BitMatrix& src, std::size_t src_row) {
    if (src.width_ != width_) throw ShapeError("copy_row width mismatch");
    auto from = src.row(src_row);
    std::copy(from.begin(), from.end(), mutable_row(i).begin());
}

BitMatrix BitMatrix::select_rows(std::span<const std::size_t> indices) const {
    BitMatrix out(indices.size(), width_);
    for (std::size_t i = 0; i < indices.size(); ++i) out.copy_row(i, *this, indices[i]);
    return out;
}

std::string BitMatrix::row_string(std::size_t i) const {
    std::string s(width_, '0');
    for (std::size_t b = 0; b < width_; ++b)
        if (get(i, b)) s[b] = '1';
    return s;
}

BitColumns::BitColumns(const BitMatrix& m, std::size_t row_begin, std::size_t row_end)
    : rows_(row_end - row_begin), width_(m.width()), words_per_col_(words_for_bits(row_end - row_begin)) {
    if (row_end < row_begin || row_end > m.rows()) throw ShapeError("BitColumns row range out of bounds");
    bits_.assign(width_ * words_per_col_, 0);
    for (std::size_t r = 0; r < rows_; ++r) {
        const Word rbit = Word{1} << (r % kWordBits);
        const std::size_t rword = r / kWordBits;
        BitRow row = m.row(row_begin + r);
        for (std::size_t w = 0; w < row.size(); ++w) {
            Word bits = row[w];
            while (bits != 0) {
                const std::size_t q = w * kWordBits + static_cast<std::size_t>(std::countr_zero(bits));
                bits_[q * words_per_col_ + rword] |= rbit;
                bits &= bits - 1;
            }
        }
    }
}

void BitColumns::xor_columns(std::span<const std::uint32_t> qubits, std::size_t word_begin,
                             std::span<Word> out) const {
    std::fill(out.begin(), out.end(), Word{0});
    const std::size_t n = out.size();
    for (std::uint32_t q : qubits) {
        const Word* col = column(q) + word_begin;
        for (std::size_t w = 0; w < n; ++w) out[w] ^= col[w];
    }
}

std::size_t BitColumns::count_odd(std::span<const std::uint32_t> qubits, std::vector<Word>& scratch) const {
    scratch.resize(words_per_col_);
    xor_columns(qubits, 0, scratch);
    std::size_t c = 0;
    for (Word w : scratch) c += static_cast<std::size_t>(std::popcount(w));
    return c;
}

}  // namespace iqp
