#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mra {

// Dense binary matrix with up to 64 columns; row r is a bitmask whose
// bit c is the entry in column c.
class BitMatrix {
  public:
    BitMatrix() = default;
    BitMatrix(int rows, int cols);

    // Hex form: bits concatenated row-major (bit index t = column t % cols
    // of row t / cols), packed 4 per hex digit, low bit of a digit first.
    static BitMatrix from_hex(int rows, int cols, std::string_view hex);
    std::string to_hex() const;

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    uint64_t row(int r) const { return data_[r]; }
    uint64_t& row(int r) { return data_[r]; }
    bool get(int r, int c) const { return (data_[r] >> c) & 1u; }
    void set(int r, int c, bool v);

    // Rank over GF(2).
    int rank() const;

    bool operator==(const BitMatrix&) const = default;

  private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<uint64_t> data_;
};

}  // namespace mra
