#include "mra/bitmat.hpp"

#include <stdexcept>

namespace mra {

BitMatrix::BitMatrix(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0 || cols > 64) {
        throw std::invalid_argument("BitMatrix: bad shape");
    }
    data_.assign(rows, 0);
}

void BitMatrix::set(int r, int c, bool v) {
    if (v) {
        data_[r] |= uint64_t{1} << c;
    } else {
        data_[r] &= ~(uint64_t{1} << c);
    }
}

BitMatrix BitMatrix::from_hex(int rows, int cols, std::string_view hex) {
    BitMatrix m(rows, cols);
    const long nbits = static_cast<long>(rows) * cols;
    if (static_cast<long>(hex.size()) != (nbits + 3) / 4) {
        throw std::invalid_argument("BitMatrix::from_hex: length mismatch");
    }
    for (long t = 0; t < nbits; ++t) {
        char ch = hex[t / 4];
        int digit;
        if (ch >= '0' && ch <= '9') {
            digit = ch - '0';
        } else if (ch >= 'a' && ch <= 'f') {
            digit = ch - 'a' + 10;
        } else if (ch >= 'A' && ch <= 'F') {
            digit = ch - 'A' + 10;
        } else {
            throw std::invalid_argument("BitMatrix::from_hex: bad digit");
        }
        if ((digit >> (t % 4)) & 1) {
            m.set(static_cast<int>(t / cols), static_cast<int>(t % cols), true);
        }
    }
    return m;
}

std::string BitMatrix::to_hex() const {
    const long nbits = static_cast<long>(rows_) * cols_;
    std::string out((nbits + 3) / 4, '0');
    static const char* digits = "0123456789abcdef";
    std::vector<int> acc(out.size(), 0);
    for (long t = 0; t < nbits; ++t) {
        if (get(static_cast<int>(t / cols_), static_cast<int>(t % cols_))) {
            acc[t / 4] |= 1 << (t % 4);
        }
    }
    for (size_t i = 0; i < out.size(); ++i) out[i] = digits[acc[i]];
    return out;
}

int BitMatrix::rank() const {
    std::vector<uint64_t> rows(data_);
    int r = 0;
    for (int c = 0; c < cols_ && r < rows_; ++c) {
        const uint64_t bit = uint64_t{1} << c;
        int pivot = -1;
        for (int i = r; i < rows_; ++i) {
            if (rows[i] & bit) {
                pivot = i;
                break;
            }
        }
        if (pivot < 0) continue;
        std::swap(rows[r], rows[pivot]);
        for (int i = 0; i < rows_; ++i) {
            if (i != r && (rows[i] & bit)) rows[i] ^= rows[r];
        }
        ++r;
    }
    return r;
}

}  // namespace mra
