#ifndef CFB_MATRIX_HPP
#define CFB_MATRIX_HPP

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace cfb {

// Minimal row-major dense matrix, just enough for datasets and MLP batches.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

using Vec = std::vector<double>;

inline void check_same_size(const Vec& a, const Vec& b, const char* what) {
    if (a.size() != b.size()) throw std::invalid_argument(what);
}

}  // namespace cfb

#endif
