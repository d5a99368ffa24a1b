#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace imbench {

/// Dense row-major matrix of doubles. Used for feature batches, activations
/// and layer parameters alike.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), values(r * c, fill) {}
    Matrix(std::size_t r, std::size_t c, std::vector<double> v) : rows(r), cols(c), values(std::move(v)) {
        if (values.size() != rows * cols) {
            throw std::invalid_argument("Matrix: value count " + std::to_string(values.size()) +
                                        " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
        }
    }

    double& operator()(std::size_t r, std::size_t c) {
        assert(r < rows && c < cols);
        return values[r * cols + c];
    }
    double operator()(std::size_t r, std::size_t c) const {
        assert(r < rows && c < cols);
        return values[r * cols + c];
    }

    std::span<double> row(std::size_t r) { return {values.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }

    bool empty() const { return values.empty(); }
    void fill(double v) { std::fill(values.begin(), values.end(), v); }

    bool operator==(const Matrix&) const = default;
};

/// Rows of `m` selected by `indices`, in that order.
inline Matrix take_rows(const Matrix& m, std::span<const std::size_t> indices) {
    Matrix out(indices.size(), m.cols);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        auto src = m.row(indices[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

template <typename T>
std::vector<T> take(const std::vector<T>& v, std::span<const std::size_t> indices) {
    std::vector<T> out;
    out.reserve(indices.size());
    for (auto i : indices) out.push_back(v[i]);
    return out;
}

}  // namespace imbench
