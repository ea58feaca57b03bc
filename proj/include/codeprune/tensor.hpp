// Copyright 2026 The codeprune Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstring>
#include <span>
#include <vector>

namespace codeprune {

// Dense row-major f32 matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, float fill = 0.0f) : rows(r), cols(c), data(r * c, fill) {}

    float& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    float at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<float> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const float> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    std::size_t size() const { return data.size(); }
};

using Vector = std::vector<float>;

inline bool bit_equal(std::span<const float> a, std::span<const float> b) {
    return a.size() == b.size() &&
           (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0);
}

inline bool bit_equal(const Matrix& a, const Matrix& b) {
    return a.rows == b.rows && a.cols == b.cols && bit_equal(a.data, b.data);
}

// out[j] = sum_i x[i] * w(i, j) (+ bias[j]); accumulation order over i is fixed.
void matvec(std::span<const float> x, const Matrix& w, std::span<float> out);

// Keeps the listed columns of `m` in the given order.
Matrix select_columns(const Matrix& m, std::span<const std::size_t> cols);
// Keeps the listed rows of `m` in the given order.
Matrix select_rows(const Matrix& m, std::span<const std::size_t> rows);

// Pairwise summation; the result does not depend on thread scheduling.
double pairwise_sum(std::span<const double> values);

}  // namespace codeprune
