// Copyright 2026 The codeprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "codeprune/tensor.hpp"

#include <algorithm>

namespace codeprune {

void matvec(std::span<const float> x, const Matrix& w, std::span<float> out) {
    std::fill(out.begin(), out.end(), 0.0f);
    for (std::size_t i = 0; i < w.rows; ++i) {
        const float xi = x[i];
        const float* wr = w.data.data() + i * w.cols;
        for (std::size_t j = 0; j < w.cols; ++j) {
            out[j] += xi * wr[j];
        }
    }
}

Matrix select_columns(const Matrix& m, std::span<const std::size_t> cols) {
    Matrix out(m.rows, cols.size());
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            out.at(r, c) = m.at(r, cols[c]);
        }
    }
    return out;
}

Matrix select_rows(const Matrix& m, std::span<const std::size_t> rows) {
    Matrix out(rows.size(), m.cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::copy_n(m.data.begin() + static_cast<std::ptrdiff_t>(rows[r] * m.cols), m.cols,
                    out.data.begin() + static_cast<std::ptrdiff_t>(r * m.cols));
    }
    return out;
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace codeprune
