#pragma once

#include <cmath>
#include <vector>

#include "lda/errors.hpp"

namespace lda {

using Vec = std::vector<double>;

// Row-major dense matrix. Small and loop-friendly; reduction order is the
// plain left-to-right order of the loops, which keeps runs bit-reproducible.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0)
        : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

    Vec row(int r) const {
        return Vec(data.begin() + static_cast<std::ptrdiff_t>(r) * cols,
                   data.begin() + static_cast<std::ptrdiff_t>(r + 1) * cols);
    }

    void set_row(int r, const Vec& v) {
        for (int c = 0; c < cols; ++c) at(r, c) = v[c];
    }
};

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double l2_norm(const Vec& v) { return std::sqrt(dot(v, v)); }

inline constexpr double kNormEps = 1e-12;

// Scale to unit length; the norm is floored at kNormEps so a zero vector
// maps to zero instead of NaN.
inline Vec normalized(const Vec& v) {
    double n = std::max(l2_norm(v), kNormEps);
    Vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
    return out;
}

inline bool all_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline bool all_finite(const Matrix& m) {
    for (double x : m.data)
        if (!std::isfinite(x)) return false;
    return true;
}

} // namespace lda
