#include "sage/linalg.hpp"

#include <cmath>
#include <string>

namespace sage {

double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) {
        throw DimError("dot: size mismatch " + std::to_string(a.size()) + " vs " +
                       std::to_string(b.size()));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double l2_norm(const Vec& v) { return std::sqrt(dot(v, v)); }

Vec matvec(const Matrix& m, const Vec& x) {
    if (m.cols != x.size()) {
        throw DimError("matvec: " + std::to_string(m.rows) + "x" + std::to_string(m.cols) +
                       " times vector of size " + std::to_string(x.size()));
    }
    Vec y(m.rows, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r) {
        double s = 0.0;
        const double* row = m.data.data() + r * m.cols;
        for (std::size_t c = 0; c < m.cols; ++c) s += row[c] * x[c];
        y[r] = s;
    }
    return y;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) {
        throw DimError("matmul: inner dimensions " + std::to_string(a.cols) + " vs " +
                       std::to_string(b.rows));
    }
    Matrix out(a.rows, b.cols, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            double aik = a.at(i, k);
            if (aik == 0.0) continue;
            const double* brow = b.data.data() + k * b.cols;
            double* orow = out.data.data() + i * out.cols;
            for (std::size_t j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

Matrix transpose(const Matrix& m) {
    Matrix out(m.cols, m.rows);
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t c = 0; c < m.cols; ++c) out.at(c, r) = m.at(r, c);
    }
    return out;
}

}  // namespace sage
