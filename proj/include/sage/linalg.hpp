#pragma once

#include <cstddef>
#include <vector>

#include "sage/errors.hpp"

namespace sage {

using Vec = std::vector<double>;

// Dense row-major matrix. Small and dumb on purpose; every shape in this
// project is tiny.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

double dot(const Vec& a, const Vec& b);
double l2_norm(const Vec& v);
Vec matvec(const Matrix& m, const Vec& x);
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);

}  // namespace sage
