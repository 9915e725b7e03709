#pragma once

#include <cmath>
#include <string>

#include "gcf/matrix.hpp"
#include "gcf/rng.hpp"

namespace gcf::testutil {

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
    Matrix m(rows, cols);
    for (double& v : m.values()) v = scale * rng.next_gaussian();
    return m;
}

inline Vector random_vector(Rng& rng, std::size_t n, double scale = 1.0) {
    Vector v(n);
    for (double& x : v) x = scale * rng.next_gaussian();
    return v;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            worst = std::max(worst, std::abs(a(i, j) - b(i, j)));
        }
    }
    return worst;
}

inline double max_abs_diff(const Vector& a, const Vector& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

// Directory the test data files live in; resolved from the macro the build
// sets so tests run from any working directory.
std::string data_path(const std::string& name);

}  // namespace gcf::testutil
