#include "gcf/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace gcf {

namespace {

thread_local std::uint64_t g_mac_count = 0;
thread_local int g_mac_scopes = 0;

std::string shape_str(std::size_t r, std::size_t c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    require(data_.size() == rows_ * cols_, "shape_mismatch",
            "matrix data length " + std::to_string(data_.size()) + " does not match shape " +
                shape_str(rows_, cols_));
    ensure_finite("matrix construction");
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    std::size_t r = rows.size();
    require(r > 0, "empty_input", "from_rows needs at least one row");
    std::size_t c = rows.begin()->size();
    std::vector<double> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
        require(row.size() == c, "shape_mismatch", "ragged rows in from_rows");
        data.insert(data.end(), row.begin(), row.end());
    }
    return Matrix(r, c, std::move(data));
}

bool Matrix::all_finite() const noexcept {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void Matrix::ensure_finite(const std::string& context) const {
    for (std::size_t idx = 0; idx < data_.size(); ++idx) {
        if (!std::isfinite(data_[idx])) {
            throw GcfError("non_finite", context + ": non-finite entry at (" +
                                              std::to_string(idx / std::max<std::size_t>(cols_, 1)) +
                                              "," + std::to_string(idx % std::max<std::size_t>(cols_, 1)) +
                                              ")");
        }
    }
}

Matrix& Matrix::operator+=(const Matrix& other) {
    require(same_shape(other), "shape_mismatch",
            "add: " + shape_string(*this) + " vs " + shape_string(other));
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
    require(same_shape(other), "shape_mismatch",
            "sub: " + shape_string(*this) + " vs " + shape_string(other));
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

std::string shape_string(const Matrix& m) { return shape_str(m.rows(), m.cols()); }

MacCounterScope::MacCounterScope() {
    if (g_mac_scopes == 0) g_mac_count = 0;
    ++g_mac_scopes;
}

MacCounterScope::~MacCounterScope() { --g_mac_scopes; }

std::uint64_t MacCounterScope::count() const { return g_mac_count; }

namespace detail {
void tally_macs(std::uint64_t n) noexcept {
    if (g_mac_scopes > 0) g_mac_count += n;
}
}  // namespace detail

Matrix matmul(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.rows(), "shape_mismatch",
            "matmul: " + shape_string(a) + " * " + shape_string(b));
    Matrix c(a.rows(), b.cols());
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    for (std::size_t i = 0; i < m; ++i) {
        double* ci = c.row(i);
        const double* ai = a.row(i);
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = ai[p];
            const double* bp = b.row(p);
            for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
        }
    }
    detail::tally_macs(static_cast<std::uint64_t>(m) * k * n);
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

Vector matvec(const Matrix& m, const Vector& x) {
    require(m.cols() == x.size(), "shape_mismatch",
            "matvec: " + shape_string(m) + " * vector[" + std::to_string(x.size()) + "]");
    Vector y(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double* ri = m.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) acc += ri[j] * x[j];
        y[i] = acc;
    }
    detail::tally_macs(static_cast<std::uint64_t>(m.rows()) * m.cols());
    return y;
}

Vector matvec_transposed(const Matrix& m, const Vector& x) {
    require(m.rows() == x.size(), "shape_mismatch",
            "matvec_transposed: " + shape_string(m) + "^T * vector[" + std::to_string(x.size()) +
                "]");
    Vector y(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double* ri = m.row(i);
        const double xi = x[i];
        for (std::size_t j = 0; j < m.cols(); ++j) y[j] += ri[j] * xi;
    }
    detail::tally_macs(static_cast<std::uint64_t>(m.rows()) * m.cols());
    return y;
}

Matrix outer(const Vector& u, const Vector& v) {
    Matrix m(u.size(), v.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = u[i] * v[j];
    return m;
}

Matrix row_softmax(const Matrix& x) {
    require(x.rows() > 0 && x.cols() > 0, "empty_input", "row_softmax: empty matrix");
    Matrix y(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double* xi = x.row(i);
        double* yi = y.row(i);
        double mx = xi[0];
        for (std::size_t j = 1; j < x.cols(); ++j) mx = std::max(mx, xi[j]);
        double denom = 0.0;
        for (std::size_t j = 0; j < x.cols(); ++j) {
            yi[j] = std::exp(xi[j] - mx);
            denom += yi[j];
        }
        for (std::size_t j = 0; j < x.cols(); ++j) yi[j] /= denom;
    }
    return y;
}

Vector softmax(const Vector& x) {
    require(!x.empty(), "empty_input", "softmax: empty vector");
    Vector y(x.size());
    double mx = x[0];
    for (double v : x) mx = std::max(mx, v);
    double denom = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        y[j] = std::exp(x[j] - mx);
        denom += y[j];
    }
    for (double& v : y) v /= denom;
    return y;
}

Matrix sigmoid(const Matrix& x) {
    Matrix y(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.size(); ++i) y.data()[i] = 1.0 / (1.0 + std::exp(-x.data()[i]));
    return y;
}

Matrix relu(const Matrix& x) {
    Matrix y(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.size(); ++i) y.data()[i] = std::max(0.0, x.data()[i]);
    return y;
}

Vector sigmoid(const Vector& x) {
    Vector y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = 1.0 / (1.0 + std::exp(-x[i]));
    return y;
}

Vector relu(const Vector& x) {
    Vector y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::max(0.0, x[i]);
    return y;
}

Vector row_mean(const Matrix& x) {
    require(x.rows() > 0 && x.cols() > 0, "empty_input", "row_mean: empty matrix");
    Vector m(x.rows(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double* ri = x.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < x.cols(); ++j) acc += ri[j];
        m[i] = acc / static_cast<double>(x.cols());
    }
    return m;
}

Vector col_mean(const Matrix& x) {
    require(x.rows() > 0 && x.cols() > 0, "empty_input", "col_mean: empty matrix");
    Vector m = col_sum(x);
    for (double& v : m) v /= static_cast<double>(x.rows());
    return m;
}

Vector col_sum(const Matrix& x) {
    require(x.rows() > 0 && x.cols() > 0, "empty_input", "col_sum: empty matrix");
    Vector m(x.cols(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double* ri = x.row(i);
        for (std::size_t j = 0; j < x.cols(); ++j) m[j] += ri[j];
    }
    return m;
}

double sum(const Matrix& x) {
    require(!x.empty(), "empty_input", "sum: empty matrix");
    double acc = 0.0;
    for (double v : x.values()) acc += v;
    return acc;
}

double l1_norm(const Matrix& x) {
    require(!x.empty(), "empty_input", "l1_norm: empty matrix");
    double acc = 0.0;
    for (double v : x.values()) acc += std::abs(v);
    return acc;
}

double l1_norm(const Vector& x) {
    require(!x.empty(), "empty_input", "l1_norm: empty vector");
    double acc = 0.0;
    for (double v : x) acc += std::abs(v);
    return acc;
}

double dot(const Vector& a, const Vector& b) {
    require(a.size() == b.size(), "shape_mismatch",
            "dot: lengths " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

std::size_t argmax(const Vector& v) {
    require(!v.empty(), "empty_input", "argmax: empty vector");
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

Vector add(const Vector& a, const Vector& b) {
    require(a.size() == b.size(), "shape_mismatch", "vector add: length mismatch");
    Vector y(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) y[i] = a[i] + b[i];
    return y;
}

Vector scale(const Vector& a, double s) {
    Vector y(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) y[i] = a[i] * s;
    return y;
}

}  // namespace gcf
