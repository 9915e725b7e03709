#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "gcf/error.hpp"

namespace gcf {

using Vector = std::vector<double>;

// Dense row-major matrix, double precision. The substrate for every weight,
// descriptor set and gradient in the library.
class Matrix {
public:
    Matrix() = default;

    // Zero-filled r x c matrix.
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    // Takes ownership of `data` (row-major). Rejects size mismatches and
    // non-finite entries.
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Matrix identity(std::size_t n);
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }
    std::span<const double> values() const noexcept { return data_; }
    std::span<double> values() noexcept { return data_; }

    double* row(std::size_t i) noexcept { return data_.data() + i * cols_; }
    const double* row(std::size_t i) const noexcept { return data_.data() + i * cols_; }

    bool all_finite() const noexcept;
    // Throws if any entry is NaN/Inf; `context` names the tensor in the error.
    void ensure_finite(const std::string& context) const;

    bool same_shape(const Matrix& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(double s);

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

std::string shape_string(const Matrix& m);

// --- multiply-accumulate accounting -----------------------------------------
//
// Every matmul/matvec tallies m*n*k MACs into a thread-local counter while a
// MacCounterScope is alive. Used to cross-check the analytic complexity
// formulas against what the forward pass actually executes.
class MacCounterScope {
public:
    MacCounterScope();
    ~MacCounterScope();
    MacCounterScope(const MacCounterScope&) = delete;
    MacCounterScope& operator=(const MacCounterScope&) = delete;
    std::uint64_t count() const;
};

namespace detail {
void tally_macs(std::uint64_t n) noexcept;
}

// --- core operations ---------------------------------------------------------

// Standard product (m x k)(k x n) -> (m x n). Rejects k mismatches, naming
// both shapes.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

// y = M x, with M (r x c) and x length c.
Vector matvec(const Matrix& m, const Vector& x);
// y = M^T x, with M (r x c) and x length r.
Vector matvec_transposed(const Matrix& m, const Vector& x);
// u v^T as an (len(u) x len(v)) matrix.
Matrix outer(const Vector& u, const Vector& v);

// Row-wise softmax with max-subtraction.
Matrix row_softmax(const Matrix& x);
Vector softmax(const Vector& x);

Matrix sigmoid(const Matrix& x);
Matrix relu(const Matrix& x);
Vector sigmoid(const Vector& x);
Vector relu(const Vector& x);

// Reductions. All reject empty input.
Vector row_mean(const Matrix& x);
Vector col_mean(const Matrix& x);
double sum(const Matrix& x);
double l1_norm(const Matrix& x);
double l1_norm(const Vector& x);

Vector col_sum(const Matrix& x);

double dot(const Vector& a, const Vector& b);
std::size_t argmax(const Vector& v);  // ties -> lowest index

Vector add(const Vector& a, const Vector& b);
Vector scale(const Vector& a, double s);

}  // namespace gcf
