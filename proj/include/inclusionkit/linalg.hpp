#pragma once

// Minimal dense vector/matrix kernels. Everything here is desk-scale
// (dimensions stay well under 100), so the implementation favors checked,
// obvious algorithms over tuned ones.

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "inclusionkit/errors.hpp"

namespace inclusionkit {

enum class NormKind { euclidean, one, infinity_norm };

/// Dense real vector; dimension >= 1 and all entries finite by construction.
class Vector {
public:
    explicit Vector(std::vector<double> coords);
    Vector(std::initializer_list<double> coords);
    static Vector zeros(std::size_t dim);

    std::size_t dim() const { return coords_.size(); }
    double operator[](std::size_t i) const { return coords_[i]; }
    double& operator[](std::size_t i) { return coords_[i]; }
    const std::vector<double>& coords() const { return coords_; }

    bool all_finite() const;

private:
    std::vector<double> coords_;
};

Vector operator+(const Vector& a, const Vector& b);
Vector operator-(const Vector& a, const Vector& b);
Vector operator*(double s, const Vector& v);
bool operator==(const Vector& a, const Vector& b);

double dot(const Vector& a, const Vector& b);
double norm(const Vector& v, NormKind kind = NormKind::euclidean);

/// Dense row-major matrix.
class Matrix {
public:
    Matrix(std::size_t rows, std::size_t cols);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);
    static Matrix identity(std::size_t n);
    static Matrix zeros(std::size_t rows, std::size_t cols);
    static Matrix diagonal(const std::vector<double>& d);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }
    double at(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }
    double& at(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }

    Matrix transpose() const;
    bool all_finite() const;

private:
    std::size_t rows_, cols_;
    std::vector<double> entries_;
};

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, const Vector& v);
bool operator==(const Matrix& a, const Matrix& b);

/// Partial-pivot elimination; verifies ||Ax - b|| <= 1e-10 * ||b|| and
/// throws SingularSystemError otherwise.
Vector solve(const Matrix& a, const Vector& b);

/// Eigenvalues of a symmetric matrix via cyclic Jacobi rotations,
/// ascending order.
std::vector<double> symmetric_eigenvalues(const Matrix& a);

struct SpectralBounds {
    double mu;  // smallest eigenvalue of (A + A^T)/2; may be <= 0
    double L;   // largest singular value of A
};

/// Strong-monotonicity and Lipschitz moduli of the linear map x -> Ax.
SpectralBounds spectral_bounds(const Matrix& a);

}  // namespace inclusionkit
