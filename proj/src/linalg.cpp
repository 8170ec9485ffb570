#include "inclusionkit/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace inclusionkit {

namespace {

void require_finite(const std::vector<double>& xs, const char* what) {
    for (double x : xs) {
        if (!std::isfinite(x)) {
            throw NonFiniteError(std::string(what) + ": non-finite entry");
        }
    }
}

void require_same_dim(const Vector& a, const Vector& b, const char* what) {
    if (a.dim() != b.dim()) {
        throw DimensionError(std::string(what) + ": dimension mismatch (" +
                             std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
    }
}

}  // namespace

Vector::Vector(std::vector<double> coords) : coords_(std::move(coords)) {
    if (coords_.empty()) {
        throw DimensionError("Vector: dimension must be >= 1");
    }
    require_finite(coords_, "Vector");
}

Vector::Vector(std::initializer_list<double> coords) : Vector(std::vector<double>(coords)) {}

Vector Vector::zeros(std::size_t dim) {
    if (dim == 0) {
        throw DimensionError("Vector::zeros: dimension must be >= 1");
    }
    return Vector(std::vector<double>(dim, 0.0));
}

bool Vector::all_finite() const {
    for (double x : coords_) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

Vector operator+(const Vector& a, const Vector& b) {
    require_same_dim(a, b, "operator+");
    std::vector<double> out(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) out[i] = a[i] + b[i];
    return Vector(std::move(out));
}

Vector operator-(const Vector& a, const Vector& b) {
    require_same_dim(a, b, "operator-");
    std::vector<double> out(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) out[i] = a[i] - b[i];
    return Vector(std::move(out));
}

Vector operator*(double s, const Vector& v) {
    std::vector<double> out(v.dim());
    for (std::size_t i = 0; i < v.dim(); ++i) out[i] = s * v[i];
    return Vector(std::move(out));
}

bool operator==(const Vector& a, const Vector& b) {
    return a.coords() == b.coords();
}

double dot(const Vector& a, const Vector& b) {
    require_same_dim(a, b, "dot");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm(const Vector& v, NormKind kind) {
    switch (kind) {
        case NormKind::euclidean:
            return std::sqrt(dot(v, v));
        case NormKind::one: {
            double acc = 0.0;
            for (std::size_t i = 0; i < v.dim(); ++i) acc += std::abs(v[i]);
            return acc;
        }
        case NormKind::infinity_norm: {
            double acc = 0.0;
            for (std::size_t i = 0; i < v.dim(); ++i) acc = std::max(acc, std::abs(v[i]));
            return acc;
        }
    }
    std::abort();  // unreachable
}

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), entries_(rows * cols, 0.0) {
    if (rows == 0 || cols == 0) {
        throw ShapeError("Matrix: rows and cols must be >= 1");
    }
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (rows == 0 || cols == 0) {
        throw ShapeError("Matrix: rows and cols must be >= 1");
    }
    if (entries_.size() != rows * cols) {
        throw ShapeError("Matrix: entry count does not match rows*cols");
    }
    require_finite(entries_, "Matrix");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
    if (rows_ == 0 || cols_ == 0) {
        throw ShapeError("Matrix: rows and cols must be >= 1");
    }
    entries_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) {
            throw ShapeError("Matrix: ragged initializer");
        }
        entries_.insert(entries_.end(), r.begin(), r.end());
    }
    require_finite(entries_, "Matrix");
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

Matrix Matrix::zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }

Matrix Matrix::diagonal(const std::vector<double>& d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m.at(i, i) = d[i];
    require_finite(d, "Matrix::diagonal");
    return m;
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t.at(j, i) = at(i, j);
    return t;
}

bool Matrix::all_finite() const {
    for (double x : entries_) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError("Matrix operator+: shape mismatch");
    }
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out.at(i, j) = a.at(i, j) + b.at(i, j);
    return out;
}

Matrix operator*(double s, const Matrix& a) {
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out.at(i, j) = s * a.at(i, j);
    return out;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("Matrix operator*: inner dimensions differ");
    }
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a.at(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) {
                out.at(i, j) += aik * b.at(k, j);
            }
        }
    }
    return out;
}

Vector operator*(const Matrix& a, const Vector& v) {
    if (a.cols() != v.dim()) {
        throw DimensionError("Matrix*Vector: dimension mismatch");
    }
    std::vector<double> out(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) acc += a.at(i, j) * v[j];
        out[i] = acc;
    }
    return Vector(std::move(out));
}

bool operator==(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (a.at(i, j) != b.at(i, j)) return false;
    return true;
}

Vector solve(const Matrix& a, const Vector& b) {
    if (!a.square()) {
        throw ShapeError("solve: matrix must be square");
    }
    if (a.rows() != b.dim()) {
        throw DimensionError("solve: right-hand side dimension mismatch");
    }
    const std::size_t n = a.rows();

    // Augmented working copy, eliminated in place with row pivoting.
    Matrix work = a;
    std::vector<double> rhs = b.coords();
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        double best = std::abs(work.at(perm[col], col));
        for (std::size_t r = col + 1; r < n; ++r) {
            const double cand = std::abs(work.at(perm[r], col));
            if (cand > best) {
                best = cand;
                pivot = r;
            }
        }
        if (best == 0.0) {
            throw SingularSystemError("solve: singular matrix (zero pivot)");
        }
        std::swap(perm[col], perm[pivot]);

        const double p = work.at(perm[col], col);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = work.at(perm[r], col) / p;
            if (f == 0.0) continue;
            work.at(perm[r], col) = 0.0;
            for (std::size_t c = col + 1; c < n; ++c) {
                work.at(perm[r], c) -= f * work.at(perm[col], c);
            }
            rhs[perm[r]] -= f * rhs[perm[col]];
        }
    }

    std::vector<double> x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double acc = rhs[perm[i]];
        for (std::size_t j = i + 1; j < n; ++j) acc -= work.at(perm[i], j) * x[j];
        x[i] = acc / work.at(perm[i], i);
    }

    Vector sol(std::move(x));
    const Vector residual = a * sol - b;
    if (norm(residual) > 1e-10 * norm(b)) {
        throw SingularSystemError("solve: residual check failed (ill-conditioned system)");
    }
    return sol;
}

std::vector<double> symmetric_eigenvalues(const Matrix& a) {
    if (!a.square()) {
        throw ShapeError("symmetric_eigenvalues: matrix must be square");
    }
    const std::size_t n = a.rows();
    Matrix m = a;
    // Symmetrize defensively against round-off in callers' (A+A^T)/2.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double avg = 0.5 * (m.at(i, j) + m.at(j, i));
            m.at(i, j) = avg;
            m.at(j, i) = avg;
        }

    double frob = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) frob += m.at(i, j) * m.at(i, j);
    frob = std::sqrt(frob);
    const double tol = (frob == 0.0) ? 0.0 : 1e-15 * frob;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += 2.0 * m.at(i, j) * m.at(i, j);
        if (std::sqrt(off) <= tol) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = m.at(p, q);
                if (apq == 0.0) continue;
                const double app = m.at(p, p);
                const double aqq = m.at(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0)
                                     ? 1.0 / (theta + std::sqrt(1.0 + theta * theta))
                                     : 1.0 / (theta - std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double mkp = m.at(k, p);
                    const double mkq = m.at(k, q);
                    m.at(k, p) = c * mkp - s * mkq;
                    m.at(k, q) = s * mkp + c * mkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double mpk = m.at(p, k);
                    const double mqk = m.at(q, k);
                    m.at(p, k) = c * mpk - s * mqk;
                    m.at(q, k) = s * mpk + c * mqk;
                }
            }
        }
    }

    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = m.at(i, i);
    std::sort(eig.begin(), eig.end());
    return eig;
}

SpectralBounds spectral_bounds(const Matrix& a) {
    if (!a.square()) {
        throw ShapeError("spectral_bounds: matrix must be square");
    }
    if (!a.all_finite()) {
        throw NonFiniteError("spectral_bounds: non-finite entries");
    }
    const Matrix sym = 0.5 * (a + a.transpose());
    const std::vector<double> sym_eig = symmetric_eigenvalues(sym);

    const Matrix gram = a.transpose() * a;
    const std::vector<double> gram_eig = symmetric_eigenvalues(gram);
    const double lmax = std::max(0.0, gram_eig.back());

    return SpectralBounds{sym_eig.front(), std::sqrt(lmax)};
}

}  // namespace inclusionkit
