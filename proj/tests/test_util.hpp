#pragma once

// Deterministic generators shared by the unit and acceptance suites.

#include <cmath>
#include <utility>
#include <vector>

#include "inclusionkit/linalg.hpp"
#include "inclusionkit/operators.hpp"
#include "inclusionkit/rng.hpp"

namespace testutil {

using inclusionkit::Matrix;
using inclusionkit::RngState;
using inclusionkit::Vector;

class Gen {
public:
    explicit Gen(std::uint64_t seed) : state_{seed, 0} {}

    double uniform(double lo, double hi) {
        auto [x, s] = inclusionkit::next_uniform(state_, lo, hi);
        state_ = s;
        return x;
    }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(uniform(0.0, static_cast<double>(hi - lo + 1) - 1e-12));
    }

    Vector vector(std::size_t dim, double lo, double hi) {
        std::vector<double> xs(dim);
        for (auto& x : xs) x = uniform(lo, hi);
        return Vector(std::move(xs));
    }

    Matrix matrix(std::size_t rows, std::size_t cols, double lo, double hi) {
        Matrix m(rows, cols);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) m.at(i, j) = uniform(lo, hi);
        return m;
    }

    /// Monotone affine operator: symmetric PSD part (M^T M + floor*I) plus
    /// a skew perturbation, so mu >= floor > 0 by construction.
    std::pair<Matrix, Vector> monotone_affine(std::size_t dim, double floor_mu = 0.1) {
        const Matrix m = matrix(dim, dim, -1.0, 1.0);
        Matrix a = m.transpose() * m;
        for (std::size_t i = 0; i < dim; ++i) a.at(i, i) += floor_mu;
        const Matrix k = matrix(dim, dim, -1.0, 1.0);
        a = a + 0.5 * (k + (-1.0) * k.transpose());
        return {a, vector(dim, -2.0, 2.0)};
    }

    /// Symmetric matrix with a prescribed well-separated spectrum, built as
    /// Q diag(eigs) Q^T from a random orthogonal Q (Gram-Schmidt).
    Matrix symmetric_with_spectrum(const std::vector<double>& eigs) {
        const std::size_t n = eigs.size();
        Matrix q = orthogonal(n);
        Matrix s(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double acc = 0.0;
                for (std::size_t k = 0; k < n; ++k) acc += q.at(i, k) * eigs[k] * q.at(j, k);
                s.at(i, j) = acc;
            }
        return s;
    }

    Matrix orthogonal(std::size_t n) {
        Matrix q = matrix(n, n, -1.0, 1.0);
        // Columnwise Gram-Schmidt; regenerates on near-dependence.
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = 0; k < j; ++k) {
                double proj = 0.0;
                for (std::size_t i = 0; i < n; ++i) proj += q.at(i, j) * q.at(i, k);
                for (std::size_t i = 0; i < n; ++i) q.at(i, j) -= proj * q.at(i, k);
            }
            double nrm = 0.0;
            for (std::size_t i = 0; i < n; ++i) nrm += q.at(i, j) * q.at(i, j);
            nrm = std::sqrt(nrm);
            if (nrm < 1e-8) {
                for (std::size_t i = 0; i < n; ++i) q.at(i, j) = uniform(-1.0, 1.0);
                j -= 1;
                continue;
            }
            for (std::size_t i = 0; i < n; ++i) q.at(i, j) /= nrm;
        }
        return q;
    }

private:
    RngState state_;
};

/// Characteristic-polynomial evaluation det(S - lambda*I) for n <= 3;
/// the brute-force eigenvalue oracle lives on top of this.
inline double char_poly(const Matrix& s, double lambda) {
    const std::size_t n = s.rows();
    if (n == 1) return s.at(0, 0) - lambda;
    if (n == 2) {
        return (s.at(0, 0) - lambda) * (s.at(1, 1) - lambda) - s.at(0, 1) * s.at(1, 0);
    }
    const double a = s.at(0, 0) - lambda, b = s.at(0, 1), c = s.at(0, 2);
    const double d = s.at(1, 0), e = s.at(1, 1) - lambda, f = s.at(1, 2);
    const double g = s.at(2, 0), h = s.at(2, 1), i = s.at(2, 2) - lambda;
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
}

/// Real roots of det(S - lambda I) by sign-change bisection over a
/// Gershgorin bracket. Assumes the spectrum is simple enough for a scan of
/// `grid` points to separate the roots (generators above guarantee this).
inline std::vector<double> eig_by_bisection(const Matrix& s, int grid = 4000) {
    double lo = s.at(0, 0), hi = s.at(0, 0);
    for (std::size_t i = 0; i < s.rows(); ++i) {
        double radius = 0.0;
        for (std::size_t j = 0; j < s.cols(); ++j) {
            if (i != j) radius += std::abs(s.at(i, j));
        }
        lo = std::min(lo, s.at(i, i) - radius);
        hi = std::max(hi, s.at(i, i) + radius);
    }
    lo -= 1e-6;
    hi += 1e-6;

    std::vector<double> roots;
    double prev_x = lo;
    double prev_f = char_poly(s, lo);
    for (int k = 1; k <= grid; ++k) {
        const double x = lo + (hi - lo) * static_cast<double>(k) / grid;
        const double f = char_poly(s, x);
        if (prev_f == 0.0) {
            roots.push_back(prev_x);
        } else if ((prev_f < 0.0) != (f < 0.0)) {
            double a = prev_x, b = x;
            double fa = prev_f;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (a + b);
                const double fm = char_poly(s, mid);
                if ((fa < 0.0) == (fm < 0.0)) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            roots.push_back(0.5 * (a + b));
        }
        prev_x = x;
        prev_f = f;
    }
    return roots;
}

}  // namespace testutil
