#include "inclusionkit/resolvents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace inclusionkit {

Vector resolve_affine(const Matrix& a, const Vector& b, double gamma, const Vector& z) {
    if (!(gamma > 0.0)) {
        throw PreconditionError("resolve_affine: gamma must be > 0");
    }
    if (!a.square() || a.rows() != z.dim() || b.dim() != z.dim()) {
        throw DimensionError("resolve_affine: dimensions disagree");
    }
    const std::size_t n = z.dim();
    Matrix system = Matrix::identity(n) + gamma * a;
    const Vector rhs = z + gamma * b;
    Vector x = Vector::zeros(n);
    try {
        x = solve(system, rhs);
    } catch (const SingularSystemError&) {
        throw SingularSystemError("resolve_affine: I + gamma*A is singular (ill-posed resolvent)");
    }
    if (norm(system * x - rhs) > 1e-10 * (1.0 + norm(z))) {
        throw SingularSystemError("resolve_affine: residual above contract");
    }
    return x;
}

Vector resolve_separable(const SeparableOp& family, double gamma, const Vector& z) {
    if (!(gamma > 0.0)) {
        throw PreconditionError("resolve_separable: gamma must be > 0");
    }
    std::vector<double> out(z.dim());
    switch (family.family) {
        case SeparableFamily::soft_threshold:
            for (std::size_t i = 0; i < z.dim(); ++i) {
                const double mag = std::abs(z[i]) - gamma;
                out[i] = mag > 0.0 ? (z[i] > 0.0 ? mag : -mag) : 0.0;
            }
            break;
        case SeparableFamily::box_projection:
            if (family.lo > family.hi) {
                throw PreconditionError("resolve_separable: invalid box bounds");
            }
            for (std::size_t i = 0; i < z.dim(); ++i) {
                out[i] = std::clamp(z[i], family.lo, family.hi);
            }
            break;
    }
    return Vector(std::move(out));
}

ResolventResult resolve_iterative(const ResolventRequest& req) {
    if (!(req.gamma > 0.0) || !(req.inner_tol > 0.0) || req.inner_max < 1) {
        throw PreconditionError("resolve_iterative: gamma, inner_tol, inner_max must be positive");
    }
    if (std::holds_alternative<SeparableOp>(req.op.kind)) {
        throw PreconditionError(
            "resolve_iterative: separable families are set-valued; use resolve_separable");
    }
    const double contraction = req.gamma * req.op.meta.L;
    InnerScheme scheme = req.scheme;
    if (scheme == InnerScheme::auto_select) {
        scheme = contraction < 1.0 ? InnerScheme::damped : InnerScheme::relaxed;
    }
    if (scheme == InnerScheme::damped && contraction >= 1.0) {
        throw PreconditionError("resolve_iterative: damped scheme requires gamma*L < 1");
    }

    const Vector& z = req.point;
    const double tol = req.inner_tol * (1.0 + norm(z));
    double relax = scheme == InnerScheme::damped ? 1.0 : 0.5;

    Vector x = z;
    Vector best = x;
    double best_residual = std::numeric_limits<double>::infinity();
    double prev_residual = best_residual;
    int stall = 0;

    for (int k = 1; k <= req.inner_max; ++k) {
        const Vector fixed_point = z - req.gamma * eval_static(req.op, x);
        x = (1.0 - relax) * x + relax * fixed_point;
        if (!x.all_finite()) {
            throw NoConvergenceError("resolve_iterative: iterates diverged",
                                     best.coords(), best_residual);
        }
        const double residual = norm(x + req.gamma * eval_static(req.op, x) - z);
        if (residual < best_residual) {
            best_residual = residual;
            best = x;
        }
        if (residual <= tol) {
            return ResolventResult{x, k, residual};
        }
        // Halve the relaxation when the residual stops making progress.
        if (scheme == InnerScheme::relaxed) {
            if (residual >= prev_residual) {
                if (++stall >= 5) {
                    relax *= 0.5;
                    stall = 0;
                }
            } else {
                stall = 0;
            }
        }
        prev_residual = residual;
    }
    throw NoConvergenceError("resolve_iterative: inner_max exceeded", best.coords(),
                             best_residual);
}

Vector resolve(const StaticOp& op, double gamma, const Vector& z) {
    if (const auto* aff = std::get_if<AffineOp>(&op.kind)) {
        return resolve_affine(aff->A, aff->b, gamma, z);
    }
    if (const auto* sep = std::get_if<SeparableOp>(&op.kind)) {
        return resolve_separable(*sep, gamma, z);
    }
    return resolve_iterative(ResolventRequest(op, gamma, z)).value;
}

Vector resolve_coupled(const CoupledOp& op, const Vector& partner, double gamma,
                       const Vector& z) {
    if (const auto* aff = std::get_if<CoupledAffine>(&op.kind)) {
        return resolve_affine(aff->A, aff->C * partner + aff->b, gamma, z);
    }
    const auto& cust = std::get<CoupledCustom>(op.kind);
    auto frozen = [&cust, partner](const Vector& x) { return cust.fn(x, partner); };
    return resolve_iterative(ResolventRequest(make_custom(frozen, op.meta), gamma, z))
        .value;
}

}  // namespace inclusionkit
