#pragma once

// Resolvents J = (I + gamma*T)^{-1}: closed form for affine and separable
// operators, and a generic damped fixed-point solver for custom ones.

#include "inclusionkit/operators.hpp"

namespace inclusionkit {

/// Closed-form affine resolvent: solves (I + gamma*A) x = z + gamma*b.
/// Contract: ||(I+gamma*A)x - (z+gamma*b)|| <= 1e-10 * (1 + ||z||).
Vector resolve_affine(const Matrix& a, const Vector& b, double gamma, const Vector& z);

/// Proximal maps of the separable families: componentwise shrinkage for the
/// l1 subdifferential (|z| = gamma maps to 0), clamp for the box normal cone.
Vector resolve_separable(const SeparableOp& family, double gamma, const Vector& z);

enum class InnerScheme {
    auto_select,  // damped when gamma*L < 1, relaxed otherwise
    damped,       // x <- z - gamma*T(x); requires gamma*L < 1
    relaxed,      // x <- (1-w)x + w(z - gamma*T(x)), w halved on stall
};

struct ResolventRequest {
    ResolventRequest(StaticOp op_, double gamma_, Vector point_)
        : op(std::move(op_)), gamma(gamma_), point(std::move(point_)) {}

    StaticOp op;
    double gamma;
    Vector point;  // the z the resolvent is taken at
    double inner_tol = 1e-12;
    int inner_max = 10'000;
    InnerScheme scheme = InnerScheme::auto_select;
};

struct ResolventResult {
    Vector value;
    int inner_iterations = 0;
    double residual = 0.0;  // ||x + gamma*T(x) - z|| at exit
};

/// Generic solve of x + gamma*T(x) = z for single-valued Lipschitz T.
/// Throws PreconditionError for a forced damped scheme with gamma*L >= 1,
/// NoConvergenceError (carrying the best iterate) past inner_max.
ResolventResult resolve_iterative(const ResolventRequest& req);

/// Dispatch on the operator kind; the path the solvers use.
Vector resolve(const StaticOp& op, double gamma, const Vector& z);

/// Resolvent of a coupled side in its own variable, partner frozen:
/// affine kinds solve (I + gamma*A) x = z + gamma*(C*partner + b) exactly,
/// custom kinds go through resolve_iterative.
Vector resolve_coupled(const CoupledOp& op, const Vector& partner, double gamma,
                       const Vector& z);

}  // namespace inclusionkit
