#pragma once

// Operator families: static (affine / separable prox family / custom),
// time-varying, stochastic, and coupled pairs, each carrying strong-
// monotonicity and Lipschitz metadata consumed by the analysis module.

#include <functional>
#include <optional>
#include <utility>
#include <variant>

#include "inclusionkit/linalg.hpp"
#include "inclusionkit/rng.hpp"

namespace inclusionkit {

struct OperatorMetadata {
    double mu = 0.0;      // strong monotonicity constant (>= 0 when claimed)
    double L = 0.0;       // Lipschitz constant
    double L_time = 0.0;  // Lipschitz constant in the time argument (dynamic only)
};

/// T(z) = A z - b.
struct AffineOp {
    Matrix A;
    Vector b;
};

enum class SeparableFamily { soft_threshold, box_projection };

/// Maximal monotone set-valued family identified by its proximal map;
/// evaluable only through resolvents.
struct SeparableOp {
    SeparableFamily family = SeparableFamily::soft_threshold;
    double lo = 0.0;  // box bounds
    double hi = 0.0;
};

struct CustomOp {
    std::function<Vector(const Vector&)> fn;
};

struct StaticOp {
    std::variant<AffineOp, SeparableOp, CustomOp> kind;
    OperatorMetadata meta;
};

/// Affine constructor; (mu, L) are filled from spectral_bounds(A).
StaticOp make_affine(Matrix a, Vector b);
StaticOp make_separable(SeparableFamily family, double lo = 0.0, double hi = 0.0);
/// Custom operators must bring their own validated metadata.
StaticOp make_custom(std::function<Vector(const Vector&)> fn, OperatorMetadata meta);

bool is_affine(const StaticOp& op);
const AffineOp& as_affine(const StaticOp& op);

/// Applies the operator; separable kinds are set-valued and throw.
Vector eval_static(const StaticOp& op, const Vector& z);

/// Unique zero of an affine operator (A z = b), nullopt for other kinds
/// or singular A.
std::optional<Vector> zero_of(const StaticOp& op);

struct TimeGrid {
    double iota0 = 0.0;
    double delta = 0.1;
    int count = 1;

    // Closed form, never accumulated, so grid times carry no drift.
    double time_at(int rho) const { return iota0 + static_cast<double>(rho) * delta; }

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

TimeGrid make_time_grid(double iota0, double delta, int count);

/// Time-varying operator presented through its frozen snapshots
/// T_rho(z) := T(z, iota_rho).
struct DynamicOp {
    std::function<StaticOp(double iota)> frozen;
    TimeGrid grid;
    OperatorMetadata meta;
};

Vector eval_dynamic(const DynamicOp& op, const Vector& z, double iota);

/// The scalar-gain family T(z, iota) = (base + amp*sin(iota)) * z - b.
/// meta holds the run envelopes: mu = base - |amp|, L = base + |amp|.
DynamicOp make_sin_gain_dynamic(double base, double amp, Vector b, TimeGrid grid,
                                double l_time = 0.0);

struct StochasticOp {
    std::function<std::pair<StaticOp, RngState>(RngState)> sampler;
    StaticOp mean;
    double variance_bound = 0.0;  // sigma^2 over the operating region
    OperatorMetadata meta;        // metadata of the mean operator
};

std::pair<StaticOp, RngState> sample_realization(const StochasticOp& op, RngState rng);
StaticOp mean_operator(const StochasticOp& op);

/// Realizations T_xi(z) = xi*z + sign*b with xi ~ U[lo, hi]; stored in the
/// T(z) = Az - b convention, so the mean is ((lo+hi)/2) I z - (-sign*b).
StochasticOp make_uniform_gain_stochastic(double lo, double hi, Vector b, int sign,
                                          double variance_bound);

/// Bivariate side of a coupled pair: T(x, y) = A x - C y - b in its affine
/// form; monotonicity/Lipschitz metadata refers to the own-variable x.
struct CoupledAffine {
    Matrix A;
    Matrix C;
    Vector b;
};

struct CoupledCustom {
    std::function<Vector(const Vector&, const Vector&)> fn;
};

struct CoupledOp {
    std::variant<CoupledAffine, CoupledCustom> kind;
    OperatorMetadata meta;
};

struct CoupledPair {
    CoupledOp t1;  // updates the first variable, partner second
    CoupledOp t2;  // updates the second variable, partner first
};

CoupledOp make_coupled_affine(Matrix a, Matrix c, Vector b);
CoupledOp make_coupled_custom(std::function<Vector(const Vector&, const Vector&)> fn,
                              OperatorMetadata meta);

Vector eval_coupled(const CoupledOp& op, const Vector& own, const Vector& partner);

/// Joint zero of an all-affine pair via the block system
/// [A1 -C1; -C2 A2] [z; w] = [b1; b2]; nullopt if either side is custom
/// or the system is singular.
std::optional<std::pair<Vector, Vector>> joint_zero(const CoupledPair& pair);

struct MetadataCheck {
    bool monotone_ok = true;
    bool strong_ok = true;
    bool lipschitz_ok = true;
    double worst_monotonicity_gap = 0.0;  // most negative <Tx-Ty, x-y> - mu|x-y|^2 seen
    double worst_lipschitz_ratio = 0.0;   // largest |Tx-Ty| / |x-y| seen
};

/// Randomized spot-check of claimed (mu, L) on pairs drawn from
/// [-radius, radius]^dim. Custom operators go through this before use.
MetadataCheck validate_metadata(const StaticOp& op, std::size_t dim, double radius,
                                int n_pairs, RngState rng);

}  // namespace inclusionkit
