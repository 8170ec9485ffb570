#include "inclusionkit/operators.hpp"

#include <cmath>

namespace inclusionkit {

StaticOp make_affine(Matrix a, Vector b) {
    if (!a.square()) {
        throw ShapeError("make_affine: operator matrix must be square");
    }
    if (a.rows() != b.dim()) {
        throw DimensionError("make_affine: dim(b) must equal rows(A)");
    }
    const SpectralBounds sb = spectral_bounds(a);
    OperatorMetadata meta{sb.mu, sb.L, 0.0};
    return StaticOp{AffineOp{std::move(a), std::move(b)}, meta};
}

StaticOp make_separable(SeparableFamily family, double lo, double hi) {
    if (family == SeparableFamily::box_projection && lo > hi) {
        throw PreconditionError("make_separable: box bounds require lo <= hi");
    }
    // Subdifferential families are monotone but not Lipschitz; meta stays 0.
    return StaticOp{SeparableOp{family, lo, hi}, OperatorMetadata{}};
}

StaticOp make_custom(std::function<Vector(const Vector&)> fn, OperatorMetadata meta) {
    if (!fn) {
        throw PreconditionError("make_custom: evaluation rule must be callable");
    }
    if (meta.mu > 0.0 && meta.mu > meta.L) {
        throw PreconditionError("make_custom: mu must not exceed L");
    }
    return StaticOp{CustomOp{std::move(fn)}, meta};
}

bool is_affine(const StaticOp& op) { return std::holds_alternative<AffineOp>(op.kind); }

const AffineOp& as_affine(const StaticOp& op) { return std::get<AffineOp>(op.kind); }

Vector eval_static(const StaticOp& op, const Vector& z) {
    if (const auto* aff = std::get_if<AffineOp>(&op.kind)) {
        return aff->A * z - aff->b;
    }
    if (const auto* cust = std::get_if<CustomOp>(&op.kind)) {
        Vector out = cust->fn(z);
        if (!out.all_finite()) {
            throw NonFiniteError("eval_static: custom operator produced non-finite output");
        }
        return out;
    }
    throw PreconditionError(
        "eval_static: separable families are set-valued; use their resolvent");
}

std::optional<Vector> zero_of(const StaticOp& op) {
    if (!is_affine(op)) return std::nullopt;
    const auto& aff = as_affine(op);
    try {
        return solve(aff.A, aff.b);
    } catch (const SingularSystemError&) {
        return std::nullopt;
    }
}

TimeGrid make_time_grid(double iota0, double delta, int count) {
    if (!(delta > 0.0) || !std::isfinite(delta) || !std::isfinite(iota0)) {
        throw PreconditionError("TimeGrid: delta must be a positive finite real");
    }
    if (count < 1) {
        throw PreconditionError("TimeGrid: count must be >= 1");
    }
    return TimeGrid{iota0, delta, count};
}

Vector eval_dynamic(const DynamicOp& op, const Vector& z, double iota) {
    if (!std::isfinite(iota)) {
        throw PreconditionError("eval_dynamic: time must be finite");
    }
    Vector out = eval_static(op.frozen(iota), z);
    if (!out.all_finite()) {
        throw NonFiniteError("eval_dynamic: non-finite output");
    }
    return out;
}

DynamicOp make_sin_gain_dynamic(double base, double amp, Vector b, TimeGrid grid,
                                double l_time) {
    auto frozen = [base, amp, b](double iota) {
        const double gain = base + amp * std::sin(iota);
        return make_affine(Matrix::diagonal(std::vector<double>(b.dim(), gain)), b);
    };
    OperatorMetadata meta;
    meta.mu = base - std::abs(amp);
    meta.L = base + std::abs(amp);
    meta.L_time = l_time;
    return DynamicOp{std::move(frozen), grid, meta};
}

std::pair<StaticOp, RngState> sample_realization(const StochasticOp& op, RngState rng) {
    return op.sampler(rng);
}

StaticOp mean_operator(const StochasticOp& op) { return op.mean; }

StochasticOp make_uniform_gain_stochastic(double lo, double hi, Vector b, int sign,
                                          double variance_bound) {
    if (lo > hi) {
        throw PreconditionError("make_uniform_gain_stochastic: requires lo <= hi");
    }
    if (sign != 1 && sign != -1) {
        throw PreconditionError("make_uniform_gain_stochastic: sign must be +1 or -1");
    }
    if (variance_bound < 0.0) {
        throw PreconditionError("make_uniform_gain_stochastic: variance bound must be >= 0");
    }
    const std::size_t n = b.dim();
    // Paper form xi*z + sign*b folded into the T(z) = Az - b convention.
    const Vector stored_b = -static_cast<double>(sign) * b;

    auto sampler = [lo, hi, stored_b, n](RngState rng) {
        auto [xi, rng2] = next_uniform(rng, lo, hi);
        StaticOp realized =
            make_affine(Matrix::diagonal(std::vector<double>(n, xi)), stored_b);
        return std::make_pair(std::move(realized), rng2);
    };
    StaticOp mean =
        make_affine(Matrix::diagonal(std::vector<double>(n, 0.5 * (lo + hi))), stored_b);
    OperatorMetadata meta = mean.meta;
    return StochasticOp{std::move(sampler), std::move(mean), variance_bound, meta};
}

CoupledOp make_coupled_affine(Matrix a, Matrix c, Vector b) {
    if (!a.square()) {
        throw ShapeError("make_coupled_affine: own-variable matrix must be square");
    }
    if (a.rows() != c.rows() || a.rows() != b.dim()) {
        throw DimensionError("make_coupled_affine: output dimensions disagree");
    }
    const SpectralBounds sb = spectral_bounds(a);
    OperatorMetadata meta{sb.mu, sb.L, 0.0};
    return CoupledOp{CoupledAffine{std::move(a), std::move(c), std::move(b)}, meta};
}

CoupledOp make_coupled_custom(std::function<Vector(const Vector&, const Vector&)> fn,
                              OperatorMetadata meta) {
    if (!fn) {
        throw PreconditionError("make_coupled_custom: evaluation rule must be callable");
    }
    return CoupledOp{CoupledCustom{std::move(fn)}, meta};
}

Vector eval_coupled(const CoupledOp& op, const Vector& own, const Vector& partner) {
    if (const auto* aff = std::get_if<CoupledAffine>(&op.kind)) {
        return aff->A * own - aff->C * partner - aff->b;
    }
    Vector out = std::get<CoupledCustom>(op.kind).fn(own, partner);
    if (out.dim() != own.dim()) {
        throw DimensionError("eval_coupled: output dimension must match the own variable");
    }
    if (!out.all_finite()) {
        throw NonFiniteError("eval_coupled: non-finite output");
    }
    return out;
}

std::optional<std::pair<Vector, Vector>> joint_zero(const CoupledPair& pair) {
    const auto* a1 = std::get_if<CoupledAffine>(&pair.t1.kind);
    const auto* a2 = std::get_if<CoupledAffine>(&pair.t2.kind);
    if (a1 == nullptr || a2 == nullptr) return std::nullopt;

    const std::size_t n = a1->A.rows();
    const std::size_t m = a2->A.rows();
    Matrix block(n + m, n + m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) block.at(i, j) = a1->A.at(i, j);
        for (std::size_t j = 0; j < m; ++j) block.at(i, n + j) = -a1->C.at(i, j);
    }
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) block.at(n + i, n + j) = a2->A.at(i, j);
        for (std::size_t j = 0; j < n; ++j) block.at(n + i, j) = -a2->C.at(i, j);
    }
    std::vector<double> rhs(n + m);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = a1->b[i];
    for (std::size_t i = 0; i < m; ++i) rhs[n + i] = a2->b[i];

    Vector stacked = Vector::zeros(n + m);
    try {
        stacked = solve(block, Vector(std::move(rhs)));
    } catch (const SingularSystemError&) {
        return std::nullopt;
    }
    std::vector<double> z(n), w(m);
    for (std::size_t i = 0; i < n; ++i) z[i] = stacked[i];
    for (std::size_t i = 0; i < m; ++i) w[i] = stacked[n + i];
    return std::make_pair(Vector(std::move(z)), Vector(std::move(w)));
}

MetadataCheck validate_metadata(const StaticOp& op, std::size_t dim, double radius,
                                int n_pairs, RngState rng) {
    MetadataCheck check;
    auto draw_point = [&](RngState s) {
        std::vector<double> xs(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            auto [u, s2] = next_uniform(s, -radius, radius);
            xs[i] = u;
            s = s2;
        }
        return std::make_pair(Vector(std::move(xs)), s);
    };

    for (int k = 0; k < n_pairs; ++k) {
        auto [x, s1] = draw_point(rng);
        auto [y, s2] = draw_point(s1);
        rng = s2;
        const Vector diff = x - y;
        const double dist_sq = dot(diff, diff);
        if (dist_sq == 0.0) continue;

        const Vector tdiff = eval_static(op, x) - eval_static(op, y);
        const double inner = dot(tdiff, diff);
        if (inner < -1e-9 * dist_sq) check.monotone_ok = false;
        const double gap = inner - op.meta.mu * dist_sq;
        if (gap < -1e-9 * dist_sq) check.strong_ok = false;
        check.worst_monotonicity_gap = std::min(check.worst_monotonicity_gap, gap);

        const double ratio = norm(tdiff) / std::sqrt(dist_sq);
        check.worst_lipschitz_ratio = std::max(check.worst_lipschitz_ratio, ratio);
        if (ratio > op.meta.L + 1e-9) check.lipschitz_ok = false;
    }
    return check;
}

}  // namespace inclusionkit
