#include <cmath>
#include <cstdlib>

#include "doctest.h"
#include "inclusionkit/analysis.hpp"
#include "test_util.hpp"

using namespace inclusionkit;

namespace {

// Independent oracle: smallest K with rate^K >= ratio, by multiplication
// alone (no logarithms shared with the implementation).
std::int64_t bound_by_multiplication(double rate, double ratio) {
    std::int64_t k = 0;
    double acc = 1.0;
    while (acc < ratio) {
        acc *= rate;
        ++k;
    }
    return k;
}

SolverReport synthetic_report(const std::vector<double>& errors) {
    SolverReport rep;
    for (std::size_t i = 0; i < errors.size(); ++i) {
        IterationRecord rec;
        rec.rho = static_cast<int>(i);
        rec.iterate = Vector{0.0};
        rec.error_to_reference = errors[i];
        rep.records.push_back(rec);
    }
    return rep;
}

}  // namespace

TEST_CASE("iteration_bound_strong: frozen value and multiplication oracle") {
    CHECK(iteration_bound_strong(1.0, 1.0, 2.0, 0.5, 0.1) == 21);
    // rate = 1 + 2*1*0.5/4 = 1.25, ratio = 1/0.01 = 100.
    CHECK(bound_by_multiplication(1.25, 100.0) == 21);

    CHECK(iteration_bound_strong(0.005, 1.0, 2.0, 0.5, 0.1) == 0);  // already inside
    CHECK_THROWS_AS(iteration_bound_strong(1.0, 1.0, 2.0, 0.6, 0.1), PreconditionError);
    CHECK_THROWS_AS(iteration_bound_strong(-1.0, 1.0, 2.0, 0.5, 0.1), PreconditionError);
}

TEST_CASE("iteration_bound_coupled: frozen value, oracle, min symmetry") {
    CHECK(iteration_bound_coupled(1.0, 1.0, 1.0, 0.1, 0.01) == 44);
    CHECK(bound_by_multiplication(1.0 / 0.9, 100.0) == 44);

    CHECK(iteration_bound_coupled(1.0, 2.0, 3.0, 0.1, 0.01) ==
          iteration_bound_coupled(1.0, 3.0, 2.0, 0.1, 0.01));
    CHECK(iteration_bound_coupled(0.005, 1.0, 1.0, 0.1, 0.01) == 0);
    CHECK_THROWS_AS(iteration_bound_coupled(1.0, 10.0, 10.0, 0.2, 0.01),
                    PreconditionError);  // c*gamma = 2 >= 1
}

TEST_CASE("iteration bounds: monotone in r0 and eps over a randomized grid") {
    testutil::Gen gen(111);
    for (int trial = 0; trial < 200; ++trial) {
        const double mu = gen.uniform(0.2, 1.0);
        const double L = mu + gen.uniform(0.1, 2.0);
        const double gamma = gen.uniform(0.2, 1.0) * 2.0 * mu / (L * L);
        const double r0 = gen.uniform(0.5, 10.0);
        const double eps = gen.uniform(0.001, 0.1);
        const auto k = iteration_bound_strong(r0, mu, L, gamma, eps);
        CHECK(iteration_bound_strong(2.0 * r0, mu, L, gamma, eps) >= k);
        CHECK(iteration_bound_strong(r0, mu, L, gamma, eps * 0.5) >= k);

        const double c = gen.uniform(0.1, 0.9);
        const double cg = gen.uniform(0.1, 0.9);
        const auto kc = iteration_bound_coupled(r0, c, c + 0.5, cg / c, eps);
        CHECK(iteration_bound_coupled(2.0 * r0, c, c + 0.5, cg / c, eps) >= kc);
        CHECK(iteration_bound_coupled(r0, c, c + 0.5, cg / c, eps * 0.5) >= kc);
    }
}

TEST_CASE("total_error_bound: exact arithmetic and monotonicity") {
    CHECK(total_error_bound(ErrorBudget{1.0, 0.1, 0.04, 100}) == 0.4);
    CHECK(total_error_bound(ErrorBudget{2.0, 0.1, 0.04, 100}) ==
          2.0 * total_error_bound(ErrorBudget{1.0, 0.1, 0.04, 100}));
    CHECK_THROWS_AS(total_error_bound(ErrorBudget{1.0, 0.1, 0.04, 0}), PreconditionError);

    // Noise-free, drift-free budget decays to zero in rho.
    double prev = 1e300;
    for (std::int64_t rho = 1; rho <= 1'000'000; rho *= 10) {
        const double v = total_error_bound(ErrorBudget{1.0, 0.0, 0.0, rho});
        CHECK(v < prev);
        prev = v;
    }
    CHECK(prev < 1e-2);

    testutil::Gen gen(222);
    for (int trial = 0; trial < 200; ++trial) {
        ErrorBudget base{gen.uniform(0.1, 3.0), gen.uniform(0.0, 1.0),
                         gen.uniform(0.0, 1.0), gen.uniform_int(1, 1000)};
        const double v = total_error_bound(base);
        ErrorBudget larger = base;
        larger.delta_iota += gen.uniform(0.01, 1.0);
        CHECK(total_error_bound(larger) >= v);
        larger = base;
        larger.variance += gen.uniform(0.01, 1.0);
        CHECK(total_error_bound(larger) >= v);
        larger = base;
        larger.rho += gen.uniform_int(1, 1000);
        CHECK(total_error_bound(larger) <= v);
    }
}

TEST_CASE("discretization error bound and admissible step") {
    CHECK(discretization_error_bound(0.1, 1.05, 1.0) ==
          doctest::Approx(0.005).epsilon(1e-12));
    CHECK(discretization_error_bound(0.1, 2.0, 2.0) == 0.0);
    CHECK(max_admissible_delta_iota(0.01, 0.1) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK_THROWS_AS(discretization_error_bound(-0.1, 0.0, 0.0), PreconditionError);
    CHECK_THROWS_AS(max_admissible_delta_iota(0.0, 0.1), PreconditionError);
}

TEST_CASE("empirical_contraction: geometric, flat, and error cases") {
    CHECK(empirical_contraction(synthetic_report({1.0, 0.5, 0.25, 0.125, 0.0625}),
                                Vector{0.0}) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(empirical_contraction(synthetic_report({0.3, 0.3, 0.3, 0.3, 0.3, 0.3}),
                                Vector{0.0}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(empirical_contraction(synthetic_report({1.0, 0.5}), Vector{0.0}),
                    PreconditionError);
    CHECK_THROWS_AS(
        empirical_contraction(synthetic_report({1.0, 0.5, 0.0, 0.1, 0.2}), Vector{0.0}),
        PreconditionError);
}

TEST_CASE("empirical_contraction: measured factor respects the analytic rate") {
    // alpha = 1 scalar affine, gamma = 0.5: bound sqrt(1 - 2*g*mu + g^2 L^2) = 0.5.
    const StaticOp op = make_affine(Matrix::identity(1), Vector{1.0});
    const DynamicOp dyn{[op](double) { return op; }, make_time_grid(0.0, 0.1, 40),
                        op.meta};
    const SolverReport rep =
        solve_dynamic(dyn, Vector{5.0}, Schedule::constant(0.5), StopRule{1e-12, 40});
    const Vector zstar = solve(Matrix::identity(1), Vector{1.0});
    const double factor = empirical_contraction(rep, zstar);
    CHECK(factor <= 0.5 + 0.05);
    CHECK(factor > 0.0);
}

TEST_CASE("mc_expected_residual: degenerate sampler reproduces the deterministic trace") {
    const StaticOp mean = make_affine(Matrix::diagonal({1.0}), Vector{-1.0});
    const StochasticOp degenerate{
        [mean](RngState s) { return std::make_pair(mean, s); }, mean, 0.0, mean.meta};
    const Schedule s = Schedule::harmonic(2);
    const StopRule stop{1e-9, 40};

    const auto curve = mc_expected_residual(degenerate, Vector{0.0}, s, stop, 5, 1);
    const SolverReport one =
        solve_stochastic(degenerate, Vector{0.0}, s, stop, RngState{1, 0});
    const Vector zstar = *zero_of(mean);

    REQUIRE(curve.size() == 41);
    CHECK(curve[0].mean_sq_error == dot(Vector{0.0} - zstar, Vector{0.0} - zstar));
    for (std::size_t i = 0; i < one.records.size(); ++i) {
        const Vector d = one.records[i].iterate - zstar;
        CHECK(curve[i + 1].mean_sq_error == doctest::Approx(dot(d, d)).epsilon(1e-15));
        // Identical replications; only mean-summation rounding may remain.
        CHECK(curve[i + 1].std_error <= 1e-15);
    }
    // Early-terminated replications hold their final iterate.
    if (one.records.size() + 1 < curve.size()) {
        const Vector d = one.final_iterate - zstar;
        CHECK(curve.back().mean_sq_error == doctest::Approx(dot(d, d)).epsilon(1e-15));
    }
}

TEST_CASE("mc_expected_residual: single seed equals that run; curves are thread-stable") {
    const StochasticOp op =
        make_uniform_gain_stochastic(0.9, 1.1, Vector{1.0}, +1, 0.04 / 12.0);
    const Schedule s = Schedule::harmonic(2);
    const StopRule stop{1e-9, 60};

    const auto single = mc_expected_residual(op, Vector{0.0}, s, stop, 1, 7);
    const SolverReport run = solve_stochastic(op, Vector{0.0}, s, stop, RngState{7, 0});
    const Vector zstar = *zero_of(op.mean);
    for (std::size_t i = 0; i < run.records.size(); ++i) {
        const Vector d = run.records[i].iterate - zstar;
        CHECK(single[i + 1].mean_sq_error == dot(d, d));
    }

    const auto serial = mc_expected_residual(op, Vector{0.0}, s, stop, 16, 3,
                                             ResolventMode::mean, 1);
    const auto parallel = mc_expected_residual(op, Vector{0.0}, s, stop, 16, 3,
                                               ResolventMode::mean, 4);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].mean_sq_error == parallel[i].mean_sq_error);
        CHECK(serial[i].std_error == parallel[i].std_error);
    }

    // The INCLUSIONKIT_THREADS cap routes through the same fixed reduction.
    setenv("INCLUSIONKIT_THREADS", "3", 1);
    const auto capped = mc_expected_residual(op, Vector{0.0}, s, stop, 16, 3);
    unsetenv("INCLUSIONKIT_THREADS");
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].mean_sq_error == capped[i].mean_sq_error);
    }
}

TEST_CASE("mc_expected_residual: noise-driven error decays across the horizon") {
    // Mean operator with mu = 1, L = 1.1 via a rotation block, additive noise.
    const double skew = std::sqrt(1.1 * 1.1 - 1.0);
    const Matrix a{{1.0, skew}, {-skew, 1.0}};
    const Vector b{1.0, -0.5};
    const StaticOp mean = make_affine(a, b);
    CHECK(mean.meta.mu == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(mean.meta.L == doctest::Approx(1.1).epsilon(1e-9));

    const StochasticOp op{
        [mean](RngState s) {
            auto [shift, s2] = next_uniform(s, -0.3, 0.3);
            const auto& aff = as_affine(mean);
            return std::make_pair(make_affine(aff.A, aff.b + shift * Vector{1.0, 1.0}), s2);
        },
        mean, 0.09 / 3.0, mean.meta};

    // Small admissible step: the transient still dominates at rho = 20 while
    // rho = 200 sits at the noise floor.
    const double gamma = 0.05;
    REQUIRE(gamma <= max_stable_step(1.0, 1.1));
    const auto curve = mc_expected_residual(op, Vector{3.0, 3.0}, Schedule::constant(gamma),
                                            StopRule{1e-12, 200}, 100, 17);
    CHECK(curve[200].mean_sq_error < curve[20].mean_sq_error);
}

TEST_CASE("mc_expected_residual: rejects means without a computable zero") {
    const StaticOp custom = make_custom([](const Vector& v) { return v; },
                                        OperatorMetadata{1.0, 1.0, 0.0});
    const StochasticOp op{
        [custom](RngState s) { return std::make_pair(custom, s); }, custom, 0.0,
        custom.meta};
    CHECK_THROWS_AS(mc_expected_residual(op, Vector{0.0}, Schedule::harmonic(2),
                                         StopRule{1e-9, 10}, 2, 1),
                    PreconditionError);
}
