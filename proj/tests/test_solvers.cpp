#include <cmath>
#include <limits>

#include "doctest.h"
#include "inclusionkit/solvers.hpp"
#include "test_util.hpp"

using namespace inclusionkit;

namespace {

DynamicOp frozen_gain(double gain, double b, int count = 100) {
    return make_sin_gain_dynamic(gain, 0.0, Vector{b}, make_time_grid(0.0, 0.1, count));
}

}  // namespace

TEST_CASE("solve_dynamic: first iterate of the frozen scalar problem, by hand") {
    // alpha = 1, b = 1, z0 = 0, gamma = 0.5: forward step 0 - 0.5*(0-1) = 0.5,
    // then the affine resolvent (1+0.5)x = 0.5 + 0.5 gives x = 2/3.
    const DynamicOp op = frozen_gain(1.0, 1.0);
    const SolverReport rep =
        solve_dynamic(op, Vector{0.0}, Schedule::constant(0.5), StopRule{1e-12, 1});
    REQUIRE(rep.records.size() == 1);
    CHECK(rep.records[0].iterate[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(rep.verdict == Verdict::max_iters_reached);
}

TEST_CASE("solve_dynamic: starting at the fixed point converges immediately") {
    const DynamicOp op = frozen_gain(2.0, 1.0);  // zero at b/alpha = 0.5
    const SolverReport rep =
        solve_dynamic(op, Vector{0.5}, Schedule::constant(0.5), StopRule{1e-10, 50});
    REQUIRE(rep.records.size() == 1);
    CHECK(rep.records[0].step_residual == 0.0);
    CHECK(rep.verdict == Verdict::converged);
    CHECK(rep.final_iterate == Vector{0.5});
}

TEST_CASE("solve_dynamic: frozen problem converges to b/alpha") {
    const DynamicOp op = frozen_gain(2.0, 1.0);
    const SolverReport rep =
        solve_dynamic(op, Vector{0.0}, Schedule::constant(0.3), StopRule{1e-12, 200});
    CHECK(rep.verdict == Verdict::converged);
    CHECK(std::abs(rep.final_iterate[0] - 0.5) < 1e-9);
    // error_to_reference tracks the instantaneous zero.
    CHECK(*rep.records.back().error_to_reference ==
          doctest::Approx(std::abs(rep.final_iterate[0] - 0.5)).epsilon(1e-12));
}

TEST_CASE("solve_dynamic: sinusoidal preset dynamics stay finite and reproducible") {
    const DynamicOp op =
        make_sin_gain_dynamic(1.0, 0.1, Vector{1.0}, make_time_grid(0.0, 0.1, 500));
    const Schedule s = Schedule::harmonic(1);
    const StopRule stop{1e-6, 500};
    const SolverReport a = solve_dynamic(op, Vector{0.0}, s, stop);
    const SolverReport b = solve_dynamic(op, Vector{0.0}, s, stop);
    CHECK(a.verdict != Verdict::diverged);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].iterate == b.records[i].iterate);
        CHECK(a.records[i].step_residual == b.records[i].step_residual);
        CHECK(a.records[i].iota == b.records[i].iota);
    }
    // Grid times enter the records verbatim.
    CHECK(*a.records[3].iota == op.grid.time_at(3));
}

TEST_CASE("solve_stochastic: zero-variance sampler equals the frozen dynamic trace") {
    const StaticOp mean = make_affine(Matrix::diagonal({1.0}), Vector{-1.0});
    const StochasticOp degenerate{
        [mean](RngState s) { return std::make_pair(mean, s); }, mean, 0.0, mean.meta};
    const DynamicOp frozen{[mean](double) { return mean; },
                           make_time_grid(0.0, 0.1, 100), mean.meta};

    const Schedule s = Schedule::harmonic(2);
    const StopRule stop{1e-9, 60};
    const SolverReport stoch =
        solve_stochastic(degenerate, Vector{0.0}, s, stop, RngState{9, 0});
    const SolverReport dyn = solve_dynamic(frozen, Vector{0.0}, s, stop);

    REQUIRE(stoch.records.size() == dyn.records.size());
    for (std::size_t i = 0; i < stoch.records.size(); ++i) {
        CHECK(stoch.records[i].iterate == dyn.records[i].iterate);
        CHECK(stoch.records[i].step_residual == dyn.records[i].step_residual);
    }
    CHECK(stoch.verdict == dyn.verdict);
}

TEST_CASE("solve_stochastic: fixed seed gives bitwise-identical reports") {
    const StochasticOp op =
        make_uniform_gain_stochastic(0.9, 1.1, Vector{1.0}, +1, 0.04 / 12.0);
    const Schedule s = Schedule::harmonic(2);
    const StopRule stop{1e-6, 200};
    const SolverReport a = solve_stochastic(op, Vector{0.0}, s, stop, RngState{42, 0});
    const SolverReport b = solve_stochastic(op, Vector{0.0}, s, stop, RngState{42, 0});
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].iterate == b.records[i].iterate);
    }
    CHECK(a.seed == b.seed);
    CHECK(a.rng_algorithm == std::string("splitmix64-v1"));

    // Different seeds take different paths.
    const SolverReport c = solve_stochastic(op, Vector{0.0}, s, stop, RngState{43, 0});
    bool any_differs = false;
    for (std::size_t i = 0; i < std::min(a.records.size(), c.records.size()); ++i) {
        if (!(a.records[i].iterate == c.records[i].iterate)) any_differs = true;
    }
    CHECK(any_differs);
}

TEST_CASE("solve_stochastic: resolvent_mode sampled changes the backward step") {
    const StochasticOp op =
        make_uniform_gain_stochastic(0.5, 1.5, Vector{1.0}, +1, 1.0 / 12.0);
    const Schedule s = Schedule::constant(0.5);
    const StopRule stop{1e-12, 20};
    const SolverReport mean_mode = solve_stochastic(op, Vector{0.0}, s, stop,
                                                    RngState{5, 0}, ResolventMode::mean);
    const SolverReport sampled_mode = solve_stochastic(
        op, Vector{0.0}, s, stop, RngState{5, 0}, ResolventMode::sampled);
    bool any_differs = false;
    for (std::size_t i = 0;
         i < std::min(mean_mode.records.size(), sampled_mode.records.size()); ++i) {
        if (!(mean_mode.records[i].iterate == sampled_mode.records[i].iterate)) {
            any_differs = true;
        }
    }
    CHECK(any_differs);
}

TEST_CASE("solve_coupled: two-sided diagonal pair reaches the joint zero") {
    const CoupledPair pair{
        make_coupled_affine(Matrix::diagonal({2.0, 1.0}), Matrix::identity(2),
                            Vector::zeros(2)),
        make_coupled_affine(Matrix::diagonal({1.0, 2.0}), Matrix::identity(2),
                            Vector::zeros(2))};
    const SolverReport rep =
        solve_coupled(pair, Vector{1.0, 1.0}, Vector{1.0, 1.0},
                      Schedule::constant(0.45), StopRule{1e-9, 500});
    CHECK(rep.verdict == Verdict::converged);
    CHECK(norm(rep.final_iterate) + norm(*rep.final_partner) < 1e-6);

    // R is recorded and nonincreasing under the admissible constant step.
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& rec : rep.records) {
        REQUIRE(rec.combined_residual.has_value());
        CHECK(*rec.combined_residual <= prev + 1e-12);
        prev = *rec.combined_residual;
    }
}

TEST_CASE("solve_coupled: starting at the joint zero stops at once") {
    const CoupledPair pair{
        make_coupled_affine(Matrix::diagonal({2.0, 1.0}), Matrix::identity(2),
                            Vector::zeros(2)),
        make_coupled_affine(Matrix::diagonal({1.0, 2.0}), Matrix::identity(2),
                            Vector::zeros(2))};
    const SolverReport rep = solve_coupled(pair, Vector::zeros(2), Vector::zeros(2),
                                           Schedule::constant(0.45), StopRule{1e-9, 10});
    REQUIRE(rep.records.size() == 1);
    CHECK(rep.records[0].step_residual == 0.0);
    CHECK(rep.verdict == Verdict::converged);
}

TEST_CASE("solve_coupled: decoupled pair reproduces the single-operator traces") {
    const Matrix a1 = Matrix::diagonal({2.0});
    const Matrix a2 = Matrix::diagonal({3.0});
    const Vector b1{1.0}, b2{-0.5};
    const CoupledPair pair{make_coupled_affine(a1, Matrix::zeros(1, 1), b1),
                           make_coupled_affine(a2, Matrix::zeros(1, 1), b2)};
    const Schedule s = Schedule::constant(0.25);
    const StopRule stop{1e-11, 80};
    const SolverReport both = solve_coupled(pair, Vector{4.0}, Vector{-2.0}, s, stop);

    const DynamicOp d1{[&](double) { return make_affine(a1, b1); },
                       make_time_grid(0.0, 0.1, 80), pair.t1.meta};
    const DynamicOp d2{[&](double) { return make_affine(a2, b2); },
                       make_time_grid(0.0, 0.1, 80), pair.t2.meta};
    const SolverReport solo1 = solve_dynamic(d1, Vector{4.0}, s, stop);
    const SolverReport solo2 = solve_dynamic(d2, Vector{-2.0}, s, stop);

    for (std::size_t i = 0; i < both.records.size(); ++i) {
        if (i < solo1.records.size()) {
            CHECK(both.records[i].iterate == solo1.records[i].iterate);
        }
        if (i < solo2.records.size()) {
            CHECK(*both.records[i].partner == solo2.records[i].iterate);
        }
    }
}

TEST_CASE("solve_coupled: inadmissible constant step is rejected up front") {
    const CoupledPair pair{
        make_coupled_affine(Matrix::diagonal({2.0, 1.0}), Matrix::identity(2),
                            Vector::zeros(2)),
        make_coupled_affine(Matrix::diagonal({1.0, 2.0}), Matrix::identity(2),
                            Vector::zeros(2))};
    // Cap is min(2*1/4, 2*1/4) = 0.5.
    CHECK_THROWS_AS(solve_coupled(pair, Vector{1.0, 1.0}, Vector{1.0, 1.0},
                                  Schedule::constant(0.6), StopRule{1e-9, 10}),
                    PreconditionError);
}

TEST_CASE("Fejer monotonicity and the linear-rate envelope on random instances") {
    testutil::Gen gen(909);
    for (int inst = 0; inst < 10; ++inst) {
        const std::size_t dim = static_cast<std::size_t>(gen.uniform_int(1, 4));
        // Symmetric part with eigenvalues in [1, 3] keeps L >= 1.
        std::vector<double> eigs(dim);
        for (auto& e : eigs) e = gen.uniform(1.0, 3.0);
        Matrix a = gen.symmetric_with_spectrum(eigs);
        const Matrix k = gen.matrix(dim, dim, -0.5, 0.5);
        a = a + 0.5 * (k + (-1.0) * k.transpose());
        const Vector b = gen.vector(dim, -2.0, 2.0);

        const auto sb = spectral_bounds(a);
        const double gamma = 0.9 * max_stable_step(sb.mu, sb.L);
        if (!(gamma < 1.0)) continue;  // algorithm preamble requires (0,1)

        const Vector zstar = solve(a, b);
        const Vector z0 = gen.vector(dim, -3.0, 3.0);
        const DynamicOp op{[&](double) { return make_affine(a, b); },
                           make_time_grid(0.0, 0.1, 200), OperatorMetadata{sb.mu, sb.L, 0.0}};
        const SolverReport rep =
            solve_dynamic(op, z0, Schedule::constant(gamma), StopRule{1e-13, 200});

        const double q = 1.0 - 2.0 * gamma * sb.mu + gamma * gamma * sb.L * sb.L;
        double prev_err = norm(z0 - zstar);
        double envelope = prev_err * prev_err;
        for (const auto& rec : rep.records) {
            const double err = norm(rec.iterate - zstar);
            CHECK(err <= prev_err + 1e-10);  // Fejer
            envelope *= q;
            CHECK(err * err <= envelope * (1.0 + 1e-6) + 1e-300);
            prev_err = err;
        }
    }
}

TEST_CASE("terminating iterates are near-zeros of the operator") {
    testutil::Gen gen(1010);
    for (int inst = 0; inst < 10; ++inst) {
        const std::size_t dim = static_cast<std::size_t>(gen.uniform_int(1, 4));
        std::vector<double> eigs(dim);
        for (auto& e : eigs) e = gen.uniform(1.0, 3.0);
        const Matrix a = gen.symmetric_with_spectrum(eigs);
        const Vector b = gen.vector(dim, -2.0, 2.0);
        const auto sb = spectral_bounds(a);
        const double gamma = std::min(0.9, 0.9 * max_stable_step(sb.mu, sb.L));

        const double eps = 1e-8;
        const DynamicOp op{[&](double) { return make_affine(a, b); },
                           make_time_grid(0.0, 0.1, 500), OperatorMetadata{sb.mu, sb.L, 0.0}};
        const SolverReport rep = solve_dynamic(op, gen.vector(dim, -3.0, 3.0),
                                               Schedule::constant(gamma), StopRule{eps, 500});
        REQUIRE(rep.verdict == Verdict::converged);
        const Vector residual = a * rep.final_iterate - b;
        CHECK(norm(residual) <= eps * (2.0 / gamma) * (1.0 + 1e-6));
    }
}

TEST_CASE("divergence detection issues the diverged verdict") {
    // T(z) = -3z is anti-monotone; the composed map expands by |-5| per step
    // at gamma = 0.5.
    const StaticOp bad = make_affine((-3.0) * Matrix::identity(1), Vector{0.0});
    const DynamicOp op{[bad](double) { return bad; }, make_time_grid(0.0, 0.1, 100),
                       bad.meta};
    const SolverReport rep =
        solve_dynamic(op, Vector{1.0}, Schedule::constant(0.5), StopRule{1e-9, 100});
    CHECK(rep.verdict == Verdict::diverged);
    CHECK(rep.records.size() < 100);
}

TEST_CASE("solver start points must be finite") {
    const DynamicOp op = frozen_gain(1.0, 1.0);
    // Vector construction already rejects non-finite entries.
    CHECK_THROWS_AS(Vector{std::nan("")}, NonFiniteError);
    // Dimension mismatch surfaces as an error, not a crash.
    CHECK_THROWS_AS(
        solve_dynamic(op, Vector{1.0, 2.0}, Schedule::constant(0.5), StopRule{1e-9, 5}),
        DimensionError);
}
