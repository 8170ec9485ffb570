#pragma once

// Closed-form iteration-complexity bounds, the error-budget decomposition
// (discretization + noise + step decay), and empirical rate estimation
// from solver traces.

#include <cstdint>
#include <vector>

#include "inclusionkit/solvers.hpp"

namespace inclusionkit {

/// Smallest K with (1 + 2*mu*gamma/L^2)^K >= r0_sq / eps^2; 0 when the
/// start is already within tolerance. Natural logs (the base cancels).
std::int64_t iteration_bound_strong(double r0_sq, double mu, double L, double gamma,
                                    double eps);

/// Smallest K with (1/(1 - c*gamma))^K >= r0_sq / eps, c = min(mu1, mu2);
/// here eps bounds the combined squared residual itself.
std::int64_t iteration_bound_coupled(double r0_sq, double mu1, double mu2, double gamma,
                                     double eps);

struct ErrorBudget {
    double C = 1.0;           // aggregate problem constant (diagnostic, not certified)
    double delta_iota = 0.0;  // time step
    double variance = 0.0;    // Var[T_xi] over the operating region
    std::int64_t rho = 1;     // iteration index
};

/// C * (delta_iota + sqrt(variance) + 1/sqrt(rho)).
double total_error_bound(const ErrorBudget& budget);

/// L_time * |iota - iota_rho|.
double discretization_error_bound(double l_time, double iota, double iota_rho);

/// Largest time step keeping the discretization error within eps.
double max_admissible_delta_iota(double eps, double l_time);

/// Per-iteration contraction factor: exp of the least-squares slope of
/// log(error) against the record index. Needs >= 5 records carrying a
/// strictly positive error_to_reference; recomputes errors from `reference`
/// when a record lacks one.
double empirical_contraction(const SolverReport& report, const Vector& reference);

struct McPoint {
    int rho = 0;  // iterate index; rho = 0 is the start point
    double mean_sq_error = 0.0;
    double std_error = 0.0;
    int n_seeds = 0;
};

/// Pointwise mean over n_seeds independent runs (seeds base_seed + i) of
/// the squared error to the mean operator's exact zero. Replications that
/// terminate early hold their final iterate. Fan-out is capped by
/// `threads` (0 = machine parallelism, overridable via INCLUSIONKIT_THREADS);
/// the reduction order is fixed, so the curve does not depend on it.
std::vector<McPoint> mc_expected_residual(const StochasticOp& op, const Vector& z0,
                                          const Schedule& s, const StopRule& stop,
                                          int n_seeds, std::uint64_t base_seed,
                                          ResolventMode mode = ResolventMode::mean,
                                          int threads = 0);

}  // namespace inclusionkit
