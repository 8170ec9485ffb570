#pragma once

// The three resolvent iterations: time-varying, sampled, and Gauss-Seidel
// coupled, with stopping rules and per-iteration traces.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "inclusionkit/operators.hpp"
#include "inclusionkit/resolvents.hpp"
#include "inclusionkit/schedules.hpp"

namespace inclusionkit {

struct StopRule {
    double epsilon = 1e-6;  // step-residual tolerance
    int max_iters = 1000;

    friend bool operator==(const StopRule&, const StopRule&) = default;
};

enum class Verdict { converged, max_iters_reached, diverged };

const char* to_string(Verdict v);

/// Row rho describes the update from iterate rho to iterate rho+1:
/// `iterate` is the post-update point, `step_residual` the displacement
/// norm the stop rule watches (sum over both variables for coupled runs).
struct IterationRecord {
    int rho = 0;
    std::optional<double> iota;  // dynamic runs only
    double gamma = 0.0;
    Vector iterate = Vector::zeros(1);
    std::optional<Vector> partner;  // coupled runs
    double step_residual = 0.0;
    // Coupled runs with a known joint zero: R = |z-z*|^2 + |w-w*|^2.
    std::optional<double> combined_residual;
    std::optional<double> error_to_reference;
};

struct SolverReport {
    std::vector<IterationRecord> records;
    Verdict verdict = Verdict::max_iters_reached;
    Vector final_iterate = Vector::zeros(1);
    std::optional<Vector> final_partner;
    std::optional<std::uint64_t> seed;
    std::string rng_algorithm;  // set on stochastic runs
    std::string config_echo;    // filled by the experiment front end
};

/// Iterate z <- J_{T(.,iota_rho)}(z - gamma_rho * T(z, iota_rho)) on the
/// grid; error_to_reference tracks the instantaneous zero of the frozen
/// operator when it is affine.
SolverReport solve_dynamic(const DynamicOp& op, const Vector& z0, const Schedule& s,
                           const StopRule& stop);

enum class ResolventMode { mean, sampled };

/// Iterate z <- J_T(z - gamma_rho * T_xi(z)) with a fresh realization per
/// step; the resolvent uses the mean operator (as the update is typeset)
/// unless mode is `sampled`.
SolverReport solve_stochastic(const StochasticOp& op, const Vector& z0, const Schedule& s,
                              const StopRule& stop, RngState rng,
                              ResolventMode mode = ResolventMode::mean);

/// Gauss-Seidel sweep: the second variable's update consumes the freshly
/// updated first variable. Constant schedules must not exceed
/// min(2*mu1/L1^2, 2*mu2/L2^2) when both moduli are known.
SolverReport solve_coupled(const CoupledPair& pair, const Vector& z0, const Vector& w0,
                           const Schedule& s, const StopRule& stop);

}  // namespace inclusionkit
