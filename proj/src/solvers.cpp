#include "inclusionkit/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace inclusionkit {

namespace {

constexpr double kDivergenceNorm = 1e12;

bool diverged(const Vector& v) {
    return !v.all_finite() || norm(v) > kDivergenceNorm;
}

void require_start(const Vector& z0) {
    if (!z0.all_finite()) {
        throw PreconditionError("solver: start point must be finite");
    }
}

std::string iter_context(const char* which, int rho) {
    return std::string(which) + " failed at iteration " + std::to_string(rho) + ": ";
}

}  // namespace

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::converged: return "converged";
        case Verdict::max_iters_reached: return "max_iters_reached";
        case Verdict::diverged: return "diverged";
    }
    return "unknown";
}

SolverReport solve_dynamic(const DynamicOp& op, const Vector& z0, const Schedule& s,
                           const StopRule& stop) {
    require_start(z0);
    SolverReport report;
    report.records.reserve(static_cast<std::size_t>(stop.max_iters));

    Vector z = z0;
    for (int rho = 0; rho < stop.max_iters; ++rho) {
        const double gamma = s.step_at(rho);
        const double iota = op.grid.time_at(rho);
        const StaticOp frozen = op.frozen(iota);

        Vector znext = Vector::zeros(z.dim());
        try {
            const Vector forward = z - gamma * eval_static(frozen, z);
            znext = resolve(frozen, gamma, forward);
        } catch (const SingularSystemError& e) {
            throw SingularSystemError(iter_context("solve_dynamic", rho) + e.what());
        } catch (const NoConvergenceError& e) {
            throw NoConvergenceError(iter_context("solve_dynamic", rho) + e.what(),
                                     e.best_iterate, e.best_residual);
        }

        IterationRecord rec;
        rec.rho = rho;
        rec.iota = iota;
        rec.gamma = gamma;
        rec.step_residual = diverged(znext) ? std::numeric_limits<double>::quiet_NaN()
                                            : norm(znext - z);
        rec.iterate = znext;
        if (const auto ref = zero_of(frozen)) {
            rec.error_to_reference = norm(znext - *ref);
        }
        report.records.push_back(rec);

        if (diverged(znext)) {
            report.verdict = Verdict::diverged;
            report.final_iterate = znext;
            return report;
        }
        const double step_res = report.records.back().step_residual;
        z = znext;
        if (step_res < stop.epsilon) {
            report.verdict = Verdict::converged;
            report.final_iterate = z;
            return report;
        }
    }
    report.verdict = Verdict::max_iters_reached;
    report.final_iterate = z;
    return report;
}

SolverReport solve_stochastic(const StochasticOp& op, const Vector& z0, const Schedule& s,
                              const StopRule& stop, RngState rng, ResolventMode mode) {
    require_start(z0);
    SolverReport report;
    report.records.reserve(static_cast<std::size_t>(stop.max_iters));
    report.seed = rng.seed;
    report.rng_algorithm = kRngAlgorithm;

    const std::optional<Vector> reference = zero_of(op.mean);

    Vector z = z0;
    for (int rho = 0; rho < stop.max_iters; ++rho) {
        const double gamma = s.step_at(rho);
        auto [realized, rng_next] = op.sampler(rng);
        rng = rng_next;

        Vector znext = Vector::zeros(z.dim());
        try {
            const Vector forward = z - gamma * eval_static(realized, z);
            const StaticOp& backward = mode == ResolventMode::mean ? op.mean : realized;
            znext = resolve(backward, gamma, forward);
        } catch (const SingularSystemError& e) {
            throw SingularSystemError(iter_context("solve_stochastic", rho) + e.what());
        } catch (const NoConvergenceError& e) {
            throw NoConvergenceError(iter_context("solve_stochastic", rho) + e.what(),
                                     e.best_iterate, e.best_residual);
        }

        IterationRecord rec;
        rec.rho = rho;
        rec.gamma = gamma;
        rec.step_residual = diverged(znext) ? std::numeric_limits<double>::quiet_NaN()
                                            : norm(znext - z);
        rec.iterate = znext;
        if (reference) {
            rec.error_to_reference = norm(znext - *reference);
        }
        report.records.push_back(rec);

        if (diverged(znext)) {
            report.verdict = Verdict::diverged;
            report.final_iterate = znext;
            return report;
        }
        const double step_res = report.records.back().step_residual;
        z = znext;
        if (step_res < stop.epsilon) {
            report.verdict = Verdict::converged;
            report.final_iterate = z;
            return report;
        }
    }
    report.verdict = Verdict::max_iters_reached;
    report.final_iterate = z;
    return report;
}

SolverReport solve_coupled(const CoupledPair& pair, const Vector& z0, const Vector& w0,
                           const Schedule& s, const StopRule& stop) {
    require_start(z0);
    require_start(w0);
    if (s.kind() == ScheduleKind::constant && pair.t1.meta.mu > 0.0 &&
        pair.t2.meta.mu > 0.0) {
        const double cap = std::min(max_stable_step(pair.t1.meta.mu, pair.t1.meta.L),
                                    max_stable_step(pair.t2.meta.mu, pair.t2.meta.L));
        if (s.gamma() > cap) {
            throw PreconditionError(
                "solve_coupled: constant step exceeds min(2*mu1/L1^2, 2*mu2/L2^2) = " +
                std::to_string(cap));
        }
    }

    SolverReport report;
    report.records.reserve(static_cast<std::size_t>(stop.max_iters));
    const auto reference = joint_zero(pair);

    Vector z = z0;
    Vector w = w0;
    for (int rho = 0; rho < stop.max_iters; ++rho) {
        const double gamma = s.step_at(rho);
        Vector znext = Vector::zeros(z.dim());
        Vector wnext = Vector::zeros(w.dim());
        try {
            const Vector forward_z = z - gamma * eval_coupled(pair.t1, z, w);
            znext = resolve_coupled(pair.t1, w, gamma, forward_z);
            // Normative sequencing: the second update sees z_{rho+1}.
            const Vector forward_w = w - gamma * eval_coupled(pair.t2, w, znext);
            wnext = resolve_coupled(pair.t2, znext, gamma, forward_w);
        } catch (const SingularSystemError& e) {
            throw SingularSystemError(iter_context("solve_coupled", rho) + e.what());
        } catch (const NoConvergenceError& e) {
            throw NoConvergenceError(iter_context("solve_coupled", rho) + e.what(),
                                     e.best_iterate, e.best_residual);
        }

        const bool bad = diverged(znext) || diverged(wnext);
        IterationRecord rec;
        rec.rho = rho;
        rec.gamma = gamma;
        rec.step_residual = bad ? std::numeric_limits<double>::quiet_NaN()
                                : norm(znext - z) + norm(wnext - w);
        rec.iterate = znext;
        rec.partner = wnext;
        if (reference && !bad) {
            const double ez = norm(znext - reference->first);
            const double ew = norm(wnext - reference->second);
            rec.error_to_reference = ez + ew;
            rec.combined_residual = ez * ez + ew * ew;
        }
        report.records.push_back(rec);

        if (bad) {
            report.verdict = Verdict::diverged;
            report.final_iterate = znext;
            report.final_partner = wnext;
            return report;
        }
        const double step_res = report.records.back().step_residual;
        z = znext;
        w = wnext;
        if (step_res < stop.epsilon) {
            report.verdict = Verdict::converged;
            report.final_iterate = z;
            report.final_partner = w;
            return report;
        }
    }
    report.verdict = Verdict::max_iters_reached;
    report.final_iterate = z;
    report.final_partner = w;
    return report;
}

}  // namespace inclusionkit
