#include "inclusionkit/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

namespace inclusionkit {

namespace {

std::int64_t ceil_log_ratio(double numerator_log, double denominator_log) {
    const double raw = numerator_log / denominator_log;
    return static_cast<std::int64_t>(std::ceil(raw - 1e-12));
}

int default_thread_cap() {
    if (const char* env = std::getenv("INCLUSIONKIT_THREADS")) {
        char* end = nullptr;
        const long parsed = std::strtol(env, &end, 10);
        if (end != env && parsed >= 1 && parsed <= 4096) {
            return static_cast<int>(parsed);
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

std::int64_t iteration_bound_strong(double r0_sq, double mu, double L, double gamma,
                                    double eps) {
    if (!(r0_sq > 0.0) || !(mu > 0.0) || !(L > 0.0) || !(gamma > 0.0) || !(eps > 0.0)) {
        throw PreconditionError("iteration_bound_strong: all inputs must be positive");
    }
    if (gamma > 2.0 * mu / (L * L) * (1.0 + 1e-12)) {
        throw PreconditionError("iteration_bound_strong: gamma exceeds 2*mu/L^2");
    }
    if (r0_sq <= eps * eps) return 0;
    const double rate = 1.0 + 2.0 * mu * gamma / (L * L);
    return ceil_log_ratio(std::log(r0_sq / (eps * eps)), std::log(rate));
}

std::int64_t iteration_bound_coupled(double r0_sq, double mu1, double mu2, double gamma,
                                     double eps) {
    if (!(r0_sq > 0.0) || !(gamma > 0.0) || !(eps > 0.0)) {
        throw PreconditionError("iteration_bound_coupled: all inputs must be positive");
    }
    const double c = std::min(mu1, mu2);
    if (!(c > 0.0) || c * gamma >= 1.0) {
        throw PreconditionError("iteration_bound_coupled: requires 0 < min(mu1,mu2)*gamma < 1");
    }
    if (r0_sq <= eps) return 0;
    return ceil_log_ratio(std::log(r0_sq / eps), std::log(1.0 / (1.0 - c * gamma)));
}

double total_error_bound(const ErrorBudget& budget) {
    if (budget.rho < 1) {
        throw PreconditionError("total_error_bound: rho must be >= 1");
    }
    if (budget.C < 0.0 || budget.delta_iota < 0.0 || budget.variance < 0.0) {
        throw PreconditionError("total_error_bound: components must be nonnegative");
    }
    return budget.C * (budget.delta_iota + std::sqrt(budget.variance) +
                       1.0 / std::sqrt(static_cast<double>(budget.rho)));
}

double discretization_error_bound(double l_time, double iota, double iota_rho) {
    if (l_time < 0.0) {
        throw PreconditionError("discretization_error_bound: L_time must be >= 0");
    }
    return l_time * std::abs(iota - iota_rho);
}

double max_admissible_delta_iota(double eps, double l_time) {
    if (!(eps > 0.0) || !(l_time > 0.0)) {
        throw PreconditionError("max_admissible_delta_iota: eps and L_time must be > 0");
    }
    return eps / l_time;
}

double empirical_contraction(const SolverReport& report, const Vector& reference) {
    std::vector<double> log_errors;
    std::vector<double> indices;
    for (const auto& rec : report.records) {
        double err;
        if (rec.error_to_reference) {
            err = *rec.error_to_reference;
        } else {
            err = norm(rec.iterate - reference);
        }
        if (err <= 0.0) {
            throw PreconditionError(
                "empirical_contraction: zero-error record (log fit undefined)");
        }
        log_errors.push_back(std::log(err));
        indices.push_back(static_cast<double>(rec.rho));
    }
    if (log_errors.size() < 5) {
        throw PreconditionError("empirical_contraction: needs >= 5 records");
    }

    const double n = static_cast<double>(indices.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < indices.size(); ++i) {
        sx += indices[i];
        sy += log_errors[i];
        sxx += indices[i] * indices[i];
        sxy += indices[i] * log_errors[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) {
        throw PreconditionError("empirical_contraction: degenerate index set");
    }
    const double slope = (n * sxy - sx * sy) / denom;
    return std::exp(slope);
}

std::vector<McPoint> mc_expected_residual(const StochasticOp& op, const Vector& z0,
                                          const Schedule& s, const StopRule& stop,
                                          int n_seeds, std::uint64_t base_seed,
                                          ResolventMode mode, int threads) {
    if (n_seeds < 1) {
        throw PreconditionError("mc_expected_residual: n_seeds must be >= 1");
    }
    const auto reference = zero_of(op.mean);
    if (!reference) {
        throw PreconditionError(
            "mc_expected_residual: mean operator must have a computable zero");
    }

    // Squared-error path per replication, index 0 = the start point; runs
    // that stop early hold their final iterate.
    const int horizon = stop.max_iters;
    std::vector<std::vector<double>> sq_errors(
        static_cast<std::size_t>(n_seeds),
        std::vector<double>(static_cast<std::size_t>(horizon) + 1, 0.0));

    auto run_one = [&](int i) {
        const RngState rng{base_seed + static_cast<std::uint64_t>(i), 0};
        const SolverReport rep = solve_stochastic(op, z0, s, stop, rng, mode);
        auto& row = sq_errors[static_cast<std::size_t>(i)];
        const Vector d0 = z0 - *reference;
        row[0] = dot(d0, d0);
        double last = row[0];
        std::size_t k = 1;
        for (const auto& rec : rep.records) {
            const Vector d = rec.iterate - *reference;
            last = dot(d, d);
            if (k < row.size()) row[k++] = last;
        }
        for (; k < row.size(); ++k) row[k] = last;
    };

    const int cap = threads > 0 ? threads : default_thread_cap();
    const int workers = std::min(cap, n_seeds);
    if (workers <= 1) {
        for (int i = 0; i < n_seeds; ++i) run_one(i);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w]() {
                for (int i = w; i < n_seeds; i += workers) run_one(i);
            });
        }
        for (auto& t : pool) t.join();
    }

    // Fixed reduction order keeps the curve independent of thread count.
    std::vector<McPoint> curve(static_cast<std::size_t>(horizon) + 1);
    for (std::size_t k = 0; k < curve.size(); ++k) {
        double mean = 0.0;
        for (int i = 0; i < n_seeds; ++i) mean += sq_errors[static_cast<std::size_t>(i)][k];
        mean /= static_cast<double>(n_seeds);
        double var = 0.0;
        for (int i = 0; i < n_seeds; ++i) {
            const double d = sq_errors[static_cast<std::size_t>(i)][k] - mean;
            var += d * d;
        }
        const double std_err =
            n_seeds > 1 ? std::sqrt(var / static_cast<double>(n_seeds - 1)) /
                              std::sqrt(static_cast<double>(n_seeds))
                        : 0.0;
        curve[k] = McPoint{static_cast<int>(k), mean, std_err, n_seeds};
    }
    return curve;
}

}  // namespace inclusionkit
