#pragma once

// Step-size sequences, their Robbins-Monro classification, and the
// strong-convergence stability cap 2*mu/L^2.

#include <cstdint>

#include "inclusionkit/errors.hpp"

namespace inclusionkit {

enum class ScheduleKind { harmonic, power, constant };

enum class RobbinsMonro {
    satisfies,
    violates_divergent_sum,
    violates_square_summability,
};

/// One of 1/(rho+offset), theta/(rho+1)^beta, or a constant gamma.
/// The first step must land in (0, 1]; the boundary value 1 is admitted
/// because the harmonic schedule 1/(rho+1) used in practice starts there.
/// beta outside (0.5, 1] is allowed so the classifier can name what it
/// violates.
class Schedule {
public:
    static Schedule harmonic(int offset);
    static Schedule power(double theta, double beta);
    static Schedule constant(double gamma);

    double step_at(int rho) const;

    ScheduleKind kind() const { return kind_; }
    int offset() const { return offset_; }
    double theta() const { return theta_; }
    double beta() const { return beta_; }
    double gamma() const { return gamma_; }

    friend bool operator==(const Schedule&, const Schedule&) = default;

private:
    Schedule() = default;
    ScheduleKind kind_ = ScheduleKind::constant;
    int offset_ = 1;
    double theta_ = 0.0;
    double beta_ = 0.0;
    double gamma_ = 0.0;
};

/// Analytic per-family classification; partial sums cannot certify
/// divergence, the closed form can.
RobbinsMonro classify_robbins_monro(const Schedule& s);

/// The step cap 2*mu/L^2 under which strong convergence holds; callers must
/// still intersect with the algorithms' (0, 1) step constraint.
double max_stable_step(double mu, double L);

}  // namespace inclusionkit
