#include "inclusionkit/schedules.hpp"

#include <cmath>

namespace inclusionkit {

Schedule Schedule::harmonic(int offset) {
    if (offset < 1) {
        throw PreconditionError("Schedule::harmonic: offset must be >= 1");
    }
    Schedule s;
    s.kind_ = ScheduleKind::harmonic;
    s.offset_ = offset;
    return s;
}

Schedule Schedule::power(double theta, double beta) {
    if (!(theta > 0.0) || !std::isfinite(theta) || !std::isfinite(beta)) {
        throw PreconditionError("Schedule::power: theta must be a positive finite real");
    }
    if (theta > 1.0) {
        // First step is theta/(0+1)^beta = theta.
        throw PreconditionError("Schedule::power: first step exceeds 1");
    }
    Schedule s;
    s.kind_ = ScheduleKind::power;
    s.theta_ = theta;
    s.beta_ = beta;
    return s;
}

Schedule Schedule::constant(double gamma) {
    if (!(gamma > 0.0) || gamma > 1.0 || !std::isfinite(gamma)) {
        throw PreconditionError("Schedule::constant: gamma must lie in (0, 1]");
    }
    Schedule s;
    s.kind_ = ScheduleKind::constant;
    s.gamma_ = gamma;
    return s;
}

double Schedule::step_at(int rho) const {
    if (rho < 0) {
        throw PreconditionError("Schedule::step_at: rho must be >= 0");
    }
    switch (kind_) {
        case ScheduleKind::harmonic:
            return 1.0 / static_cast<double>(rho + offset_);
        case ScheduleKind::power:
            return theta_ / std::pow(static_cast<double>(rho + 1), beta_);
        case ScheduleKind::constant:
            return gamma_;
    }
    return 0.0;  // unreachable
}

RobbinsMonro classify_robbins_monro(const Schedule& s) {
    switch (s.kind()) {
        case ScheduleKind::harmonic:
            return RobbinsMonro::satisfies;
        case ScheduleKind::power:
            if (s.beta() > 1.0) return RobbinsMonro::violates_divergent_sum;
            if (s.beta() <= 0.5) return RobbinsMonro::violates_square_summability;
            return RobbinsMonro::satisfies;
        case ScheduleKind::constant:
            return RobbinsMonro::violates_square_summability;
    }
    return RobbinsMonro::satisfies;  // unreachable
}

double max_stable_step(double mu, double L) {
    if (!(mu > 0.0) || !(L > 0.0)) {
        throw PreconditionError("max_stable_step: mu and L must be > 0");
    }
    if (mu > L) {
        throw PreconditionError("max_stable_step: mu must not exceed L");
    }
    return 2.0 * mu / (L * L);
}

}  // namespace inclusionkit
