#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace inclusionkit {

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NonFiniteError : std::domain_error {
    using std::domain_error::domain_error;
};

struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Linear solve or resolvent left a residual above its contract.
struct SingularSystemError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Inner iteration budget exhausted; carries the best iterate seen.
struct NoConvergenceError : std::runtime_error {
    NoConvergenceError(const std::string& what, std::vector<double> best, double residual)
        : std::runtime_error(what), best_iterate(std::move(best)), best_residual(residual) {}
    std::vector<double> best_iterate;
    double best_residual;
};

// Config validation collects every problem, not just the first.
struct ValidationError : std::runtime_error {
    explicit ValidationError(std::vector<std::string> msgs)
        : std::runtime_error(join(msgs)), messages(std::move(msgs)) {}
    std::vector<std::string> messages;

private:
    static std::string join(const std::vector<std::string>& msgs) {
        std::string out = "config validation failed:";
        for (const auto& m : msgs) {
            out += "\n  - " + m;
        }
        return out;
    }
};

}  // namespace inclusionkit
