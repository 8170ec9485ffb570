#pragma once

// Experiment front end: JSON config parsing/emission with full-file
// validation, the paper-experiment presets, execution with CSV trace and
// JSON summary output, and the Monte Carlo curve runner.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "inclusionkit/analysis.hpp"
#include "inclusionkit/solvers.hpp"

namespace inclusionkit {

enum class ProblemType { dynamic, stochastic, coupled };

// Problem sections hold raw numbers; operators are built only after the
// whole file validates, so load_config can report every problem at once.

/// T(z, iota) = (alpha_base + alpha_amp*sin(iota)) z - b.
struct DynamicProblemCfg {
    double alpha_base = 1.0;
    double alpha_amp = 0.0;
    std::vector<double> b;
    std::optional<double> l_time;

    friend bool operator==(const DynamicProblemCfg&, const DynamicProblemCfg&) = default;
};

/// Realizations xi*z + b_sign*b with xi ~ U[xi_lo, xi_hi]. b_sign makes the
/// source's sign convention explicit instead of guessing intent.
struct StochasticProblemCfg {
    double xi_lo = 0.0;
    double xi_hi = 0.0;
    std::vector<double> b;
    int b_sign = 1;
    double variance_bound = 0.0;

    friend bool operator==(const StochasticProblemCfg&, const StochasticProblemCfg&) = default;
};

/// T1(z, w) = A1 z - C1 w - b1 and T2(w, z) = A2 w - C2 z - b2;
/// C defaults to identity and b to zero when omitted.
struct CoupledProblemCfg {
    std::vector<std::vector<double>> a1;
    std::vector<std::vector<double>> a2;
    std::optional<std::vector<std::vector<double>>> c1;
    std::optional<std::vector<std::vector<double>>> c2;
    std::optional<std::vector<double>> b1;
    std::optional<std::vector<double>> b2;

    friend bool operator==(const CoupledProblemCfg&, const CoupledProblemCfg&) = default;
};

struct ScheduleCfg {
    std::string kind;  // harmonic | power | constant
    std::optional<int> offset;
    std::optional<double> theta;
    std::optional<double> beta;
    std::optional<double> gamma;

    Schedule to_schedule() const;

    friend bool operator==(const ScheduleCfg&, const ScheduleCfg&) = default;
};

struct TimeGridCfg {
    double iota0 = 0.0;
    double delta = 0.1;
    int count = 1;

    friend bool operator==(const TimeGridCfg&, const TimeGridCfg&) = default;
};

struct OutputPaths {
    std::string trace;
    std::string summary;

    friend bool operator==(const OutputPaths&, const OutputPaths&) = default;
};

struct ExperimentConfig {
    ProblemType type = ProblemType::dynamic;
    DynamicProblemCfg dynamic;
    StochasticProblemCfg stochastic;
    CoupledProblemCfg coupled;

    ScheduleCfg schedule;
    StopRule stop;
    std::optional<TimeGridCfg> time_grid;  // dynamic only
    std::vector<double> z0;
    std::optional<std::vector<double>> w0;  // coupled only
    std::optional<std::uint64_t> seed;      // stochastic only
    ResolventMode resolvent_mode = ResolventMode::mean;
    std::optional<int> n_seeds;      // Monte Carlo replications
    std::optional<double> lambda;    // accepted, echoed, unused (warned)
    std::optional<std::string> notes;  // free text, echoed verbatim
    OutputPaths outputs;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses and validates; throws ValidationError listing every problem
/// found, each message naming the offending key.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text);

/// Canonical JSON; parse_config(emit_config(c)) == c.
std::string emit_config(const ExperimentConfig& config);

/// dynamic-svi | stochastic-svi | coupled-svi.
ExperimentConfig preset(const std::string& name);

/// Operator builders (validated config in, solver inputs out).
DynamicOp build_dynamic_op(const ExperimentConfig& config);
StochasticOp build_stochastic_op(const ExperimentConfig& config);
CoupledPair build_coupled_pair(const ExperimentConfig& config);

struct RunResult {
    int exit_code = 0;  // 0 converged, 2 iteration budget, 3 diverged
    SolverReport report;
    std::vector<std::string> warnings;
};

/// Solves per the config, writes the trace CSV and JSON summary, and maps
/// the verdict to a process exit status.
RunResult run_experiment(const ExperimentConfig& config);

/// Header `rho,iota,gamma,step_residual,combined_residual,error_to_reference,
/// x0,...`; floats carry 17 significant digits, rows end in LF, unused
/// fields stay empty.
void emit_csv(const SolverReport& report, const std::string& path);

void write_mc_csv(const std::vector<McPoint>& curve, const std::string& path);

/// Closed-form predictions printed by the `bounds` verb and embedded in
/// run summaries (one text line per available quantity).
std::string describe_bounds(const ExperimentConfig& config);

std::string fmt17(double x);

}  // namespace inclusionkit
