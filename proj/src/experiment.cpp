#include "inclusionkit/experiment.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace inclusionkit {

using ordered_json = nlohmann::ordered_json;

std::string fmt17(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

Schedule ScheduleCfg::to_schedule() const {
    if (kind == "harmonic") return Schedule::harmonic(offset.value_or(0));
    if (kind == "power") return Schedule::power(theta.value_or(0.0), beta.value_or(0.0));
    if (kind == "constant") return Schedule::constant(gamma.value_or(0.0));
    throw PreconditionError("schedule.kind: unknown kind '" + kind + "'");
}

namespace {

struct Collector {
    std::vector<std::string> errors;
    void add(const std::string& msg) { errors.push_back(msg); }
    bool ok() const { return errors.empty(); }
};

const ordered_json* find(const ordered_json& j, const std::string& key) {
    const auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

std::optional<double> get_number(const ordered_json& j, const std::string& path,
                                 const std::string& key, Collector& col, bool required) {
    const ordered_json* v = find(j, key);
    if (v == nullptr) {
        if (required) col.add(path + "." + key + ": missing");
        return std::nullopt;
    }
    if (!v->is_number()) {
        col.add(path + "." + key + ": expected a number");
        return std::nullopt;
    }
    return v->get<double>();
}

std::optional<int> get_int(const ordered_json& j, const std::string& path,
                           const std::string& key, Collector& col, bool required) {
    const ordered_json* v = find(j, key);
    if (v == nullptr) {
        if (required) col.add(path + "." + key + ": missing");
        return std::nullopt;
    }
    if (!v->is_number_integer()) {
        col.add(path + "." + key + ": expected an integer");
        return std::nullopt;
    }
    return v->get<int>();
}

std::optional<std::string> get_string(const ordered_json& j, const std::string& path,
                                      const std::string& key, Collector& col,
                                      bool required) {
    const ordered_json* v = find(j, key);
    if (v == nullptr) {
        if (required) col.add(path + "." + key + ": missing");
        return std::nullopt;
    }
    if (!v->is_string()) {
        col.add(path + "." + key + ": expected a string");
        return std::nullopt;
    }
    return v->get<std::string>();
}

std::optional<std::vector<double>> get_vector(const ordered_json& j, const std::string& path,
                                              const std::string& key, Collector& col,
                                              bool required) {
    const ordered_json* v = find(j, key);
    if (v == nullptr) {
        if (required) col.add(path + "." + key + ": missing");
        return std::nullopt;
    }
    if (!v->is_array() || v->empty()) {
        col.add(path + "." + key + ": expected a nonempty array of numbers");
        return std::nullopt;
    }
    std::vector<double> out;
    for (const auto& e : *v) {
        if (!e.is_number() || !std::isfinite(e.get<double>())) {
            col.add(path + "." + key + ": entries must be finite numbers");
            return std::nullopt;
        }
        out.push_back(e.get<double>());
    }
    return out;
}

std::optional<std::vector<std::vector<double>>> get_matrix(const ordered_json& j,
                                                           const std::string& path,
                                                           const std::string& key,
                                                           Collector& col, bool required) {
    const ordered_json* v = find(j, key);
    if (v == nullptr) {
        if (required) col.add(path + "." + key + ": missing");
        return std::nullopt;
    }
    if (!v->is_array() || v->empty()) {
        col.add(path + "." + key + ": expected a nonempty array of rows");
        return std::nullopt;
    }
    std::vector<std::vector<double>> rows;
    std::size_t width = 0;
    for (const auto& r : *v) {
        if (!r.is_array() || r.empty()) {
            col.add(path + "." + key + ": each row must be a nonempty array of numbers");
            return std::nullopt;
        }
        if (width == 0) width = r.size();
        if (r.size() != width) {
            col.add(path + "." + key + ": rows must all have the same length");
            return std::nullopt;
        }
        std::vector<double> row;
        for (const auto& e : r) {
            if (!e.is_number() || !std::isfinite(e.get<double>())) {
                col.add(path + "." + key + ": entries must be finite numbers");
                return std::nullopt;
            }
            row.push_back(e.get<double>());
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void check_known_keys(const ordered_json& j, const std::string& path,
                      std::initializer_list<const char*> allowed, Collector& col) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : allowed) {
            if (item.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) col.add(path + "." + item.key() + ": unknown key");
    }
}

Matrix to_matrix(const std::vector<std::vector<double>>& rows) {
    std::vector<double> flat;
    for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
    return Matrix(rows.size(), rows.front().size(), std::move(flat));
}

void validate_schedule(const ScheduleCfg& cfg, Collector& col) {
    if (cfg.kind == "harmonic") {
        if (!cfg.offset) {
            col.add("schedule.offset: missing (required for harmonic)");
        } else if (*cfg.offset < 1) {
            col.add("schedule.offset: must be >= 1");
        }
    } else if (cfg.kind == "power") {
        if (!cfg.theta) {
            col.add("schedule.theta: missing (required for power)");
        } else if (!(*cfg.theta > 0.0) || *cfg.theta > 1.0) {
            col.add("schedule.theta: first step theta must lie in (0, 1]");
        }
        if (!cfg.beta) col.add("schedule.beta: missing (required for power)");
    } else if (cfg.kind == "constant") {
        if (!cfg.gamma) {
            col.add("schedule.gamma: missing (required for constant)");
        } else if (!(*cfg.gamma > 0.0) || *cfg.gamma > 1.0) {
            col.add("schedule.gamma: must lie in (0, 1]");
        }
    } else {
        col.add("schedule.kind: must be one of harmonic | power | constant");
    }
}

ordered_json vector_json(const std::vector<double>& v) {
    ordered_json out = ordered_json::array();
    for (double x : v) out.push_back(x);
    return out;
}

ordered_json matrix_json(const std::vector<std::vector<double>>& m) {
    ordered_json out = ordered_json::array();
    for (const auto& r : m) out.push_back(vector_json(r));
    return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    ordered_json root;
    try {
        root = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw ValidationError({std::string("malformed JSON: ") + e.what()});
    }
    if (!root.is_object()) {
        throw ValidationError({"top level: expected a JSON object"});
    }

    Collector col;
    ExperimentConfig cfg;

    check_known_keys(root, "config",
                     {"problem", "schedule", "stop", "time_grid", "z0", "w0", "seed",
                      "resolvent_mode", "n_seeds", "lambda", "notes", "outputs"},
                     col);

    // problem
    const ordered_json* problem = find(root, "problem");
    std::string type_name;
    if (problem == nullptr || !problem->is_object()) {
        col.add("problem: missing or not an object");
    } else {
        type_name = get_string(*problem, "problem", "type", col, true).value_or("");
        if (type_name == "dynamic") {
            cfg.type = ProblemType::dynamic;
            check_known_keys(*problem, "problem",
                             {"type", "alpha_base", "alpha_amp", "b", "l_time"}, col);
            cfg.dynamic.alpha_base =
                get_number(*problem, "problem", "alpha_base", col, true).value_or(1.0);
            cfg.dynamic.alpha_amp =
                get_number(*problem, "problem", "alpha_amp", col, true).value_or(0.0);
            cfg.dynamic.b =
                get_vector(*problem, "problem", "b", col, true).value_or(std::vector<double>{0.0});
            cfg.dynamic.l_time = get_number(*problem, "problem", "l_time", col, false);
            if (cfg.dynamic.l_time && *cfg.dynamic.l_time < 0.0) {
                col.add("problem.l_time: must be >= 0");
            }
        } else if (type_name == "stochastic") {
            cfg.type = ProblemType::stochastic;
            check_known_keys(*problem, "problem",
                             {"type", "xi_lo", "xi_hi", "b", "b_sign", "variance_bound"},
                             col);
            cfg.stochastic.xi_lo =
                get_number(*problem, "problem", "xi_lo", col, true).value_or(0.0);
            cfg.stochastic.xi_hi =
                get_number(*problem, "problem", "xi_hi", col, true).value_or(0.0);
            if (cfg.stochastic.xi_lo > cfg.stochastic.xi_hi) {
                col.add("problem.xi_lo: must not exceed problem.xi_hi");
            }
            cfg.stochastic.b =
                get_vector(*problem, "problem", "b", col, true).value_or(std::vector<double>{0.0});
            cfg.stochastic.b_sign =
                get_int(*problem, "problem", "b_sign", col, true).value_or(1);
            if (cfg.stochastic.b_sign != 1 && cfg.stochastic.b_sign != -1) {
                col.add("problem.b_sign: must be 1 or -1");
            }
            cfg.stochastic.variance_bound =
                get_number(*problem, "problem", "variance_bound", col, true).value_or(0.0);
            if (cfg.stochastic.variance_bound < 0.0) {
                col.add("problem.variance_bound: must be >= 0");
            }
        } else if (type_name == "coupled") {
            cfg.type = ProblemType::coupled;
            check_known_keys(*problem, "problem", {"type", "a1", "a2", "c1", "c2", "b1", "b2"},
                             col);
            cfg.coupled.a1 = get_matrix(*problem, "problem", "a1", col, true)
                                 .value_or(std::vector<std::vector<double>>{{1.0}});
            cfg.coupled.a2 = get_matrix(*problem, "problem", "a2", col, true)
                                 .value_or(std::vector<std::vector<double>>{{1.0}});
            cfg.coupled.c1 = get_matrix(*problem, "problem", "c1", col, false);
            cfg.coupled.c2 = get_matrix(*problem, "problem", "c2", col, false);
            cfg.coupled.b1 = get_vector(*problem, "problem", "b1", col, false);
            cfg.coupled.b2 = get_vector(*problem, "problem", "b2", col, false);
        } else if (!type_name.empty()) {
            col.add("problem.type: must be one of dynamic | stochastic | coupled");
        }
    }

    // schedule
    const ordered_json* schedule = find(root, "schedule");
    if (schedule == nullptr || !schedule->is_object()) {
        col.add("schedule: missing or not an object");
    } else {
        check_known_keys(*schedule, "schedule", {"kind", "offset", "theta", "beta", "gamma"},
                         col);
        cfg.schedule.kind = get_string(*schedule, "schedule", "kind", col, true).value_or("");
        cfg.schedule.offset = get_int(*schedule, "schedule", "offset", col, false);
        cfg.schedule.theta = get_number(*schedule, "schedule", "theta", col, false);
        cfg.schedule.beta = get_number(*schedule, "schedule", "beta", col, false);
        cfg.schedule.gamma = get_number(*schedule, "schedule", "gamma", col, false);
        validate_schedule(cfg.schedule, col);
    }

    // stop
    const ordered_json* stop = find(root, "stop");
    if (stop == nullptr || !stop->is_object()) {
        col.add("stop: missing or not an object");
    } else {
        check_known_keys(*stop, "stop", {"epsilon", "max_iters"}, col);
        cfg.stop.epsilon = get_number(*stop, "stop", "epsilon", col, true).value_or(0.0);
        if (!(cfg.stop.epsilon > 0.0)) col.add("stop.epsilon: must be > 0");
        cfg.stop.max_iters = get_int(*stop, "stop", "max_iters", col, true).value_or(0);
        if (cfg.stop.max_iters < 1) col.add("stop.max_iters: must be >= 1");
    }

    // time grid (dynamic only)
    const ordered_json* grid = find(root, "time_grid");
    if (cfg.type == ProblemType::dynamic) {
        if (grid == nullptr || !grid->is_object()) {
            col.add("time_grid: missing or not an object (required for dynamic problems)");
        } else {
            check_known_keys(*grid, "time_grid", {"iota0", "delta", "count"}, col);
            TimeGridCfg g;
            g.iota0 = get_number(*grid, "time_grid", "iota0", col, true).value_or(0.0);
            g.delta = get_number(*grid, "time_grid", "delta", col, true).value_or(0.0);
            if (!(g.delta > 0.0)) col.add("time_grid.delta: must be > 0");
            g.count = get_int(*grid, "time_grid", "count", col, true).value_or(0);
            if (g.count < 1) col.add("time_grid.count: must be >= 1");
            cfg.time_grid = g;
        }
    } else if (grid != nullptr) {
        col.add("time_grid: only valid for dynamic problems");
    }

    // start points
    cfg.z0 = get_vector(root, "config", "z0", col, true).value_or(std::vector<double>{0.0});
    const bool has_w0 = find(root, "w0") != nullptr;
    if (cfg.type == ProblemType::coupled) {
        cfg.w0 = get_vector(root, "config", "w0", col, true);
    } else if (has_w0) {
        col.add("config.w0: only valid for coupled problems");
    }

    // seed / resolvent_mode / n_seeds (stochastic only)
    const ordered_json* seed = find(root, "seed");
    if (cfg.type == ProblemType::stochastic) {
        if (seed == nullptr) {
            col.add("config.seed: missing (required for stochastic problems)");
        } else if (!seed->is_number_integer() ||
                   (seed->is_number_integer() && !seed->is_number_unsigned() &&
                    seed->get<std::int64_t>() < 0)) {
            col.add("config.seed: expected a nonnegative integer");
        } else {
            cfg.seed = seed->get<std::uint64_t>();
        }
    } else if (seed != nullptr) {
        col.add("config.seed: only valid for stochastic problems");
    }

    const auto mode = get_string(root, "config", "resolvent_mode", col, false);
    if (mode) {
        if (cfg.type != ProblemType::stochastic) {
            col.add("config.resolvent_mode: only valid for stochastic problems");
        } else if (*mode == "mean") {
            cfg.resolvent_mode = ResolventMode::mean;
        } else if (*mode == "sampled") {
            cfg.resolvent_mode = ResolventMode::sampled;
        } else {
            col.add("config.resolvent_mode: must be mean | sampled");
        }
    }

    cfg.n_seeds = get_int(root, "config", "n_seeds", col, false);
    if (cfg.n_seeds) {
        if (cfg.type != ProblemType::stochastic) {
            col.add("config.n_seeds: only valid for stochastic problems");
        } else if (*cfg.n_seeds < 1) {
            col.add("config.n_seeds: must be >= 1");
        }
    }

    cfg.lambda = get_number(root, "config", "lambda", col, false);
    if (cfg.lambda && cfg.type != ProblemType::coupled) {
        col.add("config.lambda: only valid for coupled problems");
    }

    cfg.notes = get_string(root, "config", "notes", col, false);

    // outputs
    const ordered_json* outputs = find(root, "outputs");
    if (outputs == nullptr || !outputs->is_object()) {
        col.add("outputs: missing or not an object");
    } else {
        check_known_keys(*outputs, "outputs", {"trace", "summary"}, col);
        cfg.outputs.trace = get_string(*outputs, "outputs", "trace", col, true).value_or("");
        cfg.outputs.summary =
            get_string(*outputs, "outputs", "summary", col, true).value_or("");
        if (cfg.outputs.trace.empty()) col.add("outputs.trace: must be a nonempty path");
        if (cfg.outputs.summary.empty()) col.add("outputs.summary: must be a nonempty path");
    }

    // Cross-field checks that need well-formed pieces.
    if (col.ok()) {
        if (cfg.type == ProblemType::dynamic && cfg.dynamic.b.size() != cfg.z0.size()) {
            col.add("config.z0: dimension must match problem.b");
        }
        if (cfg.type == ProblemType::stochastic && cfg.stochastic.b.size() != cfg.z0.size()) {
            col.add("config.z0: dimension must match problem.b");
        }
        if (cfg.type == ProblemType::coupled) {
            const auto& cp = cfg.coupled;
            const std::size_t n1 = cp.a1.size();
            const std::size_t n2 = cp.a2.size();
            if (cp.a1.front().size() != n1) col.add("problem.a1: must be square");
            if (cp.a2.front().size() != n2) col.add("problem.a2: must be square");
            if (cp.c1 && (cp.c1->size() != n1 || cp.c1->front().size() != n2)) {
                col.add("problem.c1: must be rows(a1) x rows(a2)");
            }
            if (!cp.c1 && n1 != n2) {
                col.add("problem.c1: required when a1 and a2 have different sizes");
            }
            if (cp.c2 && (cp.c2->size() != n2 || cp.c2->front().size() != n1)) {
                col.add("problem.c2: must be rows(a2) x rows(a1)");
            }
            if (!cp.c2 && n1 != n2) {
                col.add("problem.c2: required when a1 and a2 have different sizes");
            }
            if (cp.b1 && cp.b1->size() != n1) col.add("problem.b1: dimension must match a1");
            if (cp.b2 && cp.b2->size() != n2) col.add("problem.b2: dimension must match a2");
            if (cfg.z0.size() != n1) col.add("config.z0: dimension must match a1");
            if (cfg.w0 && cfg.w0->size() != n2) col.add("config.w0: dimension must match a2");

            if (col.ok() && cfg.schedule.kind == "constant") {
                const SpectralBounds s1 = spectral_bounds(to_matrix(cp.a1));
                const SpectralBounds s2 = spectral_bounds(to_matrix(cp.a2));
                if (s1.mu > 0.0 && s2.mu > 0.0) {
                    const double cap = std::min(max_stable_step(s1.mu, s1.L),
                                                max_stable_step(s2.mu, s2.L));
                    if (*cfg.schedule.gamma > cap) {
                        col.add("schedule.gamma: exceeds min(2*mu_i/L_i^2) = " + fmt17(cap) +
                                " for this coupled problem");
                    }
                }
            }
        }
    }

    if (!col.ok()) throw ValidationError(col.errors);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError({"cannot open config file '" + path + "'"});
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string emit_config(const ExperimentConfig& cfg) {
    ordered_json root;
    ordered_json problem;
    switch (cfg.type) {
        case ProblemType::dynamic: {
            problem["type"] = "dynamic";
            problem["alpha_base"] = cfg.dynamic.alpha_base;
            problem["alpha_amp"] = cfg.dynamic.alpha_amp;
            problem["b"] = vector_json(cfg.dynamic.b);
            if (cfg.dynamic.l_time) problem["l_time"] = *cfg.dynamic.l_time;
            break;
        }
        case ProblemType::stochastic: {
            problem["type"] = "stochastic";
            problem["xi_lo"] = cfg.stochastic.xi_lo;
            problem["xi_hi"] = cfg.stochastic.xi_hi;
            problem["b"] = vector_json(cfg.stochastic.b);
            problem["b_sign"] = cfg.stochastic.b_sign;
            problem["variance_bound"] = cfg.stochastic.variance_bound;
            break;
        }
        case ProblemType::coupled: {
            problem["type"] = "coupled";
            problem["a1"] = matrix_json(cfg.coupled.a1);
            problem["a2"] = matrix_json(cfg.coupled.a2);
            if (cfg.coupled.c1) problem["c1"] = matrix_json(*cfg.coupled.c1);
            if (cfg.coupled.c2) problem["c2"] = matrix_json(*cfg.coupled.c2);
            if (cfg.coupled.b1) problem["b1"] = vector_json(*cfg.coupled.b1);
            if (cfg.coupled.b2) problem["b2"] = vector_json(*cfg.coupled.b2);
            break;
        }
    }
    root["problem"] = problem;

    ordered_json schedule;
    schedule["kind"] = cfg.schedule.kind;
    if (cfg.schedule.offset) schedule["offset"] = *cfg.schedule.offset;
    if (cfg.schedule.theta) schedule["theta"] = *cfg.schedule.theta;
    if (cfg.schedule.beta) schedule["beta"] = *cfg.schedule.beta;
    if (cfg.schedule.gamma) schedule["gamma"] = *cfg.schedule.gamma;
    root["schedule"] = schedule;

    ordered_json stop;
    stop["epsilon"] = cfg.stop.epsilon;
    stop["max_iters"] = cfg.stop.max_iters;
    root["stop"] = stop;

    if (cfg.time_grid) {
        ordered_json grid;
        grid["iota0"] = cfg.time_grid->iota0;
        grid["delta"] = cfg.time_grid->delta;
        grid["count"] = cfg.time_grid->count;
        root["time_grid"] = grid;
    }

    root["z0"] = vector_json(cfg.z0);
    if (cfg.w0) root["w0"] = vector_json(*cfg.w0);
    if (cfg.seed) root["seed"] = *cfg.seed;
    if (cfg.type == ProblemType::stochastic) {
        root["resolvent_mode"] =
            cfg.resolvent_mode == ResolventMode::mean ? "mean" : "sampled";
    }
    if (cfg.n_seeds) root["n_seeds"] = *cfg.n_seeds;
    if (cfg.lambda) root["lambda"] = *cfg.lambda;
    if (cfg.notes) root["notes"] = *cfg.notes;

    ordered_json outputs;
    outputs["trace"] = cfg.outputs.trace;
    outputs["summary"] = cfg.outputs.summary;
    root["outputs"] = outputs;

    return root.dump(2) + "\n";
}

ExperimentConfig preset(const std::string& name) {
    ExperimentConfig cfg;
    if (name == "dynamic-svi") {
        cfg.type = ProblemType::dynamic;
        cfg.dynamic.alpha_base = 1.0;
        cfg.dynamic.alpha_amp = 0.1;
        cfg.dynamic.b = {1.0};
        cfg.dynamic.l_time = 0.12;
        cfg.time_grid = TimeGridCfg{0.0, 0.1, 500};
        cfg.schedule.kind = "harmonic";
        cfg.schedule.offset = 1;
        cfg.stop = StopRule{1e-6, 500};
        cfg.z0 = {0.0};
        cfg.notes =
            "b and z0 are free parameters of this gain family; the preset pins b = 1 and "
            "z0 = 0. l_time = 0.12 is the 0.1*sup|z| envelope over the tracked band.";
        cfg.outputs = OutputPaths{"dynamic-svi_trace.csv", "dynamic-svi_summary.json"};
        return cfg;
    }
    if (name == "stochastic-svi") {
        cfg.type = ProblemType::stochastic;
        cfg.stochastic.xi_lo = 0.9;
        cfg.stochastic.xi_hi = 1.1;
        cfg.stochastic.b = {1.0};
        cfg.stochastic.b_sign = 1;
        cfg.stochastic.variance_bound = 0.04 / 12.0;  // Var(xi) at unit-norm iterates
        cfg.schedule.kind = "harmonic";
        cfg.schedule.offset = 2;
        cfg.stop = StopRule{1e-6, 200};
        cfg.z0 = {0.0};
        cfg.seed = 1;
        cfg.resolvent_mode = ResolventMode::mean;
        cfg.n_seeds = 100;
        cfg.notes =
            "Realizations are xi*z + b with the sign stored explicitly (b_sign = +1), so "
            "the mean operator's zero is z = -1. z0 = 0 is a preset choice.";
        cfg.outputs = OutputPaths{"stochastic-svi_trace.csv", "stochastic-svi_summary.json"};
        return cfg;
    }
    if (name == "coupled-svi") {
        cfg.type = ProblemType::coupled;
        cfg.coupled.a1 = {{2.0, 0.0}, {0.0, 1.0}};
        cfg.coupled.a2 = {{1.0, 0.0}, {0.0, 2.0}};
        cfg.schedule.kind = "constant";
        cfg.schedule.gamma = 0.45;  // 0.9 * min(2*mu_i/L_i^2) = 0.9 * 0.5
        cfg.stop = StopRule{1e-9, 500};
        cfg.z0 = {1.0, 1.0};
        cfg.w0 = std::vector<double>{1.0, 1.0};
        cfg.notes =
            "A zero start coincides with the joint solution, so the preset starts at "
            "(1,1) / (1,1). gamma = 0.9 * min(2*mu_i/L_i^2) = 0.45.";
        cfg.outputs = OutputPaths{"coupled-svi_trace.csv", "coupled-svi_summary.json"};
        return cfg;
    }
    throw PreconditionError("preset: unknown name '" + name +
                            "' (expected dynamic-svi | stochastic-svi | coupled-svi)");
}

DynamicOp build_dynamic_op(const ExperimentConfig& cfg) {
    if (cfg.type != ProblemType::dynamic || !cfg.time_grid) {
        throw PreconditionError("build_dynamic_op: config is not a dynamic problem");
    }
    return make_sin_gain_dynamic(
        cfg.dynamic.alpha_base, cfg.dynamic.alpha_amp, Vector(cfg.dynamic.b),
        make_time_grid(cfg.time_grid->iota0, cfg.time_grid->delta, cfg.time_grid->count),
        cfg.dynamic.l_time.value_or(0.0));
}

StochasticOp build_stochastic_op(const ExperimentConfig& cfg) {
    if (cfg.type != ProblemType::stochastic) {
        throw PreconditionError("build_stochastic_op: config is not a stochastic problem");
    }
    return make_uniform_gain_stochastic(cfg.stochastic.xi_lo, cfg.stochastic.xi_hi,
                                        Vector(cfg.stochastic.b), cfg.stochastic.b_sign,
                                        cfg.stochastic.variance_bound);
}

CoupledPair build_coupled_pair(const ExperimentConfig& cfg) {
    if (cfg.type != ProblemType::coupled) {
        throw PreconditionError("build_coupled_pair: config is not a coupled problem");
    }
    const Matrix a1 = to_matrix(cfg.coupled.a1);
    const Matrix a2 = to_matrix(cfg.coupled.a2);
    const Matrix c1 = cfg.coupled.c1 ? to_matrix(*cfg.coupled.c1) : Matrix::identity(a1.rows());
    const Matrix c2 = cfg.coupled.c2 ? to_matrix(*cfg.coupled.c2) : Matrix::identity(a2.rows());
    const Vector b1 =
        cfg.coupled.b1 ? Vector(*cfg.coupled.b1) : Vector::zeros(a1.rows());
    const Vector b2 =
        cfg.coupled.b2 ? Vector(*cfg.coupled.b2) : Vector::zeros(a2.rows());
    return CoupledPair{make_coupled_affine(a1, c1, b1), make_coupled_affine(a2, c2, b2)};
}

namespace {

ordered_json compute_bounds(const ExperimentConfig& cfg) {
    ordered_json out;
    std::vector<std::string> notes;
    const Schedule sched = cfg.schedule.to_schedule();
    const double gamma_min = sched.step_at(cfg.stop.max_iters - 1);
    out["gamma_min"] = gamma_min;
    const double eps = cfg.stop.epsilon;

    auto strong_bound = [&](double mu, double L, const std::optional<Vector>& ref,
                            const Vector& start) {
        out["mu"] = mu;
        out["L"] = L;
        if (!(mu > 0.0)) {
            notes.push_back("operator is not strongly monotone; no contraction bound");
            return;
        }
        const double cap = max_stable_step(mu, L);
        out["max_stable_step"] = cap;
        if (!ref) {
            notes.push_back("reference zero unavailable; iteration bound skipped");
            return;
        }
        const Vector d = start - *ref;
        const double r0_sq = dot(d, d);
        out["r0_sq"] = r0_sq;
        if (gamma_min > cap) {
            notes.push_back("gamma_min exceeds 2*mu/L^2; iteration bound skipped");
            return;
        }
        if (r0_sq <= eps * eps) {
            out["iteration_bound_strong"] = 0;
        } else {
            out["iteration_bound_strong"] =
                iteration_bound_strong(r0_sq, mu, L, gamma_min, eps);
        }
        out["iteration_bound_target_eps"] = eps;
    };

    switch (cfg.type) {
        case ProblemType::dynamic: {
            const DynamicOp op = build_dynamic_op(cfg);
            const StaticOp frozen = op.frozen(op.grid.iota0);
            strong_bound(op.meta.mu, op.meta.L, zero_of(frozen), Vector(cfg.z0));
            if (cfg.dynamic.alpha_amp != 0.0) {
                notes.push_back("operator is time-varying; bound uses the frozen snapshot at iota0");
            }
            ErrorBudget budget{1.0, op.grid.delta, 0.0, cfg.stop.max_iters};
            out["total_error_bound"] = total_error_bound(budget);
            notes.push_back("total_error_bound uses the default diagnostic constant C = 1");
            if (op.meta.L_time > 0.0) {
                out["discretization_error_per_step"] =
                    discretization_error_bound(op.meta.L_time, op.grid.delta, 0.0);
                out["max_admissible_delta_iota"] =
                    max_admissible_delta_iota(eps, op.meta.L_time);
            }
            break;
        }
        case ProblemType::stochastic: {
            const StochasticOp op = build_stochastic_op(cfg);
            strong_bound(op.meta.mu, op.meta.L, zero_of(op.mean), Vector(cfg.z0));
            ErrorBudget budget{1.0, 0.0, op.variance_bound, cfg.stop.max_iters};
            out["total_error_bound"] = total_error_bound(budget);
            notes.push_back("total_error_bound uses the default diagnostic constant C = 1");
            break;
        }
        case ProblemType::coupled: {
            const CoupledPair pair = build_coupled_pair(cfg);
            out["mu1"] = pair.t1.meta.mu;
            out["L1"] = pair.t1.meta.L;
            out["mu2"] = pair.t2.meta.mu;
            out["L2"] = pair.t2.meta.L;
            if (pair.t1.meta.mu > 0.0 && pair.t2.meta.mu > 0.0) {
                const double cap = std::min(max_stable_step(pair.t1.meta.mu, pair.t1.meta.L),
                                            max_stable_step(pair.t2.meta.mu, pair.t2.meta.L));
                out["max_stable_step"] = cap;
                const auto ref = joint_zero(pair);
                const double c = std::min(pair.t1.meta.mu, pair.t2.meta.mu);
                if (ref && c * gamma_min < 1.0) {
                    const Vector dz = Vector(cfg.z0) - ref->first;
                    const Vector dw = Vector(*cfg.w0) - ref->second;
                    const double r0 = dot(dz, dz) + dot(dw, dw);
                    out["r0_sq"] = r0;
                    out["iteration_bound_coupled"] =
                        r0 <= eps ? 0
                                  : iteration_bound_coupled(r0, pair.t1.meta.mu,
                                                            pair.t2.meta.mu, gamma_min, eps);
                    out["iteration_bound_target_eps"] = eps;
                    notes.push_back(
                        "coupled bound drives the combined squared residual below eps");
                }
            } else {
                notes.push_back("a coupled side is not strongly monotone; bounds skipped");
            }
            break;
        }
    }
    out["notes"] = notes;
    return out;
}

void write_text_file(const std::string& path, const std::string& content,
                     const char* what) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error(std::string(what) + ": cannot open '" + path +
                                 "' for writing");
    }
    out << content;
    if (!out) {
        throw std::runtime_error(std::string(what) + ": write to '" + path + "' failed");
    }
}

}  // namespace

void emit_csv(const SolverReport& report, const std::string& path) {
    const std::size_t zdim = report.final_iterate.dim();
    const std::size_t wdim = report.final_partner ? report.final_partner->dim() : 0;

    std::string out = "rho,iota,gamma,step_residual,combined_residual,error_to_reference";
    for (std::size_t i = 0; i < zdim + wdim; ++i) {
        out += ",x" + std::to_string(i);
    }
    out += "\n";

    for (const auto& rec : report.records) {
        out += std::to_string(rec.rho);
        out += ',';
        if (rec.iota) out += fmt17(*rec.iota);
        out += ',';
        out += fmt17(rec.gamma);
        out += ',';
        out += fmt17(rec.step_residual);
        out += ',';
        if (rec.combined_residual) out += fmt17(*rec.combined_residual);
        out += ',';
        if (rec.error_to_reference) out += fmt17(*rec.error_to_reference);
        for (std::size_t i = 0; i < rec.iterate.dim(); ++i) {
            out += ',';
            out += fmt17(rec.iterate[i]);
        }
        if (rec.partner) {
            for (std::size_t i = 0; i < rec.partner->dim(); ++i) {
                out += ',';
                out += fmt17((*rec.partner)[i]);
            }
        }
        out += '\n';
    }
    write_text_file(path, out, "emit_csv");
}

void write_mc_csv(const std::vector<McPoint>& curve, const std::string& path) {
    std::string out = "rho,mean_sq_error,std_error,n_seeds\n";
    for (const auto& p : curve) {
        out += std::to_string(p.rho);
        out += ',';
        out += fmt17(p.mean_sq_error);
        out += ',';
        out += fmt17(p.std_error);
        out += ',';
        out += std::to_string(p.n_seeds);
        out += '\n';
    }
    write_text_file(path, out, "write_mc_csv");
}

std::string describe_bounds(const ExperimentConfig& cfg) {
    const ordered_json bounds = compute_bounds(cfg);
    std::string out;
    for (const auto& item : bounds.items()) {
        if (item.key() == "notes") continue;
        out += item.key() + " = " +
               (item.value().is_number_float() ? fmt17(item.value().get<double>())
                                               : item.value().dump()) +
               "\n";
    }
    for (const auto& note : bounds["notes"]) {
        out += "note: " + note.get<std::string>() + "\n";
    }
    return out;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
    RunResult result;
    const Schedule sched = cfg.schedule.to_schedule();

    if (cfg.lambda) {
        result.warnings.push_back(
            "lambda is accepted and echoed but no update consumes it");
    }
    if (classify_robbins_monro(sched) != RobbinsMonro::satisfies) {
        result.warnings.push_back(
            "schedule violates the Robbins-Monro step conditions; run proceeds under "
            "the bounded-step analysis");
    }

    const auto t0 = std::chrono::steady_clock::now();
    switch (cfg.type) {
        case ProblemType::dynamic:
            result.report = solve_dynamic(build_dynamic_op(cfg), Vector(cfg.z0), sched,
                                          cfg.stop);
            break;
        case ProblemType::stochastic:
            result.report = solve_stochastic(build_stochastic_op(cfg), Vector(cfg.z0),
                                             sched, cfg.stop, RngState{*cfg.seed, 0},
                                             cfg.resolvent_mode);
            break;
        case ProblemType::coupled:
            result.report = solve_coupled(build_coupled_pair(cfg), Vector(cfg.z0),
                                          Vector(*cfg.w0), sched, cfg.stop);
            break;
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    result.report.config_echo = emit_config(cfg);
    emit_csv(result.report, cfg.outputs.trace);

    ordered_json summary;
    summary["verdict"] = to_string(result.report.verdict);
    summary["iterations"] = result.report.records.size();
    if (!result.report.records.empty()) {
        summary["final_step_residual"] = result.report.records.back().step_residual;
        if (result.report.records.back().error_to_reference) {
            summary["final_error_to_reference"] =
                *result.report.records.back().error_to_reference;
        }
    }
    summary["wall_time_seconds"] = wall;
    if (result.report.seed) {
        summary["seed"] = *result.report.seed;
        summary["rng_algorithm"] = result.report.rng_algorithm;
    }
    switch (classify_robbins_monro(sched)) {
        case RobbinsMonro::satisfies:
            summary["schedule_classification"] = "satisfies";
            break;
        case RobbinsMonro::violates_divergent_sum:
            summary["schedule_classification"] = "violates_divergent_sum";
            break;
        case RobbinsMonro::violates_square_summability:
            summary["schedule_classification"] = "violates_square_summability";
            break;
    }
    summary["warnings"] = result.warnings;
    summary["bounds"] = compute_bounds(cfg);
    summary["config_echo"] = ordered_json::parse(result.report.config_echo);
    write_text_file(cfg.outputs.summary, summary.dump(2) + "\n", "run_experiment");

    switch (result.report.verdict) {
        case Verdict::converged: result.exit_code = 0; break;
        case Verdict::max_iters_reached: result.exit_code = 2; break;
        case Verdict::diverged: result.exit_code = 3; break;
    }
    return result;
}

}  // namespace inclusionkit
