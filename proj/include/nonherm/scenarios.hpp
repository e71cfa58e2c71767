// scenarios.hpp - declarative experiment definitions, execution and batch sweeps.

#pragma once

#include "nonherm/core.hpp"
#include "nonherm/geometry.hpp"
#include "nonherm/model.hpp"
#include "nonherm/propagator.hpp"
#include "nonherm/spectral.hpp"
#include "nonherm/tracking.hpp"

#include <algorithm>
#include <future>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nonherm {

enum class PathKind { gaussian_pulse, ep_loop, custom_table };
enum class InitialKind { branch1, branch2, explicit_vector };

inline const char* to_string(PathKind k) {
    switch (k) {
    case PathKind::gaussian_pulse: return "gaussian_pulse";
    case PathKind::ep_loop: return "ep_loop";
    case PathKind::custom_table: return "custom_table";
    }
    return "?";
}

inline const char* to_string(InitialKind k) {
    switch (k) {
    case InitialKind::branch1: return "branch1";
    case InitialKind::branch2: return "branch2";
    case InitialKind::explicit_vector: return "explicit";
    }
    return "?";
}

struct Conventions {
    bool c = true;
    bool d = true;
    bool e = true;
};

struct ScenarioConfig {
    std::string name;
    std::string description;
    PathKind path_kind = PathKind::gaussian_pulse;
    std::map<std::string, double> parameters;  // w0, delta0, sigma, gamma, phi, T, windings
    std::vector<TableRow> table;                // custom_table only
    InitialKind initial = InitialKind::branch1;
    Vec2 initial_vector = Vec2::Zero();
    std::size_t steps = 10000;
    Conventions conventions;
    std::vector<std::string> output_columns;   // empty: all columns
};

inline const std::vector<std::string>& required_parameters(PathKind kind) {
    static const std::vector<std::string> gaussian{"w0", "delta0", "sigma", "gamma", "T"};
    static const std::vector<std::string> loop{"gamma", "phi", "T"};
    static const std::vector<std::string> table{"T"};
    switch (kind) {
    case PathKind::gaussian_pulse: return gaussian;
    case PathKind::ep_loop: return loop;
    case PathKind::custom_table: return table;
    }
    return table;
}

inline void validate(const ScenarioConfig& cfg) {
    auto fail = [&](const std::string& msg) {
        throw Error(ErrorCode::config_error, "validate", "scenario '" + cfg.name + "': " + msg);
    };
    if (cfg.steps < minimum_steps) fail("steps must be >= 1000");
    for (const auto& key : required_parameters(cfg.path_kind)) {
        auto it = cfg.parameters.find(key);
        if (it == cfg.parameters.end()) fail("missing parameter '" + key + "'");
        if (!std::isfinite(it->second)) fail("parameter '" + key + "' is not finite");
    }
    if (cfg.path_kind == PathKind::custom_table && cfg.table.size() < 2) fail("custom_table needs a table");
    if (cfg.initial == InitialKind::explicit_vector && !(cfg.initial_vector.norm() > 0.0)) {
        fail("explicit initial vector must be nonzero");
    }
    if (!cfg.conventions.c && !cfg.conventions.d && !cfg.conventions.e) fail("no convention requested");
}

inline ParameterPath build_path(const ScenarioConfig& cfg) {
    const auto& p = cfg.parameters;
    auto get = [&](const char* key, double fallback) {
        auto it = p.find(key);
        return it == p.end() ? fallback : it->second;
    };
    switch (cfg.path_kind) {
    case PathKind::gaussian_pulse:
        return gaussian_pulse_path(p.at("w0"), p.at("delta0"), p.at("gamma"), p.at("sigma"), p.at("T"));
    case PathKind::ep_loop:
        return ep_loop_path(p.at("gamma"), p.at("phi"), p.at("T"), static_cast<int>(get("windings", 1.0)));
    case PathKind::custom_table:
        return tabulated_path(cfg.table, p.at("T"));
    }
    throw Error(ErrorCode::config_error, "build_path", "unknown path kind");
}

// --------------------------------- builtins ---------------------------------

inline ScenarioConfig gaussian_scenario(std::string name, double gamma, InitialKind init, std::string description) {
    ScenarioConfig c;
    c.name = std::move(name);
    c.description = std::move(description);
    c.path_kind = PathKind::gaussian_pulse;
    c.parameters = {{"w0", 1.0}, {"delta0", 0.5}, {"sigma", 0.16}, {"gamma", gamma}, {"T", 100.0}};
    c.initial = init;
    return c;
}

inline ScenarioConfig loop_scenario(std::string name, double phi, InitialKind init, std::string description) {
    ScenarioConfig c;
    c.name = std::move(name);
    c.description = std::move(description);
    c.path_kind = PathKind::ep_loop;
    c.parameters = {{"gamma", 0.5}, {"phi", phi}, {"T", 100.0}};
    c.initial = init;
    return c;
}

inline std::vector<ScenarioConfig> builtin_scenarios() {
    return {
        gaussian_scenario("fig1", 0.1, InitialKind::branch1, "gaussian_pulse path (w, Re z), Γ=0.1"),
        gaussian_scenario("fig2", 0.1, InitialKind::branch1, "gaussian_pulse false inversion, Γ=0.1, branch1"),
        gaussian_scenario("fig3", 0.1, InitialKind::branch1, "gaussian_pulse eigenvector norms, Γ=0.1"),
        gaussian_scenario("fig4", 0.2, InitialKind::branch2, "gaussian_pulse false adiabaticity, Γ=0.2, branch2"),
        loop_scenario("fig5", 0.0, InitialKind::branch1, "ep_loop symmetric, Γ=0.5, branch1"),
        loop_scenario("fig6", 0.0, InitialKind::branch2, "ep_loop symmetric, Γ=0.5, branch2"),
        loop_scenario("fig7", pi / 4, InitialKind::branch1, "ep_loop non-symmetric φ=π/4, Γ=0.5, branch1"),
        loop_scenario("fig8", pi / 4, InitialKind::branch2, "ep_loop non-symmetric φ=π/4, Γ=0.5, branch2"),
    };
}

inline std::optional<ScenarioConfig> find_builtin(const std::string& name) {
    for (auto& c : builtin_scenarios()) {
        if (c.name == name) return c;
    }
    return std::nullopt;
}

// --------------------------------- running ----------------------------------

enum class FlipOutcome { adiabatic_flip, no_flip, undetermined };

inline const char* to_string(FlipOutcome f) {
    switch (f) {
    case FlipOutcome::adiabatic_flip: return "ADIABATIC_FLIP";
    case FlipOutcome::no_flip: return "NO_FLIP";
    case FlipOutcome::undetermined: return "UNDETERMINED";
    }
    return "?";
}

struct ScenarioResult {
    ScenarioConfig config;
    ParameterPath path;
    PhaseTrajectory phases;
    std::vector<WaveState> states;
    std::vector<PopulationRecord> records;
    std::vector<AdiabaticCriterion> criteria;
    ArtifactReport artifacts;
    std::size_t initial_branch = 0;
    double hat_scale = 1.0;
    bool e_available = false;
    std::optional<Holonomy> holonomy;
    std::optional<FlipOutcome> flip;
    std::vector<std::string> diagnostics;
};

inline FlipOutcome flip_detector(const ScenarioResult& result) {
    if (!result.path.closed || result.records.empty()) return FlipOutcome::undetermined;
    const auto& d = result.records.back().d;
    const double r = ratio(d[0], d[1]);
    if (r >= 0.3 && r <= 3.0) return FlipOutcome::undetermined;
    const std::size_t dominant = r > 1.0 ? 0 : 1;
    const std::size_t initial = result.initial_branch;
    const std::size_t other = 1 - initial;
    const EigenFrame& first = result.phases.track.samples.front().frame;
    const EigenFrame& last = result.phases.track.samples.back().frame;
    const Vec2& final_vec = last.right[dominant];
    if (normalized_overlap(first.right[other], final_vec) > 0.99) return FlipOutcome::adiabatic_flip;
    if (normalized_overlap(first.right[initial], final_vec) > 0.99) return FlipOutcome::no_flip;
    return FlipOutcome::undetermined;
}

inline ScenarioResult run_scenario(const ScenarioConfig& cfg) {
    validate(cfg);
    ScenarioResult res;
    res.config = cfg;
    auto context = [&](const Error& e) {
        return Error(e.code(), "run_scenario[" + cfg.name + "]/" + e.operation(), e.detail(), e.s());
    };
    try {
        res.path = build_path(cfg);
        res.phases = accumulate_phases(res.path, cfg.steps);
    } catch (const Error& e) {
        throw context(e);
    }
    const auto& track = res.phases.track;
    const EigenFrame& f0 = track.samples.front().frame;

    Vec2 psi0;
    switch (cfg.initial) {
    case InitialKind::branch1: psi0 = f0.right[0]; break;
    case InitialKind::branch2: psi0 = f0.right[1]; break;
    case InitialKind::explicit_vector: psi0 = cfg.initial_vector / cfg.initial_vector.norm(); break;
    }
    psi0 /= psi0.norm();

    try {
        res.states = propagate(res.path, psi0, cfg.steps);
    } catch (const Error& e) {
        throw context(e);
    }

    std::optional<CProductNormalizer> cproduct;
    if (cfg.conventions.e) {
        try {
            cproduct.emplace(f0);
            res.e_available = true;
        } catch (const Error& e) {
            res.diagnostics.push_back(std::string(to_string(e.code())) + ": e-coefficients omitted");
        }
    }

    res.records.reserve(res.states.size());
    res.criteria.reserve(res.states.size());
    double worst_inequality = 0.0;
    for (std::size_t k = 0; k < res.states.size(); ++k) {
        const BasisSample& sample = track.node(k);
        const PhaseAccumulator& acc = res.phases.node(k);
        std::optional<Coefficients> e;
        if (cproduct) {
            try {
                e = cproduct->coefficients(res.states[k].psi, sample.frame);
            } catch (const Error& err) {
                res.diagnostics.push_back(std::string(to_string(err.code())) +
                                          ": e-coefficients dropped from s=" + std::to_string(sample.s()));
                cproduct.reset();
                res.e_available = false;
                for (auto& r : res.records) r.e.reset();
            }
        }
        try {
            res.records.push_back(make_record(res.states[k], sample, acc, nullptr));
            res.criteria.push_back(adiabatic_criterion(sample, acc));
        } catch (const Error& err) {
            throw context(err.at(sample.s()));
        }
        if (cproduct) res.records.back().e = e;
        worst_inequality = std::min(worst_inequality, 1.0 - d_squared_sum(res.records.back().d));
    }
    if (worst_inequality < -1e-8) {
        std::ostringstream os;
        os << "1 - (|d1|^2 + |d2|^2) reached " << worst_inequality;
        res.diagnostics.push_back(os.str());
        log(LogLevel::info, os.str());
    }

    res.hat_scale = hat_scale(res.phases.acc);
    if (res.hat_scale > hat_scale_warning) {
        std::ostringstream os;
        os << "off-diagonal A^ factors reach " << res.hat_scale << "; eta evolution is ill-conditioned";
        res.diagnostics.push_back(os.str());
        log(LogLevel::warn, os.str());
    }

    const auto& d0 = res.records.front().d;
    res.initial_branch = cfg.initial == InitialKind::branch2 ? 1
                         : cfg.initial == InitialKind::branch1 ? 0
                         : (std::abs(d0[0]) >= std::abs(d0[1]) ? 0 : 1);
    res.artifacts = false_artifact_report(res.records);
    if (res.path.closed) {
        try {
            res.holonomy = loop_holonomy(track, res.phases.acc);
        } catch (const Error& e) {
            res.diagnostics.push_back(e.what());
        }
        res.flip = flip_detector(res);
    }
    return res;
}

// ---------------------------------- sweeps ----------------------------------

struct SweepSummary {
    double value = 0.0;
    bool ok = false;
    std::string error;
    bool false_inversion = false;
    bool false_adiabaticity = false;
    double final_ratio_d21 = 0.0;
    double final_ratio_c21 = 0.0;
    double final_norm_sq = 0.0;
    std::optional<FlipOutcome> flip;
    std::optional<Holonomy> holonomy;
};

inline ScenarioConfig with_parameter(ScenarioConfig cfg, const std::string& parameter, double value) {
    if (parameter == "steps") {
        cfg.steps = static_cast<std::size_t>(value);
    } else {
        cfg.parameters[parameter] = value;
    }
    return cfg;
}

inline SweepSummary summarize(double value, const ScenarioResult& r) {
    SweepSummary s;
    s.value = value;
    s.ok = true;
    s.false_inversion = r.artifacts.false_inversion;
    s.false_adiabaticity = r.artifacts.false_adiabaticity;
    const auto& last = r.records.back();
    s.final_ratio_d21 = ratio(last.d[1], last.d[0]);
    s.final_ratio_c21 = ratio(last.c[1], last.c[0]);
    s.final_norm_sq = last.norm_sq;
    s.flip = r.flip;
    s.holonomy = r.holonomy;
    return s;
}

// One scenario run per value, executed concurrently. Failures are recorded
// per value.
inline std::vector<SweepSummary> sweep(const ScenarioConfig& tmpl, const std::string& parameter,
                                       const std::vector<double>& values) {
    const bool known = parameter == "steps" || tmpl.parameters.count(parameter) > 0;
    if (!known) {
        throw Error(ErrorCode::config_error, "sweep", "parameter '" + parameter + "' not in scenario '" +
                                                         tmpl.name + "'");
    }
    std::vector<std::future<SweepSummary>> jobs;
    jobs.reserve(values.size());
    for (double v : values) {
        jobs.push_back(std::async(std::launch::async, [tmpl, parameter, v] {
            try {
                return summarize(v, run_scenario(with_parameter(tmpl, parameter, v)));
            } catch (const std::exception& e) {
                SweepSummary s;
                s.value = v;
                s.error = e.what();
                return s;
            }
        }));
    }
    std::vector<SweepSummary> out;
    out.reserve(values.size());
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

}  // namespace nonherm
