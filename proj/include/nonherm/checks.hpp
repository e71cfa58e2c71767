// checks.hpp - embedded invariant suite (run by `nonherm check`).

#pragma once

#include "nonherm/geometry.hpp"
#include "nonherm/propagator.hpp"
#include "nonherm/scenarios.hpp"
#include "nonherm/tracking.hpp"

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

namespace nonherm {

// ------------------------------ measurements --------------------------------

// lambda_a(s) = exp(k1 s + k2 s^2 + k3 s^3).
inline GaugeFunction cubic_gauge(const std::array<cplx, 3>& k1, const std::array<cplx, 3>& k2) {
    auto q = [](std::array<cplx, 3> k) {
        return [k](double s) { return s * (k[0] + s * (k[1] + s * k[2])); };
    };
    auto dq = [](std::array<cplx, 3> k) {
        return [k](double s) { return k[0] + s * (2.0 * k[1] + 3.0 * s * k[2]); };
    };
    return exponent_gauge(q(k1), dq(k1), q(k2), dq(k2));
}

struct GaugeComparison {
    double max_d_deviation = 0.0;   // max | |d~_a| - |d_a| |
    double max_c_relative = 0.0;    // max | |c~_a| |lambda_a| / |c_a| - 1 |
};

// Runs the decomposition in the gauged basis, with the gauged phase
// generators recomputed by differencing the gauged vectors, and compares with
// the ungauged decomposition. `states` must lie on the track's node grid.
inline GaugeComparison compare_gauge(const BasisTrack& track, const std::vector<PhaseAccumulator>& acc,
                                     const std::vector<WaveState>& states, const GaugeFunction& gauge) {
    if (states.size() != track.node_count()) {
        throw Error(ErrorCode::invalid_argument, "compare_gauge", "states not on the node grid");
    }
    BasisTrack gauged = apply_gauge(track, gauge);
    gauged = with_phase_generators(std::move(gauged), generators_by_differences(gauged));
    const auto gacc = integrate_phases(gauged);
    GaugeComparison out;
    for (std::size_t k = 0; k < states.size(); ++k) {
        const Vec2& psi = states[k].psi;
        const auto c = decompose_c(psi, track.node(k).frame);
        const auto d = decompose_d(psi, track.node(k).frame, acc[2 * k]);
        const auto ct = decompose_c(psi, gauged.node(k).frame);
        const auto dt = decompose_d(psi, gauged.node(k).frame, gacc[2 * k]);
        for (std::size_t a = 0; a < branch_count; ++a) {
            out.max_d_deviation = std::max(out.max_d_deviation, std::abs(std::abs(dt[a]) - std::abs(d[a])));
            if (std::abs(c[a]) > 1e-12) {
                const double lam = std::abs(gauge.branch[a](track.node(k)).value);
                out.max_c_relative = std::max(out.max_c_relative, std::abs(std::abs(ct[a]) * lam / std::abs(c[a]) - 1.0));
            }
        }
    }
    return out;
}

// max |exp(-int tilde A_11) - (lambda(0)/lambda(s)) exp(-int A_11)| / |exp(-int A_11)|
// for the beta gauge, with tilde A_11 from its closed form.
inline double beta_gauge_deviation(const BasisTrack& track, const std::vector<PhaseAccumulator>& acc) {
    const GaugeFunction g = beta_gauge(track.samples.front().frame);
    std::vector<DiagonalGenerators> gens(track.samples.size());
    for (std::size_t j = 0; j < gens.size(); ++j) {
        gens[j] = track.samples[j].phase;
        gens[j].a[0] = tilde_a11_analytic(track.samples[j].frame, track.samples[j].dp);
    }
    const auto tacc = integrate_phases(with_phase_generators(track, gens));
    const cplx lambda0 = g.branch[0](track.samples.front()).value;
    double worst = 0.0;
    for (std::size_t j = 0; j < track.samples.size(); ++j) {
        const cplx lambda = g.branch[0](track.samples[j]).value;
        const cplx lhs = std::exp(-tacc[j].integral[0]);
        const cplx rhs = lambda0 / lambda * std::exp(-acc[j].integral[0]);
        worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
    }
    return worst;
}

inline double biorthogonality_defect(const BasisTrack& track) {
    double worst = 0.0;
    for (const auto& b : track.samples) {
        for (std::size_t i = 0; i < branch_count; ++i) {
            for (std::size_t j = 0; j < branch_count; ++j) {
                const cplx expected = i == j ? 1.0 : 0.0;
                worst = std::max(worst, std::abs(inner(b.frame.left[i], b.frame.right[j]) - expected));
            }
        }
    }
    return worst;
}

struct HermitianReport {
    double norm_deviation = 0.0;   // max | |psi| - 1 |
    double cd_deviation = 0.0;     // max | |c_a| - |d_a| |   (unit-norm eigenvectors)
    double re_generator = 0.0;     // max |Re A_aa|          (unit-norm eigenvectors)
};

inline HermitianReport hermitian_report(const ParameterPath& path, std::size_t steps,
                                        const GeneratorFn& generators = default_generators()) {
    const BasisTrack raw = build_basis_track(path, steps, generators);
    const BasisTrack track = apply_gauge(raw, normalization_gauge());
    const auto acc = integrate_phases(track);
    const Vec2 psi0 = track.samples.front().frame.right[0] / track.samples.front().frame.right[0].norm();
    const auto states = propagate(path, psi0, steps);
    HermitianReport r;
    for (std::size_t k = 0; k < states.size(); ++k) {
        r.norm_deviation = std::max(r.norm_deviation, std::abs(states[k].psi.norm() - 1.0));
        const auto c = decompose_c(states[k].psi, track.node(k).frame);
        const auto d = decompose_d(states[k].psi, track.node(k).frame, acc[2 * k]);
        for (std::size_t a = 0; a < branch_count; ++a) {
            r.cd_deviation = std::max(r.cd_deviation, std::abs(std::abs(c[a]) - std::abs(d[a])));
        }
    }
    for (const auto& b : track.samples) {
        for (const cplx& a : b.phase.a) r.re_generator = std::max(r.re_generator, std::abs(a.real()));
    }
    return r;
}

// max_s | |psi|^2 - D^+ eta D | / |psi|^2
inline double eta_population_error(const std::vector<PopulationRecord>& records) {
    double worst = 0.0;
    for (const auto& r : records) {
        worst = std::max(worst, std::abs(r.norm_sq - d_quadratic_form(r.d, r.eta)) / r.norm_sq);
    }
    return worst;
}

// max relative difference between the phase generators and central
// differences of the tracked eigenvectors, at `points` interior samples.
inline double generator_fd_error(const ParameterPath& path, const GeneratorFn& generators, double h,
                                 std::size_t points = 25) {
    const auto grid = uniform_grid(points + 1);
    const std::vector<double> interior(grid.begin() + 1, grid.end() - 1);
    const auto frames = frames_along(path, interior);
    double worst = 0.0;
    for (const auto& f : frames) {
        const DiagonalGenerators g = generators(f, path.derivative_at(f.s));
        const Mat2 fd = detail::central_difference_generators(path, f, h);
        for (std::size_t a = 0; a < branch_count; ++a) {
            const double scale = std::max(std::abs(fd(a, a)), 1e-8);
            worst = std::max(worst, std::abs(g.a[a] - fd(a, a)) / scale);
        }
    }
    return worst;
}

inline double constant_hamiltonian_error(const ComplexPair& p, double T, std::size_t steps) {
    const ParameterPath path = constant_path(p, T);
    Vec2 psi0(cplx{0.6, 0.0}, cplx{0.0, 0.8});
    const Vec2 exact = expm2(-I_unit * T * hamiltonian_at(p)) * psi0;
    return (propagate(path, psi0, steps).back().psi - exact).norm();
}

// ---------------------------------- suite -----------------------------------

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

struct CheckOptions {
    GeneratorFn generators = default_generators();
    std::string filter;           // substring of the check name; empty runs all
    std::size_t samples = 10000;
};

namespace check_detail {

inline ScenarioConfig named(const char* name) { return *find_builtin(name); }

// Records on the node grid for `cfg`, with the injected phase generators.
struct Run {
    ParameterPath path;
    PhaseTrajectory phases;
    std::vector<WaveState> states;
    std::vector<PopulationRecord> records;
};

inline Run run_with(const ScenarioConfig& cfg, const Vec2& psi0, const CheckOptions& opt) {
    Run r;
    r.path = build_path(cfg);
    r.phases.track = build_basis_track(r.path, opt.samples, opt.generators);
    r.phases.acc = integrate_phases(r.phases.track);
    r.states = propagate(r.path, psi0 / psi0.norm(), opt.samples);
    for (std::size_t k = 0; k < r.states.size(); ++k) {
        r.records.push_back(make_record(r.states[k], r.phases.track.node(k), r.phases.node(k), nullptr));
    }
    return r;
}

inline CheckResult below(std::string name, double value, double tol, std::string detail) {
    return {std::move(name), std::isfinite(value) && value < tol, value, tol, std::move(detail)};
}

}  // namespace check_detail

inline std::vector<std::string> check_names() {
    return {"gauge_invariance",     "gauge_invariance_beta", "biorthogonality",  "hermitian_limit",
            "propagator_exact",     "convergence_order",     "eta_consistency",  "eta_evolution",
            "generator_fd"};
}

inline std::vector<CheckResult> run_checks(const CheckOptions& opt = {}) {
    using namespace check_detail;
    std::vector<CheckResult> out;
    auto wanted = [&](const std::string& name) {
        return opt.filter.empty() || name.find(opt.filter) != std::string::npos;
    };
    auto guarded = [&](const std::string& name, auto body) {
        if (!wanted(name)) return;
        try {
            out.push_back(body());
        } catch (const std::exception& e) {
            out.push_back({name, false, std::numeric_limits<double>::quiet_NaN(), 0.0, e.what()});
        }
    };

    const Vec2 mixed(cplx{1.0, 0.0}, cplx{0.3, 0.4});

    guarded("gauge_invariance", [&] {
        const Run r = run_with(named("fig2"), mixed, opt);
        const auto cmp = compare_gauge(r.phases.track, r.phases.acc, r.states,
                                       cubic_gauge({cplx{0.7, -1.3}, cplx{-1.1, 0.4}, cplx{0.5, 0.9}},
                                                   {cplx{-0.6, 0.8}, cplx{1.2, -0.2}, cplx{-0.4, -1.5}}));
        std::ostringstream d;
        d << "max ||d~|-|d|| = " << cmp.max_d_deviation << ", c rescaling error = " << cmp.max_c_relative;
        return below("gauge_invariance", std::max(cmp.max_d_deviation, cmp.max_c_relative), 1e-8, d.str());
    });
    guarded("gauge_invariance_beta", [&] {
        const ParameterPath path = build_path(named("fig2"));
        const BasisTrack track = build_basis_track(path, opt.samples, opt.generators);
        const double dev = beta_gauge_deviation(track, integrate_phases(track));
        return below("gauge_invariance_beta", dev, 1e-8, "alternative-gauge phase factor relation");
    });
    guarded("biorthogonality", [&] {
        double worst = 0.0;
        for (const char* name : {"fig2", "fig4", "fig5", "fig7"}) {
            worst = std::max(worst, biorthogonality_defect(build_basis_track(build_path(named(name)), 1000)));
        }
        return below("biorthogonality", worst, 1e-10, "max |<l_a, r_b> - delta_ab| on fig2, fig4, fig5, fig7");
    });
    guarded("hermitian_limit", [&] {
        const ParameterPath path = gaussian_pulse_path(1.0, 0.5, 0.0, 0.16, 100.0);
        const HermitianReport h = hermitian_report(path, opt.samples, opt.generators);
        std::ostringstream d;
        d << "norm " << h.norm_deviation << ", |c|-|d| " << h.cd_deviation << ", Re A_aa " << h.re_generator;
        const double worst = std::max({h.norm_deviation / 1e-8, h.cd_deviation / 1e-9, h.re_generator / 1e-9});
        return below("hermitian_limit", worst, 1.0, d.str() + " (value: worst ratio to tolerance)");
    });
    guarded("propagator_exact", [&] {
        const double err = constant_hamiltonian_error({cplx{0.8, 0.3}, cplx{0.2, -0.05}}, 20.0, 10000);
        return below("propagator_exact", err, 1e-8, "RK4 vs matrix exponential, constant H");
    });
    guarded("convergence_order", [&] {
        const ParameterPath path = build_path(named("fig2"));
        const Vec2 psi0 = eigenframe(path.at(0.0), path.at(0.0)).right[0];
        const double order = convergence_order(path, psi0 / psi0.norm(), 1000);
        std::ostringstream d;
        d << "observed order " << order << ", expected [3.7, 4.3]";
        return CheckResult{"convergence_order", order >= 3.7 && order <= 4.3, order, 4.0, d.str()};
    });
    guarded("eta_consistency", [&] {
        double worst = 0.0;
        for (const auto& cfg : builtin_scenarios()) {
            const Run r = run_with(cfg, mixed, opt);
            worst = std::max(worst, eta_population_error(r.records));
        }
        return below("eta_consistency", worst, 1e-8, "max | |psi|^2 - D^+ eta D | / |psi|^2 over builtins");
    });
    guarded("eta_evolution", [&] {
        double worst = 0.0;
        for (const char* name : {"fig2", "fig5", "fig7"}) {
            const ParameterPath path = build_path(named(name));
            const BasisTrack track = build_basis_track(path, opt.samples, opt.generators);
            worst = std::max(worst, eta_evolution_residual(track, integrate_phases(track)));
        }
        return below("eta_evolution", worst, 1e-4, "max |d eta/ds - (A^+ eta + eta A^)|");
    });
    guarded("generator_fd", [&] {
        double worst = 0.0;
        for (const char* name : {"fig2", "fig5", "fig7"}) {
            worst = std::max(worst, generator_fd_error(build_path(named(name)), opt.generators, 1e-5));
        }
        return below("generator_fd", worst, 1e-6, "analytic vs central-difference A_aa, h = 1e-5");
    });
    return out;
}

}  // namespace nonherm
