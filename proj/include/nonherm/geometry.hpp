// geometry.hpp - geometric phase generators and everything built from them.
//
// A_ab(s) = <l_a(s), d r_b/ds>. The diagonal entries are the geometric phase
// generators; their running integrals I_a(s) = int_0^s A_aa give the
// phase-compensated basis  r^_a = exp(-I_a) r_a, whose Gram matrix is
//   eta_ba(s) = exp(-(I_a + conj(I_b))) <r_b, r_a>.
//
// Tracks are sampled on a half-step grid (2N+1 points for N intervals) so the
// running integrals use Simpson's rule on every interval.

#pragma once

#include "nonherm/core.hpp"
#include "nonherm/model.hpp"
#include "nonherm/spectral.hpp"

#include <functional>
#include <vector>

namespace nonherm {

// d r_a / ds for the closed-form eigenvectors of `f` given dp = (dw/ds, dz/ds).
// d(v + z) and d(v - z) are written so that neither cancels when |w| -> 0.
inline std::array<Vec2, branch_count> right_derivatives(const EigenFrame& f, const ComplexPair& dp) {
    const cplx v = f.v;
    const double re2 = 2.0 * (std::conj(f.p.w) * dp.w).real();  // d|w|^2/ds
    const cplx d_plus = f.v_plus_z * dp.z / v + re2 / (2.0 * v);
    const cplx d_minus = -f.v_minus_z * dp.z / v + re2 / (2.0 * v);
    const cplx dwbar = std::conj(dp.w);
    std::array<Vec2, branch_count> dr;
    dr[0] << f.gamma[0] * d_plus, -f.gamma[0] * dwbar;
    dr[1] << -f.gamma[1] * d_minus, -f.gamma[1] * dwbar;
    return dr;
}

struct DiagonalGenerators {
    std::array<cplx, branch_count> a{};
};

using GeneratorFn = std::function<DiagonalGenerators(const EigenFrame&, const ComplexPair&)>;

// A_11 = (w* w' + w w'*)/(4v^2) + w w'*/(2v(v+z)) + (z+v) z'/(2v^2)
// A_22 = (w* w' + w w'*)/(4v^2) + w w'*/(2v(v-z)) - (v-z) z'/(2v^2)
inline DiagonalGenerators generator_matrix_analytic(const EigenFrame& f, const ComplexPair& dp) {
    const cplx v = f.v;
    const cplx w = f.p.w;
    const cplx v2 = v * v;
    const cplx den1 = 2.0 * v * f.v_plus_z;
    const cplx den2 = 2.0 * v * f.v_minus_z;
    if (std::abs(den1) < tiny_denominator || std::abs(den2) < tiny_denominator) {
        throw Error(ErrorCode::zero_denominator, "generator_matrix_analytic", "v (v +/- z) vanishes", f.s);
    }
    const cplx common = (std::conj(w) * dp.w + w * std::conj(dp.w)) / (4.0 * v2);
    const cplx cross = w * std::conj(dp.w);
    DiagonalGenerators g;
    g.a[0] = common + cross / den1 + f.v_plus_z * dp.z / (2.0 * v2);
    g.a[1] = common + cross / den2 - f.v_minus_z * dp.z / (2.0 * v2);
    return g;
}

inline DiagonalGenerators generator_matrix_analytic(const ComplexPair& p, const ComplexPair& dp) {
    return generator_matrix_analytic(frame_for_branch(0.0, p, sheet_sqrt(p.w, p.z), Normalization{}), dp);
}

inline GeneratorFn default_generators() {
    return [](const EigenFrame& f, const ComplexPair& dp) { return generator_matrix_analytic(f, dp); };
}

// Generator of branch 1 in the alternative gauge r~1 = (g1/beta)(w, z - v).
inline cplx tilde_a11_analytic(const EigenFrame& f, const ComplexPair& dp) {
    const cplx v = f.v;
    const cplx w = f.p.w;
    const cplx v2 = v * v;
    const cplx common = (std::conj(w) * dp.w + w * std::conj(dp.w)) / (4.0 * v2);
    return common + std::conj(w) * dp.w / (2.0 * v * f.v_minus_z) - f.v_minus_z * dp.z / (2.0 * v2);
}

// Full matrix <l_a, d r_b/ds> from the closed-form eigenvector derivatives.
inline Mat2 generator_matrix(const EigenFrame& f, const ComplexPair& dp) {
    const auto dr = right_derivatives(f, dp);
    Mat2 a;
    for (std::size_t i = 0; i < branch_count; ++i) {
        for (std::size_t j = 0; j < branch_count; ++j) {
            a(i, j) = inner(f.left[i], dr[j]);
        }
    }
    return a;
}

namespace detail {

inline Mat2 central_difference_generators(const ParameterPath& path, const EigenFrame& at, double h) {
    BranchTracker fwd(at);
    BranchTracker bwd(at);
    const EigenFrame& plus = fwd.advance(at.s + h, path.at(at.s + h));
    const EigenFrame& minus = bwd.advance(at.s - h, path.at(at.s - h));
    Mat2 a;
    for (std::size_t i = 0; i < branch_count; ++i) {
        for (std::size_t j = 0; j < branch_count; ++j) {
            a(i, j) = inner(at.left[i], (plus.right[j] - minus.right[j]) / (2.0 * h));
        }
    }
    return a;
}

}  // namespace detail

// Central-difference generator matrix at at.s, with a Richardson check
// against step h/2.
inline Mat2 generator_matrix_fd(const ParameterPath& path, const EigenFrame& at, double h) {
    if (!(h > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "generator_matrix_fd", "h must be > 0");
    }
    const Mat2 coarse = detail::central_difference_generators(path, at, h);
    const Mat2 fine = detail::central_difference_generators(path, at, 0.5 * h);
    const double scale = std::max(fine.norm(), 1e-8);
    if ((coarse - fine).norm() > 1e-4 * scale) {
        throw Error(ErrorCode::step_too_coarse, "generator_matrix_fd",
                    "Richardson check between h and h/2 failed", at.s);
    }
    return coarse;
}

// ------------------------------- tracks -------------------------------------

struct BasisSample {
    EigenFrame frame;
    ComplexPair dp;
    Mat2 A = Mat2::Zero();      // <l_a, d r_b/ds>
    DiagonalGenerators phase;   // generators integrated into the geometric phases

    double s() const noexcept { return frame.s; }
};

struct BasisTrack {
    std::size_t intervals = 0;
    std::vector<BasisSample> samples;  // 2 * intervals + 1 half-step points

    double step() const noexcept { return 1.0 / static_cast<double>(intervals); }
    std::size_t node_count() const noexcept { return intervals + 1; }
    const BasisSample& node(std::size_t k) const { return samples[2 * k]; }
};

inline BasisTrack build_basis_track(const ParameterPath& path, std::size_t intervals,
                                    const GeneratorFn& generators = default_generators()) {
    if (intervals < 1) {
        throw Error(ErrorCode::invalid_argument, "build_basis_track", "need at least one interval");
    }
    const auto grid = uniform_grid(2 * intervals);
    auto frames = frames_along(path, grid);
    BasisTrack track;
    track.intervals = intervals;
    track.samples.reserve(frames.size());
    for (auto& f : frames) {
        BasisSample b;
        b.dp = path.derivative_at(f.s);
        try {
            b.A = generator_matrix(f, b.dp);
            b.phase = generators(f, b.dp);
        } catch (const Error& e) {
            throw e.at(f.s);
        }
        b.frame = std::move(f);
        track.samples.push_back(std::move(b));
    }
    return track;
}

// Replaces the generators used for phase accumulation (e.g. with values
// obtained by differencing the sampled vectors).
inline BasisTrack with_phase_generators(BasisTrack track, const std::vector<DiagonalGenerators>& gens) {
    if (gens.size() != track.samples.size()) {
        throw Error(ErrorCode::invalid_argument, "with_phase_generators", "size mismatch");
    }
    for (std::size_t j = 0; j < gens.size(); ++j) track.samples[j].phase = gens[j];
    return track;
}

namespace detail {

// Fourth-order derivative of uniformly sampled values at index j, spacing dx.
template <class T, class Get>
T five_point_derivative(std::size_t n, std::size_t j, double dx, Get get) {
    if (n < 5) {
        throw Error(ErrorCode::invalid_argument, "five_point_derivative", "need at least 5 samples");
    }
    if (j >= 2 && j + 2 < n) {
        return (get(j - 2) - 8.0 * get(j - 1) + 8.0 * get(j + 1) - get(j + 2)) / (12.0 * dx);
    }
    if (j == 0) {
        return (-25.0 * get(0) + 48.0 * get(1) - 36.0 * get(2) + 16.0 * get(3) - 3.0 * get(4)) / (12.0 * dx);
    }
    if (j == 1) {
        return (-3.0 * get(0) - 10.0 * get(1) + 18.0 * get(2) - 6.0 * get(3) + get(4)) / (12.0 * dx);
    }
    if (j == n - 1) {
        return (25.0 * get(n - 1) - 48.0 * get(n - 2) + 36.0 * get(n - 3) - 16.0 * get(n - 4) + 3.0 * get(n - 5)) /
               (12.0 * dx);
    }
    return (3.0 * get(n - 1) + 10.0 * get(n - 2) - 18.0 * get(n - 3) + 6.0 * get(n - 4) - get(n - 5)) / (12.0 * dx);
}

}  // namespace detail

// <l_a, d r_a/ds> from fourth-order differences of the sampled right vectors.
// Independent of the closed-form generators and of any gauge bookkeeping.
inline std::vector<DiagonalGenerators> generators_by_differences(const BasisTrack& track) {
    const std::size_t n = track.samples.size();
    const double dx = 0.5 * track.step();
    std::vector<DiagonalGenerators> out(n);
    for (std::size_t a = 0; a < branch_count; ++a) {
        auto get = [&](std::size_t j) -> Vec2 { return track.samples[j].frame.right[a]; };
        for (std::size_t j = 0; j < n; ++j) {
            const Vec2 dr = detail::five_point_derivative<Vec2>(n, j, dx, get);
            out[j].a[a] = inner(track.samples[j].frame.left[a], dr);
        }
    }
    return out;
}

// --------------------------- phase accumulation -----------------------------

struct PhaseAccumulator {
    double s = 0.0;
    std::array<cplx, branch_count> integral{};  // int_0^s A_aa ds'
    Mat2 eta = Mat2::Identity();                // eta(b, a) = eta_ba
};

inline Mat2 eta_matrix(const EigenFrame& f, const std::array<cplx, branch_count>& integral) {
    Mat2 eta;
    for (std::size_t b = 0; b < branch_count; ++b) {
        for (std::size_t a = 0; a < branch_count; ++a) {
            eta(b, a) = std::exp(-(integral[a] + std::conj(integral[b]))) * inner(f.right[b], f.right[a]);
        }
    }
    return eta;
}

// Running integrals on the half-step grid (Simpson per interval, the
// quadratic-interpolant rule at midpoints) and the matching eta matrices.
inline std::vector<PhaseAccumulator> integrate_phases(const BasisTrack& track) {
    const auto& smp = track.samples;
    std::vector<PhaseAccumulator> acc(smp.size());
    if (smp.empty()) return acc;
    const double h = track.step();
    acc[0].s = smp[0].s();
    acc[0].eta = eta_matrix(smp[0].frame, acc[0].integral);
    for (std::size_t k = 0; k < track.intervals; ++k) {
        const std::size_t j = 2 * k;
        for (std::size_t a = 0; a < branch_count; ++a) {
            const cplx f0 = smp[j].phase.a[a];
            const cplx f1 = smp[j + 1].phase.a[a];
            const cplx f2 = smp[j + 2].phase.a[a];
            acc[j + 1].integral[a] = acc[j].integral[a] + h / 24.0 * (5.0 * f0 + 8.0 * f1 - f2);
            acc[j + 2].integral[a] = acc[j].integral[a] + h / 6.0 * (f0 + 4.0 * f1 + f2);
        }
        for (std::size_t i : {j + 1, j + 2}) {
            acc[i].s = smp[i].s();
            acc[i].eta = eta_matrix(smp[i].frame, acc[i].integral);
        }
    }
    return acc;
}

struct PhaseTrajectory {
    BasisTrack track;
    std::vector<PhaseAccumulator> acc;  // aligned with track.samples

    const PhaseAccumulator& node(std::size_t k) const { return acc[2 * k]; }
};

inline constexpr double quadrature_tolerance = 1e-6;

// Builds the track with `samples` intervals and integrates the phases; the
// result is checked against a run with twice the samples.
inline PhaseTrajectory accumulate_phases(const ParameterPath& path, std::size_t samples,
                                         const GeneratorFn& generators = default_generators(),
                                         bool verify = true) {
    if (samples < 100) {
        throw Error(ErrorCode::invalid_argument, "accumulate_phases", "need at least 100 samples");
    }
    PhaseTrajectory out;
    out.track = build_basis_track(path, samples, generators);
    out.acc = integrate_phases(out.track);
    if (verify) {
        const auto fine = integrate_phases(build_basis_track(path, 2 * samples, generators));
        for (std::size_t a = 0; a < branch_count; ++a) {
            const cplx coarse_end = out.acc.back().integral[a];
            const cplx fine_end = fine.back().integral[a];
            if (std::abs(coarse_end - fine_end) > quadrature_tolerance * std::max(1.0, std::abs(fine_end))) {
                throw Error(ErrorCode::sampling_error, "accumulate_phases",
                            "doubling the samples changes the phase integral by more than 1e-6");
            }
        }
    }
    return out;
}

// A^_ab = <l_a, e^{I_a} d/ds (e^{-I_b} r_b)> = e^{I_a - I_b} (A_ab - delta_ab A_bb).
inline Mat2 hat_generator(const BasisSample& b, const PhaseAccumulator& acc) {
    Mat2 hat;
    for (std::size_t i = 0; i < branch_count; ++i) {
        for (std::size_t j = 0; j < branch_count; ++j) {
            const cplx diag = i == j ? b.phase.a[j] : cplx{};
            hat(i, j) = std::exp(acc.integral[i] - acc.integral[j]) * (b.A(i, j) - diag);
        }
    }
    return hat;
}

// Largest |e^{I_a - I_b}|, a != b: the scale of the off-diagonal entries of A^.
inline double hat_scale(const std::vector<PhaseAccumulator>& acc) {
    double worst = 1.0;
    for (const auto& x : acc) {
        const double re = std::abs((x.integral[0] - x.integral[1]).real());
        worst = std::max(worst, std::exp(std::min(re, 700.0)));
    }
    return worst;
}

inline constexpr double hat_scale_warning = 1e8;

// max over interior nodes of |d eta/ds - (A^+ eta + eta A^)|, with d eta/ds by
// central differences on the node grid.
inline double eta_evolution_residual(const BasisTrack& track, const std::vector<PhaseAccumulator>& acc) {
    const double h = track.step();
    double worst = 0.0;
    for (std::size_t k = 1; k + 1 < track.node_count(); ++k) {
        const Mat2 deta = (acc[2 * (k + 1)].eta - acc[2 * (k - 1)].eta) / (2.0 * h);
        const Mat2 hat = hat_generator(track.node(k), acc[2 * k]);
        const Mat2& eta = acc[2 * k].eta;
        const Mat2 rhs = hat.adjoint() * eta + eta * hat;
        worst = std::max(worst, (deta - rhs).norm());
    }
    return worst;
}

// eta on the node grid from the s-ordered exponential
//   eta(s) = U(s)^+ eta(0) U(s),  U' = U A^,
// as a product of midpoint exponentials.
inline std::vector<Mat2> eta_ordered_exponential(const BasisTrack& track, const std::vector<PhaseAccumulator>& acc) {
    const double h = track.step();
    std::vector<Mat2> out;
    out.reserve(track.node_count());
    const Mat2 eta0 = acc.front().eta;
    Mat2 u = Mat2::Identity();
    out.push_back(eta0);
    for (std::size_t k = 0; k < track.intervals; ++k) {
        const Mat2 hat = hat_generator(track.samples[2 * k + 1], acc[2 * k + 1]);
        u = u * expm2(h * hat);
        out.push_back(u.adjoint() * eta0 * u);
    }
    return out;
}

// -------------------------------- gauges ------------------------------------

struct GaugeFactor {
    cplx value{1.0, 0.0};
    cplx log_derivative{};  // d ln(lambda)/ds
};

// lambda_a evaluated on a sample; must equal 1 at the first sample.
struct GaugeFunction {
    std::array<std::function<GaugeFactor(const BasisSample&)>, branch_count> branch;
};

inline GaugeFunction identity_gauge() {
    GaugeFunction g;
    for (auto& b : g.branch) b = [](const BasisSample&) { return GaugeFactor{}; };
    return g;
}

// lambda_a(s) = exp(q_a(s)) with q_a(0) = 0.
inline GaugeFunction exponent_gauge(std::function<cplx(double)> q1, std::function<cplx(double)> dq1,
                                    std::function<cplx(double)> q2, std::function<cplx(double)> dq2) {
    GaugeFunction g;
    g.branch[0] = [q1, dq1](const BasisSample& b) { return GaugeFactor{std::exp(q1(b.s())), dq1(b.s())}; };
    g.branch[1] = [q2, dq2](const BasisSample& b) { return GaugeFactor{std::exp(q2(b.s())), dq2(b.s())}; };
    return g;
}

// Alternative gauge for branch 1, lambda = w / (beta (v + z)) with
// beta = w(0) / (v(0) + z(0)), turning r1 into (g1/beta)(w, z - v).
// Branch 2 is left unchanged.
inline GaugeFunction beta_gauge(const EigenFrame& initial) {
    const cplx beta = initial.p.w / initial.v_plus_z;
    if (std::abs(beta) < tiny_denominator) {
        throw Error(ErrorCode::zero_gauge, "beta_gauge", "beta vanishes (w(0) = 0)");
    }
    GaugeFunction g = identity_gauge();
    g.branch[0] = [beta](const BasisSample& b) {
        const EigenFrame& f = b.frame;
        const double re2 = 2.0 * (std::conj(f.p.w) * b.dp.w).real();
        const cplx d_plus = f.v_plus_z * b.dp.z / f.v + re2 / (2.0 * f.v);
        return GaugeFactor{f.p.w / (beta * f.v_plus_z), b.dp.w / f.p.w - d_plus / f.v_plus_z};
    };
    return g;
}

// lambda_a = 1 / |r_a| (unit-norm eigenvectors); requires |r_a(0)| = 1.
// Uses d r_a/ds = sum_c r_c A_ca, so it applies on top of any earlier gauge.
inline GaugeFunction normalization_gauge() {
    GaugeFunction g;
    for (std::size_t a = 0; a < branch_count; ++a) {
        g.branch[a] = [a](const BasisSample& b) {
            const auto& r = b.frame.right;
            const Vec2 dr = r[0] * b.A(0, a) + r[1] * b.A(1, a);
            const double n2 = r[a].squaredNorm();
            return GaugeFactor{1.0 / std::sqrt(n2), -inner(r[a], dr).real() / n2};
        };
    }
    return g;
}

inline BasisTrack apply_gauge(const BasisTrack& track, const GaugeFunction& gauge) {
    BasisTrack out = track;
    for (std::size_t j = 0; j < track.samples.size(); ++j) {
        const BasisSample& in = track.samples[j];
        BasisSample& b = out.samples[j];
        std::array<GaugeFactor, branch_count> f;
        for (std::size_t a = 0; a < branch_count; ++a) {
            f[a] = gauge.branch[a](in);
            if (std::abs(f[a].value) < 1e-300 || !std::isfinite(std::abs(f[a].value))) {
                throw Error(ErrorCode::zero_gauge, "apply_gauge", "|lambda| below 1e-300", in.s());
            }
            if (j == 0 && std::abs(f[a].value - 1.0) > 1e-14) {
                throw Error(ErrorCode::invalid_argument, "apply_gauge", "lambda(0) must be 1", in.s());
            }
        }
        for (std::size_t a = 0; a < branch_count; ++a) {
            b.frame.right[a] = f[a].value * in.frame.right[a];
            b.frame.left[a] = in.frame.left[a] / std::conj(f[a].value);
            b.phase.a[a] = in.phase.a[a] + f[a].log_derivative;
            for (std::size_t c = 0; c < branch_count; ++c) {
                b.A(a, c) = f[c].value / f[a].value * in.A(a, c);
            }
            b.A(a, a) += f[a].log_derivative;
        }
    }
    return out;
}

// r^_a = exp(-I_a) r_a and l^_a = exp(conj(I_a)) l_a; the resulting frames
// have vanishing phase generators.
inline BasisTrack parallel_transport_frames(const BasisTrack& track, const std::vector<PhaseAccumulator>& acc) {
    BasisTrack out = track;
    for (std::size_t j = 0; j < track.samples.size(); ++j) {
        BasisSample& b = out.samples[j];
        for (std::size_t a = 0; a < branch_count; ++a) {
            const cplx lambda = std::exp(-acc[j].integral[a]);
            b.frame.right[a] *= lambda;
            b.frame.left[a] /= std::conj(lambda);
        }
        for (std::size_t a = 0; a < branch_count; ++a) {
            for (std::size_t c = 0; c < branch_count; ++c) {
                b.A(a, c) *= std::exp(acc[j].integral[a] - acc[j].integral[c]);
            }
            b.A(a, a) -= track.samples[j].phase.a[a];
            b.phase.a[a] = cplx{};
        }
    }
    return out;
}

// max |<l_a, d r_a/ds>| over interior samples, derivative by 5-point differences.
inline double parallel_transport_defect(const BasisTrack& track) {
    const auto gens = generators_by_differences(track);
    double worst = 0.0;
    for (std::size_t j = 2; j + 2 < gens.size(); ++j) {
        for (const cplx& a : gens[j].a) worst = std::max(worst, std::abs(a));
    }
    return worst;
}

// ------------------------------- holonomy -----------------------------------

struct Holonomy {
    std::array<cplx, branch_count> factor{};       // exp(-closed integral of A_aa)
    std::array<std::size_t, branch_count> matched{0, 1};  // initial label each final branch lands on
    std::array<double, branch_count> overlap{};    // |<r_matched(0), r_a(1)>| / norms
    std::array<cplx, branch_count> nu{};           // r_a(1) = nu_a r_matched(0)
    bool exchanged = false;
};

inline double normalized_overlap(const Vec2& a, const Vec2& b) {
    return std::abs(inner(a, b)) / (a.norm() * b.norm());
}

inline Holonomy loop_holonomy(const BasisTrack& track, const std::vector<PhaseAccumulator>& acc) {
    const EigenFrame& first = track.samples.front().frame;
    const EigenFrame& last = track.samples.back().frame;
    Holonomy h;
    for (std::size_t a = 0; a < branch_count; ++a) {
        h.factor[a] = std::exp(-acc.back().integral[a]);
        const double o0 = normalized_overlap(first.right[0], last.right[a]);
        const double o1 = normalized_overlap(first.right[1], last.right[a]);
        h.matched[a] = o0 >= o1 ? 0 : 1;
        h.overlap[a] = std::max(o0, o1);
        h.nu[a] = inner(first.left[h.matched[a]], last.right[a]);
    }
    if (h.matched[0] == h.matched[1]) {
        throw Error(ErrorCode::ambiguous_branch, "loop_holonomy",
                    "final branches do not map onto distinct initial eigenvectors", last.s);
    }
    h.exchanged = h.matched[0] != 0;
    return h;
}

inline Holonomy loop_holonomy(const ParameterPath& path, std::size_t samples) {
    if (!path.closed) {
        throw Error(ErrorCode::invalid_argument, "loop_holonomy", "path is not closed");
    }
    const PhaseTrajectory traj = accumulate_phases(path, samples);
    return loop_holonomy(traj.track, traj.acc);
}

}  // namespace nonherm
