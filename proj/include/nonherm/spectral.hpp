// spectral.hpp - closed-form biorthogonal eigensystem of H(w,z).
//
//   E1 = z - v,  E2 = z + v,  v = sqrt(|w|^2 + z^2) on the sheet with v -> z as |w| -> 0
//   r1 = g1 (z + v, -conj(w)),   r2 = g2 (z - v, -conj(w))
//   l1 = (conj(z) + conj(v), -conj(w)) / (conj(2 v (v + z)) g1)
//   l2 = (conj(z) - conj(v), -conj(w)) / (conj(2 v (v - z)) g2)
//
// g1, g2 are fixed once from the initial point of a path so that |r_a(0)| = 1;
// they are never renormalized along the path.
//
// Along a path the only branch datum is the sign of v, so continuity of both
// eigenvalue labels reduces to continuity of v.

#pragma once

#include "nonherm/core.hpp"
#include "nonherm/model.hpp"

#include <optional>
#include <span>
#include <vector>

namespace nonherm {

inline constexpr double ep_exclusion_radius = 1e-7;  // on ||w|^2 + z^2|
inline constexpr double ep_exact_tolerance = 1e-14;
inline constexpr double tiny_denominator = 1e-290;

struct Normalization {
    std::array<double, branch_count> gamma{1.0, 1.0};
};

struct EigenFrame {
    double s = 0.0;
    ComplexPair p;
    cplx v{};
    cplx v_plus_z{};
    cplx v_minus_z{};
    std::array<cplx, branch_count> energy{};
    std::array<Vec2, branch_count> right{Vec2::Zero(), Vec2::Zero()};
    std::array<Vec2, branch_count> left{Vec2::Zero(), Vec2::Zero()};
    std::array<double, branch_count> gamma{1.0, 1.0};

    Normalization normalization() const { return {gamma}; }
};

// v = z sqrt(1 + |w|^2 / z^2) with the principal root, i.e. sqrt(z^2) = z.
inline cplx sheet_sqrt(cplx w, cplx z) {
    const double w2 = std::norm(w);
    if (std::abs(w2 + z * z) <= ep_exact_tolerance) {
        throw Error(ErrorCode::ep_degenerate, "sheet_sqrt", "|w|^2 + z^2 vanishes (eigenvalues coalesce)");
    }
    if (z == cplx{}) return {std::sqrt(w2), 0.0};
    return z * std::sqrt(1.0 + w2 / (z * z));
}

// (v + z, v - z) without cancellation: their product is |w|^2, so the smaller
// one is obtained by division.
inline std::pair<cplx, cplx> split_sheet(cplx v, const ComplexPair& p) {
    const double w2 = std::norm(p.w);
    cplx plus = v + p.z;
    cplx minus = v - p.z;
    if (std::abs(plus) >= std::abs(minus)) {
        minus = w2 / plus;
    } else {
        plus = w2 / minus;
    }
    return {plus, minus};
}

inline Normalization normalization_from(const ComplexPair& init, cplx v0) {
    const auto [plus, minus] = split_sheet(v0, init);
    const double w2 = std::norm(init.w);
    const double n1 = std::norm(plus) + w2;
    const double n2 = std::norm(minus) + w2;
    if (!(n1 > 0.0) || !(n2 > 0.0)) {
        throw Error(ErrorCode::zero_denominator, "normalization_from", "initial eigenvector has zero norm");
    }
    return {{1.0 / std::sqrt(n1), 1.0 / std::sqrt(n2)}};
}

// Frame for a given branch value v (either root of |w|^2 + z^2).
inline EigenFrame frame_for_branch(double s, const ComplexPair& p, cplx v, const Normalization& norm) {
    const cplx v_sq = std::norm(p.w) + p.z * p.z;
    if (std::abs(v_sq) < ep_exclusion_radius) {
        throw Error(ErrorCode::ep_degenerate, "eigenframe",
                    "inside the exceptional-point exclusion radius", s);
    }
    EigenFrame f;
    f.s = s;
    f.p = p;
    f.v = v;
    std::tie(f.v_plus_z, f.v_minus_z) = split_sheet(v, p);
    f.gamma = norm.gamma;
    f.energy = {p.z - v, p.z + v};

    const cplx den1 = 2.0 * v * f.v_plus_z;
    const cplx den2 = 2.0 * v * f.v_minus_z;
    if (std::abs(den1) < tiny_denominator || std::abs(den2) < tiny_denominator) {
        throw Error(ErrorCode::zero_denominator, "eigenframe", "v (v +/- z) vanishes", s);
    }
    const cplx wbar = std::conj(p.w);
    const double g1 = norm.gamma[0];
    const double g2 = norm.gamma[1];
    f.right[0] << g1 * f.v_plus_z, -g1 * wbar;
    f.right[1] << -g2 * f.v_minus_z, -g2 * wbar;
    // l_a = conj(r_a(w, conj z)) shape scaled so <l_a, r_a> = 1.
    f.left[0] << std::conj(f.v_plus_z), -wbar;
    f.left[0] /= std::conj(den1) * g1;
    f.left[1] << -std::conj(f.v_minus_z), -wbar;
    f.left[1] /= std::conj(den2) * g2;
    return f;
}

inline EigenFrame eigenframe(const ComplexPair& p, const ComplexPair& init, double s = 0.0) {
    const Normalization norm = normalization_from(init, sheet_sqrt(init.w, init.z));
    return frame_for_branch(s, p, sheet_sqrt(p.w, p.z), norm);
}

// Branch value at the start of a path. On the sheet's cut (for example an EP
// loop starting at Delta = 0 with |w| > Gamma/4) the formula is
// discontinuous, so the sign is taken from the limit approached from inside
// the path.
inline cplx seed_branch(const ParameterPath& path, double s0 = 0.0) {
    const ComplexPair p0 = path.at(s0);
    const cplx v0 = sheet_sqrt(p0.w, p0.z);
    const double probe = s0 + (s0 < 1.0 ? 1e-6 : -1e-6);
    const ComplexPair p1 = path.at(probe);
    cplx v1;
    try {
        v1 = sheet_sqrt(p1.w, p1.z);
    } catch (const Error&) {
        return v0;
    }
    return std::abs(v0 - v1) <= std::abs(-v0 - v1) ? v0 : -v0;
}

// Sequential fold that keeps the labels (E, r, l) continuous along a path by
// choosing the sign of v that minimizes sum_a |E_a(s_k+1) - E_a(s_k)|.
class BranchTracker {
public:
    explicit BranchTracker(EigenFrame first) : current_(std::move(first)) {}

    const EigenFrame& current() const noexcept { return current_; }

    // Minimum ratio between the rejected and accepted assignment costs.
    static constexpr double required_margin = 2.0;

    // Returns +1 when the candidate v is kept, -1 when it must be negated.
    int choose_sign(double s, const ComplexPair& p, cplx candidate) const {
        auto cost = [&](cplx v) {
            return std::abs((p.z - v) - current_.energy[0]) + std::abs((p.z + v) - current_.energy[1]);
        };
        const double keep = cost(candidate);
        const double flip = cost(-candidate);
        const double best = std::min(keep, flip);
        const double other = std::max(keep, flip);
        const int sign = keep <= flip ? 1 : -1;
        if (other >= required_margin * best && other > 0.0) return sign;

        // Eigenvector overlap as tie-breaker.
        const Normalization norm = current_.normalization();
        const EigenFrame a = frame_for_branch(s, p, candidate, norm);
        const EigenFrame b = frame_for_branch(s, p, -candidate, norm);
        auto overlap = [&](const EigenFrame& f) {
            return std::abs(inner(current_.right[0], f.right[0])) /
                   (current_.right[0].norm() * f.right[0].norm());
        };
        const double oa = overlap(a);
        const double ob = overlap(b);
        const double lo = std::min(1.0 - oa, 1.0 - ob);
        const double hi = std::max(1.0 - oa, 1.0 - ob);
        if (hi >= required_margin * lo && hi > 0.0) return oa >= ob ? 1 : -1;
        throw Error(ErrorCode::ambiguous_branch, "track_branches",
                    "eigenvalue matching margin below 2 (sampling too coarse near an EP)", s);
    }

    const EigenFrame& advance(double s, const ComplexPair& p) {
        return advance(s, p, sheet_sqrt(p.w, p.z));
    }

    const EigenFrame& advance(double s, const ComplexPair& p, cplx candidate) {
        const int sign = choose_sign(s, p, candidate);
        current_ = frame_for_branch(s, p, sign > 0 ? candidate : -candidate, current_.normalization());
        return current_;
    }

private:
    EigenFrame current_;
};

struct TrackedFrames {
    std::vector<EigenFrame> frames;
    std::vector<std::size_t> swaps;  // indices whose labels were exchanged
};

// Relabels independently computed frames so each branch is continuous.
// Normalization constants are taken from the first frame.
inline TrackedFrames track_branches(std::span<const EigenFrame> frames) {
    TrackedFrames out;
    if (frames.empty()) return out;
    out.frames.reserve(frames.size());
    out.frames.push_back(frames.front());
    BranchTracker tracker(frames.front());
    for (std::size_t k = 1; k < frames.size(); ++k) {
        const EigenFrame& f = frames[k];
        const int sign = tracker.choose_sign(f.s, f.p, f.v);
        if (sign < 0) out.swaps.push_back(k);
        out.frames.push_back(tracker.advance(f.s, f.p, f.v));
    }
    return out;
}

// Continuous frames at the requested s values (ascending), normalized at grid.front().
inline std::vector<EigenFrame> frames_along(const ParameterPath& path, std::span<const double> grid) {
    std::vector<EigenFrame> out;
    if (grid.empty()) return out;
    out.reserve(grid.size());
    const double s0 = grid.front();
    try {
        const ComplexPair p0 = path.at(s0);
        const cplx v0 = seed_branch(path, s0);
        out.push_back(frame_for_branch(s0, p0, v0, normalization_from(p0, v0)));
    } catch (const Error& e) {
        throw e.at(s0);
    }
    BranchTracker tracker(out.front());
    bool warned = false;
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const double s = grid[k];
        try {
            out.push_back(tracker.advance(s, path.at(s)));
        } catch (const Error& e) {
            throw e.at(s);
        }
        const EigenFrame& f = out.back();
        if (!warned && f.v.imag() > 1e-12 * std::abs(f.v)) {
            warned = true;
            std::ostringstream os;
            os << "Im(E2 - E1) > 0 at s=" << s << "; branch labels kept by continuity";
            log(LogLevel::warn, os.str());
        }
    }
    return out;
}

inline std::vector<double> uniform_grid(std::size_t intervals) {
    std::vector<double> grid(intervals + 1);
    for (std::size_t k = 0; k <= intervals; ++k) {
        grid[k] = static_cast<double>(k) / static_cast<double>(intervals);
    }
    grid.back() = 1.0;
    return grid;
}

// Distance in the (Omega, Delta) plane to the nearer of the two exceptional
// points (+-Gamma/4, 0).
inline double ep_distance(const ComplexPair& p, double gamma) {
    const double omega = std::abs(p.w);
    const double delta = p.z.real();
    return std::min(std::hypot(omega - 0.25 * gamma, delta), std::hypot(omega + 0.25 * gamma, delta));
}

}  // namespace nonherm
