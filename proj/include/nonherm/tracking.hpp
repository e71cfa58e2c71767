// tracking.hpp - instantaneous populations of a propagated state.
//
// Three conventions are computed from the same wavefunction:
//   c_a : biorthogonal projection, psi = sum c_a r_a (normalization dependent)
//   d_a : psi = sum d_a exp(-I_a) r_a, with I_a the running geometric phase
//   e_a : coefficients in the c-product normalized basis (symmetric H only)

#pragma once

#include "nonherm/core.hpp"
#include "nonherm/geometry.hpp"
#include "nonherm/propagator.hpp"
#include "nonherm/spectral.hpp"

#include <optional>
#include <vector>

namespace nonherm {

using Coefficients = std::array<cplx, branch_count>;

inline Coefficients decompose_c(const Vec2& psi, const EigenFrame& frame) {
    return {inner(frame.left[0], psi), inner(frame.left[1], psi)};
}

inline constexpr double exponent_guard = 700.0;

inline Coefficients decompose_d(const Vec2& psi, const EigenFrame& frame, const PhaseAccumulator& acc) {
    Coefficients c = decompose_c(psi, frame);
    for (std::size_t a = 0; a < branch_count; ++a) {
        if (std::abs(acc.integral[a].real()) > exponent_guard) {
            throw Error(ErrorCode::overflow_guard, "decompose_d", "|Re int A_aa| exceeds 700", frame.s);
        }
        c[a] *= std::exp(acc.integral[a]);
    }
    return c;
}

inline bool is_complex_symmetric(const ComplexPair& p) {
    return std::abs(p.w.imag()) <= 1e-12 * std::max(1.0, std::abs(p.w));
}

// c-product normalization r_a / sqrt(r_a^T r_a), with the square root kept
// continuous along the path and the coefficients rescaled so they start from
// the initial condition. Sequential: call coefficients() in increasing s.
class CProductNormalizer {
public:
    explicit CProductNormalizer(const EigenFrame& initial) {
        check_symmetric(initial);
        for (std::size_t a = 0; a < branch_count; ++a) {
            root_[a] = self_root(initial, a, std::nullopt);
            initial_root_[a] = root_[a];
        }
    }

    // e_a = (r_a^T psi) / (sigma_a(s) sigma_a(0)),  sigma_a^2 = r_a^T r_a.
    Coefficients coefficients(const Vec2& psi, const EigenFrame& frame) {
        check_symmetric(frame);
        Coefficients e;
        for (std::size_t a = 0; a < branch_count; ++a) {
            root_[a] = self_root(frame, a, root_[a]);
            e[a] = bilinear(frame.right[a], psi) / (root_[a] * initial_root_[a]);
        }
        return e;
    }

private:
    static void check_symmetric(const EigenFrame& f) {
        if (!is_complex_symmetric(f.p)) {
            throw Error(ErrorCode::not_symmetric, "decompose_e",
                        "Im(w) != 0: H is not complex symmetric, c-product normalization undefined", f.s);
        }
    }

    static cplx self_root(const EigenFrame& f, std::size_t a, std::optional<cplx> previous) {
        const cplx sq = bilinear(f.right[a], f.right[a]);
        if (std::abs(sq) < 1e-12 * f.right[a].squaredNorm()) {
            throw Error(ErrorCode::self_orthogonal, "decompose_e", "r_a^T r_a vanishes", f.s);
        }
        cplx root = std::sqrt(sq);
        // Flip to the other root when the phase would jump by more than pi/2.
        if (previous && std::real(root * std::conj(*previous)) < 0.0) root = -root;
        return root;
    }

    std::array<cplx, branch_count> root_{};
    std::array<cplx, branch_count> initial_root_{};
};

inline Coefficients decompose_e(const Vec2& psi, const EigenFrame& frame, CProductNormalizer& normalizer) {
    return normalizer.coefficients(psi, frame);
}

struct PopulationRecord {
    double s = 0.0;
    Coefficients c{};
    Coefficients d{};
    std::optional<Coefficients> e;
    double alpha = 1.0;
    double norm_sq = 1.0;  // |psi|^2
    Mat2 eta = Mat2::Identity();
};

inline double d_quadratic_form(const Coefficients& d, const Mat2& eta) {
    Vec2 dv;
    dv << d[0], d[1];
    return dv.dot(eta * dv).real();
}

inline double d_squared_sum(const Coefficients& d) { return std::norm(d[0]) + std::norm(d[1]); }

// alpha = D^+ eta D / D^+ D
inline double population_alpha(const Coefficients& d, const Mat2& eta) {
    const double dd = d_squared_sum(d);
    if (dd < 1e-300) {
        throw Error(ErrorCode::zero_state, "consistent_population", "D^+ D vanishes");
    }
    return d_quadratic_form(d, eta) / dd;
}

// alpha |d_a|^2; the two values sum to |psi|^2.
inline std::array<double, branch_count> consistent_population(const PopulationRecord& record) {
    const double alpha = population_alpha(record.d, record.eta);
    return {alpha * std::norm(record.d[0]), alpha * std::norm(record.d[1])};
}

inline PopulationRecord make_record(const WaveState& state, const BasisSample& sample, const PhaseAccumulator& acc,
                                    CProductNormalizer* cproduct) {
    PopulationRecord r;
    r.s = state.s;
    r.c = decompose_c(state.psi, sample.frame);
    r.d = decompose_d(state.psi, sample.frame, acc);
    if (cproduct) r.e = cproduct->coefficients(state.psi, sample.frame);
    r.eta = acc.eta;
    r.norm_sq = state.psi.squaredNorm();
    r.alpha = d_squared_sum(r.d) < 1e-300 ? 0.0 : population_alpha(r.d, r.eta);
    return r;
}

// ------------------------- adiabatic criterion ------------------------------

struct AdiabaticCriterion {
    double s = 0.0;
    // exp(int Re(A_bb - A_aa)) |<l_b, d r_a/ds>| for a -> b
    double crit_12 = 0.0;
    double crit_21 = 0.0;
    // same with |<l_b, dH/ds r_a> / (E_a - E_b)|
    double crit_12_dh = 0.0;
    double crit_21_dh = 0.0;
};

inline AdiabaticCriterion adiabatic_criterion(const BasisSample& sample, const PhaseAccumulator& acc) {
    const EigenFrame& f = sample.frame;
    const cplx gap = f.energy[0] - f.energy[1];
    if (std::abs(gap) < 1e-10) {
        throw Error(ErrorCode::gap_collapse, "adiabatic_criterion", "|E1 - E2| below 1e-10", f.s);
    }
    const Mat2 dh = hamiltonian_derivative(sample.dp);
    auto weight = [&](std::size_t b, std::size_t a) {
        return std::exp((acc.integral[b] - acc.integral[a]).real());
    };
    AdiabaticCriterion c;
    c.s = f.s;
    c.crit_12 = weight(1, 0) * std::abs(sample.A(1, 0));
    c.crit_21 = weight(0, 1) * std::abs(sample.A(0, 1));
    c.crit_12_dh = weight(1, 0) * std::abs(inner(f.left[1], dh * f.right[0]) / gap);
    c.crit_21_dh = weight(0, 1) * std::abs(inner(f.left[0], dh * f.right[1]) / (-gap));
    return c;
}

// --------------------------- artifact report --------------------------------

struct ArtifactThresholds {
    double inversion_c = 1.0;     // max |c2/c1| above this ...
    double inversion_d = 0.1;     // ... while max |d2/d1| stays below this
    double adiabatic_c = 0.01;    // max |c1/c2| below this ...
    double same_order_lo = 0.3;   // ... while |d1/d2|(1) lies in [lo, hi]
    double same_order_hi = 3.0;
};

struct ArtifactReport {
    std::size_t initial_branch = 0;
    double max_ratio_c21 = 0.0;
    double max_ratio_d21 = 0.0;
    double max_ratio_c12 = 0.0;
    double max_ratio_d12 = 0.0;
    double final_ratio_d12 = 0.0;
    bool false_inversion = false;
    bool false_adiabaticity = false;
};

inline double ratio(cplx num, cplx den) {
    const double d = std::abs(den);
    return d == 0.0 ? std::numeric_limits<double>::infinity() : std::abs(num) / d;
}

inline ArtifactReport false_artifact_report(const std::vector<PopulationRecord>& records,
                                            const ArtifactThresholds& th = {}) {
    ArtifactReport r;
    if (records.empty()) return r;
    const auto& d0 = records.front().d;
    r.initial_branch = std::abs(d0[0]) >= std::abs(d0[1]) ? 0 : 1;
    for (const auto& rec : records) {
        r.max_ratio_c21 = std::max(r.max_ratio_c21, ratio(rec.c[1], rec.c[0]));
        r.max_ratio_d21 = std::max(r.max_ratio_d21, ratio(rec.d[1], rec.d[0]));
        r.max_ratio_c12 = std::max(r.max_ratio_c12, ratio(rec.c[0], rec.c[1]));
        r.max_ratio_d12 = std::max(r.max_ratio_d12, ratio(rec.d[0], rec.d[1]));
    }
    r.final_ratio_d12 = ratio(records.back().d[0], records.back().d[1]);
    if (r.initial_branch == 0) {
        r.false_inversion = r.max_ratio_c21 > th.inversion_c && r.max_ratio_d21 < th.inversion_d;
    } else {
        r.false_adiabaticity = r.max_ratio_c12 < th.adiabatic_c && r.final_ratio_d12 >= th.same_order_lo &&
                               r.final_ratio_d12 <= th.same_order_hi;
    }
    return r;
}

}  // namespace nonherm
