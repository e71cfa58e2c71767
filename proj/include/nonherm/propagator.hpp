// propagator.hpp - fixed-step RK4 for the reduced-time Schrodinger equation
//   d psi/ds = -i T H(w(s), z(s)) psi      (hbar = 1)

#pragma once

#include "nonherm/core.hpp"
#include "nonherm/model.hpp"

#include <cmath>
#include <vector>

namespace nonherm {

struct WaveState {
    double s = 0.0;
    Vec2 psi = Vec2::Zero();
};

inline constexpr std::size_t minimum_steps = 1000;

// Records psi at every grid point s_k = k / steps, k = 0..steps.
inline std::vector<WaveState> propagate(const ParameterPath& path, const Vec2& psi0, std::size_t steps) {
    if (steps < minimum_steps) {
        throw Error(ErrorCode::invalid_argument, "propagate", "need at least 1000 steps");
    }
    if (std::abs(psi0.norm() - 1.0) > 1e-14) {
        throw Error(ErrorCode::invalid_argument, "propagate", "initial state must be normalized");
    }
    const double h = 1.0 / static_cast<double>(steps);
    const cplx scale = -I_unit * path.duration_T;
    auto rhs = [&](double s, const Vec2& y) -> Vec2 { return scale * (hamiltonian_at(path.at(s)) * y); };

    std::vector<WaveState> out;
    out.reserve(steps + 1);
    Vec2 psi = psi0;
    out.push_back({0.0, psi});
    for (std::size_t k = 0; k < steps; ++k) {
        const double s = static_cast<double>(k) * h;
        const Vec2 k1 = rhs(s, psi);
        const Vec2 k2 = rhs(s + 0.5 * h, psi + 0.5 * h * k1);
        const Vec2 k3 = rhs(s + 0.5 * h, psi + 0.5 * h * k2);
        const Vec2 k4 = rhs(s + h, psi + h * k3);
        psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double s_next = k + 1 == steps ? 1.0 : static_cast<double>(k + 1) * h;
        if (!all_finite(psi)) {
            throw Error(ErrorCode::nonfinite_state, "propagate", "wavefunction became non-finite", s_next);
        }
        out.push_back({s_next, psi});
    }
    return out;
}

// Observed order from endpoint errors at N, 2N, 4N steps against an 8N
// reference (least-squares slope of log2 error against log2 N).
inline double convergence_order(const ParameterPath& path, const Vec2& psi0, std::size_t base_steps = minimum_steps) {
    const Vec2 reference = propagate(path, psi0, 8 * base_steps).back().psi;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < 3; ++i) {
        const std::size_t n = base_steps << i;
        const double err = (propagate(path, psi0, n).back().psi - reference).norm();
        const double x = std::log2(static_cast<double>(n));
        const double y = std::log2(err);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    const double slope = (3.0 * sxy - sx * sy) / (3.0 * sxx - sx * sx);
    return -slope;
}

}  // namespace nonherm
