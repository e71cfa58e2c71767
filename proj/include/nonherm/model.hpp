// model.hpp - the two-level Hamiltonian H(w,z) and the parameter paths driving it.
//
//   H(w,z) = [ 0      w  ]       w = Omega e^{i phi}
//            [ conj(w) 2z ]      z = Delta - i Gamma/4
//
// Paths are parameterized by reduced time s in [0,1]; the physical time is
// t = s T.

#pragma once

#include "nonherm/core.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace nonherm {

struct ComplexPair {
    cplx w{};
    cplx z{};
};

inline Mat2 hamiltonian_at(const ComplexPair& p) {
    Mat2 h;
    h << cplx{0.0, 0.0}, p.w,
         std::conj(p.w), 2.0 * p.z;
    return h;
}

// dH/ds for parameter velocities dp = (dw/ds, dz/ds).
inline Mat2 hamiltonian_derivative(const ComplexPair& dp) {
    return hamiltonian_at(dp);
}

inline constexpr double closure_tolerance = 1e-12;

struct ParameterPath {
    std::string kind;
    std::function<cplx(double)> w_of_s;
    std::function<cplx(double)> z_of_s;
    std::function<cplx(double)> dw_of_s;
    std::function<cplx(double)> dz_of_s;
    double duration_T = 1.0;
    bool closed = false;

    ComplexPair at(double s) const { return {w_of_s(s), z_of_s(s)}; }
    ComplexPair derivative_at(double s) const { return {dw_of_s(s), dz_of_s(s)}; }
};

// Checks duration and (for closed paths) the endpoint closure.
inline void validate_path(const ParameterPath& path) {
    if (!(path.duration_T > 0.0) || !std::isfinite(path.duration_T)) {
        throw Error(ErrorCode::invalid_argument, "validate_path", "duration T must be finite and > 0");
    }
    for (double s : {0.0, 0.5, 1.0}) {
        const ComplexPair p = path.at(s);
        if (!std::isfinite(std::abs(p.w)) || !std::isfinite(std::abs(p.z))) {
            throw Error(ErrorCode::invalid_argument, "validate_path", "non-finite parameters", s);
        }
    }
    if (path.closed) {
        const ComplexPair a = path.at(0.0);
        const ComplexPair b = path.at(1.0);
        if (std::abs(a.w - b.w) >= closure_tolerance || std::abs(a.z - b.z) >= closure_tolerance) {
            throw Error(ErrorCode::invalid_argument, "validate_path",
                        "path marked closed but endpoints differ");
        }
    }
}

inline ParameterPath constant_path(ComplexPair p, double T) {
    ParameterPath path;
    path.kind = "constant";
    path.w_of_s = [w = p.w](double) { return w; };
    path.z_of_s = [z = p.z](double) { return z; };
    path.dw_of_s = [](double) { return cplx{}; };
    path.dz_of_s = [](double) { return cplx{}; };
    path.duration_T = T;
    path.closed = true;
    validate_path(path);
    return path;
}

// w(s) = w0 exp(-s^2 / (2 sigma^2)),  z(s) = delta0 cos(0.4 pi s) - i gamma/4.
// sigma = +inf gives a constant coupling.
inline ParameterPath gaussian_pulse_path(double w0, double delta0, double gamma, double sigma, double T) {
    if (!(sigma > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "gaussian_pulse_path", "sigma must be > 0");
    }
    const double inv_var = std::isinf(sigma) ? 0.0 : 1.0 / (sigma * sigma);
    const double k = 0.4 * pi;
    ParameterPath path;
    path.kind = "gaussian_pulse";
    path.w_of_s = [=](double s) { return cplx{w0 * std::exp(-0.5 * s * s * inv_var), 0.0}; };
    path.dw_of_s = [=](double s) { return cplx{-s * inv_var * w0 * std::exp(-0.5 * s * s * inv_var), 0.0}; };
    path.z_of_s = [=](double s) { return cplx{delta0 * std::cos(k * s), -0.25 * gamma}; };
    path.dz_of_s = [=](double s) { return cplx{-k * delta0 * std::sin(k * s), 0.0}; };
    path.duration_T = T;
    path.closed = false;
    validate_path(path);
    return path;
}

// Circle of radius 0.24 gamma around the exceptional point (Omega, Delta) = (gamma/4, 0):
//   z(s) = 0.24 gamma sin(2 pi n s) - i gamma/4
//   w(s) = (gamma/4 + 0.24 gamma cos(2 pi n s)) e^{i phi}
// with n = windings.
inline ParameterPath ep_loop_path(double gamma, double phi, double T, int windings = 1) {
    if (!(gamma > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "ep_loop_path", "gamma must be > 0");
    }
    if (windings < 1) {
        throw Error(ErrorCode::invalid_argument, "ep_loop_path", "windings must be >= 1");
    }
    const double radius = 0.24 * gamma;
    const double omega = 2.0 * pi * windings;
    const cplx phase = std::polar(1.0, phi);
    ParameterPath path;
    path.kind = "ep_loop";
    path.w_of_s = [=](double s) { return (0.25 * gamma + radius * std::cos(omega * s)) * phase; };
    path.dw_of_s = [=](double s) { return -radius * omega * std::sin(omega * s) * phase; };
    path.z_of_s = [=](double s) { return cplx{radius * std::sin(omega * s), -0.25 * gamma}; };
    path.dz_of_s = [=](double s) { return cplx{radius * omega * std::cos(omega * s), 0.0}; };
    path.duration_T = T;
    path.closed = true;
    validate_path(path);
    return path;
}

struct TableRow {
    double s = 0.0;
    cplx w{};
    cplx z{};
};

// Piecewise-linear path through tabulated (s, w, z) knots; s must start at 0,
// end at 1 and increase strictly. Derivatives are segment slopes (averaged at
// interior knots); evaluation outside [0,1] extrapolates the end segments.
inline ParameterPath tabulated_path(std::vector<TableRow> rows, double T) {
    if (rows.size() < 2) {
        throw Error(ErrorCode::invalid_argument, "tabulated_path", "need at least two rows");
    }
    if (std::abs(rows.front().s) > 1e-12 || std::abs(rows.back().s - 1.0) > 1e-12) {
        throw Error(ErrorCode::invalid_argument, "tabulated_path", "s must run from 0 to 1");
    }
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (!(rows[i].s > rows[i - 1].s)) {
            throw Error(ErrorCode::invalid_argument, "tabulated_path", "s must increase strictly");
        }
    }
    rows.front().s = 0.0;
    rows.back().s = 1.0;

    auto table = std::make_shared<const std::vector<TableRow>>(std::move(rows));
    auto segment = [table](double s) -> std::size_t {
        const auto& t = *table;
        auto it = std::upper_bound(t.begin(), t.end(), s,
                                   [](double x, const TableRow& r) { return x < r.s; });
        std::size_t i = it == t.begin() ? 0 : static_cast<std::size_t>(it - t.begin()) - 1;
        return std::min(i, t.size() - 2);
    };
    auto interp = [table, segment](double s, auto field) {
        const auto& t = *table;
        const std::size_t i = segment(s);
        const double u = (s - t[i].s) / (t[i + 1].s - t[i].s);
        return (1.0 - u) * field(t[i]) + u * field(t[i + 1]);
    };
    auto slope = [table, segment](double s, auto field) {
        const auto& t = *table;
        const std::size_t i = segment(s);
        auto seg = [&](std::size_t j) { return (field(t[j + 1]) - field(t[j])) / (t[j + 1].s - t[j].s); };
        cplx d = seg(i);
        if (s == t[i].s && i > 0) d = 0.5 * (d + seg(i - 1));
        return d;
    };
    const auto get_w = [](const TableRow& r) { return r.w; };
    const auto get_z = [](const TableRow& r) { return r.z; };

    ParameterPath path;
    path.kind = "custom_table";
    path.w_of_s = [=](double s) { return interp(s, get_w); };
    path.z_of_s = [=](double s) { return interp(s, get_z); };
    path.dw_of_s = [=](double s) { return slope(s, get_w); };
    path.dz_of_s = [=](double s) { return slope(s, get_z); };
    path.duration_T = T;
    path.closed = std::abs(table->front().w - table->back().w) < closure_tolerance &&
                  std::abs(table->front().z - table->back().z) < closure_tolerance;
    validate_path(path);
    return path;
}

}  // namespace nonherm
