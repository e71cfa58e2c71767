// core.hpp - shared numeric types, error reporting, logging and small 2x2 helpers.

#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nonherm {

using cplx = std::complex<double>;
using Vec2 = Eigen::Vector2cd;
using Mat2 = Eigen::Matrix2cd;

inline constexpr cplx I_unit{0.0, 1.0};
inline constexpr double pi = 3.14159265358979323846;

// Branch labels 1 and 2 are stored at indices 0 and 1.
inline constexpr std::size_t branch_count = 2;

// ------------------------------- errors -------------------------------------

enum class ErrorCode {
    ep_degenerate,
    zero_denominator,
    ambiguous_branch,
    step_too_coarse,
    sampling_error,
    zero_gauge,
    nonfinite_state,
    overflow_guard,
    not_symmetric,
    self_orthogonal,
    zero_state,
    gap_collapse,
    invalid_argument,
    config_error,
};

inline const char* to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::ep_degenerate:    return "EP_DEGENERATE";
    case ErrorCode::zero_denominator: return "ZERO_DENOMINATOR";
    case ErrorCode::ambiguous_branch: return "AMBIGUOUS_BRANCH";
    case ErrorCode::step_too_coarse:  return "STEP_TOO_COARSE";
    case ErrorCode::sampling_error:   return "SAMPLING_ERROR";
    case ErrorCode::zero_gauge:       return "ZERO_GAUGE";
    case ErrorCode::nonfinite_state:  return "NONFINITE_STATE";
    case ErrorCode::overflow_guard:   return "OVERFLOW_GUARD";
    case ErrorCode::not_symmetric:    return "NOT_SYMMETRIC";
    case ErrorCode::self_orthogonal:  return "SELF_ORTHOGONAL";
    case ErrorCode::zero_state:       return "ZERO_STATE";
    case ErrorCode::gap_collapse:     return "GAP_COLLAPSE";
    case ErrorCode::invalid_argument: return "INVALID_ARGUMENT";
    case ErrorCode::config_error:     return "CONFIG_ERROR";
    }
    return "UNKNOWN";
}

// Every failure raised by the library. `s` is NaN when the failing operation
// is not tied to a point on a path.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string operation, std::string detail,
          double s = std::numeric_limits<double>::quiet_NaN())
        : std::runtime_error(format(code, operation, detail, s)),
          code_(code), operation_(std::move(operation)), detail_(std::move(detail)), s_(s) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& operation() const noexcept { return operation_; }
    const std::string& detail() const noexcept { return detail_; }
    double s() const noexcept { return s_; }
    bool has_s() const noexcept { return !std::isnan(s_); }

    // Same error, located at reduced time s (keeps an existing location).
    Error at(double s) const {
        return has_s() ? *this : Error(code_, operation_, detail_, s);
    }

    bool is_numerical() const noexcept {
        return code_ != ErrorCode::config_error && code_ != ErrorCode::invalid_argument;
    }

private:
    static std::string format(ErrorCode code, const std::string& op,
                              const std::string& detail, double s) {
        std::ostringstream os;
        os << to_string(code) << " in " << op;
        if (!std::isnan(s)) os << " at s=" << s;
        if (!detail.empty()) os << ": " << detail;
        return os.str();
    }

    ErrorCode code_;
    std::string operation_;
    std::string detail_;
    double s_;
};

// ------------------------------- logging ------------------------------------

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

inline LogLevel parse_log_level(std::string_view text) noexcept {
    if (text == "error") return LogLevel::error;
    if (text == "info") return LogLevel::info;
    if (text == "debug") return LogLevel::debug;
    return LogLevel::warn;
}

// Controlled by NONHERM_LOG={error,warn,info,debug}; default warn.
inline LogLevel& log_threshold() {
    static LogLevel level = [] {
        const char* env = std::getenv("NONHERM_LOG");
        return env ? parse_log_level(env) : LogLevel::warn;
    }();
    return level;
}

inline void log(LogLevel level, std::string_view message) {
    if (static_cast<int>(level) > static_cast<int>(log_threshold())) return;
    static constexpr const char* names[] = {"error", "warn", "info", "debug"};
    std::cerr << "[nonherm:" << names[static_cast<int>(level)] << "] " << message << '\n';
}

// ------------------------------ 2x2 helpers ---------------------------------

// <a, b> with the conjugate-linear slot on the left.
inline cplx inner(const Vec2& a, const Vec2& b) { return a.dot(b); }

// Bilinear pairing a^T b (no conjugation).
inline cplx bilinear(const Vec2& a, const Vec2& b) { return a.transpose() * b; }

inline bool all_finite(const Vec2& v) {
    return std::isfinite(v(0).real()) && std::isfinite(v(0).imag()) &&
           std::isfinite(v(1).real()) && std::isfinite(v(1).imag());
}

// exp(M) for a 2x2 complex matrix. With M = (tr/2) I + N, N^2 = delta^2 I so
// exp(M) = e^{tr/2} (cosh(delta) I + sinh(delta)/delta N).
inline Mat2 expm2(const Mat2& m) {
    const cplx half_trace = 0.5 * (m(0, 0) + m(1, 1));
    const Mat2 n = m - half_trace * Mat2::Identity();
    const cplx delta_sq = n(0, 0) * n(0, 0) + n(0, 1) * n(1, 0);
    const cplx delta = std::sqrt(delta_sq);
    cplx sinhc;
    if (std::abs(delta) < 1e-4) {
        sinhc = 1.0 + delta_sq / 6.0 + delta_sq * delta_sq / 120.0;
    } else {
        sinhc = std::sinh(delta) / delta;
    }
    return std::exp(half_trace) * (std::cosh(delta) * Mat2::Identity() + sinhc * n);
}

}  // namespace nonherm
