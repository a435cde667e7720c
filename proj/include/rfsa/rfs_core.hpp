#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rfsa/errors.hpp"
#include "rfsa/time_series.hpp"

namespace rfsa {

/// |sin(ω·(t2 - t1))| below this is clamped to ±guard.
inline constexpr double default_guard = 1e-12;

/// Below this |ω·(t2 - t1)| the straight-line limit replaces the sine ratios.
inline constexpr double line_threshold = 1e-8;

enum class SamplingMode { nonuniform, uniform };

inline const char* to_string(SamplingMode mode) noexcept {
    return mode == SamplingMode::uniform ? "uniform" : "nonuniform";
}

/// One sinusoid as (frequency parameter, value at t1, value at t2).
///
/// `freq_param` is ω in rad/s for nonuniform grids and the Chebyshev parameter
/// x = 2cos(ωT) for uniform ones.
struct RfsComponent {
    double freq_param = 0.0;
    double y1 = 0.0;
    double y2 = 0.0;
    SamplingMode mode = SamplingMode::nonuniform;

    friend bool operator==(const RfsComponent&, const RfsComponent&) = default;
};

/// Conventional view A·sin(2πf·t + φ).
struct SinusoidParams {
    double amplitude = 0.0;
    double frequency_hz = 0.0;
    double phase = 0.0; ///< wrapped to (-π, π]
};

struct RfsCoefficients {
    double a = 0.0; ///< multiplies y2
    double b = 0.0; ///< multiplies y1
};

namespace detail {

inline void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) {
        throw InvalidArgument(std::string("non-finite ") + name);
    }
}

inline double guarded(double s, double guard) noexcept {
    if (std::abs(s) < guard) {
        return s < 0.0 ? -guard : guard;
    }
    return s;
}

inline double wrap_phase(double phi) noexcept {
    phi = std::remainder(phi, 2.0 * std::numbers::pi);
    if (phi <= -std::numbers::pi) {
        phi += 2.0 * std::numbers::pi;
    }
    return phi;
}

} // namespace detail

/// a_k = sin(ωτ_k1)/sin(ωτ_21), b_k = -sin(ωτ_k2)/sin(ωτ_21), with the line
/// limit a_k = τ_k1/τ_21, b_k = -τ_k2/τ_21 when |ωτ_21| < line_threshold.
inline RfsCoefficients coeffs_nonuniform(double omega, double tk, double t1, double t2,
                                         double guard = default_guard) {
    detail::require_finite(omega, "frequency");
    detail::require_finite(tk, "time");
    detail::require_finite(t1, "reference time t1");
    detail::require_finite(t2, "reference time t2");
    if (t1 == t2) {
        throw InvalidArgument("reference times coincide");
    }
    if (!(guard > 0.0)) {
        throw InvalidArgument("guard must be positive");
    }
    const double tau21 = t2 - t1;
    const double tauk1 = tk - t1;
    const double tauk2 = tk - t2;
    if (std::abs(omega * tau21) < line_threshold) {
        return {tauk1 / tau21, -tauk2 / tau21};
    }
    const double s = detail::guarded(std::sin(omega * tau21), guard);
    return {std::sin(omega * tauk1) / s, -std::sin(omega * tauk2) / s};
}

struct UniformCoefficientSequence {
    std::vector<double> a;
    std::vector<double> b;
};

/// Chebyshev recursion a_k = x·a_{k-1} + b_{k-1}, b_k = -a_{k-1}, seeded a_1 = 0, b_1 = 1.
/// Index 0 of the returned arrays is sample k = 1.
inline UniformCoefficientSequence coeffs_uniform_sequence(double x, std::size_t count) {
    detail::require_finite(x, "Chebyshev parameter");
    if (count < 1) {
        throw InvalidArgument("coefficient sequence needs at least one sample");
    }
    UniformCoefficientSequence seq{std::vector<double>(count), std::vector<double>(count)};
    double a = 0.0;
    double b = 1.0;
    seq.a[0] = a;
    seq.b[0] = b;
    for (std::size_t k = 1; k < count; ++k) {
        const double next_a = x * a + b;
        b = -a;
        a = next_a;
        seq.a[k] = a;
        seq.b[k] = b;
    }
    return seq;
}

inline double x_from_omega(double omega, double period) {
    detail::require_finite(omega, "frequency");
    if (!(period > 0.0) || !std::isfinite(period)) {
        throw InvalidArgument("sampling period must be positive");
    }
    return 2.0 * std::cos(omega * period);
}

inline double omega_from_x(double x, double period) {
    detail::require_finite(x, "Chebyshev parameter");
    if (!(period > 0.0) || !std::isfinite(period)) {
        throw InvalidArgument("sampling period must be positive");
    }
    if (std::abs(x) > 2.0) {
        throw DomainError("Chebyshev parameter outside [-2, 2]: " + std::to_string(x));
    }
    return std::acos(x / 2.0) / period;
}

/// Radian frequency of a component; uniform components need the grid period.
inline double component_omega(const RfsComponent& c, std::optional<double> period) {
    if (c.mode == SamplingMode::nonuniform) {
        return c.freq_param;
    }
    if (!period) {
        throw InvalidArgument("uniform component needs a sampling period");
    }
    return omega_from_x(c.freq_param, *period);
}

namespace detail {

/// Offset n with first == t1 + n·T, for evaluating a uniform component on an aligned grid.
inline std::size_t uniform_offset(const TimeGrid& grid, double t1, double t2) {
    const auto& period = grid.uniform_period();
    if (!period) {
        throw InvalidArgument("uniform-mode component on a non-uniform grid");
    }
    const double ref_period = t2 - t1;
    if (std::abs(*period - ref_period) > 1e-9 * ref_period) {
        throw InvalidArgument("uniform-mode component: grid period differs from the reference spacing");
    }
    const double steps = (grid.front() - t1) / ref_period;
    const double n = std::round(steps);
    if (n < 0.0 || std::abs(steps - n) > 1e-6) {
        throw InvalidArgument("uniform-mode component: grid not aligned with the reference samples");
    }
    return static_cast<std::size_t>(n);
}

} // namespace detail

/// Evaluates a component on `grid` using (t1, t2) as its reference instants.
inline std::vector<double> predict_with_references(const RfsComponent& c, double t1, double t2,
                                                   const TimeGrid& grid, double guard = default_guard) {
    std::vector<double> out(grid.size());
    if (c.mode == SamplingMode::uniform) {
        const std::size_t offset = detail::uniform_offset(grid, t1, t2);
        const auto seq = coeffs_uniform_sequence(c.freq_param, offset + grid.size());
        for (std::size_t k = 0; k < grid.size(); ++k) {
            out[k] = seq.a[offset + k] * c.y2 + seq.b[offset + k] * c.y1;
        }
    } else {
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const auto [a, b] = coeffs_nonuniform(c.freq_param, grid[k], t1, t2, guard);
            out[k] = a * c.y2 + b * c.y1;
        }
    }
    // Reference samples are reproduced exactly.
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (grid[k] == t1) {
            out[k] = c.y1;
        } else if (grid[k] == t2) {
            out[k] = c.y2;
        }
    }
    return out;
}

/// y_k = a_k·y2 + b_k·y1 on a grid whose first two samples are the references.
inline std::vector<double> predict(const RfsComponent& c, const TimeGrid& grid, double guard = default_guard) {
    if (c.mode == SamplingMode::uniform && !grid.is_uniform()) {
        throw InvalidArgument("uniform-mode component on a non-uniform grid");
    }
    return predict_with_references(c, grid.front(), grid.second(), grid, guard);
}

struct JacobianRow {
    double d_freq = 0.0; ///< ∂y/∂ω (nonuniform) or ∂y/∂x (uniform)
    double d_y1 = 0.0;
    double d_y2 = 0.0;
};

/// Analytic partials of y_k with respect to (ω, y1, y2) for irregular sampling.
inline JacobianRow jacobian_row_nonuniform(const RfsComponent& c, double tk, double t1, double t2,
                                           double guard = default_guard) {
    const double omega = c.freq_param;
    const auto [a, b] = coeffs_nonuniform(omega, tk, t1, t2, guard);
    detail::require_finite(c.y1, "y1");
    detail::require_finite(c.y2, "y2");
    const double tau21 = t2 - t1;
    const double tauk1 = tk - t1;
    const double tauk2 = tk - t2;

    double da = 0.0;
    double db = 0.0;
    if (std::abs(omega * tau21) < line_threshold) {
        // Leading-order terms of the series expansion around ω = 0.
        da = -(tauk1 / tau21) * omega * (tauk1 * tauk1 - tau21 * tau21) / 3.0;
        db = (tauk2 / tau21) * omega * (tauk2 * tauk2 - tau21 * tau21) / 3.0;
    } else {
        const double s = detail::guarded(std::sin(omega * tau21), guard);
        const double c21 = std::cos(omega * tau21);
        const double s2 = s * s;
        da = (tauk1 * std::cos(omega * tauk1) * s - tau21 * std::sin(omega * tauk1) * c21) / s2;
        db = -(tauk2 * std::cos(omega * tauk2) * s - tau21 * std::sin(omega * tauk2) * c21) / s2;
    }
    return {da * c.y2 + db * c.y1, b, a};
}

/// Recursion state (a_k, b_k, ∂a_k/∂x, ∂b_k/∂x) for equidistant sampling.
struct UniformRecursionState {
    double a = 0.0;
    double b = 1.0;
    double da = 0.0;
    double db = 0.0;
};

struct UniformJacobianStep {
    JacobianRow row;
    UniformRecursionState state; ///< state at sample k, to feed the next call
};

/// Advances the coefficient and derivative recursion from sample k-1 to k (k ≥ 2)
/// using only multiplications and additions.
inline UniformJacobianStep jacobian_row_uniform(const RfsComponent& c, std::size_t k,
                                                const UniformRecursionState& prev) {
    if (k < 2) {
        throw InvalidArgument("uniform Jacobian recursion starts at k = 2");
    }
    const double x = c.freq_param;
    UniformRecursionState next;
    next.a = x * prev.a + prev.b;
    next.b = -prev.a;
    next.da = (prev.a + x * prev.da) + prev.db;
    next.db = -prev.da;
    return {{next.da * c.y2 + next.db * c.y1, next.b, next.a}, next};
}

/// Amplitude, frequency and phase of a component from its references (t1, t2).
///
/// Throws TrendComponent for the ω→0 line limit and NumericGuardError when
/// sin(ω(t2 - t1)) is inside the guard.
inline SinusoidParams amplitude_phase(const RfsComponent& c, double t1, double t2, double guard = default_guard) {
    detail::require_finite(c.y1, "y1");
    detail::require_finite(c.y2, "y2");
    if (!(t2 > t1)) {
        throw InvalidArgument("reference times must satisfy t1 < t2");
    }
    const double tau21 = t2 - t1;
    double omega = c.mode == SamplingMode::uniform ? omega_from_x(c.freq_param, tau21) : c.freq_param;
    detail::require_finite(omega, "frequency");
    // The recurrence is even in ω.
    omega = std::abs(omega);
    if (omega * tau21 < line_threshold) {
        throw TrendComponent("component frequency is within the line limit");
    }
    const double s = std::sin(omega * tau21);
    if (std::abs(s) < guard) {
        throw NumericGuardError("sin(omega*(t2-t1)) is inside the numeric guard");
    }
    const double s1 = std::sin(omega * t1);
    const double c1 = std::cos(omega * t1);
    const double s2 = std::sin(omega * t2);
    const double c2 = std::cos(omega * t2);
    // y1 = B sin(ωt1) + C cos(ωt1), y2 = B sin(ωt2) + C cos(ωt2)
    const double cos_part = (c.y1 * s2 - c.y2 * s1) / s;
    const double sin_part = (c.y2 * c1 - c.y1 * c2) / s;
    return {std::hypot(sin_part, cos_part), omega / (2.0 * std::numbers::pi),
            detail::wrap_phase(std::atan2(cos_part, sin_part))};
}

} // namespace rfsa
