#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "rfsa/errors.hpp"
#include "rfsa/initial_samples.hpp"
#include "rfsa/rfs_core.hpp"
#include "rfsa/time_series.hpp"

namespace rfsa {

/// Box for the frequency parameter (ω in rad/s, or x in uniform mode).
struct FrequencyBounds {
    double lower = 0.0;
    double upper = std::numbers::pi;

    [[nodiscard]] double clamp(double v) const noexcept { return std::clamp(v, lower, upper); }
};

struct LmConfig {
    int max_steps = 30;             ///< accepted steps L
    double damping_factor = 1.5;    ///< γ ← γ/f on accept, γ·f on reject
    double initial_damping = 1e-3;  ///< γ₀
    FrequencyBounds bounds;
    double min_relative_improvement = 1e-12;

    void validate() const {
        if (max_steps < 1) {
            throw InvalidArgument("LM: max_steps must be >= 1");
        }
        if (!(damping_factor > 1.0)) {
            throw InvalidArgument("LM: damping factor must exceed 1");
        }
        if (!(initial_damping > 0.0)) {
            throw InvalidArgument("LM: initial damping must be positive");
        }
        if (!(bounds.lower <= bounds.upper)) {
            throw InvalidArgument("LM: frequency bounds out of order");
        }
    }
};

/// Ordered components; flattened as (freq_1, y_{1,1}, y_{1,2}, …, freq_M, y_{M,1}, y_{M,2}).
using BetaVector = std::vector<RfsComponent>;

inline Eigen::VectorXd flatten(const BetaVector& beta) {
    Eigen::VectorXd v(3 * static_cast<Eigen::Index>(beta.size()));
    for (std::size_t m = 0; m < beta.size(); ++m) {
        const auto i = 3 * static_cast<Eigen::Index>(m);
        v(i) = beta[m].freq_param;
        v(i + 1) = beta[m].y1;
        v(i + 2) = beta[m].y2;
    }
    return v;
}

inline BetaVector unflatten(const Eigen::VectorXd& v, SamplingMode mode) {
    BetaVector beta(static_cast<std::size_t>(v.size() / 3));
    for (std::size_t m = 0; m < beta.size(); ++m) {
        const auto i = 3 * static_cast<Eigen::Index>(m);
        beta[m] = {v(i), v(i + 1), v(i + 2), mode};
    }
    return beta;
}

/// P_k(β) = Σ_m y_{m,k} on the series grid.
inline Eigen::VectorXd model_prediction(const TimeGrid& grid, const BetaVector& beta, double guard = default_guard) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));
    for (const auto& c : beta) {
        const auto y = predict(c, grid, guard);
        p += as_vector(y);
    }
    return p;
}

inline double model_sse(const TimeSeries& series, const BetaVector& beta, double guard = default_guard) {
    return (as_vector(series.values()) - model_prediction(series.grid(), beta, guard)).squaredNorm();
}

/// K×3M Jacobian of P(β); column block m holds (∂/∂freq_m, ∂/∂y_{m,1}, ∂/∂y_{m,2}).
inline Eigen::MatrixXd assemble_jacobian(const TimeGrid& grid, const BetaVector& beta, double guard = default_guard) {
    const auto K = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(K, 3 * static_cast<Eigen::Index>(beta.size()));
    for (std::size_t m = 0; m < beta.size(); ++m) {
        const auto& c = beta[m];
        const auto col = 3 * static_cast<Eigen::Index>(m);
        if (c.mode == SamplingMode::uniform) {
            if (!grid.is_uniform()) {
                throw InvalidArgument("uniform-mode component on a non-uniform grid");
            }
            UniformRecursionState state;
            J(0, col + 1) = 1.0;
            for (Eigen::Index k = 1; k < K; ++k) {
                const auto step = jacobian_row_uniform(c, static_cast<std::size_t>(k + 1), state);
                state = step.state;
                J(k, col) = step.row.d_freq;
                J(k, col + 1) = step.row.d_y1;
                J(k, col + 2) = step.row.d_y2;
            }
        } else {
            const double t1 = grid.front();
            const double t2 = grid.second();
            for (Eigen::Index k = 0; k < K; ++k) {
                const auto row = jacobian_row_nonuniform(c, grid[static_cast<std::size_t>(k)], t1, t2, guard);
                J(k, col) = row.d_freq;
                J(k, col + 1) = row.d_y1;
                J(k, col + 2) = row.d_y2;
            }
            // The reference samples are parameters themselves.
            J.block(0, col, 2, 3) << 0.0, 1.0, 0.0, 0.0, 0.0, 1.0;
        }
    }
    return J;
}

namespace detail {

/// Solves [G + γ·diag(G)]δ = g, skipping frozen parameters (their δ is zero).
inline Eigen::VectorXd damped_solve(const Eigen::MatrixXd& G, const Eigen::VectorXd& g, double gamma,
                                    const std::vector<bool>& frozen) {
    const Eigen::Index n = G.rows();
    std::vector<Eigen::Index> active;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!frozen[static_cast<std::size_t>(i)]) {
            active.push_back(i);
        }
    }
    const auto na = static_cast<Eigen::Index>(active.size());
    double max_diag = 0.0;
    for (Eigen::Index i : active) {
        max_diag = std::max(max_diag, G(i, i));
    }
    // Zero columns (e.g. ∂y/∂ω at ω = 0) still receive a little damping.
    const double floor = max_diag * 1e-15;
    Eigen::MatrixXd A(na, na);
    Eigen::VectorXd rhs(na);
    for (Eigen::Index r = 0; r < na; ++r) {
        rhs(r) = g(active[static_cast<std::size_t>(r)]);
        for (Eigen::Index c = 0; c < na; ++c) {
            A(r, c) = G(active[static_cast<std::size_t>(r)], active[static_cast<std::size_t>(c)]);
        }
        A(r, r) += gamma * std::max(A(r, r), floor);
    }
    const Eigen::VectorXd sub = solve_normal_equations(A, rhs);
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(n);
    for (Eigen::Index r = 0; r < na; ++r) {
        delta(active[static_cast<std::size_t>(r)]) = sub(r);
    }
    return delta;
}

inline std::vector<bool> frozen_mask(std::size_t components, bool freeze_frequencies) {
    std::vector<bool> frozen(3 * components, false);
    if (freeze_frequencies) {
        for (std::size_t m = 0; m < components; ++m) {
            frozen[3 * m] = true;
        }
    }
    return frozen;
}

inline Eigen::VectorXd project(Eigen::VectorXd v, const FrequencyBounds& bounds, SamplingMode mode) {
    for (Eigen::Index i = 0; i < v.size(); i += 3) {
        v(i) = bounds.clamp(v(i));
        if (mode == SamplingMode::uniform) {
            v(i) = std::clamp(v(i), -2.0, 2.0);
        }
    }
    return v;
}

} // namespace detail

struct LmStepResult {
    Eigen::VectorXd delta;
    double predicted_sse = 0.0;
};

struct LmStepOptions {
    bool freeze_frequencies = false;
    double guard = default_guard;
};

/// One damped Gauss-Newton increment for the full parameter vector.
///
/// Throws SingularSystemError when the damped system cannot be solved.
inline LmStepResult lm_step(const TimeSeries& series, const BetaVector& beta, double gamma, SamplingMode mode,
                            const LmStepOptions& options = {}) {
    if (!(gamma >= 0.0)) {
        throw InvalidArgument("LM: damping must be non-negative");
    }
    for (const auto& c : beta) {
        if (c.mode != mode) {
            throw InvalidArgument("LM: component mode does not match the requested sampling mode");
        }
    }
    const Eigen::MatrixXd J = assemble_jacobian(series.grid(), beta, options.guard);
    const Eigen::VectorXd r = as_vector(series.values()) - model_prediction(series.grid(), beta, options.guard);
    LmStepResult out;
    out.delta = detail::damped_solve(J.transpose() * J, J.transpose() * r, gamma,
                                     detail::frozen_mask(beta.size(), options.freeze_frequencies));
    out.predicted_sse = model_sse(series, unflatten(flatten(beta) + out.delta, mode), options.guard);
    return out;
}

struct RefineResult {
    BetaVector beta;
    double sse = 0.0;
    int accepted_steps = 0;
    int rejected_steps = 0;
};

/// Marquardt iteration: accept a step (γ ← γ/f) only when the SSE decreases,
/// otherwise reject it (γ ← γ·f). Stops after `max_steps` accepted steps,
/// `3·max_steps` linear solves, or a relative improvement below the stall limit.
/// Frequency parameters are projected onto the configured box before evaluation.
inline RefineResult refine(const TimeSeries& series, const BetaVector& beta, const LmConfig& cfg, SamplingMode mode,
                           double guard = default_guard) {
    cfg.validate();
    if (series.size() < 2 * beta.size()) {
        throw InvalidArgument("LM: need at least 2M samples");
    }
    RefineResult out{beta, model_sse(series, beta, guard), 0, 0};
    if (beta.empty()) {
        return out;
    }
    const auto frozen = detail::frozen_mask(beta.size(), false);
    Eigen::VectorXd current = flatten(beta);
    double gamma = cfg.initial_damping;
    const int max_solves = 3 * cfg.max_steps;
    int solves = 0;

    Eigen::MatrixXd G;
    Eigen::VectorXd g;
    bool stale = true;
    while (out.accepted_steps < cfg.max_steps && solves < max_solves && out.sse > 0.0) {
        if (stale) {
            const auto current_beta = unflatten(current, mode);
            const Eigen::MatrixXd J = assemble_jacobian(series.grid(), current_beta, guard);
            const Eigen::VectorXd r =
                as_vector(series.values()) - model_prediction(series.grid(), current_beta, guard);
            G = J.transpose() * J;
            g = J.transpose() * r;
            stale = false;
            if (!g.allFinite() || g.cwiseAbs().maxCoeff() == 0.0) {
                break;
            }
        }
        ++solves;
        Eigen::VectorXd delta;
        try {
            delta = detail::damped_solve(G, g, gamma, frozen);
        } catch (const SingularSystemError&) {
            ++out.rejected_steps;
            gamma *= cfg.damping_factor;
            continue;
        }
        const Eigen::VectorXd trial = detail::project(current + delta, cfg.bounds, mode);
        if (trial == current) {
            break;
        }
        const auto trial_beta = unflatten(trial, mode);
        const double trial_sse = model_sse(series, trial_beta, guard);
        if (std::isfinite(trial_sse) && trial_sse < out.sse) {
            const double improvement = (out.sse - trial_sse) / out.sse;
            current = trial;
            out.beta = trial_beta;
            out.sse = trial_sse;
            ++out.accepted_steps;
            gamma /= cfg.damping_factor;
            stale = true;
            if (improvement < cfg.min_relative_improvement) {
                break;
            }
        } else {
            ++out.rejected_steps;
            gamma *= cfg.damping_factor;
        }
    }
    return out;
}

} // namespace rfsa
