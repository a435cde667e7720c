#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "rfsa/errors.hpp"
#include "rfsa/initial_samples.hpp"
#include "rfsa/lm_optimizer.hpp"
#include "rfsa/model_selection.hpp"
#include "rfsa/rfs_core.hpp"
#include "rfsa/time_series.hpp"

namespace rfsa {

enum class ModeSelection { automatic, nonuniform, uniform };

inline const char* to_string(ModeSelection mode) noexcept {
    switch (mode) {
    case ModeSelection::uniform:
        return "uniform";
    case ModeSelection::nonuniform:
        return "nonuniform";
    default:
        return "auto";
    }
}

/// Components below this radian frequency are reported as trend lines.
inline constexpr double default_trend_threshold = 1e-6;

struct RfsaConfig {
    double freq_min = 0.0;              ///< rad/s
    double freq_max = std::numbers::pi; ///< rad/s
    std::size_t grid_size = 64;         ///< J
    std::size_t max_order = 5;          ///< Mmax
    PenaltyRule penalty;
    LmConfig lm;                        ///< bounds are overwritten from the frequency range / mode
    ModeSelection mode = ModeSelection::automatic;
    /// Relative sse (to Σw²) at or below which a fit is treated as exact.
    double exact_fit_tolerance = 1e-20;
    double guard = default_guard;
    double trend_threshold = default_trend_threshold;

    void validate() const {
        if (grid_size < 2) {
            throw InvalidArgument("grid_size must be >= 2");
        }
        if (max_order < 1) {
            throw InvalidArgument("max_order must be >= 1");
        }
        if (!std::isfinite(freq_min) || !std::isfinite(freq_max) || !(freq_min < freq_max)) {
            throw InvalidArgument("frequency range must satisfy freq_min < freq_max");
        }
        if (!(exact_fit_tolerance >= 0.0)) {
            throw InvalidArgument("exact_fit_tolerance must be non-negative");
        }
        penalty.validate();
        LmConfig lm_check = lm;
        lm_check.bounds = {freq_min, freq_max};
        lm_check.validate();
    }
};

/// The fitted artifact: components of the selected order plus every per-order fit.
struct Model {
    SamplingMode mode = SamplingMode::nonuniform;
    double t1 = 0.0;
    double t2 = 1.0;
    std::optional<double> period; ///< set in uniform mode
    BetaVector components;
    std::size_t selected_order = 0;
    std::vector<EdcScore> per_order_scores; ///< orders 0..Mmax
    std::vector<BetaVector> per_order_betas; ///< index M holds the order-M fit (index 0 empty)
    double exact_fit_floor = 0.0;            ///< absolute sse floor used when scoring
};

struct TrendLine {
    double slope = 0.0;     ///< per second
    double intercept = 0.0; ///< value at t = 0
};

struct ComponentGuardFailure {
    std::string message;
    double freq_param = 0.0;
};

using ComponentReport = std::variant<SinusoidParams, TrendLine, ComponentGuardFailure>;

struct OrderDiagnostics {
    std::size_t order = 0;
    std::optional<std::size_t> grid_index; ///< winning trial (0-based), if any candidate improved
    double grid_freq_param = 0.0;
    double grid_sse = 0.0;
    double refined_sse = 0.0;
    int lm_accepted = 0;
    int lm_rejected = 0;
    std::size_t skipped_candidates = 0; ///< singular solves
    std::size_t fallback_solves = 0;    ///< least-norm solves
    bool padded = false;                ///< order carried the previous fit plus a zero component
    GlrtResult glrt;
};

struct DecompositionReport {
    Model model;
    std::vector<ComponentReport> sinusoids;
    double residual_sse = 0.0;
    std::vector<OrderDiagnostics> orders; ///< orders 1..Mmax
};

/// Trial frequencies ω_j = ω_min + j·(ω_max − ω_min)/(J − 1), j = 0..J−1.
inline std::vector<double> trial_frequencies(double freq_min, double freq_max, std::size_t count) {
    std::vector<double> out(count);
    const double step = (freq_max - freq_min) / static_cast<double>(count - 1);
    for (std::size_t j = 0; j < count; ++j) {
        out[j] = freq_min + static_cast<double>(j) * step;
    }
    out.back() = freq_max;
    return out;
}

inline SamplingMode resolve_mode(ModeSelection requested, const TimeGrid& grid) {
    switch (requested) {
    case ModeSelection::uniform:
        if (!grid.is_uniform()) {
            throw InvalidArgument("uniform mode requested for a non-equidistant grid");
        }
        return SamplingMode::uniform;
    case ModeSelection::nonuniform:
        return SamplingMode::nonuniform;
    default:
        return grid.is_uniform() ? SamplingMode::uniform : SamplingMode::nonuniform;
    }
}

/// Σ_m y_{m,k} on `grid`, with the model's (t1, t2) as references.
inline std::vector<double> reconstruct(const Model& model, const TimeGrid& grid, double guard = default_guard) {
    std::vector<double> out(grid.size(), 0.0);
    for (const auto& c : model.components) {
        if (c.mode != model.mode) {
            throw InvalidArgument("reconstruct: component mode differs from model mode");
        }
        const auto y = predict_with_references(c, model.t1, model.t2, grid, guard);
        for (std::size_t k = 0; k < out.size(); ++k) {
            out[k] += y[k];
        }
    }
    return out;
}

/// Converts components to sinusoid parameters, or to (slope, intercept) lines
/// below `trend_threshold` rad/s.
inline std::vector<ComponentReport> to_sinusoids(const Model& model,
                                                 double trend_threshold = default_trend_threshold,
                                                 double guard = default_guard) {
    std::vector<ComponentReport> out;
    out.reserve(model.components.size());
    const double tau21 = model.t2 - model.t1;
    const auto line = [&](const RfsComponent& c) {
        const double slope = (c.y2 - c.y1) / tau21;
        return TrendLine{slope, c.y1 - slope * model.t1};
    };
    for (const auto& c : model.components) {
        try {
            const double omega = component_omega(c, model.mode == SamplingMode::uniform
                                                         ? std::optional<double>(tau21)
                                                         : std::nullopt);
            if (std::abs(omega) < trend_threshold) {
                out.emplace_back(line(c));
                continue;
            }
            out.emplace_back(amplitude_phase(c, model.t1, model.t2, guard));
        } catch (const TrendComponent&) {
            out.emplace_back(line(c));
        } catch (const NumericGuardError& e) {
            out.emplace_back(ComponentGuardFailure{e.what(), c.freq_param});
        } catch (const DomainError& e) {
            out.emplace_back(ComponentGuardFailure{e.what(), c.freq_param});
        }
    }
    return out;
}

namespace detail {

struct GridWinner {
    std::optional<std::size_t> index;
    BetaVector beta;
    double sse = std::numeric_limits<double>::infinity();
};

/// One pass of the trial-frequency loop: previous frequencies fixed, all 2M
/// initial samples re-solved for every appended trial frequency.
inline GridWinner grid_pass(const TimeSeries& series, const BetaVector& previous, std::span<const double> trials,
                            SamplingMode mode, double baseline_sse, double guard, OrderDiagnostics& diag) {
    const auto K = static_cast<Eigen::Index>(series.size());
    const auto M = static_cast<Eigen::Index>(previous.size() + 1);
    Eigen::MatrixXd J(K, 2 * M);
    for (Eigen::Index m = 0; m + 1 < M; ++m) {
        fill_design_columns(J, 2 * m, previous[static_cast<std::size_t>(m)].freq_param, series.grid(), mode, guard);
    }

    GridWinner strict;   // Table-style strict improvement over the previous order
    GridWinner fallback; // best valid candidate, used if nothing improves
    strict.sse = baseline_sse;
    for (std::size_t j = 0; j < trials.size(); ++j) {
        fill_design_columns(J, 2 * (M - 1), trials[j], series.grid(), mode, guard);
        InitialSampleSolution sol;
        try {
            sol = solve_with_design(series, J);
        } catch (const SingularSystemError&) {
            ++diag.skipped_candidates;
            continue;
        }
        if (sol.diagnostics.least_norm_fallback) {
            ++diag.fallback_solves;
        }
        if (!std::isfinite(sol.sse)) {
            ++diag.skipped_candidates;
            continue;
        }
        const auto take = [&](GridWinner& w) {
            w.index = j;
            w.sse = sol.sse;
            w.beta.resize(static_cast<std::size_t>(M));
            for (Eigen::Index m = 0; m < M; ++m) {
                const double freq = m + 1 < M ? previous[static_cast<std::size_t>(m)].freq_param : trials[j];
                w.beta[static_cast<std::size_t>(m)] = {freq, sol.samples.alpha(2 * m), sol.samples.alpha(2 * m + 1),
                                                       mode};
            }
        };
        if (strict.sse > sol.sse) {
            take(strict);
        }
        if (!fallback.index || fallback.sse > sol.sse) {
            take(fallback);
        }
    }
    return strict.index ? strict : fallback;
}

} // namespace detail

/// Iterative grid search + LM refinement + EDC order selection.
inline DecompositionReport decompose(const TimeSeries& series, const RfsaConfig& cfg) {
    cfg.validate();
    if (series.size() < 3) {
        throw InvalidArgument("decompose needs at least 3 samples");
    }
    const TimeGrid& grid = series.grid();
    const SamplingMode mode = resolve_mode(cfg.mode, grid);
    const std::size_t K = series.size();

    std::vector<double> trials = trial_frequencies(cfg.freq_min, cfg.freq_max, cfg.grid_size);
    LmConfig lm = cfg.lm;
    if (mode == SamplingMode::uniform) {
        const double T = *grid.uniform_period();
        for (double& f : trials) {
            f = x_from_omega(f, T);
        }
        lm.bounds = {-2.0, 2.0};
    } else {
        lm.bounds = {cfg.freq_min, cfg.freq_max};
    }

    DecompositionReport report;
    Model& model = report.model;
    model.mode = mode;
    model.t1 = grid.front();
    model.t2 = grid.second();
    model.period = mode == SamplingMode::uniform ? grid.uniform_period() : std::nullopt;

    const double e0 = series.energy();
    model.exact_fit_floor = cfg.exact_fit_tolerance * e0;
    model.per_order_scores.push_back(edc(K, e0, 0, cfg.penalty, model.exact_fit_floor));
    model.per_order_betas.emplace_back();

    BetaVector previous;
    double previous_sse = e0;
    for (std::size_t M = 1; M <= cfg.max_order; ++M) {
        OrderDiagnostics diag;
        diag.order = M;
        BetaVector beta;
        double sse = previous_sse;

        const auto pad = [&](double freq) {
            beta = previous;
            beta.push_back({freq, 0.0, 0.0, mode});
            sse = previous_sse;
            diag.padded = true;
        };

        if (2 * M > K) {
            pad(trials.front());
        } else {
            auto winner = detail::grid_pass(series, previous, trials, mode, previous_sse, cfg.guard, diag);
            if (!winner.index) {
                pad(trials.front());
            } else {
                diag.grid_index = winner.index;
                diag.grid_freq_param = trials[*winner.index];
                diag.grid_sse = winner.sse;
                const auto refined = refine(series, winner.beta, lm, mode, cfg.guard);
                diag.lm_accepted = refined.accepted_steps;
                diag.lm_rejected = refined.rejected_steps;
                beta = refined.beta;
                sse = refined.sse;
                // Keep the error sequence non-increasing: the previous fit plus a
                // zero-amplitude component reproduces the previous sse exactly.
                if (!(sse <= previous_sse)) {
                    pad(trials[*winner.index]);
                }
            }
        }
        diag.refined_sse = sse;
        diag.glrt = glrt_gain(previous_sse, sse, K, cfg.penalty);
        model.per_order_scores.push_back(edc(K, sse, M, cfg.penalty, model.exact_fit_floor));
        model.per_order_betas.push_back(beta);
        report.orders.push_back(diag);
        previous = std::move(beta);
        previous_sse = sse;
    }

    model.selected_order = select_order(model.per_order_scores);
    model.components = model.per_order_betas[model.selected_order];
    report.residual_sse = model.per_order_scores[model.selected_order].sse;
    report.sinusoids = to_sinusoids(model, cfg.trend_threshold, cfg.guard);
    return report;
}

} // namespace rfsa
