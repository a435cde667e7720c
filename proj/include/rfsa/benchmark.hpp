#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "rfsa/decompose.hpp"
#include "rfsa/errors.hpp"
#include "rfsa/signal_gen.hpp"

namespace rfsa {

/// Approximate Cramér–Rao bound on ω (rad/s)² for a tone in white noise,
/// using the mean sampling interval in place of the uniform period:
///
///   24σ² / (K³A²τ̄²) · [1 + 3cos(2φ)·sin(Kω) / (K·sin ω)]
///
/// The bracket is skipped (leading term returned) when |sin ω| < 1e-12.
inline double crb_omega(double sigma, std::size_t K, double amplitude, double phase, double omega,
                        double mean_interval, bool* bracket_skipped = nullptr) {
    if (K < 2 || !(amplitude > 0.0) || !(mean_interval > 0.0) || !(sigma >= 0.0)) {
        throw InvalidArgument("crb_omega: need K >= 2, A > 0, mean interval > 0, sigma >= 0");
    }
    const double k = static_cast<double>(K);
    const double leading = 24.0 * sigma * sigma / (k * k * k * amplitude * amplitude * mean_interval * mean_interval);
    const double s = std::sin(omega);
    if (std::abs(s) < 1e-12) {
        if (bracket_skipped) {
            *bracket_skipped = true;
        }
        return leading;
    }
    if (bracket_skipped) {
        *bracket_skipped = false;
    }
    return leading * (1.0 + 3.0 * std::cos(2.0 * phase) * std::sin(k * omega) / (k * s));
}

struct McExperiment {
    SignalSpec spec;                   ///< noise_sigma is replaced per SNR
    SamplingPattern pattern;           ///< its seed is replaced by one derived from base_seed
    std::vector<double> snr_grid;      ///< dB; +inf means noiseless
    double reference_amplitude = 1.0;  ///< amplitude the SNR refers to
    std::size_t trials = 100;
    RfsaConfig rfsa;
    bool randomize_pattern = true;     ///< redraw the sampling pattern every trial
    std::uint64_t base_seed = 0;
    std::size_t workers = 1;

    void validate() const {
        spec.validate();
        pattern.validate();
        rfsa.validate();
        if (trials < 1) {
            throw InvalidArgument("experiment: trials must be >= 1");
        }
        if (snr_grid.empty()) {
            throw InvalidArgument("experiment: snr grid is empty");
        }
        if (!(reference_amplitude > 0.0)) {
            throw InvalidArgument("experiment: reference amplitude must be positive");
        }
    }
};

/// A true frequency to be matched: tones in spec order, then the trend (ω = 0) if any.
struct TrueFrequency {
    double omega = 0.0;
    double amplitude = 0.0;
    double phase = 0.0;
    bool trend = false;
};

inline std::vector<TrueFrequency> true_frequencies(const SignalSpec& spec) {
    std::vector<TrueFrequency> out;
    for (const auto& t : spec.tones) {
        out.push_back({t.omega, t.amplitude, t.phase, false});
    }
    if (spec.has_trend()) {
        out.push_back({0.0, 0.0, 0.0, true});
    }
    return out;
}

struct TrialRecord {
    std::size_t snr_index = 0;
    std::size_t trial = 0;
    std::uint64_t pattern_seed = 0;
    std::uint64_t noise_seed = 0;
    bool failed = false;
    std::string error;
    std::size_t selected_order = 0;
    bool order_correct = false;
    std::vector<double> estimated_omegas;    ///< rad/s, selected model
    std::vector<double> squared_errors;      ///< per true frequency; empty unless order_correct
    std::vector<double> per_order_sse;       ///< orders 0..Mmax
    double model_mse = 0.0;                  ///< vs the clean signal
    double runtime_seconds = 0.0;
};

struct McRow {
    double snr_db = 0.0;
    double sigma = 0.0;
    std::size_t trials = 0;
    std::size_t failed = 0;
    std::size_t correct = 0;
    double order_probability = 0.0;  ///< correct / (trials − failed)
    std::vector<double> freq_mse;    ///< per true frequency, over correct-order trials
    std::vector<double> crb;         ///< per true frequency; NaN for the trend
    double model_mse = 0.0;          ///< over non-failed trials
    double mean_runtime_seconds = 0.0;
    double max_runtime_seconds = 0.0;
};

struct McReport {
    std::vector<TrueFrequency> truths;
    std::vector<McRow> rows;          ///< sorted by SNR
    std::vector<TrialRecord> trials;  ///< sorted by (snr_index, trial)
};

namespace detail {

inline constexpr std::uint64_t pattern_stream = 0x5A3D;
inline constexpr std::uint64_t noise_stream = 0x7E11;

/// Greedy nearest-in-ω assignment; returns for each truth the index of its estimate.
inline std::vector<std::size_t> match_frequencies(const std::vector<double>& estimates,
                                                  const std::vector<TrueFrequency>& truths) {
    std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
    for (std::size_t j = 0; j < truths.size(); ++j) {
        for (std::size_t i = 0; i < estimates.size(); ++i) {
            pairs.emplace_back(std::abs(estimates[i] - truths[j].omega), j, i);
        }
    }
    std::sort(pairs.begin(), pairs.end());
    constexpr auto none = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> assigned(truths.size(), none);
    std::vector<bool> used(estimates.size(), false);
    for (const auto& [d, j, i] : pairs) {
        if (assigned[j] == none && !used[i]) {
            assigned[j] = i;
            used[i] = true;
        }
    }
    return assigned;
}

inline double estimated_omega(const RfsComponent& c, const Model& model) {
    if (c.mode == SamplingMode::uniform) {
        return omega_from_x(c.freq_param, model.t2 - model.t1);
    }
    return std::abs(c.freq_param);
}

} // namespace detail

inline TrialRecord run_trial(const McExperiment& exp, const std::vector<TrueFrequency>& truths, std::size_t snr_index,
                             std::size_t trial, const TimeGrid* fixed_grid) {
    TrialRecord rec;
    rec.snr_index = snr_index;
    rec.trial = trial;
    const std::uint64_t flat = static_cast<std::uint64_t>(snr_index) * exp.trials + trial;
    rec.noise_seed = derive_seed(exp.base_seed, detail::noise_stream, flat);
    rec.pattern_seed = fixed_grid ? derive_seed(exp.base_seed, detail::pattern_stream, 0)
                                  : derive_seed(exp.base_seed, detail::pattern_stream, 1 + flat);
    const auto start = std::chrono::steady_clock::now();
    try {
        TimeGrid grid;
        if (fixed_grid) {
            grid = *fixed_grid;
        } else {
            SamplingPattern p = exp.pattern;
            p.seed = rec.pattern_seed;
            grid = sample_times(p);
        }
        SignalSpec spec = exp.spec;
        spec.noise_sigma = snr_to_sigma(exp.reference_amplitude, exp.snr_grid[snr_index]);
        const auto series = generate(spec, grid, rec.noise_seed);
        const auto report = decompose(series, exp.rfsa);
        const auto& model = report.model;

        rec.selected_order = model.selected_order;
        rec.order_correct = model.selected_order == truths.size();
        for (const auto& s : model.per_order_scores) {
            rec.per_order_sse.push_back(s.sse);
        }
        for (const auto& c : model.components) {
            rec.estimated_omegas.push_back(detail::estimated_omega(c, model));
        }
        if (rec.order_correct) {
            const auto assigned = detail::match_frequencies(rec.estimated_omegas, truths);
            for (std::size_t j = 0; j < truths.size(); ++j) {
                const double d = rec.estimated_omegas[assigned[j]] - truths[j].omega;
                rec.squared_errors.push_back(d * d);
            }
        }
        const auto clean = clean_signal(exp.spec, grid);
        const auto fitted = reconstruct(model, grid, exp.rfsa.guard);
        double acc = 0.0;
        for (std::size_t k = 0; k < clean.size(); ++k) {
            const double d = fitted[k] - clean[k];
            acc += d * d;
        }
        rec.model_mse = acc / static_cast<double>(clean.size());
    } catch (const std::exception& e) {
        rec.failed = true;
        rec.error = e.what();
    }
    rec.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

/// Aggregates one SNR row from its trial records.
inline McRow aggregate_row(const McExperiment& exp, const std::vector<TrueFrequency>& truths, std::size_t snr_index,
                           std::span<const TrialRecord> records, double mean_interval, std::size_t K) {
    McRow row;
    row.snr_db = exp.snr_grid[snr_index];
    row.sigma = snr_to_sigma(exp.reference_amplitude, row.snr_db);
    row.trials = records.size();
    row.freq_mse.assign(truths.size(), 0.0);
    double model_acc = 0.0;
    double runtime_acc = 0.0;
    for (const auto& r : records) {
        runtime_acc += r.runtime_seconds;
        row.max_runtime_seconds = std::max(row.max_runtime_seconds, r.runtime_seconds);
        if (r.failed) {
            ++row.failed;
            continue;
        }
        model_acc += r.model_mse;
        if (r.order_correct) {
            ++row.correct;
            for (std::size_t j = 0; j < truths.size(); ++j) {
                row.freq_mse[j] += r.squared_errors[j];
            }
        }
    }
    const std::size_t ok = row.trials - row.failed;
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    row.order_probability = ok ? static_cast<double>(row.correct) / static_cast<double>(ok) : nan;
    row.model_mse = ok ? model_acc / static_cast<double>(ok) : nan;
    for (double& v : row.freq_mse) {
        v = row.correct ? v / static_cast<double>(row.correct) : nan;
    }
    for (const auto& t : truths) {
        row.crb.push_back(t.trend || !(t.amplitude > 0.0)
                              ? nan
                              : crb_omega(row.sigma, K, t.amplitude, t.phase, t.omega, mean_interval));
    }
    row.mean_runtime_seconds = row.trials ? runtime_acc / static_cast<double>(row.trials) : 0.0;
    return row;
}

/// Runs every (SNR, trial) pair, possibly on several threads. Results do not
/// depend on the worker count: each trial owns its seeds and its output slot.
inline McReport run_mc(const McExperiment& exp) {
    exp.validate();
    McReport report;
    report.truths = true_frequencies(exp.spec);

    // Rows are emitted in SNR order; keep the original index for seeding.
    std::vector<std::size_t> order(exp.snr_grid.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return exp.snr_grid[a] < exp.snr_grid[b]; });

    std::optional<TimeGrid> fixed_grid;
    if (!exp.randomize_pattern) {
        SamplingPattern p = exp.pattern;
        p.seed = derive_seed(exp.base_seed, detail::pattern_stream, 0);
        fixed_grid = sample_times(p);
    }

    const std::size_t total = exp.snr_grid.size() * exp.trials;
    report.trials.resize(total);
    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t i = next.fetch_add(1); i < total; i = next.fetch_add(1)) {
            report.trials[i] = run_trial(exp, report.truths, i / exp.trials, i % exp.trials,
                                         fixed_grid ? &*fixed_grid : nullptr);
        }
    };
    const std::size_t workers = std::clamp<std::size_t>(exp.workers, 1, std::max<std::size_t>(total, 1));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
    }

    const double mean_interval = exp.pattern.mean_interval();
    for (std::size_t s : order) {
        report.rows.push_back(aggregate_row(exp, report.truths, s,
                                            std::span<const TrialRecord>(report.trials).subspan(s * exp.trials, exp.trials),
                                            mean_interval, exp.pattern.count));
    }
    return report;
}

} // namespace rfsa
