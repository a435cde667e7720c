#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "rfsa/errors.hpp"
#include "rfsa/time_series.hpp"

namespace rfsa {

/// SplitMix64 step; used to derive independent seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Deterministic seed for (stream, index) under a base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) noexcept {
    std::uint64_t s = base;
    std::uint64_t out = splitmix64(s);
    s ^= stream * 0xD1B54A32D192ED03ULL;
    out ^= splitmix64(s);
    s ^= index * 0x8CB92BA72F3D8DD7ULL;
    out ^= splitmix64(s);
    return out;
}

/// mt19937_64 with explicitly defined variate transforms, so a seed yields the
/// same stream on every conforming standard library.
///
/// - uniform(): top 53 bits scaled by 2^-53, in [0, 1)
/// - normal(): Box–Muller on (1 − u1, u2); both variates of a pair are used
/// - exponential(λ): −ln(1 − u)/λ
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double exponential(double rate) noexcept { return -std::log(1.0 - uniform()) / rate; }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

struct Tone {
    double amplitude = 0.0; ///< A ≥ 0
    double omega = 0.0;     ///< rad/s
    double phase = 0.0;     ///< rad
};

/// w(t) = o + κ·t + Σ A_n sin(ω_n t + φ_n) + σ·noise
struct SignalSpec {
    double intercept = 0.0;
    double slope = 0.0;
    std::vector<Tone> tones;
    double noise_sigma = 0.0;

    [[nodiscard]] bool has_trend() const noexcept { return intercept != 0.0 || slope != 0.0; }

    void validate() const {
        if (!std::isfinite(intercept) || !std::isfinite(slope)) {
            throw InvalidArgument("signal: intercept and slope must be finite");
        }
        if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
            throw InvalidArgument("signal: noise_sigma must be finite and >= 0");
        }
        for (std::size_t n = 0; n < tones.size(); ++n) {
            const auto& t = tones[n];
            if (!(t.amplitude >= 0.0) || !std::isfinite(t.amplitude) || !std::isfinite(t.omega) ||
                !std::isfinite(t.phase)) {
                throw InvalidArgument("signal: tone " + std::to_string(n) + " needs finite omega/phase and amplitude >= 0");
            }
        }
    }
};

enum class SamplingKind { uniform, jittered, poisson };

inline const char* to_string(SamplingKind kind) noexcept {
    switch (kind) {
    case SamplingKind::jittered:
        return "jittered";
    case SamplingKind::poisson:
        return "poisson";
    default:
        return "uniform";
    }
}

/// Sampling instants: uniform(T), i.i.d. intervals U[low, high], or exponential intervals of rate λ.
struct SamplingPattern {
    SamplingKind kind = SamplingKind::uniform;
    std::size_t count = 64; ///< K
    double start = 0.0;     ///< t_1
    double period = 1.0;    ///< T (uniform)
    double interval_low = 0.5;
    double interval_high = 1.5;
    double rate = 0.1;      ///< λ in 1/s (poisson)
    std::uint64_t seed = 0;

    void validate() const {
        if (count < 2) {
            throw InvalidArgument("sampling: count must be >= 2");
        }
        if (!std::isfinite(start)) {
            throw InvalidArgument("sampling: start must be finite");
        }
        switch (kind) {
        case SamplingKind::uniform:
            if (!(period > 0.0) || !std::isfinite(period)) {
                throw InvalidArgument("sampling: period must be > 0");
            }
            break;
        case SamplingKind::jittered:
            if (!(interval_low > 0.0) || !(interval_high >= interval_low) || !std::isfinite(interval_high)) {
                throw InvalidArgument("sampling: need 0 < interval_low <= interval_high");
            }
            break;
        case SamplingKind::poisson:
            if (!(rate > 0.0) || !std::isfinite(rate)) {
                throw InvalidArgument("sampling: rate must be > 0");
            }
            break;
        }
    }

    /// Expected sampling interval of the pattern.
    [[nodiscard]] double mean_interval() const noexcept {
        switch (kind) {
        case SamplingKind::jittered:
            return 0.5 * (interval_low + interval_high);
        case SamplingKind::poisson:
            return 1.0 / rate;
        default:
            return period;
        }
    }
};

/// Timestamps are stored rounded to 10 decimal places.
inline double round_time(double t) noexcept { return std::round(t * 1e10) / 1e10; }

struct SamplingStats {
    std::size_t regenerated_intervals = 0;
};

inline TimeGrid sample_times(const SamplingPattern& pattern, SamplingStats* stats = nullptr) {
    pattern.validate();
    std::vector<double> t(pattern.count);
    if (pattern.kind == SamplingKind::uniform) {
        for (std::size_t k = 0; k < t.size(); ++k) {
            t[k] = round_time(pattern.start + static_cast<double>(k) * pattern.period);
        }
        return TimeGrid(std::move(t));
    }
    Rng rng(pattern.seed);
    const auto draw = [&] {
        return pattern.kind == SamplingKind::jittered ? rng.uniform(pattern.interval_low, pattern.interval_high)
                                                      : rng.exponential(pattern.rate);
    };
    t[0] = round_time(pattern.start);
    for (std::size_t k = 1; k < t.size(); ++k) {
        double next = round_time(t[k - 1] + draw());
        while (!(next > t[k - 1])) {
            if (stats) {
                ++stats->regenerated_intervals;
            }
            next = round_time(t[k - 1] + draw());
        }
        t[k] = next;
    }
    return TimeGrid(std::move(t));
}

/// Deterministic part of the signal on `grid`.
inline std::vector<double> clean_signal(const SignalSpec& spec, const TimeGrid& grid) {
    std::vector<double> w(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double t = grid[k];
        double v = spec.intercept + spec.slope * t;
        for (const auto& tone : spec.tones) {
            v += tone.amplitude * std::sin(tone.omega * t + tone.phase);
        }
        w[k] = v;
    }
    return w;
}

inline TimeSeries generate(const SignalSpec& spec, const TimeGrid& grid, std::uint64_t seed) {
    spec.validate();
    auto w = clean_signal(spec, grid);
    if (spec.noise_sigma > 0.0) {
        Rng rng(seed);
        for (double& v : w) {
            v += spec.noise_sigma * rng.normal();
        }
    }
    return TimeSeries(grid, std::move(w));
}

/// σ such that 10·log10(A²/(2σ²)) = snr_db; +∞ dB maps to σ = 0.
inline double snr_to_sigma(double reference_amplitude, double snr_db) {
    if (!(reference_amplitude > 0.0)) {
        throw InvalidArgument("reference amplitude must be positive");
    }
    if (std::isnan(snr_db)) {
        throw InvalidArgument("SNR is NaN");
    }
    if (snr_db == std::numeric_limits<double>::infinity()) {
        return 0.0;
    }
    return reference_amplitude / std::sqrt(2.0 * std::pow(10.0, snr_db / 10.0));
}

} // namespace rfsa
