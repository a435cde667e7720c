#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rfsa/errors.hpp"

namespace rfsa {

/// Strictly increasing sample instants in seconds.
///
/// The grid is tagged uniform when every consecutive difference matches the
/// first one within 1e-12 relative; the period is then (t_K - t_1)/(K - 1).
class TimeGrid {
public:
    static constexpr double uniform_tolerance = 1e-12;

    TimeGrid() = default;

    explicit TimeGrid(std::vector<double> times) : times_(std::move(times)) {
        if (times_.size() < 2) {
            throw InvalidArgument("time grid needs at least 2 samples");
        }
        for (std::size_t k = 0; k < times_.size(); ++k) {
            if (!std::isfinite(times_[k])) {
                throw InvalidArgument("time grid: non-finite timestamp at index " + std::to_string(k));
            }
            if (k > 0 && !(times_[k] > times_[k - 1])) {
                throw InvalidArgument("time grid: timestamps not strictly increasing at index " +
                                      std::to_string(k));
            }
        }
        const double first = times_[1] - times_[0];
        bool uniform = true;
        for (std::size_t k = 2; k < times_.size() && uniform; ++k) {
            const double d = times_[k] - times_[k - 1];
            uniform = std::abs(d - first) <= uniform_tolerance * first;
        }
        if (uniform) {
            period_ = (times_.back() - times_.front()) / static_cast<double>(times_.size() - 1);
        }
    }

    [[nodiscard]] std::span<const double> times() const noexcept { return times_; }
    [[nodiscard]] std::size_t size() const noexcept { return times_.size(); }
    [[nodiscard]] double operator[](std::size_t k) const { return times_[k]; }
    [[nodiscard]] double front() const { return times_.front(); }
    [[nodiscard]] double second() const { return times_[1]; }
    [[nodiscard]] const std::optional<double>& uniform_period() const noexcept { return period_; }
    [[nodiscard]] bool is_uniform() const noexcept { return period_.has_value(); }

    /// Mean sampling interval (t_K - t_1)/(K - 1).
    [[nodiscard]] double mean_interval() const {
        return (times_.back() - times_.front()) / static_cast<double>(times_.size() - 1);
    }

private:
    std::vector<double> times_;
    std::optional<double> period_;
};

/// Observed values w_k on a TimeGrid.
class TimeSeries {
public:
    TimeSeries() = default;

    TimeSeries(TimeGrid grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
        if (values_.size() != grid_.size()) {
            throw InvalidArgument("time series: " + std::to_string(values_.size()) + " values for " +
                                  std::to_string(grid_.size()) + " timestamps");
        }
        for (std::size_t k = 0; k < values_.size(); ++k) {
            if (!std::isfinite(values_[k])) {
                throw InvalidArgument("time series: non-finite value at index " + std::to_string(k));
            }
        }
    }

    [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }

    [[nodiscard]] double energy() const noexcept {
        double e = 0.0;
        for (double w : values_) {
            e += w * w;
        }
        return e;
    }

private:
    TimeGrid grid_;
    std::vector<double> values_;
};

} // namespace rfsa
