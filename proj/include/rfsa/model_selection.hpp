#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>

#include "rfsa/errors.hpp"

namespace rfsa {

enum class PenaltyKind { map, evt };

inline const char* to_string(PenaltyKind kind) noexcept { return kind == PenaltyKind::map ? "map" : "evt"; }

/// Complexity penalty for the EDC family. `evt_alpha` is only read for EVT.
struct PenaltyRule {
    PenaltyKind kind = PenaltyKind::evt;
    double evt_alpha = 0.005;

    void validate() const {
        if (kind == PenaltyKind::evt && !(evt_alpha > 0.0 && evt_alpha < 1.0)) {
            throw InvalidArgument("EVT confidence level must lie in (0, 1)");
        }
    }
};

/// EVT per-component constant C_K = ln K + ½ ln ln K − ½ ln(3α²/π).
inline double evt_constant(std::size_t K, double alpha) {
    if (K < 2) {
        throw InvalidArgument("EVT penalty needs K >= 2");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InvalidArgument("EVT confidence level must lie in (0, 1)");
    }
    const double lnK = std::log(static_cast<double>(K));
    return lnK + 0.5 * std::log(lnK) - 0.5 * std::log(3.0 * alpha * alpha / std::numbers::pi);
}

/// Total penalty for an order-M model: (5M/2)·ln K for MAP, M·C_K for EVT.
inline double total_penalty(std::size_t K, std::size_t M, const PenaltyRule& rule) {
    if (M == 0) {
        return 0.0;
    }
    const double m = static_cast<double>(M);
    if (rule.kind == PenaltyKind::map) {
        return 2.5 * m * std::log(static_cast<double>(K));
    }
    return m * evt_constant(K, rule.evt_alpha);
}

/// Penalty added by one extra component (the GLRT threshold).
inline double penalty_increment(std::size_t K, const PenaltyRule& rule) {
    return total_penalty(K, 1, rule);
}

struct EdcScore {
    std::size_t order = 0;
    double sse = 0.0;
    double score = 0.0;
};

/// EDC(M) = (K/2)·ln(sse^0.5) + penalty(M) = (K/4)·ln(sse) + penalty(M).
///
/// An sse at or below `exact_fit_floor` counts as an exact fit and scores −∞.
inline EdcScore edc(std::size_t K, double sse, std::size_t M, const PenaltyRule& rule, double exact_fit_floor = 0.0) {
    if (K < 1) {
        throw InvalidArgument("EDC needs K >= 1");
    }
    if (!(sse >= 0.0) || std::isnan(sse)) {
        throw InvalidArgument("EDC needs a non-negative sse");
    }
    if (sse <= exact_fit_floor) {
        return {M, sse, -std::numeric_limits<double>::infinity()};
    }
    const double fit = 0.25 * static_cast<double>(K) * std::log(sse);
    return {M, sse, fit + total_penalty(K, M, rule)};
}

/// Order with the smallest score; ties go to the smaller order.
inline std::size_t select_order(std::span<const EdcScore> scores) {
    if (scores.empty()) {
        throw InvalidArgument("select_order: no scores");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i].score < scores[best].score ||
            (scores[i].score == scores[best].score && scores[i].order < scores[best].order)) {
            best = i;
        }
    }
    return scores[best].order;
}

struct GlrtResult {
    double gain = 0.0;
    bool exceeds = false;
};

/// Log-likelihood ratio (K/4)·(ln sse_prev − ln sse_cur) against the per-component penalty.
inline GlrtResult glrt_gain(double sse_prev, double sse_cur, std::size_t K, const PenaltyRule& rule) {
    if (!(sse_cur >= 0.0) || !(sse_prev >= sse_cur)) {
        throw InvalidArgument("GLRT needs sse_prev >= sse_cur >= 0");
    }
    if (sse_cur == 0.0) {
        return {std::numeric_limits<double>::infinity(), true};
    }
    const double gain = 0.25 * static_cast<double>(K) * (std::log(sse_prev) - std::log(sse_cur));
    return {gain, gain > penalty_increment(K, rule)};
}

} // namespace rfsa
