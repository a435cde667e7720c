#pragma once

#include <cstddef>
#include <numbers>
#include <ostream>
#include <string>
#include <type_traits>
#include <variant>

#include <nlohmann/json.hpp>

#include "rfsa/benchmark.hpp"
#include "rfsa/decompose.hpp"
#include "rfsa/io/csv.hpp"
#include "rfsa/io/json_config.hpp"

namespace rfsa::io {

inline json component_json(const RfsComponent& c, const Model& model) {
    json j = {{"freq_param", c.freq_param}, {"y1", c.y1}, {"y2", c.y2}};
    if (c.mode == SamplingMode::uniform) {
        j["x"] = c.freq_param;
        try {
            j["omega"] = omega_from_x(c.freq_param, model.t2 - model.t1);
        } catch (const DomainError&) {
            j["omega"] = "nan";
        }
    } else {
        j["omega"] = c.freq_param;
    }
    return j;
}

inline json sinusoid_json(const ComponentReport& r) {
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, SinusoidParams>) {
                return {{"kind", "sinusoid"},
                        {"amplitude", v.amplitude},
                        {"frequency_hz", v.frequency_hz},
                        {"omega", 2.0 * std::numbers::pi * v.frequency_hz},
                        {"phase", v.phase}};
            } else if constexpr (std::is_same_v<T, TrendLine>) {
                return {{"kind", "trend"}, {"slope", v.slope}, {"intercept", v.intercept}};
            } else {
                return {{"kind", "guard_failure"}, {"message", v.message}, {"freq_param", v.freq_param}};
            }
        },
        r);
}

/// Full decomposition report: RFS parameters, sinusoid view, per-order EDC
/// scores and fitting diagnostics.
inline json report_json(const DecompositionReport& report, const RfsaConfig& cfg) {
    const Model& model = report.model;
    json components = json::array();
    for (const auto& c : model.components) {
        components.push_back(component_json(c, model));
    }
    json sinusoids = json::array();
    for (const auto& s : report.sinusoids) {
        sinusoids.push_back(sinusoid_json(s));
    }
    json orders = json::array();
    for (std::size_t M = 0; M < model.per_order_scores.size(); ++M) {
        const auto& score = model.per_order_scores[M];
        json o = {{"order", score.order}, {"sse", score.sse}, {"edc", detail::number_value(score.score)}};
        json beta = json::array();
        for (const auto& c : model.per_order_betas[M]) {
            beta.push_back(component_json(c, model));
        }
        o["components"] = beta;
        if (M > 0) {
            const auto& d = report.orders[M - 1];
            o["grid_index"] = d.grid_index ? json(*d.grid_index) : json(nullptr);
            o["grid_freq_param"] = d.grid_freq_param;
            o["grid_sse"] = detail::number_value(d.grid_sse);
            o["lm_accepted"] = d.lm_accepted;
            o["lm_rejected"] = d.lm_rejected;
            o["skipped_candidates"] = d.skipped_candidates;
            o["fallback_solves"] = d.fallback_solves;
            o["padded"] = d.padded;
            o["glrt_gain"] = detail::number_value(d.glrt.gain);
            o["glrt_exceeds"] = d.glrt.exceeds;
        }
        orders.push_back(o);
    }
    return {{"schema", config_schema},
            {"mode", to_string(model.mode)},
            {"t1", model.t1},
            {"t2", model.t2},
            {"period", model.period ? json(*model.period) : json(nullptr)},
            {"selected_order", model.selected_order},
            {"residual_sse", report.residual_sse},
            {"exact_fit_floor", model.exact_fit_floor},
            {"components", components},
            {"sinusoids", sinusoids},
            {"orders", orders},
            {"config", to_json(cfg)}};
}

/// Long-format benchmark table, header "snr_db,metric,index,value".
///
/// Row-level metrics leave `index` empty; per-frequency metrics (true_omega,
/// freq_mse, crb) carry the index of the true frequency. Runtime is not
/// written.
inline void write_mc_csv(std::ostream& out, const McReport& report) {
    out << "snr_db,metric,index,value\n";
    const auto scalar = [&](double snr, const char* metric, double v) {
        out << format_double(snr) << ',' << metric << ",," << format_double(v) << '\n';
    };
    const auto indexed = [&](double snr, const char* metric, std::size_t j, double v) {
        out << format_double(snr) << ',' << metric << ',' << j << ',' << format_double(v) << '\n';
    };
    for (const auto& row : report.rows) {
        scalar(row.snr_db, "sigma", row.sigma);
        scalar(row.snr_db, "trials", static_cast<double>(row.trials));
        scalar(row.snr_db, "failed", static_cast<double>(row.failed));
        scalar(row.snr_db, "correct", static_cast<double>(row.correct));
        scalar(row.snr_db, "order_probability", row.order_probability);
        scalar(row.snr_db, "model_mse", row.model_mse);
        for (std::size_t j = 0; j < report.truths.size(); ++j) {
            indexed(row.snr_db, "true_omega", j, report.truths[j].omega);
            indexed(row.snr_db, "freq_mse", j, row.freq_mse[j]);
            indexed(row.snr_db, "crb", j, row.crb[j]);
        }
    }
}

inline json trial_json(const TrialRecord& r, const McExperiment& exp) {
    json sse = json::array();
    for (double v : r.per_order_sse) {
        sse.push_back(v);
    }
    json j = {{"snr_db", detail::number_value(exp.snr_grid[r.snr_index])},
              {"snr_index", r.snr_index},
              {"trial", r.trial},
              {"pattern_seed", r.pattern_seed},
              {"noise_seed", r.noise_seed},
              {"failed", r.failed}};
    if (r.failed) {
        j["error"] = r.error;
        return j;
    }
    j["selected_order"] = r.selected_order;
    j["order_correct"] = r.order_correct;
    j["estimated_omegas"] = r.estimated_omegas;
    j["squared_errors"] = r.squared_errors;
    j["per_order_sse"] = sse;
    j["model_mse"] = r.model_mse;
    return j;
}

/// One JSON object per trial, in (snr_index, trial) order.
inline void write_trial_log(std::ostream& out, const McReport& report, const McExperiment& exp) {
    for (const auto& r : report.trials) {
        out << trial_json(r, exp).dump() << '\n';
    }
}

} // namespace rfsa::io
