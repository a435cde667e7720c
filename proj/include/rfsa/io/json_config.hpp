#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <istream>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rfsa/benchmark.hpp"
#include "rfsa/decompose.hpp"
#include "rfsa/errors.hpp"
#include "rfsa/signal_gen.hpp"

namespace rfsa::io {

using nlohmann::json;

/// Version written to and required in the top-level "schema" field.
inline constexpr int config_schema = 1;

/// Everything a command may read from a config file. Sections that a command
/// does not use are still validated.
///
///   {
///     "schema": 1,
///     "seed": 0, "workers": 1,
///     "signal":   { "intercept", "slope", "noise_sigma",
///                   "tones": [ { "amplitude", "omega" | "frequency_hz", "phase" } ] },
///     "sampling": { "kind": "uniform" | "jittered" | "poisson", "count", "start",
///                   "period", "interval_low", "interval_high", "rate" },
///     "rfsa":     { "freq_min", "freq_max", "grid_size", "max_order",
///                   "penalty": "map" | "evt", "evt_alpha", "mode": "auto" | "uniform" | "nonuniform",
///                   "exact_fit_tolerance", "guard", "trend_threshold",
///                   "lm": { "max_steps", "damping_factor", "initial_damping", "min_relative_improvement" } },
///     "experiment": { "snr_db": [number | "inf"], "reference_amplitude", "trials", "randomize_pattern" }
///   }
///
/// Frequencies are in rad/s unless the key says otherwise.
struct ConfigDocument {
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    SignalSpec signal;
    SamplingPattern sampling;
    RfsaConfig rfsa;
    std::vector<double> snr_db;
    double reference_amplitude = 1.0;
    std::size_t trials = 100;
    bool randomize_pattern = true;
};

namespace detail {

/// Typed access to one JSON object; keys outside `allowed` are rejected.
class Fields {
public:
    Fields(const json& j, std::string path, std::initializer_list<std::string_view> allowed)
        : j_(j), path_(std::move(path)) {
        if (!j.is_object()) {
            throw InvalidArgument(where() + ": expected an object");
        }
        for (const auto& [key, value] : j.items()) {
            bool known = false;
            for (auto a : allowed) {
                known = known || key == a;
            }
            if (!known) {
                throw InvalidArgument(field(key) + ": unknown field");
            }
        }
    }

    [[nodiscard]] bool has(std::string_view key) const { return j_.contains(std::string(key)); }

    [[nodiscard]] std::string field(std::string_view key) const {
        return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
    }

    void get(std::string_view key, double& out) const {
        if (const auto* v = find(key)) {
            if (!v->is_number()) {
                throw InvalidArgument(field(key) + ": expected a number");
            }
            out = v->get<double>();
        }
    }

    template <std::unsigned_integral T>
        requires(!std::same_as<T, bool>)
    void get(std::string_view key, T& out) const {
        if (const auto* v = find(key)) {
            if (!v->is_number_unsigned()) {
                throw InvalidArgument(field(key) + ": expected a non-negative integer");
            }
            out = v->get<T>();
        }
    }

    void get(std::string_view key, int& out) const {
        if (const auto* v = find(key)) {
            if (!v->is_number_integer()) {
                throw InvalidArgument(field(key) + ": expected an integer");
            }
            out = v->get<int>();
        }
    }

    void get(std::string_view key, bool& out) const {
        if (const auto* v = find(key)) {
            if (!v->is_boolean()) {
                throw InvalidArgument(field(key) + ": expected true or false");
            }
            out = v->get<bool>();
        }
    }

    void get(std::string_view key, std::string& out) const {
        if (const auto* v = find(key)) {
            if (!v->is_string()) {
                throw InvalidArgument(field(key) + ": expected a string");
            }
            out = v->get<std::string>();
        }
    }

    [[nodiscard]] const json* find(std::string_view key) const {
        const auto it = j_.find(std::string(key));
        return it == j_.end() ? nullptr : &*it;
    }

private:
    [[nodiscard]] std::string where() const { return path_.empty() ? "config" : path_; }

    const json& j_;
    std::string path_;
};

inline double number_or_infinity(const json& v, const std::string& field) {
    if (v.is_number()) {
        return v.get<double>();
    }
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "+inf") {
            return std::numeric_limits<double>::infinity();
        }
        if (s == "-inf") {
            return -std::numeric_limits<double>::infinity();
        }
    }
    throw InvalidArgument(field + ": expected a number or \"inf\"");
}

/// Non-finite doubles become the strings "inf", "-inf" and "nan".
inline json number_value(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    return v;
}

} // namespace detail

inline PenaltyKind parse_penalty(const std::string& s, const std::string& field = "penalty") {
    if (s == "map") {
        return PenaltyKind::map;
    }
    if (s == "evt") {
        return PenaltyKind::evt;
    }
    throw InvalidArgument(field + ": expected \"map\" or \"evt\", got \"" + s + "\"");
}

inline ModeSelection parse_mode(const std::string& s, const std::string& field = "mode") {
    if (s == "auto") {
        return ModeSelection::automatic;
    }
    if (s == "uniform") {
        return ModeSelection::uniform;
    }
    if (s == "nonuniform") {
        return ModeSelection::nonuniform;
    }
    throw InvalidArgument(field + ": expected \"auto\", \"uniform\" or \"nonuniform\", got \"" + s + "\"");
}

inline SamplingKind parse_sampling_kind(const std::string& s, const std::string& field = "kind") {
    if (s == "uniform") {
        return SamplingKind::uniform;
    }
    if (s == "jittered") {
        return SamplingKind::jittered;
    }
    if (s == "poisson") {
        return SamplingKind::poisson;
    }
    throw InvalidArgument(field + ": expected \"uniform\", \"jittered\" or \"poisson\", got \"" + s + "\"");
}

inline SignalSpec parse_signal(const json& j, const std::string& path = "signal") {
    const detail::Fields f(j, path, {"intercept", "slope", "noise_sigma", "tones"});
    SignalSpec spec;
    f.get("intercept", spec.intercept);
    f.get("slope", spec.slope);
    f.get("noise_sigma", spec.noise_sigma);
    if (const auto* tones = f.find("tones")) {
        if (!tones->is_array()) {
            throw InvalidArgument(f.field("tones") + ": expected an array");
        }
        for (std::size_t n = 0; n < tones->size(); ++n) {
            const std::string tp = f.field("tones") + "[" + std::to_string(n) + "]";
            const detail::Fields tf((*tones)[n], tp, {"amplitude", "omega", "frequency_hz", "phase"});
            if (tf.has("omega") == tf.has("frequency_hz")) {
                throw InvalidArgument(tp + ": give exactly one of 'omega' and 'frequency_hz'");
            }
            Tone tone;
            tf.get("amplitude", tone.amplitude);
            tf.get("phase", tone.phase);
            tf.get("omega", tone.omega);
            if (tf.has("frequency_hz")) {
                double hz = 0.0;
                tf.get("frequency_hz", hz);
                tone.omega = 2.0 * std::numbers::pi * hz;
            }
            spec.tones.push_back(tone);
        }
    }
    try {
        spec.validate();
    } catch (const InvalidArgument& e) {
        throw InvalidArgument(path + ": " + e.what());
    }
    return spec;
}

inline SamplingPattern parse_sampling(const json& j, const std::string& path = "sampling") {
    const detail::Fields f(j, path,
                           {"kind", "count", "start", "period", "interval_low", "interval_high", "rate"});
    SamplingPattern p;
    std::string kind = to_string(p.kind);
    f.get("kind", kind);
    p.kind = parse_sampling_kind(kind, f.field("kind"));
    f.get("count", p.count);
    f.get("start", p.start);
    f.get("period", p.period);
    f.get("interval_low", p.interval_low);
    f.get("interval_high", p.interval_high);
    f.get("rate", p.rate);
    try {
        p.validate();
    } catch (const InvalidArgument& e) {
        throw InvalidArgument(path + ": " + e.what());
    }
    return p;
}

inline LmConfig parse_lm(const json& j, const std::string& path = "rfsa.lm") {
    const detail::Fields f(j, path, {"max_steps", "damping_factor", "initial_damping", "min_relative_improvement"});
    LmConfig lm;
    f.get("max_steps", lm.max_steps);
    f.get("damping_factor", lm.damping_factor);
    f.get("initial_damping", lm.initial_damping);
    f.get("min_relative_improvement", lm.min_relative_improvement);
    return lm;
}

inline RfsaConfig parse_rfsa(const json& j, const std::string& path = "rfsa") {
    const detail::Fields f(j, path,
                           {"freq_min", "freq_max", "grid_size", "max_order", "penalty", "evt_alpha", "mode",
                            "exact_fit_tolerance", "guard", "trend_threshold", "lm"});
    RfsaConfig cfg;
    f.get("freq_min", cfg.freq_min);
    f.get("freq_max", cfg.freq_max);
    f.get("grid_size", cfg.grid_size);
    f.get("max_order", cfg.max_order);
    std::string penalty = to_string(cfg.penalty.kind);
    f.get("penalty", penalty);
    cfg.penalty.kind = parse_penalty(penalty, f.field("penalty"));
    f.get("evt_alpha", cfg.penalty.evt_alpha);
    std::string mode = to_string(cfg.mode);
    f.get("mode", mode);
    cfg.mode = parse_mode(mode, f.field("mode"));
    f.get("exact_fit_tolerance", cfg.exact_fit_tolerance);
    f.get("guard", cfg.guard);
    f.get("trend_threshold", cfg.trend_threshold);
    if (const auto* lm = f.find("lm")) {
        cfg.lm = parse_lm(*lm, f.field("lm"));
    }
    try {
        cfg.validate();
    } catch (const InvalidArgument& e) {
        throw InvalidArgument(path + ": " + e.what());
    }
    return cfg;
}

inline ConfigDocument parse_config(const json& j) {
    const detail::Fields f(j, "", {"schema", "seed", "workers", "signal", "sampling", "rfsa", "experiment"});
    const auto* schema = f.find("schema");
    if (!schema) {
        throw InvalidArgument("schema: missing (expected " + std::to_string(config_schema) + ")");
    }
    if (!schema->is_number_integer() || schema->get<int>() != config_schema) {
        throw InvalidArgument("schema: unsupported version " + schema->dump() + " (expected " +
                              std::to_string(config_schema) + ")");
    }
    ConfigDocument doc;
    f.get("seed", doc.seed);
    f.get("workers", doc.workers);
    if (const auto* s = f.find("signal")) {
        doc.signal = parse_signal(*s);
    }
    if (const auto* s = f.find("sampling")) {
        doc.sampling = parse_sampling(*s);
    }
    if (const auto* s = f.find("rfsa")) {
        doc.rfsa = parse_rfsa(*s);
    }
    if (const auto* e = f.find("experiment")) {
        const detail::Fields ef(*e, "experiment", {"snr_db", "reference_amplitude", "trials", "randomize_pattern"});
        if (const auto* snr = ef.find("snr_db")) {
            if (!snr->is_array()) {
                throw InvalidArgument("experiment.snr_db: expected an array");
            }
            for (std::size_t i = 0; i < snr->size(); ++i) {
                doc.snr_db.push_back(
                    detail::number_or_infinity((*snr)[i], "experiment.snr_db[" + std::to_string(i) + "]"));
            }
        }
        ef.get("reference_amplitude", doc.reference_amplitude);
        ef.get("trials", doc.trials);
        ef.get("randomize_pattern", doc.randomize_pattern);
    }
    return doc;
}

inline ConfigDocument read_config(std::istream& in) {
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what(), 0);
    }
    return parse_config(j);
}

inline McExperiment to_experiment(const ConfigDocument& doc) {
    McExperiment exp;
    exp.spec = doc.signal;
    exp.pattern = doc.sampling;
    exp.snr_grid = doc.snr_db;
    exp.reference_amplitude = doc.reference_amplitude;
    exp.trials = doc.trials;
    exp.rfsa = doc.rfsa;
    exp.randomize_pattern = doc.randomize_pattern;
    exp.base_seed = doc.seed;
    exp.workers = doc.workers;
    return exp;
}

inline json to_json(const SignalSpec& spec) {
    json tones = json::array();
    for (const auto& t : spec.tones) {
        tones.push_back({{"amplitude", t.amplitude}, {"omega", t.omega}, {"phase", t.phase}});
    }
    return {{"intercept", spec.intercept},
            {"slope", spec.slope},
            {"noise_sigma", spec.noise_sigma},
            {"tones", tones}};
}

inline json to_json(const SamplingPattern& p) {
    json j = {{"kind", to_string(p.kind)}, {"count", p.count}, {"start", p.start}};
    switch (p.kind) {
    case SamplingKind::uniform:
        j["period"] = p.period;
        break;
    case SamplingKind::jittered:
        j["interval_low"] = p.interval_low;
        j["interval_high"] = p.interval_high;
        break;
    case SamplingKind::poisson:
        j["rate"] = p.rate;
        break;
    }
    return j;
}

inline json to_json(const RfsaConfig& cfg) {
    return {{"freq_min", cfg.freq_min},
            {"freq_max", cfg.freq_max},
            {"grid_size", cfg.grid_size},
            {"max_order", cfg.max_order},
            {"penalty", to_string(cfg.penalty.kind)},
            {"evt_alpha", cfg.penalty.evt_alpha},
            {"mode", to_string(cfg.mode)},
            {"exact_fit_tolerance", cfg.exact_fit_tolerance},
            {"guard", cfg.guard},
            {"trend_threshold", cfg.trend_threshold},
            {"lm",
             {{"max_steps", cfg.lm.max_steps},
              {"damping_factor", cfg.lm.damping_factor},
              {"initial_damping", cfg.lm.initial_damping},
              {"min_relative_improvement", cfg.lm.min_relative_improvement}}}};
}

/// Round-trips through parse_config.
inline json to_json(const ConfigDocument& doc) {
    json snr = json::array();
    for (double s : doc.snr_db) {
        snr.push_back(detail::number_value(s));
    }
    return {{"schema", config_schema},
            {"seed", doc.seed},
            {"workers", doc.workers},
            {"signal", to_json(doc.signal)},
            {"sampling", to_json(doc.sampling)},
            {"rfsa", to_json(doc.rfsa)},
            {"experiment",
             {{"snr_db", snr},
              {"reference_amplitude", doc.reference_amplitude},
              {"trials", doc.trials},
              {"randomize_pattern", doc.randomize_pattern}}}};
}

} // namespace rfsa::io
