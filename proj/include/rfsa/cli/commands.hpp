#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rfsa/benchmark.hpp"
#include "rfsa/decompose.hpp"
#include "rfsa/errors.hpp"
#include "rfsa/io/csv.hpp"
#include "rfsa/io/json_config.hpp"
#include "rfsa/io/report.hpp"
#include "rfsa/signal_gen.hpp"

namespace rfsa::cli {

/// Command-line values that override fields of the config file.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
    std::vector<std::string> snr; ///< dB values, "inf" allowed
    std::optional<std::size_t> trials;
    std::optional<std::size_t> grid_size;
    std::optional<std::size_t> max_order;
    std::optional<std::string> penalty;
    std::optional<double> evt_alpha;
    std::optional<double> freq_min;
    std::optional<double> freq_max;
    std::optional<int> lm_steps;
    std::optional<std::string> mode;
};

struct Options {
    std::string input;
    std::string output;
    std::string config;
    Overrides overrides;
};

/// Exit codes.
inline constexpr int exit_ok = 0;
inline constexpr int exit_error = 1;
inline constexpr int exit_failed_trials = 2;

inline double parse_snr(const std::string& s) {
    if (s == "inf" || s == "+inf") {
        return std::numeric_limits<double>::infinity();
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) {
        throw InvalidArgument("--snr: cannot parse '" + s + "' as dB");
    }
    return v;
}

inline void apply_overrides(io::ConfigDocument& doc, const Overrides& o) {
    if (o.seed) {
        doc.seed = *o.seed;
    }
    if (o.workers) {
        doc.workers = *o.workers;
    }
    if (!o.snr.empty()) {
        doc.snr_db.clear();
        for (const auto& s : o.snr) {
            doc.snr_db.push_back(parse_snr(s));
        }
    }
    if (o.trials) {
        doc.trials = *o.trials;
    }
    if (o.grid_size) {
        doc.rfsa.grid_size = *o.grid_size;
    }
    if (o.max_order) {
        doc.rfsa.max_order = *o.max_order;
    }
    if (o.penalty) {
        doc.rfsa.penalty.kind = io::parse_penalty(*o.penalty, "--penalty");
    }
    if (o.evt_alpha) {
        doc.rfsa.penalty.evt_alpha = *o.evt_alpha;
    }
    if (o.freq_min) {
        doc.rfsa.freq_min = *o.freq_min;
    }
    if (o.freq_max) {
        doc.rfsa.freq_max = *o.freq_max;
    }
    if (o.lm_steps) {
        doc.rfsa.lm.max_steps = *o.lm_steps;
    }
    if (o.mode) {
        doc.rfsa.mode = io::parse_mode(*o.mode, "--mode");
    }
    doc.rfsa.validate();
}

inline io::ConfigDocument load_config(const Options& opt) {
    io::ConfigDocument doc;
    if (!opt.config.empty()) {
        std::ifstream in(opt.config);
        if (!in) {
            throw InvalidArgument("cannot open config '" + opt.config + "'");
        }
        try {
            doc = io::read_config(in);
        } catch (const ParseError& e) {
            throw ParseError(opt.config + ": " + e.what(), e.line());
        } catch (const InvalidArgument& e) {
            throw InvalidArgument(opt.config + ": " + e.what());
        }
    }
    apply_overrides(doc, opt.overrides);
    return doc;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InvalidArgument("cannot write '" + path.string() + "'");
    }
    return out;
}

/// Decomposes the CSV at --input. With --output DIR, writes DIR/report.json and
/// DIR/reconstruction.csv; without it, prints the JSON report to `out`.
inline int cmd_decompose(const Options& opt, std::ostream& out, std::ostream& err) {
    if (opt.input.empty()) {
        throw InvalidArgument("decompose: --input is required");
    }
    const auto doc = load_config(opt);
    std::ifstream in(opt.input);
    if (!in) {
        throw InvalidArgument("cannot open input '" + opt.input + "'");
    }
    TimeSeries series;
    try {
        series = io::read_series_csv(in);
    } catch (const ParseError& e) {
        throw ParseError(opt.input + ": " + e.what(), e.line());
    }
    if (series.size() < 3) {
        throw InvalidArgument("decompose: need at least 3 rows, found " + std::to_string(series.size()));
    }
    const auto report = decompose(series, doc.rfsa);
    const auto json = io::report_json(report, doc.rfsa);
    if (opt.output.empty()) {
        out << json.dump(2) << '\n';
    } else {
        const std::filesystem::path dir(opt.output);
        open_output(dir / "report.json") << json.dump(2) << '\n';
        auto csv = open_output(dir / "reconstruction.csv");
        io::write_reconstruction_csv(csv, series, reconstruct(report.model, series.grid(), doc.rfsa.guard));
    }
    err << "order " << report.model.selected_order << ", residual sse " << io::format_double(report.residual_sse)
        << '\n';
    return exit_ok;
}

/// Sidecar path for a generated CSV: "signal.csv" → "signal.spec.json".
inline std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
    auto p = csv;
    p.replace_extension(".spec.json");
    return p;
}

/// Writes the signal described by the config's "signal" and "sampling" sections
/// to --output as "t,w" CSV, plus a sidecar JSON echoing the resolved config and seeds.
inline int cmd_generate(const Options& opt, std::ostream& /*out*/, std::ostream& err) {
    if (opt.output.empty()) {
        throw InvalidArgument("generate: --output is required");
    }
    const auto doc = load_config(opt);
    SamplingPattern pattern = doc.sampling;
    pattern.seed = derive_seed(doc.seed, detail::pattern_stream, 0);
    const std::uint64_t noise_seed = derive_seed(doc.seed, detail::noise_stream, 0);
    SamplingStats stats;
    const auto grid = sample_times(pattern, &stats);
    const auto series = generate(doc.signal, grid, noise_seed);

    const std::filesystem::path path(opt.output);
    auto csv = open_output(path);
    io::write_series_csv(csv, series);
    io::json side = {{"config", io::to_json(doc)},
                     {"pattern_seed", pattern.seed},
                     {"noise_seed", noise_seed},
                     {"regenerated_intervals", stats.regenerated_intervals}};
    open_output(sidecar_path(path)) << side.dump(2) << '\n';
    err << "wrote " << series.size() << " samples to " << path.string() << '\n';
    return exit_ok;
}

/// Runs the Monte-Carlo experiment of the config and writes DIR/report.csv and
/// DIR/trials.jsonl. Returns exit_failed_trials if any SNR row lost more than
/// half of its trials to errors.
inline int cmd_bench(const Options& opt, std::ostream& /*out*/, std::ostream& err) {
    if (opt.output.empty()) {
        throw InvalidArgument("bench: --output is required");
    }
    const auto doc = load_config(opt);
    const auto exp = io::to_experiment(doc);
    const auto report = run_mc(exp);

    const std::filesystem::path dir(opt.output);
    auto csv = open_output(dir / "report.csv");
    io::write_mc_csv(csv, report);
    auto log = open_output(dir / "trials.jsonl");
    io::write_trial_log(log, report, exp);

    int code = exit_ok;
    for (const auto& row : report.rows) {
        std::ostringstream line;
        line << "snr " << std::setw(6) << row.snr_db << " dB  p(order) " << std::fixed << std::setprecision(3)
             << row.order_probability << "  failed " << row.failed << '/' << row.trials << std::defaultfloat
             << std::setprecision(4) << "  runtime mean " << row.mean_runtime_seconds << " s, max "
             << row.max_runtime_seconds << " s";
        for (std::size_t j = 0; j < row.freq_mse.size(); ++j) {
            line << "  mse[" << j << "] " << row.freq_mse[j] << " (crb " << row.crb[j] << ')';
        }
        err << line.str() << '\n';
        if (2 * row.failed > row.trials) {
            code = exit_failed_trials;
        }
    }
    return code;
}

} // namespace rfsa::cli
