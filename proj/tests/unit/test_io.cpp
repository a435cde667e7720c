#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "rfsa/io/csv.hpp"
#include "rfsa/io/json_config.hpp"
#include "rfsa/io/report.hpp"

using namespace rfsa;

namespace {

TimeSeries parse(const std::string& text) {
    std::istringstream in(text);
    return io::read_series_csv(in);
}

std::size_t parse_error_line(const std::string& text) {
    try {
        parse(text);
    } catch (const ParseError& e) {
        return e.line();
    }
    ADD_FAILURE() << "no ParseError for: " << text;
    return 0;
}

io::ConfigDocument config(const std::string& text) {
    std::istringstream in(text);
    return io::read_config(in);
}

} // namespace

TEST(SeriesCsv, ReadsHeaderAndRows) {
    const auto s = parse("t,w\n0,1.5\n\n0.5, -2\r\n1.25,+3e-1\n");
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s.grid()[1], 0.5);
    EXPECT_EQ(s.values()[1], -2.0);
    EXPECT_EQ(s.values()[2], 0.3);
}

TEST(SeriesCsv, ParseErrorsCarryLineNumbers) {
    EXPECT_EQ(parse_error_line("time,value\n0,1\n"), 1u);
    EXPECT_EQ(parse_error_line("t,w\n0,1\n1,abc\n"), 3u);
    EXPECT_EQ(parse_error_line("t,w\n0,1\n\n1,2,3\n"), 4u);
    EXPECT_EQ(parse_error_line("t,w\n0,1\n1,nan\n"), 3u);
    EXPECT_EQ(parse_error_line(""), 0u);
}

TEST(SeriesCsv, NonIncreasingTimesNameTheLine) {
    try {
        parse("t,w\n0,1\n1,2\n1,3\n");
        FAIL();
    } catch (const InvalidArgument& e) {
        EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
    }
}

TEST(SeriesCsv, NeedsTwoRows) {
    EXPECT_THROW(parse("t,w\n0,1\n"), InvalidArgument);
}

TEST(SeriesCsv, WriteThenReadRoundTrips) {
    const TimeSeries s(TimeGrid({0.0, 0.1234567891, 2.5}), {0.1, -1.0 / 3.0, 6.02214076e23});
    std::ostringstream out;
    io::write_series_csv(out, s);
    EXPECT_EQ(out.str().substr(0, 4), "t,w\n");
    EXPECT_NE(out.str().find("0.1234567891,"), std::string::npos);
    EXPECT_NE(out.str().find("2.5000000000,"), std::string::npos);
    const auto back = parse(out.str());
    for (std::size_t k = 0; k < s.size(); ++k) {
        EXPECT_EQ(back.grid()[k], s.grid()[k]);
        EXPECT_EQ(back.values()[k], s.values()[k]);
    }
}

TEST(SeriesCsv, FormatDoubleIsShortestRoundTrip) {
    EXPECT_EQ(io::format_double(0.1), "0.1");
    EXPECT_EQ(io::format_double(1.0), "1");
    EXPECT_EQ(std::stod(io::format_double(1.0 / 3.0)), 1.0 / 3.0);
    EXPECT_EQ(io::format_time(1.0), "1.0000000000");
}

TEST(SeriesCsv, ReconstructionColumns) {
    const TimeSeries s(TimeGrid({0.0, 1.0}), {1.0, 2.0});
    const std::vector<double> fit{0.5, 2.0};
    std::ostringstream out;
    io::write_reconstruction_csv(out, s, fit);
    EXPECT_EQ(out.str(), "t,w,reconstructed,residual\n0.0000000000,1,0.5,0.5\n1.0000000000,2,2,0\n");
    EXPECT_THROW(io::write_reconstruction_csv(out, s, std::vector<double>{1.0}), InvalidArgument);
}

TEST(ConfigJson, DefaultsWhenSectionsAreMissing) {
    const auto doc = config(R"({"schema": 1})");
    EXPECT_EQ(doc.seed, 0u);
    EXPECT_EQ(doc.trials, 100u);
    EXPECT_EQ(doc.rfsa.grid_size, RfsaConfig{}.grid_size);
}

TEST(ConfigJson, SchemaIsRequiredAndChecked) {
    EXPECT_THROW(config(R"({})"), InvalidArgument);
    EXPECT_THROW(config(R"({"schema": 2})"), InvalidArgument);
}

TEST(ConfigJson, UnknownFieldsAreRejectedWithTheirPath) {
    try {
        config(R"({"schema": 1, "rfsa": {"grid": 10}})");
        FAIL();
    } catch (const InvalidArgument& e) {
        EXPECT_NE(std::string(e.what()).find("rfsa.grid"), std::string::npos) << e.what();
    }
    EXPECT_THROW(config(R"({"schema": 1, "extra": 0})"), InvalidArgument);
    EXPECT_THROW(config(R"({"schema": 1, "signal": {"tones": [{"amplitude": 1, "omega": 1, "freq": 2}]}})"),
                 InvalidArgument);
}

TEST(ConfigJson, TypeAndValueErrors) {
    EXPECT_THROW(config(R"({"schema": 1, "rfsa": {"grid_size": "64"}})"), InvalidArgument);
    EXPECT_THROW(config(R"({"schema": 1, "rfsa": {"grid_size": -3}})"), InvalidArgument);
    EXPECT_THROW(config(R"({"schema": 1, "rfsa": {"penalty": "bic"}})"), InvalidArgument);
    EXPECT_THROW(config(R"({"schema": 1, "rfsa": {"max_order": 0}})"), InvalidArgument);
    EXPECT_THROW(config(R"({"schema": 1, "sampling": {"kind": "random"}})"), InvalidArgument);
    EXPECT_THROW(config(R"({"schema": 1, "signal": {"tones": [{"amplitude": 1}]}})"), InvalidArgument);
    EXPECT_THROW(config(R"({"schema": 1, "signal": {"tones": [{"amplitude": 1, "omega": 1, "frequency_hz": 1}]}})"),
                 InvalidArgument);
}

TEST(ConfigJson, MalformedDocumentIsAParseError) {
    EXPECT_THROW(config(R"({"schema": 1,)"), ParseError);
}

TEST(ConfigJson, FrequencyInHertzConvertsToRadians) {
    const auto doc = config(R"({"schema": 1, "signal": {"tones": [{"amplitude": 1, "frequency_hz": 4}]}})");
    EXPECT_NEAR(doc.signal.tones[0].omega, 25.132741228718345, 1e-14);
}

TEST(ConfigJson, InfiniteSnrIsSpelledOut) {
    const auto doc = config(R"({"schema": 1, "experiment": {"snr_db": [10, "inf"]}})");
    ASSERT_EQ(doc.snr_db.size(), 2u);
    EXPECT_EQ(doc.snr_db[1], std::numeric_limits<double>::infinity());
    EXPECT_EQ(io::to_json(doc)["experiment"]["snr_db"][1], "inf");
    EXPECT_THROW(config(R"({"schema": 1, "experiment": {"snr_db": ["loud"]}})"), InvalidArgument);
}

TEST(ConfigJson, DocumentRoundTrips) {
    const auto doc = config(R"({
      "schema": 1, "seed": 99, "workers": 3,
      "signal": {"intercept": 0.5, "slope": 0.006,
                 "tones": [{"amplitude": 1, "omega": 0.069, "phase": 0.2}]},
      "sampling": {"kind": "jittered", "count": 64, "interval_low": 0.5, "interval_high": 1.5},
      "rfsa": {"freq_max": 25.132741228718345, "grid_size": 512, "max_order": 5, "penalty": "map",
               "mode": "nonuniform", "lm": {"max_steps": 20}},
      "experiment": {"snr_db": [15, "inf"], "trials": 7, "randomize_pattern": false}
    })");
    const auto j = io::to_json(doc);
    const auto again = io::parse_config(j);
    EXPECT_EQ(io::to_json(again), j);
    EXPECT_EQ(again.seed, 99u);
    EXPECT_EQ(again.workers, 3u);
    EXPECT_EQ(again.rfsa.lm.max_steps, 20);
    EXPECT_EQ(again.rfsa.mode, ModeSelection::nonuniform);
    EXPECT_FALSE(again.randomize_pattern);
    const auto exp = io::to_experiment(again);
    EXPECT_EQ(exp.base_seed, 99u);
    EXPECT_EQ(exp.trials, 7u);
    EXPECT_EQ(exp.pattern.count, 64u);
}

TEST(ReportJson, CarriesOrdersAndSinusoids) {
    SignalSpec spec;
    spec.tones.push_back({1.0, 0.9, 0.3});
    SamplingPattern p;
    p.count = 32;
    const auto s = generate(spec, sample_times(p), 0);
    RfsaConfig cfg;
    cfg.max_order = 2;
    const auto r = decompose(s, cfg);
    const auto j = io::report_json(r, cfg);
    EXPECT_EQ(j["schema"], 1);
    EXPECT_EQ(j["mode"], "uniform");
    EXPECT_EQ(j["selected_order"], 1);
    EXPECT_EQ(j["orders"].size(), 3u);
    EXPECT_EQ(j["sinusoids"][0]["kind"], "sinusoid");
    EXPECT_NEAR(j["sinusoids"][0]["omega"].get<double>(), 0.9, 1e-6);
    EXPECT_NEAR(j["components"][0]["omega"].get<double>(), 0.9, 1e-6);
    EXPECT_EQ(j["config"], io::to_json(cfg));
}

TEST(McCsv, LongFormatLayout) {
    McReport r;
    r.truths = {{0.5, 1.0, 0.0, false}};
    McRow row;
    row.snr_db = 10;
    row.sigma = 0.25;
    row.trials = 4;
    row.correct = 3;
    row.failed = 0;
    row.order_probability = 0.75;
    row.model_mse = 0.125;
    row.freq_mse = {1e-4};
    row.crb = {2e-4};
    r.rows = {row};
    std::ostringstream out;
    io::write_mc_csv(out, r);
    EXPECT_EQ(out.str(),
              "snr_db,metric,index,value\n"
              "10,sigma,,0.25\n"
              "10,trials,,4\n"
              "10,failed,,0\n"
              "10,correct,,3\n"
              "10,order_probability,,0.75\n"
              "10,model_mse,,0.125\n"
              "10,true_omega,0,0.5\n"
              "10,freq_mse,0,1e-04\n"
              "10,crb,0,2e-04\n");
}
