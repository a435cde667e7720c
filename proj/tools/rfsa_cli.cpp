// rfsa: decompose time series into sparse sinusoids, generate synthetic
// signals, and run Monte-Carlo benchmarks.

#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "rfsa/cli/commands.hpp"

namespace {

void add_common(CLI::App& cmd, rfsa::cli::Options& opt) {
    auto& o = opt.overrides;
    cmd.add_option("--config", opt.config, "JSON config file (schema 1)");
    cmd.add_option("--seed", o.seed, "base seed");
    cmd.add_option("--grid-size", o.grid_size, "number of trial frequencies J");
    cmd.add_option("--max-order", o.max_order, "largest model order Mmax");
    cmd.add_option("--penalty", o.penalty, "order-selection penalty")->check(CLI::IsMember({"map", "evt"}));
    cmd.add_option("--evt-alpha", o.evt_alpha, "EVT confidence level");
    cmd.add_option("--freq-min", o.freq_min, "lowest trial frequency, rad/s");
    cmd.add_option("--freq-max", o.freq_max, "highest trial frequency, rad/s");
    cmd.add_option("--lm-steps", o.lm_steps, "maximum accepted LM steps");
    cmd.add_option("--mode", o.mode, "sampling mode")->check(CLI::IsMember({"auto", "uniform", "nonuniform"}));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse sinusoid decomposition of uniformly and nonuniformly sampled signals"};
    app.require_subcommand(1);

    rfsa::cli::Options opt;
    auto& o = opt.overrides;

    auto* decompose = app.add_subcommand("decompose", "decompose a t,w CSV into sinusoids");
    add_common(*decompose, opt);
    decompose->add_option("--input", opt.input, "input CSV with header t,w")->required();
    decompose->add_option("--output", opt.output, "output directory (report.json, reconstruction.csv)");

    auto* generate = app.add_subcommand("generate", "write a synthetic signal as t,w CSV");
    add_common(*generate, opt);
    generate->add_option("--output", opt.output, "output CSV path")->required();

    auto* bench = app.add_subcommand("bench", "run a Monte-Carlo experiment");
    add_common(*bench, opt);
    bench->add_option("--output", opt.output, "output directory (report.csv, trials.jsonl)")->required();
    bench->add_option("--workers", o.workers, "worker threads");
    bench->add_option("--snr", o.snr, "SNR values in dB (\"inf\" for noiseless)");
    bench->add_option("--trials", o.trials, "trials per SNR");

    CLI11_PARSE(app, argc, argv);

    try {
        if (decompose->parsed()) {
            return rfsa::cli::cmd_decompose(opt, std::cout, std::cerr);
        }
        if (generate->parsed()) {
            return rfsa::cli::cmd_generate(opt, std::cout, std::cerr);
        }
        return rfsa::cli::cmd_bench(opt, std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return rfsa::cli::exit_error;
    }
}
