// Copyright (c) 2026 the swm-receiver authors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.
//
// Command-line front end: figure-data reproduction, parameter sweeps and the
// acceptance check suite. Every subcommand writes one CSV per dataset plus a
// JSON run manifest into --out.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "swm/check.hpp"
#include "swm/config.hpp"
#include "swm/sweep.hpp"

namespace {

constexpr const char* config_env_var = "SWM_RECEIVER_CONFIG";

struct GlobalArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::string scheme;
    int threads = 1;
    std::uint64_t seed = 1;
    double tolerance_pct = 20.0;
};

swm::Config load(const GlobalArgs& g) {
    std::string path = g.config_path;
    if (path.empty()) {
        if (const char* env = std::getenv(config_env_var)) path = env;
    }
    swm::Config cfg = path.empty() ? swm::Config::paper_defaults()
                                   : swm::load_config(path);
    if (!g.scheme.empty()) {
        if (g.scheme == "swm6") cfg.scheme = swm::Scheme::swm6;
        else if (g.scheme == "eit4") cfg.scheme = swm::Scheme::eit4;
        else throw swm::ConfigError("--scheme must be swm6 or eit4");
    }
    return cfg;
}

void emit(const swm::Dataset& ds, const GlobalArgs& g, const swm::Config& cfg,
          const swm::RunContext& ctx, double wall_s) {
    std::filesystem::create_directories(g.out_dir);
    const auto csv = std::filesystem::path(g.out_dir) / (ds.name + ".csv");
    swm::write_csv(ds, csv);
    swm::write_manifest(g.out_dir, cfg, ctx, {csv.filename().string()}, wall_s);
    std::cout << "wrote " << csv.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"six-wave-mixing Rydberg receiver simulator"};
    app.require_subcommand(1);

    GlobalArgs g;
    app.add_option("--config", g.config_path,
                   "configuration file (default: $" + std::string(config_env_var) +
                       " or built-in paper parameters)");
    app.add_option("--out", g.out_dir, "output directory")->capture_default_str();
    app.add_option("--scheme", g.scheme, "swm6 or eit4 (overrides the config)");
    app.add_option("--threads", g.threads, "sweep worker threads")
        ->capture_default_str();
    app.add_option("--seed", g.seed, "seed for randomized suites")
        ->capture_default_str();
    app.add_option("--tolerance", g.tolerance_pct,
                   "percent tolerance for paper-value checks")
        ->capture_default_str();

    // spectrum
    auto* spectrum = app.add_subcommand(
        "spectrum", "steady-state |rho_r1| versus probe detuning");
    std::string mode = "resonant";
    double span = 15.0;
    int points = 601;
    spectrum->add_option("--mode", mode, "resonant or detuned")
        ->capture_default_str();
    spectrum->add_option("--span", span, "half-span of Delta_P/2pi in MHz")
        ->capture_default_str();
    spectrum->add_option("--points", points, "sample count")->capture_default_str();

    // response
    auto* response =
        app.add_subcommand("response", "normalized |H(w)| baseband response");
    std::vector<std::string> schemes;
    response->add_option("--scheme", schemes, "schemes to plot (repeatable)")
        ->take_all();

    // bandwidth
    auto* bandwidth =
        app.add_subcommand("bandwidth", "f3dB (closed form and numeric) over a sweep");
    std::string sweep_path, sweep_range;
    bandwidth->add_option("--sweep", sweep_path, "dotted parameter path")->required();
    bandwidth->add_option("--range", sweep_range, "start:stop:count[:log]")->required();

    // linearity
    auto* linearity = app.add_subcommand(
        "linearity", "H1/H3 fit, P1dB, IIP3 and the IMD3 curve");

    // nef
    auto* nef = app.add_subcommand("nef", "noise-equivalent field versus frequency");

    // tradeoff
    auto* tradeoff = app.add_subcommand(
        "tradeoff", "bandwidth / |H(0)| / IIP3 / NEF across a drive sweep");
    std::string t_path, t_range;
    tradeoff->add_option("--sweep", t_path, "dotted parameter path (default per scheme)");
    tradeoff->add_option("--range", t_range, "start:stop:count[:log]");

    // check
    auto* check = app.add_subcommand("check", "run the acceptance criteria");

    CLI11_PARSE(app, argc, argv);

    swm::RunContext ctx;
    ctx.threads = g.threads;
    ctx.seed = g.seed;
    ctx.tolerance_pct = g.tolerance_pct;
    for (int i = 0; i < argc; ++i) ctx.command += std::string(argv[i]) + (i + 1 < argc ? " " : "");

    try {
        const swm::Config cfg = load(g);
        const auto t0 = std::chrono::steady_clock::now();
        auto wall = [&] {
            return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        };

        if (*spectrum) {
            if (mode != "resonant" && mode != "detuned")
                throw swm::ConfigError("spectrum: --mode must be resonant or detuned");
            const auto ds = swm::run_spectrum(
                cfg,
                mode == "resonant" ? swm::SpectrumMode::resonant_locked
                                   : swm::SpectrumMode::detuned_tracking,
                span, points);
            emit(ds, g, cfg, ctx, wall());
        } else if (*response) {
            std::vector<swm::Scheme> list;
            if (schemes.empty()) list.push_back(cfg.scheme);
            for (const auto& s : schemes) {
                if (s == "swm6") list.push_back(swm::Scheme::swm6);
                else if (s == "eit4") list.push_back(swm::Scheme::eit4);
                else throw swm::ConfigError("response: unknown scheme '" + s + "'");
            }
            emit(swm::run_response(cfg, list), g, cfg, ctx, wall());
        } else if (*bandwidth) {
            const auto spec = swm::SweepSpec::parse(sweep_path, sweep_range);
            emit(swm::run_bandwidth(cfg, spec, ctx), g, cfg, ctx, wall());
        } else if (*linearity) {
            emit(swm::run_linearity(cfg, ctx), g, cfg, ctx, wall());
        } else if (*nef) {
            emit(swm::run_nef(cfg), g, cfg, ctx, wall());
        } else if (*tradeoff) {
            if (t_path.empty()) {
                t_path = cfg.scheme == swm::Scheme::swm6 ? "fields.A.rabi_over_2pi_mhz"
                                                         : "fields.LO.rabi_over_2pi_mhz";
                if (t_range.empty())
                    t_range = cfg.scheme == swm::Scheme::swm6 ? "1:15:15" : "0.5:10:12";
            }
            if (t_range.empty())
                throw swm::ConfigError("tradeoff: --range required with --sweep");
            const auto spec = swm::SweepSpec::parse(t_path, t_range);
            emit(swm::run_tradeoff(cfg, spec, ctx), g, cfg, ctx, wall());
        } else if (*check) {
            const auto report = swm::check_mode(cfg, ctx);
            for (const auto& item : report.items) std::cout << item.line() << "\n";
            std::cout << (report.all_passed() ? "CHECK PASSED" : "CHECK FAILED")
                      << "\n";
            return report.exit_code();
        }
        return 0;
    } catch (const swm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const swm::DegenerateSteadyStateError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const swm::SingularityError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const swm::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
