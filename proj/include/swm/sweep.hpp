// Copyright (c) 2026 the swm-receiver authors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "swm/config.hpp"
#include "swm/receiver.hpp"
#include "swm/transduction.hpp"
#include "swm/version.hpp"

namespace swm {

// ---------------------------------------------------------------------------
// Sweep specification and datasets.
// ---------------------------------------------------------------------------

struct SweepSpec {
    std::string path;     // dotted config path
    double start = 0.0;
    double stop = 0.0;
    int count = 0;
    bool log_spacing = false;

    /// Range syntax: "start:stop:count" or "start:stop:count:log".
    static SweepSpec parse(const std::string& path, const std::string& range) {
        SweepSpec s;
        s.path = path;
        std::vector<std::string> parts;
        std::string tmp;
        std::istringstream in(range);
        while (std::getline(in, tmp, ':')) parts.push_back(tmp);
        if (parts.size() < 3 || parts.size() > 4)
            throw ConfigError("sweep: range must be start:stop:count[:log]");
        s.start = detail::parse_number("sweep", path, parts[0]);
        s.stop = detail::parse_number("sweep", path, parts[1]);
        s.count = static_cast<int>(detail::parse_number("sweep", path, parts[2]));
        if (parts.size() == 4) {
            if (parts[3] != "log" && parts[3] != "linear")
                throw ConfigError("sweep: spacing must be 'linear' or 'log'");
            s.log_spacing = parts[3] == "log";
        }
        s.validate();
        return s;
    }

    void validate() const {
        if (count < 2) throw ConfigError("sweep: count must be >= 2");
        if (!(start < stop)) throw ConfigError("sweep: start must be < stop");
        if (log_spacing && !(start > 0))
            throw ConfigError("sweep: log spacing needs start > 0");
    }

    std::vector<double> values() const {
        std::vector<double> v(count);
        for (int i = 0; i < count; ++i) {
            const double t = static_cast<double>(i) / (count - 1);
            v[i] = log_spacing ? start * std::pow(stop / start, t)
                               : start + (stop - start) * t;
        }
        return v;
    }
};

struct Dataset {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::pair<std::string, std::string>> metadata;

    void meta(const std::string& k, const std::string& v) { metadata.emplace_back(k, v); }
    void meta(const std::string& k, double v) { metadata.emplace_back(k, format(v)); }

    static std::string format(double v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.10g", v);
        return buf;
    }
    static std::string na(const std::string& reason) { return "NA(" + reason + ")"; }
};

inline constexpr const char* csv_schema_version = "1";

inline void write_csv(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << "# dataset: " << ds.name << "\n";
    out << "# schema_version: " << csv_schema_version << "\n";
    for (const auto& [k, v] : ds.metadata) out << "# " << k << ": " << v << "\n";
    for (std::size_t i = 0; i < ds.columns.size(); ++i)
        out << ds.columns[i] << (i + 1 < ds.columns.size() ? "," : "\n");
    for (const auto& row : ds.rows)
        for (std::size_t i = 0; i < row.size(); ++i)
            out << row[i] << (i + 1 < row.size() ? "," : "\n");
}

struct RunContext {
    int threads = 1;
    std::uint64_t seed = 1;
    double tolerance_pct = 20.0;
    std::string command;
};

/// Index-ordered parallel map; results land by index, so row order does not
/// depend on the thread count.
template <typename Fn>
inline void parallel_for(int count, int threads, Fn&& fn) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline void write_manifest(const std::filesystem::path& out_dir, const Config& cfg,
                           const RunContext& ctx,
                           const std::vector<std::string>& outputs,
                           double wall_seconds) {
    nlohmann::json j;
    j["tool"] = "swm-receiver";
    j["version"] = version_string;
    j["schema_version"] = csv_schema_version;
    j["command"] = ctx.command;
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(cfg.hash()));
    j["config_hash_fnv1a64"] = hash;
    j["scheme"] = to_string(cfg.scheme);
    j["seed"] = ctx.seed;
    j["threads"] = ctx.threads;
    j["wall_time_s"] = wall_seconds;
    j["outputs"] = outputs;
    std::ofstream out(out_dir / "run_manifest.json");
    out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Figure-dataset runners.
// ---------------------------------------------------------------------------

inline Dataset run_spectrum(const Config& cfg, SpectrumMode mode,
                            double half_span_mhz = 15.0, int count = 601) {
    Dataset ds;
    ds.name = "spectrum";
    const auto res =
        sweep_spectrum(cfg.chain(), mode, units::rad_from_mhz(half_span_mhz), count);
    const double peak = *std::max_element(res.magnitude.begin(), res.magnitude.end());
    ds.meta("scheme", to_string(cfg.scheme));
    ds.meta("mode", to_string(mode));
    ds.meta("fwhm_over_2pi_mhz", res.width.width_hz / 1e6);
    ds.meta("multimodal", res.width.multimodal ? "true" : "false");
    ds.columns = {"probe_detuning_over_2pi_mhz", "magnitude", "normalized"};
    for (std::size_t i = 0; i < res.probe_detuning.size(); ++i) {
        ds.rows.push_back({Dataset::format(units::mhz_from_rad(res.probe_detuning[i])),
                           Dataset::format(res.magnitude[i]),
                           Dataset::format(res.magnitude[i] / peak)});
    }
    return ds;
}

inline Dataset run_response(const Config& cfg, const std::vector<Scheme>& schemes,
                            double fmin_mhz = 0.01, double fmax_mhz = 100.0,
                            int count = 241) {
    Dataset ds;
    ds.name = "response";
    ds.columns = {"f_over_2pi_mhz"};
    std::vector<std::vector<double>> mags;
    for (Scheme s : schemes) {
        Config c = cfg;
        c.scheme = s;
        DressedResponse resp(c.chain());
        std::vector<double> m(count);
        for (int i = 0; i < count; ++i) {
            const double t = static_cast<double>(i) / (count - 1);
            const double f = fmin_mhz * std::pow(fmax_mhz / fmin_mhz, t);
            m[i] = resp.magnitude(units::rad_from_mhz(f));
        }
        const double h0 = resp.magnitude(0.0);
        const auto bw =
            bandwidth_numeric([&](double w) { return resp.magnitude(w); });
        ds.meta(std::string("h0_") + to_string(s), h0);
        ds.meta(std::string("f3db_numeric_mhz_") + to_string(s), bw.f3db_hz / 1e6);
        ds.columns.push_back(std::string("normalized_") + to_string(s));
        for (auto& v : m) v /= h0;
        mags.push_back(std::move(m));
    }
    for (int i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / (count - 1);
        const double f = fmin_mhz * std::pow(fmax_mhz / fmin_mhz, t);
        std::vector<std::string> row{Dataset::format(f)};
        for (const auto& m : mags) row.push_back(Dataset::format(m[i]));
        ds.rows.push_back(std::move(row));
    }
    return ds;
}

inline Dataset run_bandwidth(const Config& cfg, const SweepSpec& sweep,
                             const RunContext& ctx) {
    Dataset ds;
    ds.name = "bandwidth";
    ds.meta("scheme", to_string(cfg.scheme));
    ds.meta("swept_parameter", sweep.path);
    ds.columns = {sweep.path, "f3db_closed_over_2pi_mhz", "f3db_numeric_over_2pi_mhz",
                  "h0", "regime", "closed_form_valid", "resonant_response"};
    const auto values = sweep.values();
    std::vector<std::vector<std::string>> rows(values.size());
    parallel_for(static_cast<int>(values.size()), ctx.threads, [&](int i) {
        Config c = cfg;
        set_parameter(c, sweep.path, values[i]);
        std::vector<std::string> row{Dataset::format(values[i])};
        try {
            const ChainSpec chain = c.chain();
            DressedResponse resp(chain);
            const double h0 = resp.magnitude(0.0);
            if (!(h0 > 0.0)) throw NumericalError("zero transduction");
            const auto rep = measure_bandwidth(
                chain, [&](double w) { return resp.magnitude(w); });
            row.push_back(Dataset::format(rep.f3db_closed_hz / 1e6));
            row.push_back(Dataset::format(rep.f3db_numeric_hz / 1e6));
            row.push_back(Dataset::format(h0));
            row.push_back(to_string(rep.regime));
            row.push_back(rep.closed_form_valid ? "true" : "false");
            row.push_back(rep.resonant_response ? "true" : "false");
        } catch (const NumericalError& e) {
            const std::string reason =
                std::string(e.what()).find("H(0)") != std::string::npos ||
                        std::string(e.what()).find("zero transduction") != std::string::npos
                    ? "zero transduction"
                    : e.what();
            while (row.size() < ds.columns.size()) row.push_back(Dataset::na(reason));
        }
        rows[i] = std::move(row);
    });
    ds.rows = std::move(rows);
    return ds;
}

inline Dataset run_linearity(const Config& cfg, const RunContext& ctx,
                             double tone_min_mhz = 0.02, double tone_max_mhz = 4.0,
                             int count = 33) {
    (void)ctx;
    Dataset ds;
    ds.name = "linearity";
    ds.meta("scheme", to_string(cfg.scheme));
    const ChainSpec chain = cfg.chain();
    const LinearityReport rep = measure_linearity(chain);
    ds.meta("h1_abs", std::abs(rep.h1));
    ds.meta("h3_abs", std::abs(rep.h3));
    ds.meta("alpha_per_rad2_s2", rep.alpha);
    ds.meta("omega_p1db_over_2pi_mhz", units::mhz_from_rad(rep.omega_p1db));
    ds.meta("omega_iip3_over_2pi_mhz", units::mhz_from_rad(rep.omega_iip3));
    ds.meta("fit_residual", rep.fit_residual);
    ds.meta("fit_amplitude_max_over_2pi_mhz", units::mhz_from_rad(rep.fit_amplitude_max));

    const Complex bias =
        chain.rf_co_driven ? chain.coupling[chain.rf_link] : Complex{0.0, 0.0};
    ds.columns = {"omega_rf_over_2pi_mhz", "fundamental_measured",
                  "third_order_component", "fundamental_model", "imd3_dbc"};
    // log-log slope accumulators over the fitted range
    double sx = 0, sy1 = 0, sy3 = 0, sxx = 0, sxy1 = 0, sxy3 = 0;
    int ns = 0;
    for (int i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / (count - 1);
        const double f = tone_min_mhz * std::pow(tone_max_mhz / tone_min_mhz, t);
        const double a = units::rad_from_mhz(f);
        const Complex odd = 0.5 * (steady_readout_at_drive(chain, bias, a) -
                                   steady_readout_at_drive(chain, bias, -a));
        const Complex cubic = odd - rep.h1 * a;
        const double model = std::abs(rep.h1 * a + 0.75 * rep.h3 * a * a * a);
        ds.rows.push_back({Dataset::format(f), Dataset::format(std::abs(odd)),
                           Dataset::format(std::abs(cubic)), Dataset::format(model),
                           Dataset::format(imd3_dbc(rep.h1, rep.h3, a))});
        if (a <= rep.fit_amplitude_max && std::abs(cubic) > 0) {
            const double lx = std::log10(a);
            sx += lx;
            sxx += lx * lx;
            sy1 += std::log10(std::abs(odd));
            sxy1 += lx * std::log10(std::abs(odd));
            sy3 += std::log10(std::abs(cubic));
            sxy3 += lx * std::log10(std::abs(cubic));
            ++ns;
        }
    }
    if (ns >= 3) {
        const double det = ns * sxx - sx * sx;
        ds.meta("fundamental_loglog_slope", (ns * sxy1 - sx * sy1) / det);
        ds.meta("imd3_loglog_slope", (ns * sxy3 - sx * sy3) / det);
    }
    return ds;
}

/// Transduction figures for the NEF budget at the configured operating point.
struct NefOperatingPoint {
    double g0 = 0.0;        // |G_opt(0)|
    double i_dc = 0.0;      // A
    double p_opt = 0.0;     // W
    double f3db_hz = 0.0;   // default noise bandwidth
    double l_eff_m = 0.0;
};

inline NefOperatingPoint nef_operating_point(const Config& cfg) {
    if (cfg.scheme != Scheme::swm6)
        throw ConfigError("nef: the noise budget applies to the swm6 scheme");
    NefOperatingPoint op;
    const SixLevelSystem sys = cfg.six_level();
    const CloudAndBeams cl = cfg.cloud();
    const OpticalChainParams oc = cfg.optical_chain();
    op.l_eff_m = effective_length(cl).meters;
    const Complex g = g_opt(sys, cl, oc, 0.0, op.l_eff_m);
    op.g0 = std::abs(g);
    const auto fields = loop_fields(sys);
    const Complex e_l = g * fields.e_rf;
    const auto pd = photodetect(oc.e_probe, e_l, oc);
    op.i_dc = pd.i_dc;
    op.p_opt = pd.i_dc / oc.r_pd;
    op.f3db_hz =
        bandwidth_numeric(two_pole_magnitude(chain_spec(sys))).f3db_hz;
    return op;
}

inline Dataset run_nef(const Config& cfg, double fmin_mhz = 0.01,
                       double fmax_mhz = 30.0, int count = 121) {
    Dataset ds;
    ds.name = "nef";
    const SixLevelSystem sys = cfg.six_level();
    const CloudAndBeams cl = cfg.cloud();
    const OpticalChainParams oc = cfg.optical_chain();
    const NefOperatingPoint op = nef_operating_point(cfg);
    const NefParams params = cfg.nef_params(op.i_dc, op.p_opt, op.f3db_hz);
    ds.meta("f3db_default_bandwidth_mhz", op.f3db_hz / 1e6);
    ds.meta("g_opt_dc", op.g0);
    ds.meta("i_dc_a", op.i_dc);
    ds.meta("n_atoms", params.n_atoms);
    ds.meta("t2_s", params.t2_s);
    ds.columns = {"f_over_2pi_mhz", "nef_ex", "nef_qpn", "nef_psn",
                  "nef_rin", "nef_tn", "nef_total"};
    for (int i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / (count - 1);
        const double f = fmin_mhz * std::pow(fmax_mhz / fmin_mhz, t);
        const double gw =
            std::abs(g_opt(sys, cl, oc, units::rad_from_mhz(f), op.l_eff_m));
        const NoiseBudget b = nef_budget(params, gw);
        ds.rows.push_back({Dataset::format(f), Dataset::format(b.nef_ex),
                           Dataset::format(b.nef_qpn), Dataset::format(b.nef_psn),
                           Dataset::format(b.nef_rin), Dataset::format(b.nef_tn),
                           Dataset::format(b.nef_total)});
    }
    return ds;
}

inline Dataset run_tradeoff(const Config& cfg, const SweepSpec& sweep,
                            const RunContext& ctx) {
    Dataset ds;
    ds.name = "tradeoff";
    ds.meta("scheme", to_string(cfg.scheme));
    ds.meta("swept_parameter", sweep.path);
    ds.columns = {sweep.path,      "f3db_numeric_over_2pi_mhz",
                  "h0",            "omega_iip3_over_2pi_mhz",
                  "omega_p1db_over_2pi_mhz", "nef_total_at_dc"};
    const auto values = sweep.values();
    std::vector<std::vector<std::string>> rows(values.size());
    parallel_for(static_cast<int>(values.size()), ctx.threads, [&](int i) {
        Config c = cfg;
        set_parameter(c, sweep.path, values[i]);
        std::vector<std::string> row{Dataset::format(values[i])};
        try {
            const ChainSpec chain = c.chain();
            DressedResponse resp(chain);
            const double h0 = resp.magnitude(0.0);
            const auto bw =
                bandwidth_numeric([&](double w) { return resp.magnitude(w); });
            const LinearityReport lin = measure_linearity(chain);
            row.push_back(Dataset::format(bw.f3db_hz / 1e6));
            row.push_back(Dataset::format(h0));
            row.push_back(Dataset::format(units::mhz_from_rad(lin.omega_iip3)));
            row.push_back(Dataset::format(units::mhz_from_rad(lin.omega_p1db)));
            if (c.scheme == Scheme::swm6) {
                const NefOperatingPoint op = nef_operating_point(c);
                const NefParams params = c.nef_params(op.i_dc, op.p_opt, op.f3db_hz);
                row.push_back(Dataset::format(nef_budget(params, op.g0).nef_total));
            } else {
                row.push_back(Dataset::na("nef applies to swm6 only"));
            }
        } catch (const NumericalError& e) {
            while (row.size() < ds.columns.size()) row.push_back(Dataset::na(e.what()));
        }
        rows[i] = std::move(row);
    });
    ds.rows = std::move(rows);
    return ds;
}

}  // namespace swm
