// Copyright (c) 2026 the swm-receiver authors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "swm/atomic_model.hpp"
#include "swm/eit_baseline.hpp"
#include "swm/errors.hpp"
#include "swm/metrics.hpp"
#include "swm/transduction.hpp"

namespace swm {

enum class Scheme { swm6, eit4 };

inline const char* to_string(Scheme s) { return s == Scheme::swm6 ? "swm6" : "eit4"; }

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_number(const std::string& section, const std::string& key,
                           const std::string& value) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != value.size()) {
        throw ConfigError("config: [" + section + "] " + key +
                          " = '" + value + "' is not a number");
    }
    return v;
}

}  // namespace detail

/// Per-field configuration values in the quoting units of the file format.
struct FieldConfig {
    double rabi_over_2pi_mhz = 0.0;
    double detuning_over_2pi_mhz = 0.0;
    double carrier_ghz = 0.0;  // 0 = unset
};

/// Parsed configuration. Values keep the file's quoting units; accessors
/// convert to SI.
struct Config {
    Scheme scheme = Scheme::swm6;
    DephasingModel dephasing = DephasingModel::per_level;

    std::map<std::string, FieldConfig> fields;  // "P","C","LO","RF","A","L"
    std::map<int, double> gamma_over_2pi_mhz;   // j -> gamma_j1 (j = 2..6)
    std::vector<std::pair<std::pair<int, int>, double>> decays_over_2pi_mhz;
    std::map<std::string, double> dipoles_au;   // "mu12".."mu61"
    std::optional<double> delta4_over_2pi_mhz;

    // cloud / beams
    double peak_density_cm3 = 2e10;
    double radius_1e2_mm = 1.85;
    double window_mm = 0.0;  // 0 = default 4x radius
    double probe_waist_um = 25.0;
    double coupling_waist_um = 54.0;
    double aux_waist_um = 45.0;
    double probe_wavelength_nm = 780.0;
    double coupling_wavelength_nm = 482.0;
    double aux_wavelength_nm = 482.0;

    // detection chain
    double n_l = 1.0;
    double a_eff_um2 = 0.0;  // 0 = pi * probe_waist^2
    double r_pd_a_per_w = 0.55;
    double g_lna_db = 20.0;
    double probe_power_uw = 20.0;
    double generated_wavelength_nm = 0.0;  // 0 = probe wavelength

    // NEF
    double temperature_k = 300.0;
    double noise_figure_db = 3.0;
    FrontEnd front_end = FrontEnd::lna;
    double s_rin_per_hz = 1e-15;
    double n_atoms_override = 0.0;
    double t2_s_override = 0.0;
    double rf_dipole_au_override = 0.0;
    double nef_bandwidth_hz_override = 0.0;

    std::string source_text;  // for the run-manifest hash

    static Config paper_defaults();

    // -- SI accessors ------------------------------------------------------

    FieldDrive make_drive(FieldLabel label, const std::string& key) const {
        const auto it = fields.find(key);
        if (it == fields.end())
            throw ConfigError("config: field '" + key + "' missing from [fields]");
        FieldDrive d;
        d.label = label;
        d.rabi = Complex(units::rad_from_mhz(it->second.rabi_over_2pi_mhz), 0.0);
        d.detuning = units::rad_from_mhz(it->second.detuning_over_2pi_mhz);
        d.carrier = it->second.carrier_ghz > 0.0
                        ? units::rad_from_ghz(it->second.carrier_ghz)
                        : 0.0;
        return d;
    }

    double gamma_rad(int j) const {
        const auto it = gamma_over_2pi_mhz.find(j);
        if (it == gamma_over_2pi_mhz.end()) {
            throw ConfigError("config: gamma" + std::to_string(j) +
                              "1_over_2pi_mhz missing from [rates]");
        }
        return units::rad_from_mhz(it->second);
    }

    double dipole_cm(const std::string& name) const {
        const auto it = dipoles_au.find(name);
        if (it == dipoles_au.end())
            throw ConfigError("config: " + name + " missing from [dipoles_au]");
        return units::dipole_si_from_au(it->second);
    }

    std::vector<DecayEntry> decay_table() const {
        std::vector<DecayEntry> out;
        for (const auto& [levels, mhz] : decays_over_2pi_mhz)
            out.push_back({levels.first, levels.second, units::rad_from_mhz(mhz)});
        return out;
    }

    SixLevelSystem six_level() const {
        SixLevelSystem sys;
        sys.probe = make_drive(FieldLabel::probe, "P");
        sys.coupling = make_drive(FieldLabel::coupling, "C");
        sys.local_osc = make_drive(FieldLabel::local_osc, "LO");
        sys.rf = make_drive(FieldLabel::rf, "RF");
        sys.aux = make_drive(FieldLabel::aux, "A");
        sys.generated = make_drive(FieldLabel::generated, "L");
        for (int j = 2; j <= 6; ++j) sys.gamma1[j - 2] = gamma_rad(j);
        sys.decays = decay_table();
        sys.dipole = {dipole_cm("mu12"), dipole_cm("mu23"), dipole_cm("mu34"),
                      dipole_cm("mu45"), dipole_cm("mu56"), dipole_cm("mu61")};
        if (delta4_over_2pi_mhz)
            sys.delta4_override = units::rad_from_mhz(*delta4_over_2pi_mhz);
        sys.dephasing = dephasing;
        sys.validate();
        return sys;
    }

    /// Matched-drive four-level baseline: reuses the SWM values of
    /// Omega_P, Omega_C, Omega_LO and gamma_21, gamma_31, gamma_41.
    FourLevelSystem four_level() const {
        FourLevelSystem sys;
        sys.probe = make_drive(FieldLabel::probe, "P");
        sys.coupling = make_drive(FieldLabel::coupling, "C");
        sys.local_osc = make_drive(FieldLabel::local_osc, "LO");
        sys.gamma1 = {gamma_rad(2), gamma_rad(3), gamma_rad(4)};
        sys.dephasing = dephasing;
        sys.validate();
        return sys;
    }

    ChainSpec chain() const {
        return scheme == Scheme::swm6 ? chain_spec(six_level())
                                      : chain_spec(four_level());
    }

    CloudAndBeams cloud() const {
        CloudAndBeams c;
        c.peak_density_m3 = peak_density_cm3 * 1e6;
        c.radius_m = radius_1e2_mm * 1e-3;
        c.window_m = window_mm * 1e-3;
        c.beams = {{probe_waist_um * 1e-6, probe_wavelength_nm * 1e-9},
                   {coupling_waist_um * 1e-6, coupling_wavelength_nm * 1e-9},
                   {aux_waist_um * 1e-6, aux_wavelength_nm * 1e-9}};
        c.validate();
        return c;
    }

    OpticalChainParams optical_chain() const {
        OpticalChainParams p;
        p.n_l = n_l;
        const double wp = probe_waist_um * 1e-6;
        p.a_eff_m2 = a_eff_um2 > 0.0 ? a_eff_um2 * 1e-12 : constants::pi * wp * wp;
        p.r_pd = r_pd_a_per_w;
        p.g_lna = units::amplitude_from_db(g_lna_db);
        const double lam_l =
            (generated_wavelength_nm > 0.0 ? generated_wavelength_nm : probe_wavelength_nm) *
            1e-9;
        p.omega_l = constants::two_pi * constants::c_light / lam_l;
        const auto lo = fields.find("LO");
        const auto rf = fields.find("RF");
        if (lo != fields.end() && rf != fields.end() && lo->second.carrier_ghz > 0.0 &&
            rf->second.carrier_ghz > 0.0) {
            p.delta_omega = units::rad_from_ghz(lo->second.carrier_ghz -
                                                rf->second.carrier_ghz);
        }
        p.finalize();
        p.e_probe = std::sqrt(2.0 * probe_power_uw * 1e-6 / p.kappa);
        return p;
    }

    double rf_carrier_hz() const {
        const auto it = fields.find("RF");
        if (it == fields.end() || it->second.carrier_ghz <= 0.0)
            throw ConfigError("config: RF carrier_ghz required for the NEF budget");
        return it->second.carrier_ghz * 1e9;
    }

    NefParams nef_params(double i_dc, double p_opt_avg,
                         double default_bandwidth_hz) const {
        NefParams p;
        p.f_rf_hz = rf_carrier_hz();
        p.temperature_k = temperature_k;
        const CloudAndBeams cl = cloud();
        const double wp = probe_waist_um * 1e-6;
        p.n_atoms = n_atoms_override > 0.0
                        ? n_atoms_override
                        : cl.peak_density_m3 * constants::pi * wp * wp * 2.0 * cl.radius_m;
        p.t2_s = t2_s_override > 0.0 ? t2_s_override : 1.0 / gamma_rad(5);
        p.dipole_rf = rf_dipole_au_override > 0.0
                          ? units::dipole_si_from_au(rf_dipole_au_override)
                          : dipole_cm("mu45");
        p.s_rin_per_hz = s_rin_per_hz;
        p.front_end = front_end;
        p.noise_factor = std::pow(10.0, noise_figure_db / 10.0);
        p.bandwidth_hz = nef_bandwidth_hz_override > 0.0 ? nef_bandwidth_hz_override
                                                         : default_bandwidth_hz;
        const OpticalChainParams oc = optical_chain();
        p.g_lna = oc.g_lna;
        p.r_pd = oc.r_pd;
        p.kappa = oc.kappa;
        p.e_probe = oc.e_probe;
        p.i_dc = i_dc;
        p.p_opt_avg = p_opt_avg;
        return p;
    }

    /// FNV-1a hash of the source text, for the run manifest.
    std::uint64_t hash() const {
        std::uint64_t h = 1469598103934665603ull;
        for (unsigned char c : source_text) {
            h ^= c;
            h *= 1099511628211ull;
        }
        return h;
    }
};

// ---------------------------------------------------------------------------
// Parsing.
// ---------------------------------------------------------------------------

namespace detail {

struct RawConfig {
    // section -> ordered (key, value)
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections;
};

inline RawConfig tokenize(const std::string& text) {
    RawConfig raw;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            raw.sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected key = value");
        if (section.empty())
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": key outside of any [section]");
        raw.sections[section].emplace_back(trim(line.substr(0, eq)),
                                           trim(line.substr(eq + 1)));
    }
    return raw;
}

}  // namespace detail

inline Config parse_config(const std::string& text) {
    using detail::parse_number;
    Config cfg = Config::paper_defaults();
    cfg.source_text = text;
    detail::RawConfig raw = detail::tokenize(text);

    const std::set<std::string> known_sections = {
        "system", "fields", "rates", "decays", "dipoles_au",
        "overrides", "cloud", "chain", "nef"};
    for (const auto& [name, entries] : raw.sections) {
        if (!known_sections.count(name))
            throw ConfigError("config: unknown section [" + name + "]");
        (void)entries;
    }

    if (raw.sections.count("decays")) cfg.decays_over_2pi_mhz.clear();

    for (const auto& [section, entries] : raw.sections) {
        for (const auto& [key, value] : entries) {
            if (section == "system") {
                if (key == "scheme") {
                    if (value == "swm6") cfg.scheme = Scheme::swm6;
                    else if (value == "eit4") cfg.scheme = Scheme::eit4;
                    else throw ConfigError("config: [system] scheme must be swm6 or eit4");
                } else if (key == "dephasing_model") {
                    if (value == "per-level") cfg.dephasing = DephasingModel::per_level;
                    else if (value == "printed-pair")
                        cfg.dephasing = DephasingModel::printed_pair;
                    else
                        throw ConfigError(
                            "config: [system] dephasing_model must be per-level or printed-pair");
                } else {
                    throw ConfigError("config: unknown key '" + key + "' in [system]");
                }
            } else if (section == "fields") {
                const auto dot = key.find('.');
                if (dot == std::string::npos)
                    throw ConfigError("config: [fields] keys look like P.rabi_over_2pi_mhz; got '" +
                                      key + "'");
                const std::string field = key.substr(0, dot);
                const std::string attr = key.substr(dot + 1);
                static const std::set<std::string> names = {"P", "C", "LO", "RF", "A", "L"};
                if (!names.count(field))
                    throw ConfigError("config: unknown field '" + field + "' in [fields]");
                FieldConfig& fc = cfg.fields[field];
                const double v = parse_number(section, key, value);
                if (attr == "rabi_over_2pi_mhz") fc.rabi_over_2pi_mhz = v;
                else if (attr == "detuning_over_2pi_mhz") fc.detuning_over_2pi_mhz = v;
                else if (attr == "carrier_ghz") fc.carrier_ghz = v;
                else throw ConfigError("config: unknown key '" + key + "' in [fields]");
            } else if (section == "rates") {
                bool matched = false;
                for (int j = 2; j <= 6; ++j) {
                    if (key == "gamma" + std::to_string(j) + "1_over_2pi_mhz") {
                        cfg.gamma_over_2pi_mhz[j] = parse_number(section, key, value);
                        matched = true;
                        break;
                    }
                }
                if (!matched)
                    throw ConfigError("config: unknown key '" + key + "' in [rates]");
            } else if (section == "decays") {
                const auto arrow = key.find("->");
                if (arrow == std::string::npos)
                    throw ConfigError("config: [decays] keys look like 2->1; got '" + key + "'");
                const int from = static_cast<int>(
                    parse_number(section, key, detail::trim(key.substr(0, arrow))));
                const int to = static_cast<int>(
                    parse_number(section, key, detail::trim(key.substr(arrow + 2))));
                cfg.decays_over_2pi_mhz.push_back(
                    {{from, to}, parse_number(section, key, value)});
            } else if (section == "dipoles_au") {
                static const std::set<std::string> names = {"mu12", "mu23", "mu34",
                                                            "mu45", "mu56", "mu61"};
                if (!names.count(key))
                    throw ConfigError("config: unknown key '" + key + "' in [dipoles_au]");
                cfg.dipoles_au[key] = parse_number(section, key, value);
            } else if (section == "overrides") {
                if (key == "delta4_over_2pi_mhz")
                    cfg.delta4_over_2pi_mhz = parse_number(section, key, value);
                else
                    throw ConfigError("config: unknown key '" + key + "' in [overrides]");
            } else if (section == "cloud") {
                const double v = parse_number(section, key, value);
                if (key == "peak_density_cm3") cfg.peak_density_cm3 = v;
                else if (key == "radius_1e2_mm") cfg.radius_1e2_mm = v;
                else if (key == "window_mm") cfg.window_mm = v;
                else if (key == "probe_waist_um") cfg.probe_waist_um = v;
                else if (key == "coupling_waist_um") cfg.coupling_waist_um = v;
                else if (key == "aux_waist_um") cfg.aux_waist_um = v;
                else if (key == "probe_wavelength_nm") cfg.probe_wavelength_nm = v;
                else if (key == "coupling_wavelength_nm") cfg.coupling_wavelength_nm = v;
                else if (key == "aux_wavelength_nm") cfg.aux_wavelength_nm = v;
                else throw ConfigError("config: unknown key '" + key + "' in [cloud]");
            } else if (section == "chain") {
                const double v = parse_number(section, key, value);
                if (key == "n_l") cfg.n_l = v;
                else if (key == "a_eff_um2") cfg.a_eff_um2 = v;
                else if (key == "r_pd_a_per_w") cfg.r_pd_a_per_w = v;
                else if (key == "g_lna_db") cfg.g_lna_db = v;
                else if (key == "probe_power_uw") cfg.probe_power_uw = v;
                else if (key == "generated_wavelength_nm") cfg.generated_wavelength_nm = v;
                else throw ConfigError("config: unknown key '" + key + "' in [chain]");
            } else if (section == "nef") {
                if (key == "front_end") {
                    if (value == "lna") cfg.front_end = FrontEnd::lna;
                    else if (value == "tia") cfg.front_end = FrontEnd::tia;
                    else throw ConfigError("config: [nef] front_end must be lna or tia");
                    continue;
                }
                const double v = parse_number(section, key, value);
                if (key == "temperature_k") cfg.temperature_k = v;
                else if (key == "noise_figure_db") cfg.noise_figure_db = v;
                else if (key == "s_rin_per_hz") cfg.s_rin_per_hz = v;
                else if (key == "n_atoms") cfg.n_atoms_override = v;
                else if (key == "t2_s") cfg.t2_s_override = v;
                else if (key == "rf_dipole_au") cfg.rf_dipole_au_override = v;
                else if (key == "bandwidth_hz") cfg.nef_bandwidth_hz_override = v;
                else throw ConfigError("config: unknown key '" + key + "' in [nef]");
            }
        }
    }
    return cfg;
}

inline Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config(os.str());
}

inline Config Config::paper_defaults() {
    Config cfg;
    cfg.fields["P"] = {1.14, 0.0, 384349.88};
    cfg.fields["C"] = {9.0, 0.0, 621990.0};
    cfg.fields["A"] = {6.2, 0.0, 621990.0};
    cfg.fields["LO"] = {1.4, 0.0, 84.18};
    cfg.fields["RF"] = {1.0, 0.0, 83.72};
    // closes the loop: w_L = w_P + w_C - w_A + w_LO - w_RF
    cfg.fields["L"] = {0.0, 0.0, 384349.88 + 621990.0 - 621990.0 + 84.18 - 83.72};
    cfg.gamma_over_2pi_mhz = {{2, 6.1}, {3, 0.05}, {4, 0.08}, {5, 0.129}, {6, 6.1}};
    cfg.decays_over_2pi_mhz = {{{2, 1}, 6.065}, {{6, 1}, 6.065}, {{3, 1}, 0.010},
                               {{4, 1}, 0.010}, {{5, 1}, 0.010}};
    cfg.dipoles_au = {{"mu12", 2.99},  {"mu23", 0.00914}, {"mu34", 211.0},
                      {"mu45", 387.0}, {"mu56", 0.0318},  {"mu61", 1.22}};
    return cfg;
}

// ---------------------------------------------------------------------------
// Dotted-path parameter overrides for sweeps.
// ---------------------------------------------------------------------------

/// Sets one parameter by dotted path, e.g. "fields.A.rabi_over_2pi_mhz" or
/// "rates.gamma51_over_2pi_mhz". Throws ConfigError for unresolvable paths.
inline void set_parameter(Config& cfg, const std::string& path, double value) {
    std::vector<std::string> parts;
    std::string tmp;
    std::istringstream in(path);
    while (std::getline(in, tmp, '.')) parts.push_back(tmp);
    auto fail = [&]() -> void {
        throw ConfigError("sweep: parameter path '" + path + "' is not resolvable");
    };
    if (parts.size() == 3 && parts[0] == "fields") {
        auto it = cfg.fields.find(parts[1]);
        if (it == cfg.fields.end()) fail();
        if (parts[2] == "rabi_over_2pi_mhz") it->second.rabi_over_2pi_mhz = value;
        else if (parts[2] == "detuning_over_2pi_mhz")
            it->second.detuning_over_2pi_mhz = value;
        else if (parts[2] == "carrier_ghz") it->second.carrier_ghz = value;
        else fail();
        return;
    }
    if (parts.size() == 2 && parts[0] == "rates") {
        for (int j = 2; j <= 6; ++j) {
            if (parts[1] == "gamma" + std::to_string(j) + "1_over_2pi_mhz") {
                cfg.gamma_over_2pi_mhz[j] = value;
                return;
            }
        }
        fail();
    }
    if (parts.size() == 2 && parts[0] == "cloud") {
        if (parts[1] == "peak_density_cm3") cfg.peak_density_cm3 = value;
        else if (parts[1] == "radius_1e2_mm") cfg.radius_1e2_mm = value;
        else if (parts[1] == "window_mm") cfg.window_mm = value;
        else if (parts[1] == "probe_waist_um") cfg.probe_waist_um = value;
        else if (parts[1] == "coupling_waist_um") cfg.coupling_waist_um = value;
        else if (parts[1] == "aux_waist_um") cfg.aux_waist_um = value;
        else fail();
        return;
    }
    if (parts.size() == 2 && parts[0] == "chain") {
        if (parts[1] == "n_l") cfg.n_l = value;
        else if (parts[1] == "a_eff_um2") cfg.a_eff_um2 = value;
        else if (parts[1] == "r_pd_a_per_w") cfg.r_pd_a_per_w = value;
        else if (parts[1] == "g_lna_db") cfg.g_lna_db = value;
        else if (parts[1] == "probe_power_uw") cfg.probe_power_uw = value;
        else fail();
        return;
    }
    if (parts.size() == 2 && parts[0] == "nef") {
        if (parts[1] == "temperature_k") cfg.temperature_k = value;
        else if (parts[1] == "noise_figure_db") cfg.noise_figure_db = value;
        else if (parts[1] == "s_rin_per_hz") cfg.s_rin_per_hz = value;
        else fail();
        return;
    }
    fail();
}

}  // namespace swm
