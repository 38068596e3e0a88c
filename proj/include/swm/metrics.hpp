// Copyright (c) 2026 the swm-receiver authors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "swm/constants.hpp"
#include "swm/errors.hpp"

namespace swm {

// ---------------------------------------------------------------------------
// Pole / bandwidth analysis of the two-level dressed response.
// ---------------------------------------------------------------------------

enum class DampingRegime { overdamped, critical, underdamped };

inline const char* to_string(DampingRegime r) {
    switch (r) {
        case DampingRegime::overdamped: return "overdamped";
        case DampingRegime::critical: return "critical";
        case DampingRegime::underdamped: return "underdamped";
    }
    return "?";
}

struct PoleAnalysis {
    std::complex<double> lambda_plus;   // rad/s
    std::complex<double> lambda_minus;  // rad/s
    double gamma_plus = 0.0;   // -Re lambda, fast mode
    double gamma_minus = 0.0;  // -Re lambda, slow mode
    DampingRegime regime = DampingRegime::overdamped;
};

/// lambda_pm = -(g51+g61)/2 +- (1/2) sqrt((g51-g61)^2 - |Omega_A|^2), ordered
/// so that gamma_minus <= gamma_plus.
inline PoleAnalysis pole_analysis(double gamma51, double gamma61, double omega_a) {
    if (gamma51 < 0 || gamma61 < 0)
        throw ConfigError("pole_analysis: rates must be nonnegative");
    const double diff = gamma51 - gamma61;
    const double disc = diff * diff - omega_a * omega_a;
    const std::complex<double> root = std::sqrt(std::complex<double>(disc, 0.0));
    PoleAnalysis p;
    const double mean = 0.5 * (gamma51 + gamma61);
    std::complex<double> lp = -mean + 0.5 * root;
    std::complex<double> lm = -mean - 0.5 * root;
    if (-lp.real() > -lm.real()) std::swap(lp, lm);  // lp = slow decay
    p.lambda_minus = lp;   // slow mode: gamma_minus = -Re lambda_minus
    p.lambda_plus = lm;    // fast mode
    p.gamma_minus = -lp.real();
    p.gamma_plus = -lm.real();
    const double scale = std::max({diff * diff, omega_a * omega_a,
                                   std::numeric_limits<double>::min()});
    if (std::abs(disc) <= 1e-12 * scale)
        p.regime = DampingRegime::critical;
    else
        p.regime = disc > 0 ? DampingRegime::overdamped : DampingRegime::underdamped;
    return p;
}

/// Closed-form 3-dB bandwidth in Hz from the product form
/// w^2 = [-(g+^2+g-^2) + sqrt((g+^2+g-^2)^2 + 4 g+^2 g-^2)]/2.
/// Uses only Re(lambda), so it is flagged valid for the overdamped and
/// critical regimes only.
struct ClosedFormBandwidth {
    double f3db_hz = 0.0;
    bool valid_regime = false;
};

inline ClosedFormBandwidth bandwidth_closed_form(const PoleAnalysis& poles) {
    const double gp2 = poles.gamma_plus * poles.gamma_plus;
    const double gm2 = poles.gamma_minus * poles.gamma_minus;
    const double s = gp2 + gm2;
    const double w2 = 0.5 * (-s + std::sqrt(s * s + 4.0 * gp2 * gm2));
    ClosedFormBandwidth out;
    out.f3db_hz = units::hz_from_rad(std::sqrt(std::max(w2, 0.0)));
    out.valid_regime = poles.regime != DampingRegime::underdamped;
    return out;
}

struct NumericBandwidthOptions {
    double scan_floor = units::rad_from_hz(1.0);     // rad/s
    double scan_ceiling = units::rad_from_ghz(1.0);  // rad/s
    double scan_factor = 1.05;
    double relative_tolerance = 1e-6;
};

struct NumericBandwidth {
    double f3db_hz = 0.0;
    bool resonant = false;  // |H| exceeded |H(0)| before the crossing
};

/// First crossing of |H| below |H(0)|/sqrt(2): coarse geometric scan, then
/// bisection. When the response peaks above |H(0)| first, the crossing on the
/// high-frequency side of the peak is reported and flagged as resonant.
inline NumericBandwidth bandwidth_numeric(
    const std::function<double(double)>& magnitude,
    const NumericBandwidthOptions& opts = {}) {
    const double h0 = magnitude(0.0);
    if (!(h0 > 0.0)) throw NumericalError("bandwidth_numeric: |H(0)| must be positive");
    const double target = h0 / std::sqrt(2.0);

    NumericBandwidth out;
    double lo = 0.0;
    double lo_val = h0;
    double hi = 0.0;
    double hi_val = 0.0;
    bool bracketed = false;
    for (double w = opts.scan_floor; w <= opts.scan_ceiling; w *= opts.scan_factor) {
        const double v = magnitude(w);
        if (v > h0 * (1.0 + 1e-12)) {
            out.resonant = true;
            lo = w;  // crossing must sit beyond the running peak
            lo_val = v;
            continue;
        }
        if (v < target && lo_val >= target) {
            hi = w;
            hi_val = v;
            bracketed = true;
            break;
        }
        lo = w;
        lo_val = v;
    }
    if (!bracketed)
        throw NumericalError("bandwidth_numeric: no -3 dB crossing below the scan ceiling");
    (void)hi_val;
    while ((hi - lo) > opts.relative_tolerance * hi) {
        const double mid = 0.5 * (lo + hi);
        if (magnitude(mid) < target)
            hi = mid;
        else
            lo = mid;
    }
    out.f3db_hz = units::hz_from_rad(0.5 * (lo + hi));
    return out;
}

struct BandwidthReport {
    double f3db_closed_hz = 0.0;
    double f3db_numeric_hz = 0.0;
    DampingRegime regime = DampingRegime::overdamped;
    bool closed_form_valid = false;
    bool resonant_response = false;
};

// ---------------------------------------------------------------------------
// Spectrum width.
// ---------------------------------------------------------------------------

struct SpectrumWidth {
    double width_hz = 0.0;
    bool multimodal = false;
};

/// Width between the outermost |rho| = max/sqrt(2) crossings of a sampled
/// spectrum (grid in rad/s), linearly interpolated. Throws when the crossings
/// are not bracketed inside the window.
inline SpectrumWidth spectrum_fwhm(const std::vector<double>& grid,
                                   const std::vector<double>& magnitude) {
    const std::size_t n = grid.size();
    if (n < 3 || magnitude.size() != n)
        throw ConfigError("spectrum_fwhm: need matching grids with >= 3 samples");
    for (std::size_t i = 1; i < n; ++i)
        if (!(grid[i] > grid[i - 1]))
            throw ConfigError("spectrum_fwhm: grid must be strictly increasing");
    const auto it = std::max_element(magnitude.begin(), magnitude.end());
    const double target = *it / std::sqrt(2.0);
    if (magnitude.front() >= target || magnitude.back() >= target)
        throw NumericalError("spectrum_fwhm: crossings not bracketed inside the window");

    auto interp = [&](std::size_t a, std::size_t b) {
        const double t = (target - magnitude[a]) / (magnitude[b] - magnitude[a]);
        return grid[a] + t * (grid[b] - grid[a]);
    };
    int crossing_count = 0;
    double first_up = 0.0, last_down = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        const bool was = magnitude[i - 1] >= target;
        const bool is = magnitude[i] >= target;
        if (was == is) continue;
        ++crossing_count;
        if (!was && is && crossing_count == 1) first_up = interp(i - 1, i);
        if (was && !is) last_down = interp(i - 1, i);
    }
    SpectrumWidth out;
    out.multimodal = crossing_count > 2;  // outermost pair reported regardless
    out.width_hz = units::hz_from_rad(last_down - first_up);
    return out;
}

// ---------------------------------------------------------------------------
// Third-order response extraction and linearity figures.
// ---------------------------------------------------------------------------

struct CubicFit {
    std::complex<double> h1{0.0, 0.0};
    std::complex<double> h3{0.0, 0.0};
    double residual = 0.0;       // max |y - fit| / max |y|
    double amplitude_max = 0.0;  // rad/s, top of the fitted range
};

struct CubicFitOptions {
    double initial_amplitude = units::rad_from_mhz(1.0);
    int sample_count = 8;
    double cubic_fraction_target = 0.08;  // |3/4 H3 A^2 / H1| at the top amplitude
    double cubic_fraction_min = 0.01;
    double cubic_fraction_max = 0.10;
    int max_range_iterations = 8;
    double residual_limit = 0.01;
};

/// Least-squares fit of the odd cubic model y = H1 x + (3/4) H3 x^3 to the
/// odd part of `sampler`, with the amplitude range auto-selected so the cubic
/// term contributes between 1% and 10% of the fundamental at the top of the
/// range. Throws NumericalError when the fit residual exceeds 1% (series not
/// valid over the chosen range).
inline CubicFit extract_h1_h3(
    const std::function<std::complex<double>(double)>& sampler,
    const CubicFitOptions& opts = {}) {
    double amax = opts.initial_amplitude;
    CubicFit fit;
    for (int iter = 0;; ++iter) {
        const int k = opts.sample_count;
        std::vector<double> xs(k);
        std::vector<std::complex<double>> ys(k);
        for (int i = 0; i < k; ++i) {
            xs[i] = amax * static_cast<double>(i + 1) / k;
            ys[i] = 0.5 * (sampler(xs[i]) - sampler(-xs[i]));
        }
        // normal equations for the 2-column real design [x, 0.75 x^3]
        double s11 = 0, s12 = 0, s22 = 0;
        std::complex<double> b1{0, 0}, b2{0, 0};
        for (int i = 0; i < k; ++i) {
            const double c1 = xs[i];
            const double c2 = 0.75 * xs[i] * xs[i] * xs[i];
            s11 += c1 * c1;
            s12 += c1 * c2;
            s22 += c2 * c2;
            b1 += c1 * ys[i];
            b2 += c2 * ys[i];
        }
        const double det = s11 * s22 - s12 * s12;
        if (det <= 0.0) throw NumericalError("extract_h1_h3: degenerate design matrix");
        fit.h1 = (s22 * b1 - s12 * b2) / det;
        fit.h3 = (s11 * b2 - s12 * b1) / det;
        fit.amplitude_max = amax;

        double max_err = 0.0, max_y = 0.0;
        for (int i = 0; i < k; ++i) {
            const std::complex<double> model =
                fit.h1 * xs[i] + 0.75 * fit.h3 * xs[i] * xs[i] * xs[i];
            max_err = std::max(max_err, std::abs(ys[i] - model));
            max_y = std::max(max_y, std::abs(ys[i]));
        }
        fit.residual = max_y > 0 ? max_err / max_y : 0.0;

        if (std::abs(fit.h1) == 0.0)
            throw NumericalError("extract_h1_h3: vanishing linear response");
        const double frac =
            std::abs(0.75 * fit.h3 * amax * amax / fit.h1);
        if (frac >= opts.cubic_fraction_min && frac <= opts.cubic_fraction_max)
            break;
        if (iter >= opts.max_range_iterations) break;
        const double f = frac > 0 ? frac : 1e-4;
        amax *= std::sqrt(opts.cubic_fraction_target / f);
    }
    if (fit.residual > opts.residual_limit)
        throw NumericalError(
            "extract_h1_h3: fit residual above 1%, amplitude range outside the "
            "third-order regime");
    return fit;
}

/// 1-dB compression input level from alpha = Re(H3/H1) < 0.
inline double p1db(double alpha) {
    if (!(alpha < 0.0))
        throw NumericalError("p1db: alpha >= 0, response is non-compressive");
    const double num = (4.0 / 3.0) * (std::pow(10.0, -1.0 / 20.0) - 1.0);
    return std::sqrt(num / alpha);
}

/// Input-referred third-order intercept; infinite when H3 == 0.
inline double iip3(std::complex<double> h1, std::complex<double> h3) {
    if (std::abs(h3) == 0.0) return std::numeric_limits<double>::infinity();
    return std::sqrt((4.0 / 3.0) * std::abs(h1 / h3));
}

/// IMD3 level in dBc at tone amplitude omega_rf.
inline double imd3_dbc(std::complex<double> h1, std::complex<double> h3,
                       double omega_rf) {
    if (std::abs(h1) == 0.0)
        throw NumericalError("imd3_dbc: H1 = 0, ratio undefined");
    return 20.0 * std::log10(std::abs(0.75 * (h3 / h1) * omega_rf * omega_rf));
}

struct LinearityReport {
    std::complex<double> h1{0, 0};
    std::complex<double> h3{0, 0};
    double alpha = 0.0;            // Re(H3/H1), 1/(rad/s)^2
    double omega_p1db = 0.0;       // rad/s; 0 when non-compressive
    double omega_iip3 = 0.0;       // rad/s; inf when H3 = 0
    double fit_residual = 0.0;
    double fit_amplitude_max = 0.0;
};

inline LinearityReport linearity_from_fit(const CubicFit& fit) {
    LinearityReport rep;
    rep.h1 = fit.h1;
    rep.h3 = fit.h3;
    rep.alpha = (fit.h3 / fit.h1).real();
    rep.omega_iip3 = iip3(fit.h1, fit.h3);
    rep.omega_p1db = rep.alpha < 0.0 ? p1db(rep.alpha) : 0.0;
    rep.fit_residual = fit.residual;
    rep.fit_amplitude_max = fit.amplitude_max;
    return rep;
}

// ---------------------------------------------------------------------------
// Noise-equivalent field budget.
// ---------------------------------------------------------------------------

enum class FrontEnd { tia, lna };

/// Default spectral energy factor: Callen-Welton form (hf/2) coth(hf/2kT).
inline double callen_welton_theta(double f_hz, double temperature_k) {
    const double hf = constants::h_planck * f_hz;
    const double x = hf / (2.0 * constants::k_boltzmann * temperature_k);
    return 0.5 * hf / std::tanh(x);
}

struct NefParams {
    double f_rf_hz = 0.0;
    double temperature_k = 300.0;
    double n_atoms = 0.0;
    double t2_s = 0.0;
    double dipole_rf = 0.0;     // C m
    double s_rin_per_hz = 0.0;
    FrontEnd front_end = FrontEnd::lna;
    double noise_factor = 2.0;  // linear F
    double bandwidth_hz = 0.0;
    double g_lna = 1.0;         // linear amplitude gain
    double r_pd = 0.0;          // A/W
    double kappa = 0.0;         // W m^2 / V^2
    double e_probe = 0.0;       // V/m at the detector
    double i_dc = 0.0;          // A
    double p_opt_avg = 0.0;     // W
    std::function<double(double, double)> theta = callen_welton_theta;

    void require_positive(double v, const char* name) const {
        if (!(v > 0.0)) {
            throw ConfigError(std::string("nef_budget: parameter '") + name +
                              "' is missing or not positive");
        }
    }
};

struct NoiseBudget {
    double nef_ex = 0.0;
    double nef_qpn = 0.0;
    double nef_psn = 0.0;
    double nef_rin = 0.0;
    double nef_tn = 0.0;
    double nef_total = 0.0;

    /// Fixed-order quadrature sum so tests can reproduce it bitwise.
    static double quadrature(double a, double b, double c, double d, double e) {
        const double s = ((((a * a) + b * b) + c * c) + d * d) + e * e;
        return std::sqrt(s);
    }
};

/// Input-referred noise budget. `g_opt_mag` is |G_opt(0)| for the flat
/// budget; pass |G_opt(w)| to resolve the three readout-referred components
/// in frequency.
inline NoiseBudget nef_budget(const NefParams& p, double g_opt_mag) {
    p.require_positive(p.f_rf_hz, "f_rf_hz");
    p.require_positive(p.temperature_k, "temperature_k");
    p.require_positive(p.n_atoms, "n_atoms");
    p.require_positive(p.t2_s, "t2_s");
    p.require_positive(p.dipole_rf, "dipole_rf");
    p.require_positive(p.bandwidth_hz, "bandwidth_hz");
    p.require_positive(p.g_lna, "g_lna");
    p.require_positive(p.r_pd, "r_pd");
    p.require_positive(p.kappa, "kappa");
    p.require_positive(p.e_probe, "e_probe");
    p.require_positive(g_opt_mag, "g_opt_mag");
    if (p.s_rin_per_hz < 0.0) throw ConfigError("nef_budget: s_rin_per_hz < 0");
    if (p.i_dc < 0.0) throw ConfigError("nef_budget: i_dc < 0");

    NoiseBudget b;
    b.nef_ex = std::sqrt(16.0 * constants::pi * p.f_rf_hz * p.f_rf_hz /
                         (3.0 * constants::eps0 * std::pow(constants::c_light, 3)) *
                         p.theta(p.f_rf_hz, p.temperature_k));
    b.nef_qpn = constants::hbar /
                (p.dipole_rf * std::sqrt(p.n_atoms) * p.t2_s);
    const double readout = p.kappa * p.e_probe * g_opt_mag;
    b.nef_psn = std::sqrt(2.0 * constants::e_charge * p.i_dc) / (p.r_pd * readout);
    b.nef_rin = p.p_opt_avg * std::sqrt(p.s_rin_per_hz) / readout;
    const double s_tn = (p.front_end == FrontEnd::tia ? 4.0 : p.noise_factor) *
                        constants::k_boltzmann * p.temperature_k * p.bandwidth_hz;
    b.nef_tn = std::sqrt(s_tn) / (p.g_lna * p.r_pd * readout);
    b.nef_total =
        NoiseBudget::quadrature(b.nef_ex, b.nef_qpn, b.nef_psn, b.nef_rin, b.nef_tn);
    return b;
}

}  // namespace swm
