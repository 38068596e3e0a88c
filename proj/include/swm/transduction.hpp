// Copyright (c) 2026 the swm-receiver authors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "swm/atomic_model.hpp"
#include "swm/errors.hpp"
#include "swm/master_equation.hpp"
#include "swm/metrics.hpp"

namespace swm {

/// One focused beam along the cloud axis: on-axis field falls off as
/// 1/sqrt(1+(z/zR)^2) with zR = pi w0^2 / lambda. Beams without a waist
/// (e.g. the mm-wave LO) are treated as flat.
struct Beam {
    double waist_m = 0.0;       // 1/e^2 radius; 0 = flat
    double wavelength_m = 0.0;

    double rayleigh_range() const {
        return waist_m > 0.0 ? constants::pi * waist_m * waist_m / wavelength_m : 0.0;
    }
    double relative_field(double z) const {
        if (waist_m <= 0.0) return 1.0;
        const double zr = rayleigh_range();
        return 1.0 / std::sqrt(1.0 + (z / zr) * (z / zr));
    }
};

enum class AxialProfile { gaussian, uniform };

struct CloudAndBeams {
    double peak_density_m3 = 0.0;   // N0
    double radius_m = 0.0;          // 1/e^2 cloud radius
    AxialProfile profile = AxialProfile::gaussian;
    double window_m = 0.0;          // half-width of the axial integration window
    std::vector<Beam> beams;        // overlapping driving beams (P, C, A, ...)

    void validate() const {
        if (!(peak_density_m3 > 0.0)) throw ConfigError("cloud: peak density must be > 0");
        if (!(radius_m > 0.0)) throw ConfigError("cloud: radius must be > 0");
        for (const auto& b : beams)
            if (b.waist_m > 0.0 && !(b.wavelength_m > 0.0))
                throw ConfigError("cloud: focused beams need a wavelength");
    }

    double window() const { return window_m > 0.0 ? window_m : 4.0 * radius_m; }

    double relative_density(double z) const {
        if (profile == AxialProfile::uniform)
            return std::abs(z) <= window() ? 1.0 : 0.0;
        return std::exp(-2.0 * z * z / (radius_m * radius_m));
    }
};

struct EffectiveLength {
    double meters = 0.0;
    bool window_warning = false;  // integrand not decayed below 1e-6 at the edges
};

/// L_eff = Int (N(z)/N0) prod E_X(z) dz / prod E_X(0), adaptive quadrature to
/// relative 1e-8.
inline EffectiveLength effective_length(const CloudAndBeams& cloud) {
    cloud.validate();
    const double w = cloud.window();
    auto integrand = [&](double z) {
        double v = cloud.relative_density(z);
        for (const auto& b : cloud.beams) v *= b.relative_field(z);
        return v;
    };
    EffectiveLength out;
    if (cloud.profile != AxialProfile::uniform) {
        const double edge = std::max(integrand(-w), integrand(w));
        out.window_warning = edge > 1e-6 * integrand(0.0);
    }
    double error = 0.0;
    out.meters = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        integrand, -w, w, 12, 1e-8, &error);
    return out;
}

/// Detection-chain constants. kappa = n_L eps0 c A_eff is derived on
/// construction; a provided kappa is verified against its definition.
struct OpticalChainParams {
    double n_l = 1.0;
    double a_eff_m2 = 0.0;
    double r_pd = 0.0;          // A/W
    double g_lna = 1.0;         // linear amplitude gain
    double omega_l = 0.0;       // generated-field angular frequency, rad/s
    double delta_omega = 0.0;   // optical beat frequency, rad/s
    double e_probe = 0.0;       // probe field at the detector, V/m
    double kappa = 0.0;         // W m^2/V^2; 0 = derive

    void finalize() {
        if (!(n_l > 0) || !(a_eff_m2 > 0) || !(r_pd > 0) || !(g_lna > 0) || !(omega_l > 0))
            throw ConfigError("optical chain: n_l, a_eff, r_pd, g_lna, omega_l must be positive");
        const double derived = n_l * constants::eps0 * constants::c_light * a_eff_m2;
        if (kappa == 0.0) {
            kappa = derived;
        } else if (std::abs(kappa - derived) > 1e-12 * derived) {
            throw ConfigError("optical chain: kappa inconsistent with n_L eps0 c A_eff");
        }
    }
};

/// Flat (pole-free) part of the fifth-order susceptibility:
/// (i/2)^5 N/(eps0 hbar^5) prod(mu) / (D2 D3 D4), units (m/V)^4 (rad/s)^2.
inline Complex chi_eff5_flat(const SixLevelSystem& sys, double density_m3) {
    const auto delta = derived_detunings(sys);
    const Complex d2 = complex_detuning(sys.gamma1[0], delta[1], 0.0);
    const Complex d3 = complex_detuning(sys.gamma1[1], delta[2], 0.0);
    const Complex d4 = complex_detuning(sys.gamma1[2], delta[3], 0.0);
    if (std::abs(d2 * d3 * d4) == 0.0)
        throw SingularityError("chi_eff5: vanishing low-chain detuning product");
    double mu_product = 1.0;
    for (double mu : sys.dipole) mu_product *= mu;
    const Complex j_half_5 = std::pow(0.5 * imag_unit, 5);
    return j_half_5 * density_m3 /
           (constants::eps0 * std::pow(constants::hbar, 5)) * mu_product /
           (d2 * d3 * d4);
}

/// Effective fifth-order susceptibility at analysis frequency w, (m/V)^4.
inline Complex chi_eff5(const SixLevelSystem& sys, double omega, double density_m3) {
    const auto delta = derived_detunings(sys);
    const Complex d5 = complex_detuning(sys.gamma1[3], delta[4], omega);
    const Complex d6 = complex_detuning(sys.gamma1[4], delta[5], omega);
    const Complex pole = d5 * d6 + 0.25 * std::norm(sys.aux.rabi);
    if (std::abs(pole) == 0.0)
        throw SingularityError("chi_eff5: vanishing two-pole denominator");
    return chi_eff5_flat(sys, density_m3) / pole;
}

/// Driving-field amplitudes at the cloud center from the configured Rabi
/// frequencies, E_X = hbar Omega_X / mu_X.
struct LoopFields {
    Complex e_probe, e_coupling, e_lo, e_aux, e_rf;
};

inline LoopFields loop_fields(const SixLevelSystem& sys) {
    LoopFields f;
    f.e_probe = constants::hbar * sys.probe.rabi / sys.dipole[0];
    f.e_coupling = constants::hbar * sys.coupling.rabi / sys.dipole[1];
    f.e_lo = constants::hbar * sys.local_osc.rabi / sys.dipole[2];
    f.e_rf = constants::hbar * sys.rf.rabi / sys.dipole[3];
    f.e_aux = constants::hbar * sys.aux.rabi / sys.dipole[4];
    return f;
}

/// RF-to-optical transfer function G_opt(w) = E_L(w)/E_RF(w), dimensionless.
inline Complex g_opt(const SixLevelSystem& sys, const CloudAndBeams& cloud,
                     const OpticalChainParams& chain, double omega,
                     std::optional<double> l_eff_m = std::nullopt) {
    const double leff = l_eff_m ? *l_eff_m : effective_length(cloud).meters;
    const auto f = loop_fields(sys);
    return imag_unit * chain.omega_l * leff / (2.0 * chain.n_l * constants::c_light) *
           chi_eff5(sys, omega, cloud.peak_density_m3) * f.e_probe * f.e_coupling *
           f.e_lo * std::conj(f.e_aux);
}

/// Two-pole impulse response of the transduction chain, 1/s units. The poles
/// are the roots of (s + gamma51 + i D51)(s + gamma61 + i D61) + |Omega_A|^2/4,
/// i.e. the dressed poles; at Omega_A = 0 they reduce to the printed pair.
inline Complex impulse_response(const SixLevelSystem& sys, const CloudAndBeams& cloud,
                                const OpticalChainParams& chain, double t,
                                std::optional<double> l_eff_m = std::nullopt) {
    if (t < 0.0) return {0.0, 0.0};
    const auto delta = derived_detunings(sys);
    const Complex c5{sys.gamma1[3], delta[4]};
    const Complex c6{sys.gamma1[4], delta[5]};
    const Complex disc = (c5 - c6) * (c5 - c6) - std::norm(sys.aux.rabi);
    const Complex root = std::sqrt(disc);
    const Complex s_plus = -0.5 * (c5 + c6) + 0.5 * root;
    const Complex s_minus = -0.5 * (c5 + c6) - 0.5 * root;

    const double leff = l_eff_m ? *l_eff_m : effective_length(cloud).meters;
    const auto f = loop_fields(sys);
    const Complex prefactor =
        imag_unit * chain.omega_l * leff / (2.0 * chain.n_l * constants::c_light) *
        chi_eff5_flat(sys, cloud.peak_density_m3) * f.e_probe * f.e_coupling *
        f.e_lo * std::conj(f.e_aux);

    const Complex mean = 0.5 * (s_plus + s_minus);
    const Complex half_gap = 0.5 * (s_plus - s_minus);
    const Complex base = std::exp(mean * t);
    Complex kernel;
    if (std::abs(half_gap) * t < 1e-6) {
        const Complex x = half_gap * t;
        kernel = base * t * (1.0 + x * x / 6.0);  // sinh series, equal-pole limit
    } else {
        kernel = base * std::sinh(half_gap * t) / half_gap;
    }
    return prefactor * kernel;
}

struct Photocurrent {
    double i_dc = 0.0;            // A
    Complex i_ac{0.0, 0.0};       // complex beat amplitude, A
    bool weak_field_warning = false;  // |E_L|/|E_P| above 0.1
};

/// Heterodyne detection of the generated field against the probe.
inline Photocurrent photodetect(double e_probe, Complex e_generated,
                                const OpticalChainParams& chain) {
    Photocurrent out;
    out.weak_field_warning = std::abs(e_generated) > 0.1 * std::abs(e_probe);
    out.i_dc = 0.5 * chain.kappa * chain.r_pd *
               (e_probe * e_probe + std::norm(e_generated));
    out.i_ac = chain.r_pd * chain.kappa * e_probe * std::conj(e_generated);
    return out;
}

/// Receiver output voltage y(w) = G_LNA R_pd kappa E_P G_opt(w) E_RF(w), plus
/// an externally supplied noise spectrum when the hook is set.
inline Complex baseband_output(
    const SixLevelSystem& sys, const CloudAndBeams& cloud,
    const OpticalChainParams& chain, double omega, Complex e_rf,
    const std::function<Complex(double)>& noise_hook = {},
    std::optional<double> l_eff_m = std::nullopt) {
    Complex y = chain.g_lna * chain.r_pd * chain.kappa * chain.e_probe *
                g_opt(sys, cloud, chain, omega, l_eff_m) * e_rf;
    if (noise_hook) y += noise_hook(omega);
    return y;
}

}  // namespace swm
