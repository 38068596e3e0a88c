// Copyright (c) 2026 the swm-receiver authors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#pragma once

#include <cmath>

namespace swm {

/// CODATA 2018 physical constants, SI units.
namespace constants {
inline constexpr double hbar = 1.054571817e-34;       // J s
inline constexpr double h_planck = 6.62607015e-34;    // J s
inline constexpr double eps0 = 8.8541878128e-12;      // F/m
inline constexpr double c_light = 2.99792458e8;       // m/s
inline constexpr double e_charge = 1.602176634e-19;   // C
inline constexpr double k_boltzmann = 1.380649e-23;   // J/K
/// e*a0, converts a dipole moment in Hartree atomic units to C m.
inline constexpr double dipole_au = 8.4783536e-30;
inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;
}  // namespace constants

/// Unit helpers. All angular frequencies inside the library are rad/s;
/// configuration files quote values as "X/2pi in MHz" (or GHz for carriers).
namespace units {

inline constexpr double rad_from_mhz(double f_mhz) {
    return constants::two_pi * 1.0e6 * f_mhz;
}

inline constexpr double mhz_from_rad(double w) {
    return w / (constants::two_pi * 1.0e6);
}

inline constexpr double rad_from_ghz(double f_ghz) {
    return constants::two_pi * 1.0e9 * f_ghz;
}

inline constexpr double hz_from_rad(double w) { return w / constants::two_pi; }

inline constexpr double rad_from_hz(double f) { return constants::two_pi * f; }

/// Amplitude ratio from a gain quoted in dB (20 dB -> 10x).
inline double amplitude_from_db(double db) { return std::pow(10.0, db / 20.0); }

inline constexpr double dipole_si_from_au(double mu_au) {
    return mu_au * constants::dipole_au;
}

}  // namespace units
}  // namespace swm
