// Copyright (c) 2026 the swm-receiver authors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "swm/constants.hpp"
#include "swm/errors.hpp"

namespace swm {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

enum class FieldLabel { probe, coupling, local_osc, rf, aux, generated };

inline const char* to_string(FieldLabel l) {
    switch (l) {
        case FieldLabel::probe: return "P";
        case FieldLabel::coupling: return "C";
        case FieldLabel::local_osc: return "LO";
        case FieldLabel::rf: return "RF";
        case FieldLabel::aux: return "A";
        case FieldLabel::generated: return "L";
    }
    return "?";
}

/// One driving field of the mixing loop. Angular quantities in rad/s.
struct FieldDrive {
    FieldLabel label{FieldLabel::probe};
    Complex rabi{0.0, 0.0};   // Rabi frequency (complex amplitude)
    double detuning = 0.0;    // single-photon detuning
    double carrier = 0.0;     // optical/RF carrier; 0 means unset
    std::optional<Eigen::Vector3d> wave_vector;  // rad/m
};

/// Population decay channel |from> -> |to>, levels 1-based, from > to.
struct DecayEntry {
    int from = 0;
    int to = 0;
    double rate = 0.0;  // rad/s
};

/// How pure dephasing enters the dissipator. `per_level` attaches one
/// diagonal operator |j><j| per level, calibrated so that the total
/// decoherence of rho_j1 equals the configured gamma_j1 exactly.
/// `printed_pair` uses (|1><1| - |j><j|) pair operators with rate
/// (1/2)[gamma_j1 - (Gamma_1+Gamma_j)/2]; those cross-dephase every other
/// coherence, so the realized gamma_j1 exceed the configured values
/// whenever more than one channel is active. per_level is the default and
/// the only model consistent with the closed-form response.
enum class DephasingModel { per_level, printed_pair };

struct DissipatorChannel {
    enum class Kind { population_decay, pure_dephasing };
    Kind kind = Kind::population_decay;
    Matrix op;          // n x n
    double rate = 0.0;  // rad/s
};

/// Generic driven ladder 1-2-...-n with chain couplings and ground-state
/// coherence decoherence rates. Both receiver schemes reduce to this.
struct ChainSpec {
    int levels = 0;
    Vector coupling;                 // (n-1) complex Rabi couplings, link k = (k+1,k+2)
    Eigen::VectorXd level_detuning;  // n entries, [0] == 0
    Eigen::VectorXd gamma1;          // n entries, [0] == 0, gamma_j1 for j>=2
    std::vector<DecayEntry> decays;
    DephasingModel dephasing = DephasingModel::per_level;
    int rf_link = 0;        // 0-based chain link carrying the RF signal
    int lo_link = 0;        // first mm-wave link (locked in resonant sweeps)
    int readout_level = 0;  // 1-based level of the readout coherence rho_{r,1}
    bool rf_co_driven = false;    // RF rides on a biased link (EIT)
    bool generated_level = false; // top level belongs to a generated field

    void validate() const {
        if (levels < 2) throw ConfigError("ChainSpec: needs at least two levels");
        if (coupling.size() != levels - 1)
            throw ConfigError("ChainSpec: coupling count != levels-1");
        for (const auto& d : decays) {
            if (d.from <= d.to || d.from > levels || d.to < 1)
                throw ConfigError("ChainSpec: decay must go from a higher to a lower level");
            if (d.rate < 0) throw ConfigError("ChainSpec: negative decay rate");
        }
        for (int j = 1; j < levels; ++j)
            if (gamma1[j] < 0) throw ConfigError("ChainSpec: negative gamma_j1");
    }

    /// Total population decay rate out of each level (1-based index - 1).
    Eigen::VectorXd total_decay() const {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(levels);
        for (const auto& d : decays) g[d.from - 1] += d.rate;
        return g;
    }
};

/// Six-level SWM receiver configuration. Drives are indexed by their role in
/// the loop 1 -P- 2 -C- 3 -LO- 4 -RF- 5 -A- 6 -L- 1.
struct SixLevelSystem {
    FieldDrive probe{FieldLabel::probe};
    FieldDrive coupling{FieldLabel::coupling};
    FieldDrive local_osc{FieldLabel::local_osc};
    FieldDrive rf{FieldLabel::rf};
    FieldDrive aux{FieldLabel::aux};
    FieldDrive generated{FieldLabel::generated};

    std::array<double, 5> gamma1{};   // gamma_21 .. gamma_61, rad/s
    std::vector<DecayEntry> decays;   // empty -> default_decay_table()
    std::array<double, 6> dipole{};   // mu12, mu23, mu34, mu45, mu56, mu61 in C m
    std::optional<double> delta4_override;  // rad/s
    DephasingModel dephasing = DephasingModel::per_level;

    const FieldDrive& drive(FieldLabel l) const {
        switch (l) {
            case FieldLabel::probe: return probe;
            case FieldLabel::coupling: return coupling;
            case FieldLabel::local_osc: return local_osc;
            case FieldLabel::rf: return rf;
            case FieldLabel::aux: return aux;
            case FieldLabel::generated: return generated;
        }
        throw ConfigError("unknown field label");
    }

    std::array<const FieldDrive*, 6> all_drives() const {
        return {&probe, &coupling, &local_osc, &rf, &aux, &generated};
    }

    void validate() const {
        for (const auto* d : all_drives())
            if (d->carrier < 0) throw ConfigError("carrier must be positive when set");
        for (double g : gamma1)
            if (g < 0) throw ConfigError("gamma_j1 rates must be nonnegative");
        for (const auto& d : decays) {
            if (d.from <= d.to || d.from > 6 || d.to < 1)
                throw ConfigError("decay entries must satisfy 6 >= from > to >= 1");
            if (d.rate < 0) throw ConfigError("decay rates must be nonnegative");
        }
        for (double mu : dipole)
            if (!(mu > 0)) throw ConfigError("loop-transition dipole moments must be positive");
    }
};

/// Natural 5P3/2 linewidth of 87Rb and the slow effective Rydberg decay used
/// when the configuration does not specify a decay table.
inline constexpr double default_p_state_decay = 2.0 * constants::pi * 6.065e6;
inline constexpr double default_rydberg_decay = 2.0 * constants::pi * 0.010e6;

/// Intermediate states |2>,|6> decay to ground at their natural rate; the
/// Rydberg levels |3>,|4>,|5> get slow effective decays to |1>.
inline std::vector<DecayEntry> default_decay_table() {
    return {{2, 1, default_p_state_decay},
            {6, 1, default_p_state_decay},
            {3, 1, default_rydberg_decay},
            {4, 1, default_rydberg_decay},
            {5, 1, default_rydberg_decay}};
}

struct LoopReport {
    double frequency_residual = 0.0;  // rad/s
    std::optional<Eigen::Vector3d> wave_vector_residual;  // rad/m
    double tolerance = 0.0;
    bool closed = false;
};

/// Checks closure of the mixing loop: w_L = w_P + w_C - w_A + w_LO - w_RF and
/// the matching wave-vector relation when wave vectors are configured.
inline LoopReport validate_loop(const SixLevelSystem& sys,
                                double tolerance = units::rad_from_hz(1.0)) {
    for (const auto* d : sys.all_drives()) {
        if (d->carrier <= 0.0) {
            std::ostringstream os;
            os << "validate_loop: drive " << to_string(d->label) << " has no carrier";
            throw ConfigError(os.str());
        }
    }
    LoopReport rep;
    rep.tolerance = tolerance;
    rep.frequency_residual = sys.probe.carrier + sys.coupling.carrier -
                             sys.aux.carrier + sys.local_osc.carrier -
                             sys.rf.carrier - sys.generated.carrier;
    bool have_k = true;
    for (const auto* d : sys.all_drives()) have_k = have_k && d->wave_vector.has_value();
    if (have_k) {
        rep.wave_vector_residual = *sys.probe.wave_vector + *sys.coupling.wave_vector -
                                   *sys.aux.wave_vector + *sys.local_osc.wave_vector -
                                   *sys.rf.wave_vector - *sys.generated.wave_vector;
    }
    rep.closed = std::abs(rep.frequency_residual) < tolerance;
    return rep;
}

/// Level detunings Delta_1..Delta_6. Delta_5 follows the sign printed with
/// the coherence chain (-Delta_LO + Delta_RF); Delta_4 is not specified there
/// and defaults to the ladder accumulation Delta_P+Delta_C+Delta_LO.
inline std::array<double, 6> derived_detunings(const SixLevelSystem& sys) {
    const double dP = sys.probe.detuning;
    const double dC = sys.coupling.detuning;
    const double dLO = sys.local_osc.detuning;
    const double dRF = sys.rf.detuning;
    std::array<double, 6> d{};
    d[0] = 0.0;
    d[1] = dP;
    d[2] = dP + dC;
    d[3] = sys.delta4_override ? *sys.delta4_override : dP + dC + dLO;
    d[4] = dP + dC - dLO + dRF;
    d[5] = sys.generated.detuning;
    return d;
}

inline ChainSpec chain_spec(const SixLevelSystem& sys) {
    sys.validate();
    ChainSpec c;
    c.levels = 6;
    c.coupling.resize(5);
    c.coupling << sys.probe.rabi, sys.coupling.rabi, sys.local_osc.rabi,
        sys.rf.rabi, sys.aux.rabi;
    auto d = derived_detunings(sys);
    c.level_detuning = Eigen::Map<Eigen::VectorXd>(d.data(), 6);
    c.gamma1 = Eigen::VectorXd::Zero(6);
    for (int j = 0; j < 5; ++j) c.gamma1[j + 1] = sys.gamma1[j];
    c.decays = sys.decays.empty() ? default_decay_table() : sys.decays;
    c.dephasing = sys.dephasing;
    c.rf_link = 3;        // link 4<->5
    c.lo_link = 2;        // link 3<->4
    c.readout_level = 6;  // rho_61
    c.rf_co_driven = false;
    c.generated_level = true;
    c.validate();
    return c;
}

/// H/hbar for the driven ladder: -(1/2) M with M_{j,j+1} = Omega of the link,
/// M_jj = 2 Delta_j. The RF link carries the (4,5) entry; the printed
/// Omega_LO(t) at that position is treated as a typo for Omega_RF(t).
inline Matrix build_hamiltonian(const ChainSpec& chain) {
    const int n = chain.levels;
    Matrix m = Matrix::Zero(n, n);
    for (int k = 0; k < n - 1; ++k) {
        m(k, k + 1) = chain.coupling[k];
        m(k + 1, k) = std::conj(chain.coupling[k]);
    }
    for (int j = 0; j < n; ++j) m(j, j) = 2.0 * chain.level_detuning[j];
    return -0.5 * m;
}

inline Matrix build_hamiltonian(const SixLevelSystem& sys) {
    return build_hamiltonian(chain_spec(sys));
}

/// Lindblad channel list: one population-decay channel per table entry and
/// the pure-dephasing channels (see DephasingModel). Channels with zero rate
/// are omitted; negative dephasing rates are clamped to zero and reported
/// through `warnings` when given.
inline std::vector<DissipatorChannel> build_dissipators(
    const ChainSpec& chain, std::vector<std::string>* warnings = nullptr) {
    chain.validate();
    const int n = chain.levels;
    std::vector<DissipatorChannel> out;
    for (const auto& d : chain.decays) {
        if (d.rate == 0.0) continue;
        DissipatorChannel ch;
        ch.kind = DissipatorChannel::Kind::population_decay;
        ch.rate = d.rate;
        ch.op = Matrix::Zero(n, n);
        ch.op(d.to - 1, d.from - 1) = 1.0;  // |to><from|
        out.push_back(std::move(ch));
    }
    const Eigen::VectorXd gtot = chain.total_decay();
    for (int j = 1; j < n; ++j) {
        const double pure = chain.gamma1[j] - 0.5 * (gtot[0] + gtot[j]);
        double rate;
        if (chain.dephasing == DephasingModel::per_level) {
            rate = 2.0 * pure;  // |j><j| damps rho_j1 at rate/2
        } else {
            rate = 0.5 * (chain.gamma1[j] - 0.5 * (gtot[0] + gtot[j]));
        }
        if (rate < 0.0) {
            if (warnings) {
                std::ostringstream os;
                os << "dephasing for level " << (j + 1)
                   << " is negative (" << rate
                   << " rad/s) under the configured decay table; clamped to 0";
                warnings->push_back(os.str());
            }
            rate = 0.0;
        }
        if (rate == 0.0) continue;
        DissipatorChannel ch;
        ch.kind = DissipatorChannel::Kind::pure_dephasing;
        ch.rate = rate;
        ch.op = Matrix::Zero(n, n);
        if (chain.dephasing == DephasingModel::per_level) {
            ch.op(j, j) = 1.0;
        } else {
            ch.op(0, 0) = 1.0;
            ch.op(j, j) = -1.0;
        }
        out.push_back(std::move(ch));
    }
    return out;
}

inline std::vector<DissipatorChannel> build_dissipators(
    const SixLevelSystem& sys, std::vector<std::string>* warnings = nullptr) {
    return build_dissipators(chain_spec(sys), warnings);
}

}  // namespace swm
