// Copyright (c) 2026 the swm-receiver authors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#pragma once

#include <array>
#include <vector>

#include "swm/atomic_model.hpp"
#include "swm/master_equation.hpp"
#include "swm/metrics.hpp"

namespace swm {

/// Four-level superheterodyne EIT baseline: ladder 1 -P- 2 -C- 3 -(LO+RF)- 4
/// with the RF co-driving the top transition and readout on rho_41 (rho_21
/// probe-transmission readout available as an alternative).
struct FourLevelSystem {
    FieldDrive probe{FieldLabel::probe};
    FieldDrive coupling{FieldLabel::coupling};
    FieldDrive local_osc{FieldLabel::local_osc};

    std::array<double, 3> gamma1{};  // gamma_21, gamma_31, gamma_41, rad/s
    std::vector<DecayEntry> decays;  // empty -> default table below
    DephasingModel dephasing = DephasingModel::per_level;
    int readout_level = 4;

    void validate() const {
        for (double g : gamma1)
            if (g < 0) throw ConfigError("gamma_j1 rates must be nonnegative");
        if (readout_level != 4 && readout_level != 2)
            throw ConfigError("EIT readout level must be 4 (default) or 2");
    }
};

inline std::vector<DecayEntry> default_eit_decay_table() {
    return {{2, 1, default_p_state_decay},
            {3, 1, default_rydberg_decay},
            {4, 1, default_rydberg_decay}};
}

inline ChainSpec chain_spec(const FourLevelSystem& sys) {
    sys.validate();
    ChainSpec c;
    c.levels = 4;
    c.coupling.resize(3);
    c.coupling << sys.probe.rabi, sys.coupling.rabi, sys.local_osc.rabi;
    const double dP = sys.probe.detuning;
    const double dC = sys.coupling.detuning;
    const double dLO = sys.local_osc.detuning;
    c.level_detuning = Eigen::VectorXd::Zero(4);
    c.level_detuning << 0.0, dP, dP + dC, dP + dC + dLO;
    c.gamma1 = Eigen::VectorXd::Zero(4);
    for (int j = 0; j < 3; ++j) c.gamma1[j + 1] = sys.gamma1[j];
    c.decays = sys.decays.empty() ? default_eit_decay_table() : sys.decays;
    c.dephasing = sys.dephasing;
    c.rf_link = 2;  // RF rides on the LO link
    c.lo_link = 2;
    c.readout_level = sys.readout_level;
    c.rf_co_driven = true;
    c.generated_level = false;
    c.validate();
    return c;
}

/// rho_41(w)/Omega_RF from the master equation linearized around the
/// LO-dressed steady state; the same dressed-response solver the SWM scheme
/// uses, instantiated on the four-level chain.
inline Complex eit_transfer(const FourLevelSystem& sys, double omega) {
    return dressed_transfer(chain_spec(sys), omega);
}

}  // namespace swm
