// Copyright (c) 2026 the swm-receiver authors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <cmath>
#include <complex>
#include <functional>
#include <sstream>
#include <vector>

#include "swm/atomic_model.hpp"
#include "swm/errors.hpp"

namespace swm {

inline constexpr Complex imag_unit{0.0, 1.0};

/// Generator of the master equation acting on column-stacked density
/// matrices: vec(d rho/dt) = L vec(rho).
struct Liouvillian {
    Matrix m;   // (n*n) x (n*n)
    int levels = 0;
};

inline Liouvillian build_liouvillian(const Matrix& hamiltonian,
                                     const std::vector<DissipatorChannel>& channels) {
    const int n = static_cast<int>(hamiltonian.rows());
    if (hamiltonian.cols() != n) throw ConfigError("Hamiltonian must be square");
    const double herm = (hamiltonian - hamiltonian.adjoint()).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, hamiltonian.cwiseAbs().maxCoeff());
    if (herm > 1e-12 * scale) throw ConfigError("Hamiltonian is not Hermitian");

    const Matrix id = Matrix::Identity(n, n);
    Liouvillian liou;
    liou.levels = n;
    liou.m = -imag_unit * (Eigen::kroneckerProduct(id, hamiltonian) -
                           Eigen::kroneckerProduct(hamiltonian.transpose(), id));
    for (const auto& ch : channels) {
        const Matrix ada = ch.op.adjoint() * ch.op;
        liou.m += ch.rate * (Eigen::kroneckerProduct(ch.op.conjugate(), ch.op) -
                             0.5 * Eigen::kroneckerProduct(id, ada) -
                             0.5 * Eigen::kroneckerProduct(ada.transpose(), id));
    }
    return liou;
}

/// Direct action of the same generator on a density matrix. Kept separate
/// from the vectorized form so the two routes can be cross-checked.
inline Matrix apply_generator(const Matrix& hamiltonian,
                              const std::vector<DissipatorChannel>& channels,
                              const Matrix& rho) {
    Matrix out = -imag_unit * (hamiltonian * rho - rho * hamiltonian);
    for (const auto& ch : channels) {
        const Matrix ada = ch.op.adjoint() * ch.op;
        out.noalias() += ch.rate * (ch.op * rho * ch.op.adjoint());
        out.noalias() -= (0.5 * ch.rate) * (ada * rho);
        out.noalias() -= (0.5 * ch.rate) * (rho * ada);
    }
    return out;
}

inline Vector vectorize(const Matrix& rho) {
    return Eigen::Map<const Vector>(rho.data(), rho.size());
}

inline Matrix unvectorize(const Vector& v, int n) {
    return Eigen::Map<const Matrix>(v.data(), n, n);
}

/// Row functional whose inner product with vec(rho) is tr(rho).
inline Eigen::RowVectorXcd trace_row(int n) {
    Eigen::RowVectorXcd t = Eigen::RowVectorXcd::Zero(n * n);
    for (int k = 0; k < n; ++k) t[k * n + k] = 1.0;
    return t;
}

struct SteadyStateOptions {
    bool check_degeneracy = true;
    double kernel_threshold = 1e-10;  // relative pivot threshold
};

/// Unique steady state of L, solved with the trace constraint replacing the
/// first row. Throws DegenerateSteadyStateError when the kernel of L is not
/// one-dimensional.
inline Matrix steady_state(const Liouvillian& liou,
                           const SteadyStateOptions& opts = {}) {
    const int n = liou.levels;
    const int nn = n * n;
    if (opts.check_degeneracy) {
        Eigen::FullPivLU<Matrix> full(liou.m);
        full.setThreshold(opts.kernel_threshold);
        const int kernel = nn - static_cast<int>(full.rank());
        if (kernel != 1) {
            std::ostringstream os;
            os << "steady_state: Liouvillian kernel has dimension " << kernel;
            throw DegenerateSteadyStateError(os.str(), kernel);
        }
    }
    Matrix sys = liou.m;
    sys.row(0) = trace_row(n);
    Vector rhs = Vector::Zero(nn);
    rhs[0] = 1.0;
    const Vector v = sys.partialPivLu().solve(rhs);
    Matrix rho = unvectorize(v, n);
    rho = 0.5 * (rho + rho.adjoint().eval());  // remove round-off skew
    return rho;
}

/// Relative steady-state residual ||L vec(rho)|| / ||L||_F.
inline double steady_state_residual(const Liouvillian& liou, const Matrix& rho) {
    return (liou.m * vectorize(rho)).norm() / liou.m.norm();
}

// ---------------------------------------------------------------------------
// Coherence-chain solvers (weak probe, weak RF). These follow the printed
// convention where rho_j1 obeys  d rho_j1/dt = -D_j rho_j1 + (i/2)(...) with
// D_j(w) = gamma_j1 + i(Delta_j + w).
// ---------------------------------------------------------------------------

/// Complex detuning D_j(w).
inline Complex complex_detuning(double gamma_j1, double delta_j, double omega) {
    return {gamma_j1, delta_j + omega};
}

enum class ResponseMethod { closed_form, linearized, dressed };

inline const char* to_string(ResponseMethod m) {
    switch (m) {
        case ResponseMethod::closed_form: return "closed-form";
        case ResponseMethod::linearized: return "linearized";
        case ResponseMethod::dressed: return "dressed";
    }
    return "?";
}

/// Closed-form rho_61(w): the cascaded weak-probe solution with the
/// low-chain detunings D_2, D_3, D_4 frozen at w = 0.
inline Complex rho61_closed_form(const SixLevelSystem& sys, double omega) {
    const auto delta = derived_detunings(sys);
    const Complex d2 = complex_detuning(sys.gamma1[0], delta[1], 0.0);
    const Complex d3 = complex_detuning(sys.gamma1[1], delta[2], 0.0);
    const Complex d4 = complex_detuning(sys.gamma1[2], delta[3], 0.0);
    const Complex d5 = complex_detuning(sys.gamma1[3], delta[4], omega);
    const Complex d6 = complex_detuning(sys.gamma1[4], delta[5], omega);
    const Complex pole_factor = d5 * d6 + 0.25 * std::norm(sys.aux.rabi);
    const Complex low = d2 * d3 * d4;
    if (std::abs(low) == 0.0 || std::abs(pole_factor) == 0.0)
        throw SingularityError("rho61_closed_form: vanishing complex-detuning product");
    const Complex j_half_5 = std::pow(0.5 * imag_unit, 5);
    return j_half_5 * (sys.probe.rabi * sys.coupling.rabi * sys.local_osc.rabi / low) *
           (std::conj(sys.aux.rabi) * sys.rf.rabi / pole_factor);
}

/// All five chain coherences (rho_21..rho_61) at analysis frequency w from
/// the Fourier-domain cascade, solved as one linear system. The one-way
/// couplings run up the chain; the final (auxiliary) link keeps both
/// directions. With `flatten_low_chain` the D's at and below the RF link are
/// evaluated at w = 0, which reproduces the closed form exactly.
inline Vector chain_coherences(const ChainSpec& chain, double omega,
                               bool flatten_low_chain = false) {
    chain.validate();
    const int n = chain.levels;
    const int m = n - 1;  // unknowns rho_21..rho_n1
    Matrix a = Matrix::Zero(m, m);
    Vector rhs = Vector::Zero(m);
    const int flatten_up_to = chain.rf_link + 1;  // 1-based level below which D is frozen
    for (int j = 2; j <= n; ++j) {
        const int row = j - 2;
        const double w = (flatten_low_chain && j <= flatten_up_to + 1) ? 0.0 : omega;
        a(row, row) = complex_detuning(chain.gamma1[j - 1], chain.level_detuning[j - 1], w);
        if (j == 2) {
            rhs[row] = 0.5 * imag_unit * chain.coupling[0];
        } else {
            a(row, row - 1) = -0.5 * imag_unit * chain.coupling[j - 2];
        }
    }
    if (chain.rf_link < n - 2) {
        // bidirectional final link, conjugated on the upward leg
        a(m - 1, m - 2) = -0.5 * imag_unit * std::conj(chain.coupling[n - 2]);
        a(m - 2, m - 1) = -0.5 * imag_unit * chain.coupling[n - 2];
    }
    Eigen::PartialPivLU<Matrix> lu(a);
    const Vector x = lu.solve(rhs);
    if (!x.allFinite())
        throw SingularityError("chain_coherences: singular cascade system");
    const double resid = (a * x - rhs).norm();
    if (!(resid < 1e-8 * std::max(1.0, rhs.norm()) + 1e-6 * x.norm() * a.norm()))
        throw SingularityError("chain_coherences: cascade solve did not converge");
    return x;
}

inline Complex rho61_linearized(const SixLevelSystem& sys, double omega,
                                bool flatten_low_chain = false) {
    const auto chain = chain_spec(sys);
    return chain_coherences(chain, omega, flatten_low_chain)[4];
}

// ---------------------------------------------------------------------------
// Full-Liouvillian linear response around the driven steady state.
// ---------------------------------------------------------------------------

/// Transfer function H(w) = rho_{r1}(w) / Omega_RF(w) for a single-sideband
/// envelope perturbation of the RF link around the static operating point
/// (all configured drives on, including the RF bias). The resolvent is
/// deflated with the steady state so the w = 0 limit is regular.
inline Complex dressed_transfer(const ChainSpec& chain, double omega) {
    chain.validate();
    const int n = chain.levels;
    const Matrix h = build_hamiltonian(chain);
    const auto channels = build_dissipators(chain);
    const Liouvillian liou = build_liouvillian(h, channels);
    const Vector v0 = vectorize(steady_state(liou));

    Matrix kick = Matrix::Zero(n, n);
    kick(chain.rf_link, chain.rf_link + 1) = -0.5;  // unit envelope, e^{+iwt} side
    const Matrix id = Matrix::Identity(n, n);
    const Matrix pert = -imag_unit *
        (Eigen::kroneckerProduct(id, kick) - Eigen::kroneckerProduct(kick.transpose(), id));

    Matrix sys = imag_unit * omega * Matrix::Identity(n * n, n * n) - liou.m;
    sys.noalias() += v0 * trace_row(n);  // deflate the stationary direction
    const Vector x = sys.partialPivLu().solve(pert * v0);
    if (!x.allFinite())
        throw SingularityError("dressed_transfer: singular resolvent");
    // element rho_{1,r}; the printed-convention rho_{r1} response is its negative
    return -x[(chain.readout_level - 1) * n + 0];
}

/// rho_61(w)/Omega_RF by the selected method (closed form by default).
inline Complex transfer_H(const SixLevelSystem& sys, double omega,
                          ResponseMethod method = ResponseMethod::closed_form) {
    if (method == ResponseMethod::dressed) return dressed_transfer(chain_spec(sys), omega);
    if (std::abs(sys.rf.rabi) == 0.0)
        throw ConfigError("transfer_H: Omega_RF must be nonzero for normalization");
    const Complex rho = (method == ResponseMethod::closed_form)
                            ? rho61_closed_form(sys, omega)
                            : rho61_linearized(sys, omega);
    return rho / sys.rf.rabi;
}

// ---------------------------------------------------------------------------
// Time-domain oracle.
// ---------------------------------------------------------------------------

struct OracleOptions {
    double steps_per_rate = 50.0;   // dt <= 1/(steps_per_rate * max rate)
    double transient_time_constants = 10.0;
    int periods_per_window = 20;
    double drift_tolerance = 1e-3;
    int max_windows = 12;
};

namespace detail {

/// Fastest rate present in the problem; sets the RK4 step.
inline double max_rate(const ChainSpec& chain, double omega, double amplitude) {
    double r = std::max(omega, std::abs(amplitude));
    for (int k = 0; k < chain.levels - 1; ++k)
        r = std::max(r, std::abs(chain.coupling[k]));
    for (int j = 0; j < chain.levels; ++j) {
        r = std::max(r, std::abs(chain.level_detuning[j]));
        r = std::max(r, chain.gamma1[j]);
    }
    for (const auto& d : chain.decays) r = std::max(r, d.rate);
    return r;
}

inline double slowest_time_constant(const ChainSpec& chain) {
    double rmin = 0.0;
    for (int j = 1; j < chain.levels; ++j)
        if (chain.gamma1[j] > 0.0)
            rmin = (rmin == 0.0) ? chain.gamma1[j] : std::min(rmin, chain.gamma1[j]);
    for (const auto& d : chain.decays)
        if (d.rate > 0.0) rmin = (rmin == 0.0) ? d.rate : std::min(rmin, d.rate);
    if (rmin == 0.0)
        throw NumericalError("time-domain oracle: no finite decay rate, transient never settles");
    return 1.0 / rmin;
}

}  // namespace detail

/// Integrates the full master equation with Omega_RF(t) = amplitude cos(wt)
/// on the RF link and lock-in demodulates the readout coherence at w over an
/// integer number of drive periods. Returns the complex first-harmonic
/// amplitude in the printed rho_{r1} convention, i.e. the value whose
/// magnitude divided by `amplitude` tends to |H(w)| in the weak-drive limit.
inline Complex rho_timedomain_oracle(const ChainSpec& chain_in, double omega,
                                     double amplitude,
                                     const OracleOptions& opts = {}) {
    if (!(omega > 0.0)) throw ConfigError("time-domain oracle: omega must be positive");
    ChainSpec chain = chain_in;
    chain.coupling[chain.rf_link] = 0.0;  // the oscillating drive replaces the bias
    chain.validate();
    const int n = chain.levels;

    const Matrix h0 = build_hamiltonian(chain);
    Matrix h1 = Matrix::Zero(n, n);
    h1(chain.rf_link, chain.rf_link + 1) = -0.5 * amplitude;
    h1(chain.rf_link + 1, chain.rf_link) = -0.5 * amplitude;
    const auto channels = build_dissipators(chain);

    const double period = constants::two_pi / omega;
    const double rate = detail::max_rate(chain, omega, amplitude);
    const double dt_raw = 1.0 / (opts.steps_per_rate * rate);
    int steps_per_period = static_cast<int>(std::ceil(period / dt_raw));
    steps_per_period += steps_per_period % 2;  // Simpson needs an even count
    const double dt = period / steps_per_period;

    const double t_transient =
        opts.transient_time_constants * detail::slowest_time_constant(chain);
    const long transient_periods =
        static_cast<long>(std::ceil(t_transient / period));

    Matrix rho = Matrix::Zero(n, n);
    rho(0, 0) = 1.0;

    Matrix k1(n, n), k2(n, n), k3(n, n), k4(n, n), tmp(n, n), ham(n, n);
    auto deriv = [&](double t, const Matrix& r, Matrix& out) {
        ham = h0 + std::cos(omega * t) * h1;
        out = apply_generator(ham, channels, r);
    };
    double t = 0.0;
    auto rk4_step = [&]() {
        deriv(t, rho, k1);
        tmp = rho + (0.5 * dt) * k1;
        deriv(t + 0.5 * dt, tmp, k2);
        tmp = rho + (0.5 * dt) * k2;
        deriv(t + 0.5 * dt, tmp, k3);
        tmp = rho + dt * k3;
        deriv(t + dt, tmp, k4);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += dt;
    };

    for (long p = 0; p < transient_periods; ++p)
        for (int s = 0; s < steps_per_period; ++s) rk4_step();

    // windows of integer periods; Simpson quadrature of rho_1r e^{-iwt}
    const int readout_col = chain.readout_level - 1;
    const long wsteps = static_cast<long>(opts.periods_per_window) * steps_per_period;
    Complex previous{0.0, 0.0};
    for (int w = 0; w < opts.max_windows; ++w) {
        Complex acc{0.0, 0.0};
        for (long s = 0; s <= wsteps; ++s) {
            const Complex f =
                rho(0, readout_col) * std::exp(-imag_unit * omega * t);
            const double weight =
                (s == 0 || s == wsteps) ? 1.0 : ((s % 2 == 1) ? 4.0 : 2.0);
            acc += weight * f;
            if (s < wsteps) rk4_step();
        }
        acc *= dt / 3.0;
        const double window_time = static_cast<double>(wsteps) * dt;
        const Complex demod = -2.0 * acc / window_time;  // printed rho_{r1} sign
        if (w > 0) {
            const double drift = std::abs(demod - previous) /
                                 std::max(std::abs(demod), 1e-300);
            if (drift < opts.drift_tolerance) return demod;
        }
        previous = demod;
    }
    throw NumericalError(
        "time-domain oracle: demodulated amplitude did not converge between windows");
}

inline Complex rho61_timedomain_oracle(const SixLevelSystem& sys, double omega,
                                       double amplitude,
                                       const OracleOptions& opts = {}) {
    return rho_timedomain_oracle(chain_spec(sys), omega, amplitude, opts);
}

}  // namespace swm
