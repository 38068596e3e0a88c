// Copyright (c) 2026 the swm-receiver authors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#pragma once

#include <functional>
#include <vector>

#include "swm/atomic_model.hpp"
#include "swm/eit_baseline.hpp"
#include "swm/master_equation.hpp"
#include "swm/metrics.hpp"

namespace swm {

// Measurement pipeline shared by both schemes: everything here works on a
// ChainSpec, so the EIT baseline runs through byte-identical code paths.

/// |H(w)| evaluator for the dressed (linearized-around-steady-state) response.
/// The Liouvillian and steady state are factored once and shared across
/// frequencies.
class DressedResponse {
  public:
    explicit DressedResponse(ChainSpec chain) : chain_(std::move(chain)) {
        chain_.validate();
        const Matrix h = build_hamiltonian(chain_);
        const auto channels = build_dissipators(chain_);
        liou_ = build_liouvillian(h, channels);
        v0_ = vectorize(steady_state(liou_));
        const int n = chain_.levels;
        Matrix kick = Matrix::Zero(n, n);
        kick(chain_.rf_link, chain_.rf_link + 1) = -0.5;
        const Matrix id = Matrix::Identity(n, n);
        rhs_ = (-imag_unit *
                (Eigen::kroneckerProduct(id, kick) -
                 Eigen::kroneckerProduct(kick.transpose(), id))) *
               v0_;
        deflation_ = v0_ * trace_row(n);
    }

    Complex operator()(double omega) const {
        const int nn = chain_.levels * chain_.levels;
        Matrix sys = imag_unit * omega * Matrix::Identity(nn, nn) - liou_.m;
        sys.noalias() += deflation_;
        const Vector x = sys.partialPivLu().solve(rhs_);
        return -x[(chain_.readout_level - 1) * chain_.levels + 0];
    }

    double magnitude(double omega) const { return std::abs((*this)(omega)); }

    const ChainSpec& chain() const { return chain_; }

  private:
    ChainSpec chain_;
    Liouvillian liou_;
    Vector v0_;
    Vector rhs_;
    Matrix deflation_;
};

/// Closed-form |H(w)| for the final dressed pair of the chain (levels n-1, n
/// coupled by the last link), which is the two-pole structure the product
/// bandwidth formula describes.
inline std::function<double(double)> two_pole_magnitude(const ChainSpec& chain) {
    const int n = chain.levels;
    const double g_lo = chain.gamma1[n - 2];
    const double g_hi = chain.gamma1[n - 1];
    const double d_lo = chain.level_detuning[n - 2];
    const double d_hi = chain.level_detuning[n - 1];
    const double a2 = std::norm(chain.coupling[n - 2]);
    return [=](double w) {
        const Complex d5 = complex_detuning(g_lo, d_lo, w);
        const Complex d6 = complex_detuning(g_hi, d_hi, w);
        return 1.0 / std::abs(d5 * d6 + 0.25 * a2);
    };
}

inline PoleAnalysis pole_analysis(const ChainSpec& chain) {
    const int n = chain.levels;
    return pole_analysis(chain.gamma1[n - 2], chain.gamma1[n - 1],
                         std::abs(chain.coupling[n - 2]));
}

/// Bandwidth by both routes. The numeric route uses the dressed response by
/// default; `magnitude` may override it (e.g. closed-form |H|).
inline BandwidthReport measure_bandwidth(
    const ChainSpec& chain,
    const std::function<double(double)>& magnitude = {},
    const NumericBandwidthOptions& opts = {}) {
    BandwidthReport rep;
    const PoleAnalysis poles = pole_analysis(chain);
    const auto closed = bandwidth_closed_form(poles);
    rep.f3db_closed_hz = closed.f3db_hz;
    rep.closed_form_valid = closed.valid_regime;
    rep.regime = poles.regime;
    NumericBandwidth num;
    if (magnitude) {
        num = bandwidth_numeric(magnitude, opts);
    } else {
        DressedResponse resp(chain);
        num = bandwidth_numeric([&](double w) { return resp.magnitude(w); }, opts);
    }
    rep.f3db_numeric_hz = num.f3db_hz;
    rep.resonant_response = num.resonant;
    return rep;
}

/// Steady-state readout coherence with the RF-link coupling set to
/// bias + amplitude. The linearity sampler for both schemes.
inline Complex steady_readout_at_drive(const ChainSpec& base, Complex bias,
                                       double amplitude) {
    ChainSpec chain = base;
    chain.coupling[chain.rf_link] = bias + amplitude;
    const Matrix h = build_hamiltonian(chain);
    const Liouvillian liou = build_liouvillian(h, build_dissipators(chain));
    const Matrix rho = steady_state(liou);
    return rho(chain.readout_level - 1, 0);
}

/// DC linearity figures from the full nonlinear steady state. For the SWM
/// scheme the input tone rides around zero; for the co-driven EIT link it
/// rides around the LO bias, and the odd part isolates H1 and H3.
inline LinearityReport measure_linearity(const ChainSpec& chain,
                                         CubicFitOptions opts = {}) {
    const Complex bias =
        chain.rf_co_driven ? chain.coupling[chain.rf_link] : Complex{0.0, 0.0};
    const auto sampler = [&](double a) {
        return steady_readout_at_drive(chain, bias, a);
    };
    return linearity_from_fit(extract_h1_h3(sampler, opts));
}

enum class SpectrumMode { resonant_locked, detuned_tracking };

inline const char* to_string(SpectrumMode m) {
    return m == SpectrumMode::resonant_locked ? "resonant-locked" : "detuned-tracking";
}

struct SpectrumResult {
    std::vector<double> probe_detuning;  // rad/s
    std::vector<double> magnitude;       // |rho_{r1}| of the steady state
    SpectrumWidth width;
};

/// |rho_{r1}| of the full steady state versus probe detuning.
/// resonant_locked: the optical probe sweeps while the mm-wave/auxiliary
/// sources hold their multi-photon resonances (levels above the LO link stay
/// resonant). detuned_tracking: all accumulated detunings follow the probe;
/// a generated-field level stays pinned at Delta_L.
inline SpectrumResult sweep_spectrum(const ChainSpec& base, SpectrumMode mode,
                                     double half_span, int count) {
    if (count < 3) throw ConfigError("sweep_spectrum: need at least 3 points");
    SpectrumResult res;
    res.probe_detuning.resize(count);
    res.magnitude.resize(count);
    const int n = base.levels;
    const int locked_top = base.lo_link;  // levels above this link stay resonant
    for (int i = 0; i < count; ++i) {
        const double x = -half_span + 2.0 * half_span * i / (count - 1);
        ChainSpec chain = base;
        for (int lvl = 1; lvl < n; ++lvl) {
            double d = 0.0;
            if (mode == SpectrumMode::resonant_locked) {
                d = (lvl <= locked_top) ? x : 0.0;
            } else {
                const bool pinned = base.generated_level && lvl == n - 1;
                d = pinned ? base.level_detuning[lvl] : x;
            }
            chain.level_detuning[lvl] = d;
        }
        const Matrix h = build_hamiltonian(chain);
        const Liouvillian liou = build_liouvillian(h, build_dissipators(chain));
        const Matrix rho = steady_state(liou);
        res.probe_detuning[i] = x;
        res.magnitude[i] = std::abs(rho(chain.readout_level - 1, 0));
    }
    res.width = spectrum_fwhm(res.probe_detuning, res.magnitude);
    return res;
}

}  // namespace swm
