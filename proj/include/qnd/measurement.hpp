#pragma once

#include <complex>

#include "qnd/params.hpp"
#include "qnd/steady_state.hpp"

namespace qnd {

/// Homodyne readout of the ancilla quadrature, I = sqrt(2 mu) <b + b+>.
/// The mean signal is background + gain * <a+a>; gain is tied to the
/// back-action rate by gain = -sqrt(8 mu / kappa (2N1+1)) * sqrt(Gamma).
struct SignalModel {
    double gain = 0.0;                ///< -sqrt(2 mu) 2 eps lambda01 / Lambda^2
    double sqrt_gamma_factor = 0.0;   ///< -sqrt(8 mu / (kappa (2N1+1)))
    double background = 0.0;          ///< sqrt(2 mu) (beta0 + alpha0), real
    double mu = 0.0;
};

/// Computes the gain by inverting the drift matrix against the coupling
/// source; the magnitude of the per-phonon mean shift reproduces the
/// closed form exactly and is cross-checked internally (throws
/// std::runtime_error on disagreement).
/// Throws std::domain_error for an unstable branch or singular A.
SignalModel signal_gain(const SteadyStateBranch& branch, const AncillaParams& p,
                        const CouplingParams& c);

struct MeanCurrent {
    double background;
    double signal;  ///< gain * n_phonons
    double total() const { return background + signal; }
};
MeanCurrent mean_current(const SignalModel& s, double n_phonons);

/// Localization timescale 1/Gamma, the thermal dwell time 1/nu, and their
/// ratio. Throws std::domain_error when Gamma = 0 (no measurement).
struct Distinguishability {
    double localization_time;  ///< 1 / Gamma
    double dwell_time;         ///< 1 / nu
    double ratio;              ///< Gamma / nu
};
Distinguishability distinguishability_time(double gamma, double nu);

}  // namespace qnd
