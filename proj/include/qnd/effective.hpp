#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "qnd/fluctuations.hpp"
#include "qnd/params.hpp"
#include "qnd/steady_state.hpp"

namespace qnd {

/// Coefficients of the reduced master equation of the measured oscillator:
/// frequency shift Delta, Kerr coefficient Theta, and the
/// measurement-induced phase-diffusion rate Gamma (coefficient of
/// -Gamma [a+a, [a+a, rho]]).
struct EffectiveCoefficients {
    double delta = 0.0;
    double theta = 0.0;
    double gamma = 0.0;
    double gamma0 = 0.0;  ///< Gamma at zero self-anharmonicity and zero detuning
    double ratio = 0.0;   ///< Gamma / Gamma0 = kappa^4 / Lambda^4
};

/// Closed-form coefficients on a stable branch. Theta uses the real
/// reading of its Kerr term (the literal transcription would make a
/// Hermitian double-commutator coefficient complex); see theta_literal.
/// Throws std::domain_error on an unstable branch.
EffectiveCoefficients effective_coefficients(const SteadyStateBranch& branch,
                                             const FluctuationModel& fluct,
                                             const AncillaParams& p,
                                             const CouplingParams& c,
                                             double lambda00);

/// Gamma via the bracketed form
/// (lambda01^2 / Lambda^4) kappa n0 (2N1+1) [|kappa + ic|^2 - 4 lambda11 n0 (d + 3 lambda11 n0)].
/// Must agree with the compact form to 1e-12 relative.
double gamma_bracketed(const SteadyStateBranch& branch, const AncillaParams& p,
                       const CouplingParams& c);

/// Diagnostic: Theta evaluated with the literal complex term
/// (delta_omega + i lambda11 + 2 lambda11 n0) as transcribed.
std::complex<double> theta_literal(const SteadyStateBranch& branch,
                                   const AncillaParams& p,
                                   const CouplingParams& c, double lambda00);

struct GammaRatioRow {
    double delta_omega;
    double epsilon;
    double lambda11;
    double n0;
    double lambda_sq;
    double ratio;
    bool stable;
};

/// Gamma/Gamma0 on the operating branch over a detuning grid. Unstable
/// grid points are flagged, not dropped (ratio still reported from the
/// formula value there).
std::vector<GammaRatioRow> gamma_ratio_sweep(const AncillaParams& base,
                                             double detuning_min,
                                             double detuning_max,
                                             std::size_t points);

/// Coefficients rebuilt from the integral structure of the second-order
/// master-equation term: the equal-time covariance comes from a Lyapunov
/// solve and the tau integral of the weighted two-time correlators is
/// evaluated in closed form per exponential term, truncated at t_max.
struct IntegralCoefficients {
    double delta;
    double theta;  ///< includes lambda00
    double gamma;
};
IntegralCoefficients coefficients_from_integrals(const FluctuationModel& fluct,
                                                 const SteadyStateBranch& branch,
                                                 const CouplingParams& c,
                                                 double lambda00, double t_max);

/// QND figure of merit: the dwell time 1/nu must be long compared to the
/// localization time 1/Gamma, i.e. Gamma/nu >> 1.
struct MeasurabilityReport {
    double gamma_over_nu;
    double threshold;
    bool verdict;  ///< gamma_over_nu > threshold
};
MeasurabilityReport qnd_figure_of_merit(double gamma, const SystemParams& sys,
                                        double threshold = 1.0);

}  // namespace qnd
