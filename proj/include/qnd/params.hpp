#pragma once

#include <complex>

namespace qnd {

/// Parameters of the measured (system) oscillator. All rates and
/// frequencies are in the same unit system; the natural choice is units of
/// the ancilla damping rate kappa, with an SI mode handled at the CLI level.
struct SystemParams {
    double omega0 = 0.0;    ///< resonance frequency (constant Kerr shift already absorbed)
    double lambda00 = 0.0;  ///< self-Kerr coefficient of the measured oscillator
    double nu = 1e-3;       ///< damping rate, nu = omega0 / (2 Q0)
    double N0 = 0.0;        ///< thermal occupation of the system bath

    void validate() const;
};

/// Parameters of the driven, heavily damped readout (ancilla) oscillator.
///
/// The two damping channels are named by their physical origin rather than
/// by Greek letter: the source paper's prose and its formal definitions
/// disagree on which of mu/eta is the thermal and which the measurement
/// rate. Here `damping_thermal` always weighs `occupation_thermal` and
/// `damping_measurement` always weighs `occupation_measurement`, which is
/// the pairing the combined-occupation formula requires.
struct AncillaParams {
    double delta_omega = 0.0;          ///< detuning omega_1 - omega_d
    double lambda11 = 0.0;             ///< ancilla self-Kerr coefficient
    double epsilon = 0.0;              ///< drive strength (>= 0)
    double damping_thermal = 0.5;      ///< eta: rate of the thermal bath channel
    double damping_measurement = 0.5;  ///< mu: rate of the measurement bath channel
    double occupation_thermal = 0.0;   ///< N_bar1: thermal-bath occupation
    double occupation_measurement = 0.0;  ///< N_m: measurement-bath occupation

    /// Total damping rate kappa = eta + mu.
    double kappa() const { return damping_thermal + damping_measurement; }

    /// Combined occupation N1 = (eta N_bar1 + mu N_m) / kappa.
    double combined_occupation() const;

    void validate() const;
};

/// Intermode coupling lambda01 a^dag a b^dag b.
struct CouplingParams {
    double lambda01 = 0.0;

    void validate() const;
};

/// Doubly clamped beam geometry for the Carr-Wybourne anharmonicity
/// estimate. SI units throughout.
struct BeamGeometry {
    double bulk_modulus = 0.0;    ///< B [Pa]
    double density = 0.0;         ///< rho [kg/m^3]
    double length = 0.0;          ///< L [m]
    double width = 0.0;           ///< w [m]
    double thickness = 0.0;       ///< t [m]
    double mode_frequency = 0.0;  ///< omega [rad/s]

    void validate() const;
};

/// Bose-Einstein occupation 1/(exp(hbar omega / kB T) - 1); zero at T = 0.
/// Throws std::domain_error for omega <= 0 or T < 0.
double bose_occupation(double omega, double temperature);

/// Damping rate from quality factor, nu = omega0 / (2 Q0).
double nu_from_quality(double omega0, double Q0);

/// Self-anharmonicity of a rectangular beam,
/// lambda = pi^4/128 * hbar B / (rho^2 omega^2 L^5 w t).
double beam_anharmonicity(const BeamGeometry& g);

namespace constants {
inline constexpr double hbar = 1.054571817e-34;  // J s
inline constexpr double k_boltzmann = 1.380649e-23;  // J/K
}  // namespace constants

}  // namespace qnd
