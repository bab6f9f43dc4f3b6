#include "qnd/measurement.hpp"

#include <cmath>
#include <stdexcept>

#include "qnd/fluctuations.hpp"

namespace qnd {

namespace {
using cd = std::complex<double>;
constexpr cd I{0.0, 1.0};
}  // namespace

SignalModel signal_gain(const SteadyStateBranch& branch, const AncillaParams& p,
                        const CouplingParams& c) {
    if (!branch.stable)
        throw std::domain_error("signal_gain: unstable branch");
    if (std::abs(branch.lambda_sq) < 1e-300)
        throw std::domain_error("signal_gain: singular drift matrix (Lambda^2 = 0)");
    const double mu = p.damping_measurement;
    if (!(mu > 0.0))
        throw std::domain_error("signal_gain: measurement damping mu must be > 0");

    const FluctuationModel m = build_model(branch, p);

    // Shift of the fluctuation mean per system phonon: d<b_hat1>/dt =
    // -A <b_hat1> + (-i lam01 beta0, +i lam01 alpha0)^T <a+a> = 0.
    Eigen::Vector2cd source;
    source << -I * c.lambda01 * branch.beta0, I * c.lambda01 * std::conj(branch.beta0);
    const Eigen::Vector2cd shift = m.A.inverse() * source;
    const double root2mu = std::sqrt(2.0 * mu);

    // |<b_hat1>| per phonon is 2 eps lam01 / Lambda^2 exactly, because
    // |beta0| |kappa + i(d + 2 lam11 n0)| = eps by the steady-state
    // condition. That magnitude (the optimally phased quadrature) is the
    // quoted gain; the (b + b+) projection itself picks up an extra
    // detuning-dependent phase factor.
    const double gain_inv_mag = root2mu * 2.0 * std::abs(shift(0));

    const double gain_closed =
        -root2mu * 2.0 * p.epsilon * c.lambda01 / branch.lambda_sq;
    const double scale = std::max(std::abs(gain_closed), 1e-300);
    if (std::abs(gain_inv_mag - std::abs(gain_closed)) > 1e-9 * scale)
        throw std::runtime_error(
            "signal_gain: matrix-inversion path disagrees with the closed form");

    SignalModel s;
    s.gain = gain_closed;
    s.mu = mu;
    s.background = root2mu * 2.0 * branch.beta0.real();
    s.sqrt_gamma_factor =
        -std::sqrt(8.0 * mu / (p.kappa() * (2.0 * p.combined_occupation() + 1.0)));
    return s;
}

MeanCurrent mean_current(const SignalModel& s, double n_phonons) {
    if (n_phonons < 0.0)
        throw std::domain_error("mean_current: n_phonons must be >= 0");
    return {s.background, s.gain * n_phonons};
}

Distinguishability distinguishability_time(double gamma, double nu) {
    if (!(gamma > 0.0))
        throw std::domain_error("distinguishability_time: Gamma = 0, no measurement");
    if (!(nu > 0.0))
        throw std::domain_error("distinguishability_time: nu must be > 0");
    return {1.0 / gamma, 1.0 / nu, gamma / nu};
}

}  // namespace qnd
