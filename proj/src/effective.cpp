#include "qnd/effective.hpp"

#include <cmath>
#include <stdexcept>

namespace qnd {

namespace {

using cd = std::complex<double>;
constexpr cd I{0.0, 1.0};

void require_stable(const SteadyStateBranch& b) {
    if (!b.stable)
        throw std::domain_error(
            "effective coefficients are undefined on an unstable branch");
}

}  // namespace

EffectiveCoefficients effective_coefficients(const SteadyStateBranch& branch,
                                             const FluctuationModel& fluct,
                                             const AncillaParams& p,
                                             const CouplingParams& c,
                                             double lambda00) {
    require_stable(branch);
    const double kappa = p.kappa();
    const double N1 = p.combined_occupation();
    const double lam01 = c.lambda01;
    const double lam11 = p.lambda11;
    const double n0 = branch.n0;
    const double L2 = branch.lambda_sq;
    const double cc = fluct.c;  // delta_omega + lambda11 + 4 lambda11 n0
    const double abs_sq = kappa * kappa + cc * cc;  // |kappa + i c|^2

    EffectiveCoefficients out;
    out.delta = lam01 * (n0 + (N1 * abs_sq + 2.0 * lam11 * lam11 * n0 * n0) / L2);
    // Real reading of the Kerr term; the sign is fixed by the integral
    // structure of the second-order master-equation term (for a detuned
    // linear ancilla the induced Kerr coefficient is -lam01^2 n0 dw / L2).
    out.theta = lambda00 -
                lam01 * lam01 * n0 * (p.delta_omega + lam11 + 2.0 * lam11 * n0) / L2;
    out.gamma = lam01 * lam01 * kappa * p.epsilon * p.epsilon * (2.0 * N1 + 1.0) /
                (L2 * L2);
    out.gamma0 = lam01 * lam01 * p.epsilon * p.epsilon * (2.0 * N1 + 1.0) /
                 (kappa * kappa * kappa);
    out.ratio = (kappa * kappa / L2) * (kappa * kappa / L2);
    return out;
}

double gamma_bracketed(const SteadyStateBranch& branch, const AncillaParams& p,
                       const CouplingParams& c) {
    const double kappa = p.kappa();
    const double N1 = p.combined_occupation();
    const double lam11 = p.lambda11;
    const double n0 = branch.n0;
    const double d = p.delta_omega + lam11;
    const double cc = d + 4.0 * lam11 * n0;
    const double bracket = kappa * kappa + cc * cc -
                           4.0 * lam11 * n0 * (d + 3.0 * lam11 * n0);
    const double L2 = branch.lambda_sq;
    return c.lambda01 * c.lambda01 / (L2 * L2) * kappa * n0 * (2.0 * N1 + 1.0) *
           bracket;
}

std::complex<double> theta_literal(const SteadyStateBranch& branch,
                                   const AncillaParams& p,
                                   const CouplingParams& c, double lambda00) {
    const cd kerr = cd(p.delta_omega + 2.0 * p.lambda11 * branch.n0, p.lambda11);
    return lambda00 +
           c.lambda01 * c.lambda01 * branch.n0 / branch.lambda_sq * kerr;
}

std::vector<GammaRatioRow> gamma_ratio_sweep(const AncillaParams& base,
                                             double detuning_min,
                                             double detuning_max,
                                             std::size_t points) {
    if (points < 1) throw std::invalid_argument("gamma_ratio_sweep: points must be >= 1");
    std::vector<GammaRatioRow> rows;
    rows.reserve(points);
    const double step =
        points > 1 ? (detuning_max - detuning_min) / double(points - 1) : 0.0;
    const double kappa = base.kappa();
    for (std::size_t i = 0; i < points; ++i) {
        AncillaParams p = base;
        p.delta_omega = detuning_min + double(i) * step;
        const auto sol = solve_steady_state(p);
        const auto& b = sol.operating_branch();
        const double k2 = kappa * kappa;
        rows.push_back({p.delta_omega, p.epsilon, p.lambda11, b.n0, b.lambda_sq,
                        (k2 / b.lambda_sq) * (k2 / b.lambda_sq), b.stable});
    }
    return rows;
}

IntegralCoefficients coefficients_from_integrals(const FluctuationModel& fluct,
                                                 const SteadyStateBranch& branch,
                                                 const CouplingParams& c,
                                                 double lambda00, double t_max) {
    require_stable(branch);
    if (!(t_max > 0.0))
        throw std::invalid_argument("coefficients_from_integrals: t_max must be > 0");

    // Equal-time covariance from the Lyapunov equation, not from the
    // closed-form one_time entries.
    const Matrix2c C0 = stationary_covariance_lyapunov(fluct.A, fluct.D);

    // Integral of the propagator: int_0^T exp(-A tau) dtau = A^{-1} (I - M(T)).
    // Valid for any diagonalizable-or-confluent A with Re eigenvalues > 0.
    const Matrix2c J =
        fluct.A.inverse() * (Matrix2c::Identity() - propagator(fluct, t_max));
    const Matrix2c JC = J * C0;

    const cd beta0 = fluct.beta0;
    const cd alpha0 = std::conj(beta0);
    const double n0 = fluct.n0;

    // int_0^T <B(tau)> dtau with
    // <B(tau)> = alpha0^2 <b1(t+tau) b1(t)> + n0 <b1(t+tau) b1+(t)>
    //          + n0 <b1+(t+tau) b1(t)> + beta0^2 <b1+(t+tau) b1+(t)>.
    const cd integral = alpha0 * alpha0 * JC(0, 0) + n0 * (JC(0, 1) + J(0, 0)) +
                        n0 * JC(1, 0) + beta0 * beta0 * (JC(1, 1) + J(1, 0));

    IntegralCoefficients out;
    const double lam01 = c.lambda01;
    out.gamma = lam01 * lam01 * integral.real();
    out.theta = lambda00 + lam01 * lam01 * integral.imag();
    // First-order term: Delta = lam01 (n0 + <b1+ b1>), with <alpha_1 beta_1>
    // taken from the Lyapunov covariance.
    out.delta = lam01 * (n0 + C0(1, 0).real());
    return out;
}

MeasurabilityReport qnd_figure_of_merit(double gamma, const SystemParams& sys,
                                        double threshold) {
    if (!(sys.nu > 0.0))
        throw std::invalid_argument("qnd_figure_of_merit: nu must be > 0");
    MeasurabilityReport r;
    r.gamma_over_nu = gamma / sys.nu;
    r.threshold = threshold;
    r.verdict = r.gamma_over_nu > threshold;
    return r;
}

}  // namespace qnd
