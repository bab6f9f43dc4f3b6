#include "qnd/fluctuations.hpp"

#include <cmath>
#include <stdexcept>

namespace qnd {

namespace {

using cd = std::complex<double>;
constexpr cd I{0.0, 1.0};

// sin(z)/z with a series for small |z|.
cd sinc(cd z) {
    if (std::abs(z) < 1e-4) {
        const cd z2 = z * z;
        return 1.0 - z2 / 6.0 + z2 * z2 / 120.0;
    }
    return std::sin(z) / z;
}

void require_stable(const FluctuationModel& m) {
    if (!m.stable)
        throw std::domain_error(
            "correlators are undefined on an unstable branch (Lambda^2 <= 0)");
}

}  // namespace

FluctuationModel build_model(const SteadyStateBranch& branch, const AncillaParams& p) {
    FluctuationModel m;
    m.kappa = p.kappa();
    m.lambda11 = p.lambda11;
    m.N1 = p.combined_occupation();
    m.n0 = branch.n0;
    m.beta0 = branch.beta0;
    m.lambda_sq = branch.lambda_sq;
    m.lambda1_sq = branch.lambda1_sq;
    m.stable = branch.stable;
    m.c = 4.0 * p.lambda11 * branch.n0 + p.delta_omega + p.lambda11;

    const cd beta0_sq = branch.beta0 * branch.beta0;
    const cd alpha0_sq = std::conj(beta0_sq);  // alpha_0 = beta_0^*
    const double lam = p.lambda11;

    m.A << cd(m.kappa, m.c), 2.0 * I * lam * beta0_sq,
           -2.0 * I * lam * alpha0_sq, cd(m.kappa, -m.c);
    m.D << -2.0 * I * lam * beta0_sq, cd(2.0 * m.kappa * m.N1, 0.0),
           cd(2.0 * m.kappa * m.N1, 0.0), 2.0 * I * lam * alpha0_sq;

    // Closed-form eigenvalues kappa +- i Lambda_1 (no generic eigensolver).
    m.Lambda1 = std::sqrt(cd(m.lambda1_sq, 0.0));
    m.lambda_plus = m.kappa + I * m.Lambda1;
    m.lambda_minus = m.kappa - I * m.Lambda1;

    const double off =
        (m.N1 * (m.kappa * m.kappa + m.c * m.c) + 2.0 * lam * lam * m.n0 * m.n0) /
        m.lambda_sq;
    const cd diag =
        -I * lam * beta0_sq * cd(m.kappa, -m.c) * (2.0 * m.N1 + 1.0) / m.lambda_sq;
    m.one_time << diag, cd(off, 0.0), cd(off, 0.0), std::conj(diag);
    return m;
}

Matrix2c propagator(const FluctuationModel& m, double tau) {
    if (tau < 0.0)
        throw std::domain_error("propagator: tau must be >= 0");
    // (A - kappa I)^2 = -Lambda_1^2 I, so
    // exp(-A tau) = e^{-kappa tau} [cos(L1 tau) I - sinc(L1 tau) tau (A - kappa I)].
    const cd z = m.Lambda1 * tau;
    const Matrix2c N = m.A - m.kappa * Matrix2c::Identity();
    return std::exp(-m.kappa * tau) *
           (std::cos(z) * Matrix2c::Identity() - sinc(z) * tau * N);
}

Matrix2c c_number_correlators(const FluctuationModel& m, double tau) {
    require_stable(m);
    if (tau < 0.0)
        throw std::domain_error("c_number_correlators: tau must be >= 0");
    return propagator(m, tau) * m.one_time;
}

Matrix2c c_number_correlators_closed_form(const FluctuationModel& m, double tau) {
    require_stable(m);
    if (tau < 0.0)
        throw std::domain_error("c_number_correlators_closed_form: tau must be >= 0");

    const cd L1 = m.Lambda1;
    if (std::abs(L1) * std::max(tau, 1.0) < 1e-9 * m.kappa) {
        // Fold-threshold confluence: the 1/(2 Lambda_1) forms are 0/0.
        return c_number_correlators(m, tau);
    }

    const cd ep = std::exp(-m.lambda_plus * tau);
    const cd em = std::exp(-m.lambda_minus * tau);
    const cd c = cd(m.c, 0.0);
    const cd beta0_sq = m.beta0 * m.beta0;
    const cd alpha0_sq = std::conj(beta0_sq);
    const double lam = m.lambda11;

    const cd bb = m.one_time(0, 0);    // <beta_1^2>
    const cd ba = m.one_time(0, 1);    // <beta_1 alpha_1>
    const cd aa = m.one_time(1, 1);    // <alpha_1^2>

    const cd sum_pm = ((L1 + c) * ep + (L1 - c) * em) / (2.0 * L1);
    const cd sum_mp = ((L1 - c) * ep + (L1 + c) * em) / (2.0 * L1);
    const cd diff = (ep - em) / L1;

    Matrix2c C;
    C(0, 0) = sum_pm * bb + lam * beta0_sq * diff * ba;
    C(0, 1) = sum_pm * ba + lam * beta0_sq * diff * aa;
    C(1, 0) = -lam * alpha0_sq * diff * bb + sum_mp * ba;
    C(1, 1) = -lam * alpha0_sq * diff * ba + sum_mp * aa;
    return C;
}

std::complex<double> operator_correlator(const FluctuationModel& m, double tau,
                                         Channel channel, TimeOrder order) {
    const Matrix2c C = c_number_correlators(m, tau);
    const Matrix2c M = propagator(m, tau);

    if (order == TimeOrder::later_first) {
        switch (channel) {
            case Channel::bb:        return C(0, 0);               // <b1(t+tau) b1(t)>
            case Channel::b_bdag:    return C(0, 1) + M(0, 0);     // <b1(t+tau) b1+(t)>
            case Channel::bdag_b:    return C(1, 0);               // <b1+(t+tau) b1(t)>
            case Channel::bdag_bdag: return C(1, 1) + M(1, 0);     // <b1+(t+tau) b1+(t)>
        }
    } else {
        switch (channel) {
            case Channel::bb:        return C(0, 0) + M(0, 1);     // <b1(t) b1(t+tau)>
            case Channel::b_bdag:    return C(1, 0) + M(1, 1);     // <b1(t) b1+(t+tau)>
            case Channel::bdag_b:    return C(0, 1);               // <b1+(t) b1(t+tau)>
            case Channel::bdag_bdag: return C(1, 1);               // <b1+(t) b1+(t+tau)>
        }
    }
    throw std::logic_error("operator_correlator: bad channel");
}

Matrix2c stationary_covariance_lyapunov(const Matrix2c& A, const Matrix2c& D) {
    // Vectorize A C + C A^T = D as (I (x) A + A (x) I) vec(C) = vec(D),
    // with vec stacking rows.
    Eigen::Matrix4cd K = Eigen::Matrix4cd::Zero();
    Eigen::Vector4cd d;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const int r = 2 * i + j;
            d(r) = D(i, j);
            for (int k = 0; k < 2; ++k) {
                K(r, 2 * k + j) += A(i, k);   // (A C)_{ij}
                K(r, 2 * i + k) += A(j, k);   // (C A^T)_{ij}
            }
        }
    const Eigen::Vector4cd c = K.fullPivLu().solve(d);
    Matrix2c C;
    C << c(0), c(1), c(2), c(3);
    return C;
}

}  // namespace qnd
