#pragma once

#include <complex>

#include <Eigen/Dense>

#include "qnd/params.hpp"
#include "qnd/steady_state.hpp"

namespace qnd {

using Matrix2c = Eigen::Matrix2cd;

/// Linearized fluctuation model of the driven Kerr ancilla around one
/// steady-state branch: drift matrix A, diffusion matrix D, eigenvalues
/// kappa +- i Lambda_1 and the stationary covariance C(t,t) of the
/// c-number fluctuation vector (beta_1, alpha_1).
struct FluctuationModel {
    Matrix2c A;         ///< drift matrix (Tr A = 2 kappa, Det A = Lambda^2)
    Matrix2c D;         ///< diffusion matrix (symmetric, D12 = D21 = 2 kappa N1)
    Matrix2c one_time;  ///< stationary covariance C(t,t)
    std::complex<double> lambda_plus;   ///< kappa + i Lambda_1
    std::complex<double> lambda_minus;  ///< kappa - i Lambda_1
    std::complex<double> Lambda1;       ///< principal sqrt of Lambda_1^2
    double c = 0.0;  ///< 4 lambda11 n0 + delta_omega + lambda11
    double kappa = 0.0;
    double lambda11 = 0.0;
    double N1 = 0.0;
    double n0 = 0.0;
    double lambda_sq = 0.0;
    double lambda1_sq = 0.0;
    std::complex<double> beta0{0.0, 0.0};
    bool stable = false;
};

FluctuationModel build_model(const SteadyStateBranch& branch, const AncillaParams& p);

/// Propagator M(tau) = exp(-A tau), evaluated from the closed form
/// e^{-kappa tau} [cos(Lambda_1 tau) I - sinc(Lambda_1 tau) tau (A - kappa I)],
/// which handles the confluent Lambda_1 -> 0 limit without division by zero.
/// Throws for tau < 0 (use the transpose relation for the other time order).
Matrix2c propagator(const FluctuationModel& m, double tau);

/// Two-time c-number correlator matrix C(t + tau, t) = M(tau) C(t,t).
/// Throws std::domain_error on an unstable branch.
Matrix2c c_number_correlators(const FluctuationModel& m, double tau);

/// Same matrix assembled from the four closed-form expressions of the
/// two-time correlation functions (sums of e^{-lambda_+- tau} terms).
/// Kept as a deliberately independent code path; the two must agree
/// entrywise. Note: the entries here follow the matrix-product layout;
/// the source material's transcription swaps the labels of the two
/// off-diagonal expressions.
Matrix2c c_number_correlators_closed_form(const FluctuationModel& m, double tau);

/// Operator two-time correlator channels of the fluctuation operators
/// b_1, b_1^dag (c-number correlator plus the appropriate M element).
enum class Channel { bb, b_bdag, bdag_b, bdag_bdag };

/// Which argument carries the later time t + tau: the left operator
/// (later_first, e.g. <b_1(t+tau) b_1^dag(t)>) or the right one.
enum class TimeOrder { later_first, earlier_first };

std::complex<double> operator_correlator(const FluctuationModel& m, double tau,
                                         Channel channel, TimeOrder order);

/// Stationary covariance from the Lyapunov equation A C + C A^T = D, via a
/// generic 4x4 linear solve. Independent of the closed-form one_time entry.
Matrix2c stationary_covariance_lyapunov(const Matrix2c& A, const Matrix2c& D);

}  // namespace qnd
