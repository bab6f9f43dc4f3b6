#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "qnd/params.hpp"

namespace qnd::pp {

/// One point of the generalized-P phase space. beta and alpha are
/// independent complex amplitudes: individual samples are not conjugate
/// pairs, only the ensemble means are.
struct PhasePoint {
    std::complex<double> beta{0.0, 0.0};
    std::complex<double> alpha{0.0, 0.0};
};

/// Deterministic part of the Ito equations:
/// d beta /dt = -i eps - beta (kappa + i dw + i lam11 + 2 i lam11 beta alpha),
/// d alpha/dt = +i eps - alpha (kappa - i dw - i lam11 - 2 i lam11 alpha beta).
PhasePoint drift(const PhasePoint& pt, const AncillaParams& p);

/// Symmetric matrix square root B of the state-dependent diffusion matrix
/// D(pt) = [[-2i lam11 beta^2, 2 kappa N1], [2 kappa N1, 2i lam11 alpha^2]],
/// with B B^T = D entrywise to better than 1e-12 in magnitude. Uses the
/// 2x2 closed form (D + sqrt(det) I)/sqrt(tr + 2 sqrt(det)) with a rank-1
/// branch when det(D) = 0.
Eigen::Matrix2cd noise_factor(const PhasePoint& pt, const AncillaParams& p);

struct EnsembleOptions {
    long n_traj = 10000;
    double dt = 0.01;           ///< in units of 1/kappa when kappa = 1
    double t_final = 30.0;
    double transient = 10.0;    ///< discard window before averaging
    std::uint64_t seed = 1;
    int n_batches = 20;         ///< batch-means blocks for standard errors
    double divergence_cutoff = 1e3;  ///< scaled by max(1, sqrt(n0)) internally
};

/// Moment estimate with a batch-means standard error (combined over the
/// real and imaginary components).
struct Estimate {
    std::complex<double> value{0.0, 0.0};
    double std_error = 0.0;
};

struct EnsembleStats {
    long n_traj = 0;             ///< trajectories contributing to the averages
    long divergence_count = 0;   ///< trajectories discarded at the cutoff
    Estimate mean_beta;
    Estimate mean_alpha;
    Estimate beta1_sq;      ///< <beta_1^2>
    Estimate beta1_alpha1;  ///< <beta_1 alpha_1>
    Estimate alpha1_sq;     ///< <alpha_1^2>
};

/// Euler-Maruyama ensemble over independent trajectories with
/// per-trajectory RNG streams derived from (seed, index): results are
/// bit-identical for a fixed seed regardless of scheduling.
EnsembleStats run_ensemble(const AncillaParams& p, const EnsembleOptions& opts);

/// Per-step sample sink for the CLI dump (trajectory index, time, point).
struct TrajectorySample {
    long traj;
    double t;
    PhasePoint point;
};
std::vector<TrajectorySample> sample_trajectories(const AncillaParams& p,
                                                  const EnsembleOptions& opts,
                                                  long n_dump, long stride);

}  // namespace qnd::pp
