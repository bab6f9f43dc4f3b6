#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "qnd/params.hpp"

namespace qnd {

/// One real root of the driven-Kerr steady-state cubic
///   eps^2 = n0 [ kappa^2 + (delta_omega + lambda11 + 2 lambda11 n0)^2 ].
struct SteadyStateBranch {
    double n0 = 0.0;                       ///< mean occupation |beta0|^2
    std::complex<double> beta0{0.0, 0.0};  ///< complex steady-state amplitude
    double lambda1_sq = 0.0;               ///< Lambda_1^2 (may be negative)
    double lambda_sq = 0.0;                ///< Lambda^2 = kappa^2 + Lambda_1^2
    bool stable = false;                   ///< Hurwitz: Lambda^2 > 0 (Tr A = 2 kappa > 0 always)
    int multiplicity = 1;                  ///< 2 at a fold point (double root)
};

struct SteadyStateSolution {
    std::vector<SteadyStateBranch> branches;  ///< sorted ascending by n0
    std::size_t operating = 0;                ///< lowest-n0 stable branch

    const SteadyStateBranch& operating_branch() const { return branches[operating]; }
};

/// All real non-negative roots of the steady-state cubic, each with the
/// reconstructed amplitude and Hurwitz stability flag. lambda11 = 0
/// degenerates to the single linear-oscillator root; epsilon = 0 returns
/// the trivial branch n0 = 0.
SteadyStateSolution solve_steady_state(const AncillaParams& p);

/// Trace and determinant of the explicit linearized drift matrix at a
/// branch. Tr A = 2 kappa exactly; Det A = Lambda^2.
struct StabilityChecks {
    double trace;
    double determinant;
};
StabilityChecks stability_matrix_checks(const SteadyStateBranch& branch,
                                        const AncillaParams& p);

/// Variable swept by instability_boundary.
enum class SweepVariable { detuning, drive };

struct SweepSpec {
    SweepVariable variable = SweepVariable::drive;
    double min = 0.0;
    double max = 1.0;
    std::size_t points = 101;
};

/// Fold point of the cubic: parameter values where the branch count
/// changes (min over branches of Lambda^2 crosses zero).
struct FoldPoint {
    double delta_omega;
    double epsilon;
};

/// Locates fold points of the steady-state cubic along a 1-d parameter
/// sweep by bisection on the sign of min-branch Lambda^2 (relative
/// tolerance 1e-9). Empty for a linear oscillator.
std::vector<FoldPoint> instability_boundary(const AncillaParams& base,
                                            const SweepSpec& sweep);

}  // namespace qnd
