#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <random>

#include <Eigen/Dense>

#include "qnd/params.hpp"
#include "qnd/steady_state.hpp"

namespace testutil {

// Random ancilla parameters with unit-order kappa; filter for a stable
// operating branch happens at the call site when needed.
inline qnd::AncillaParams random_params(std::mt19937_64& rng, bool with_kerr = true) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    qnd::AncillaParams p;
    p.damping_thermal = 0.2 + 0.8 * u(rng);
    p.damping_measurement = 0.2 + 0.8 * u(rng);
    p.delta_omega = -3.0 + 6.0 * u(rng);
    p.lambda11 = with_kerr ? 0.5 * u(rng) : 0.0;
    p.epsilon = 3.0 * u(rng);
    p.occupation_thermal = u(rng);
    p.occupation_measurement = u(rng);
    return p;
}

inline qnd::SteadyStateBranch random_stable_branch(std::mt19937_64& rng,
                                                   qnd::AncillaParams& p_out,
                                                   bool with_kerr = true) {
    for (;;) {
        qnd::AncillaParams p = random_params(rng, with_kerr);
        const auto sol = qnd::solve_steady_state(p);
        for (const auto& b : sol.branches)
            if (b.stable && b.n0 > 1e-6) {
                p_out = p;
                return b;
            }
    }
}

// Plain scaling-and-squaring matrix exponential; deliberately independent
// of the closed-form propagator.
inline Eigen::Matrix2cd expm(const Eigen::Matrix2cd& M) {
    const double norm = M.cwiseAbs().maxCoeff();
    int squarings = 0;
    double scale = 1.0;
    while (norm * scale > 0.25) {
        scale *= 0.5;
        ++squarings;
    }
    const Eigen::Matrix2cd S = M * scale;
    Eigen::Matrix2cd result = Eigen::Matrix2cd::Identity();
    Eigen::Matrix2cd term = Eigen::Matrix2cd::Identity();
    for (int k = 1; k <= 24; ++k) {
        term = term * S / double(k);
        result += term;
    }
    for (int i = 0; i < squarings; ++i) result = result * result;
    return result;
}

// Adaptive Simpson quadrature for complex integrands.
inline std::complex<double> simpson_step(
    const std::function<std::complex<double>(double)>& f, double a, double b,
    std::complex<double> fa, std::complex<double> fm, std::complex<double> fb,
    std::complex<double> whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const std::complex<double> flm = f(lm), frm = f(rm);
    const std::complex<double> left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const std::complex<double> right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

inline std::complex<double> integrate(
    const std::function<std::complex<double>(double)>& f, double a, double b,
    double tol = 1e-12) {
    const std::complex<double> fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const std::complex<double> whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, b, fa, fm, fb, whole, tol, 40);
}

}  // namespace testutil
