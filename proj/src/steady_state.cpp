#include "qnd/steady_state.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qnd {

namespace {

// Residual of the steady-state relation and its derivative in n0.
// f(n) = n [kappa^2 + (d + 2 lam n)^2] - eps^2, with d = delta_omega + lambda11.
double cubic_residual(double n, double kappa, double d, double lam, double eps) {
    const double s = d + 2.0 * lam * n;
    return n * (kappa * kappa + s * s) - eps * eps;
}

double cubic_derivative(double n, double kappa, double d, double lam) {
    const double s = d + 2.0 * lam * n;
    // d/dn = kappa^2 + s^2 + 4 lam n s, which equals Lambda^2 at a root.
    return kappa * kappa + s * s + 4.0 * lam * n * s;
}

double newton_polish(double n, double kappa, double d, double lam, double eps) {
    for (int i = 0; i < 3; ++i) {
        const double df = cubic_derivative(n, kappa, d, lam);
        if (df == 0.0) break;
        n -= cubic_residual(n, kappa, d, lam, eps) / df;
    }
    return n;
}

// Real roots of t^3 + p t + q = 0.
std::vector<double> depressed_cubic_roots(double p, double q) {
    std::vector<double> roots;
    const double disc = -4.0 * p * p * p - 27.0 * q * q;
    if (disc > 0.0) {
        // Three distinct real roots (trigonometric form; p < 0 here).
        const double m = 2.0 * std::sqrt(-p / 3.0);
        double arg = 3.0 * q / (p * m);
        arg = std::clamp(arg, -1.0, 1.0);
        const double theta = std::acos(arg);
        for (int k = 0; k < 3; ++k)
            roots.push_back(m * std::cos((theta - 2.0 * M_PI * k) / 3.0));
    } else {
        // One real root (Cardano), plus the double root at the fold.
        const double half_q = q / 2.0;
        const double r = std::sqrt(std::max(0.0, half_q * half_q + p * p * p / 27.0));
        const double u = std::cbrt(-half_q + r);
        const double v = std::cbrt(-half_q - r);
        roots.push_back(u + v);
        if (disc == 0.0 && (p != 0.0 || q != 0.0))
            roots.push_back(-(u + v) / 2.0);
    }
    return roots;
}

SteadyStateBranch make_branch(double n, const AncillaParams& p) {
    const double kappa = p.kappa();
    const double d = p.delta_omega + p.lambda11;
    const double lam = p.lambda11;

    SteadyStateBranch b;
    b.n0 = n;
    const std::complex<double> denom(kappa, d + 2.0 * lam * n);
    b.beta0 = std::complex<double>(0.0, -p.epsilon) / denom;
    const double L = lam * n;
    b.lambda1_sq = d * d + 8.0 * d * L + 12.0 * L * L;
    b.lambda_sq = kappa * kappa + b.lambda1_sq;
    b.stable = b.lambda_sq > 0.0;
    return b;
}

}  // namespace

SteadyStateSolution solve_steady_state(const AncillaParams& p) {
    p.validate();
    const double kappa = p.kappa();
    const double d = p.delta_omega + p.lambda11;
    const double lam = p.lambda11;
    const double eps = p.epsilon;

    std::vector<double> roots;
    if (lam == 0.0 || eps == 0.0) {
        roots.push_back(eps == 0.0 ? 0.0
                                   : eps * eps / (kappa * kappa + d * d));
    } else {
        // 4 lam^2 n^3 + 4 lam d n^2 + (kappa^2 + d^2) n - eps^2 = 0,
        // normalized and depressed before the closed-form solve.
        const double B = d / lam;
        const double C = (kappa * kappa + d * d) / (4.0 * lam * lam);
        const double E = -eps * eps / (4.0 * lam * lam);
        const double pd = C - B * B / 3.0;
        const double qd = 2.0 * B * B * B / 27.0 - B * C / 3.0 + E;
        for (double t : depressed_cubic_roots(pd, qd)) {
            double n = newton_polish(t - B / 3.0, kappa, d, lam, eps);
            if (n > -1e-12 * std::max(1.0, std::abs(n))) roots.push_back(std::max(0.0, n));
        }
    }
    std::sort(roots.begin(), roots.end());

    SteadyStateSolution sol;
    for (double n : roots) {
        // Coalesce a double root at a fold into one branch with multiplicity 2.
        if (!sol.branches.empty()) {
            double prev = sol.branches.back().n0;
            if (std::abs(n - prev) <= 1e-7 * std::max(1.0, std::abs(n))) {
                sol.branches.back().multiplicity += 1;
                continue;
            }
        }
        sol.branches.push_back(make_branch(n, p));
    }

    sol.operating = 0;
    for (std::size_t i = 0; i < sol.branches.size(); ++i) {
        if (sol.branches[i].stable) {
            sol.operating = i;
            break;
        }
    }
    return sol;
}

StabilityChecks stability_matrix_checks(const SteadyStateBranch& branch,
                                        const AncillaParams& p) {
    const double kappa = p.kappa();
    const double c = 4.0 * p.lambda11 * branch.n0 + p.delta_omega + p.lambda11;
    const std::complex<double> a11(kappa, c);
    const std::complex<double> a22(kappa, -c);
    const std::complex<double> a12 =
        std::complex<double>(0.0, 2.0 * p.lambda11) * branch.beta0 * branch.beta0;
    const std::complex<double> a21 =
        std::complex<double>(0.0, -2.0 * p.lambda11) * std::conj(branch.beta0) *
        std::conj(branch.beta0);
    const std::complex<double> tr = a11 + a22;
    const std::complex<double> det = a11 * a22 - a12 * a21;
    return {tr.real(), det.real()};
}

namespace {

double min_branch_lambda_sq(const AncillaParams& base, const SweepSpec& sweep,
                            double x) {
    AncillaParams p = base;
    if (sweep.variable == SweepVariable::detuning)
        p.delta_omega = x;
    else
        p.epsilon = x;
    const auto sol = solve_steady_state(p);
    double m = sol.branches.front().lambda_sq;
    for (const auto& b : sol.branches) m = std::min(m, b.lambda_sq);
    return m;
}

}  // namespace

std::vector<FoldPoint> instability_boundary(const AncillaParams& base,
                                            const SweepSpec& sweep) {
    if (sweep.points < 2) throw std::invalid_argument("instability_boundary: need >= 2 grid points");
    std::vector<FoldPoint> folds;
    const double step = (sweep.max - sweep.min) / double(sweep.points - 1);

    double x_prev = sweep.min;
    double g_prev = min_branch_lambda_sq(base, sweep, x_prev);
    for (std::size_t i = 1; i < sweep.points; ++i) {
        const double x = sweep.min + double(i) * step;
        const double g = min_branch_lambda_sq(base, sweep, x);
        if ((g_prev > 0.0) != (g > 0.0)) {
            double lo = x_prev, hi = x, glo = g_prev;
            while (std::abs(hi - lo) > 1e-9 * std::max(1.0, std::abs(hi))) {
                const double mid = 0.5 * (lo + hi);
                const double gm = min_branch_lambda_sq(base, sweep, mid);
                if ((glo > 0.0) == (gm > 0.0)) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            const double xf = 0.5 * (lo + hi);
            if (sweep.variable == SweepVariable::detuning)
                folds.push_back({xf, base.epsilon});
            else
                folds.push_back({base.delta_omega, xf});
        }
        x_prev = x;
        g_prev = g;
    }
    return folds;
}

}  // namespace qnd
