#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>

#include "helpers.hpp"
#include "qnd/effective.hpp"
#include "qnd/fluctuations.hpp"
#include "qnd/steady_state.hpp"

using namespace qnd;
using cd = std::complex<double>;

namespace {

struct Built {
    SteadyStateBranch branch;
    FluctuationModel fluct;
};

Built build(const AncillaParams& p) {
    const auto b = solve_steady_state(p).operating_branch();
    return {b, build_model(b, p)};
}

// Quadrature oracle: Gamma and Theta from the tau integral of the weighted
// operator correlators, evaluated by adaptive Simpson instead of the
// propagator-integral identity used in the library.
cd correlator_integral(const FluctuationModel& m, double t_max) {
    const cd beta0 = m.beta0;
    const cd alpha0 = std::conj(beta0);
    const double n0 = m.n0;
    auto integrand = [&](double tau) {
        return alpha0 * alpha0 *
                   operator_correlator(m, tau, Channel::bb, TimeOrder::later_first) +
               n0 * operator_correlator(m, tau, Channel::b_bdag, TimeOrder::later_first) +
               n0 * operator_correlator(m, tau, Channel::bdag_b, TimeOrder::later_first) +
               beta0 * beta0 *
                   operator_correlator(m, tau, Channel::bdag_bdag, TimeOrder::later_first);
    };
    const double scale = std::max(std::abs(integrand(0.0)), 1.0);
    return testutil::integrate(integrand, 0.0, t_max, 1e-11 * scale);
}

}  // namespace

TEST_CASE("zero-detuning linear limits") {
    AncillaParams p;
    p.epsilon = 1.1;
    p.occupation_thermal = 0.35;
    p.occupation_measurement = 0.35;
    CouplingParams c{0.02};
    const auto [branch, fluct] = build(p);
    const auto eff = effective_coefficients(branch, fluct, p, c, 3e-4);
    const double k = p.kappa();
    const double N1 = 0.35;

    CHECK(eff.gamma == doctest::Approx(eff.gamma0).epsilon(1e-13));
    CHECK(eff.gamma == doctest::Approx(c.lambda01 * c.lambda01 * p.epsilon * p.epsilon *
                                       (2.0 * N1 + 1.0) / (k * k * k))
                           .epsilon(1e-13));
    CHECK(eff.ratio == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(eff.delta ==
          doctest::Approx(c.lambda01 * (branch.n0 + N1)).epsilon(1e-13));
    CHECK(eff.theta == doctest::Approx(3e-4).epsilon(1e-13));
}

TEST_CASE("undriven ancilla") {
    AncillaParams p;
    p.delta_omega = 0.8;
    p.lambda11 = 0.2;
    p.epsilon = 0.0;
    p.occupation_thermal = 0.5;
    p.occupation_measurement = 0.5;
    CouplingParams c{0.05};
    const auto [branch, fluct] = build(p);
    const auto eff = effective_coefficients(branch, fluct, p, c, 0.0);
    CHECK(eff.gamma == 0.0);
    // n0 = 0, so Delta reduces to lam01 N1 (thermal Stark shift only).
    CHECK(eff.delta == doctest::Approx(c.lambda01 * 0.5).epsilon(1e-13));
    CHECK(eff.theta == 0.0);
}

TEST_CASE("compact and bracketed Gamma agree") {
    std::mt19937_64 rng(47);
    CouplingParams c{0.013};
    for (int i = 0; i < 2000; ++i) {
        AncillaParams p;
        const auto branch = testutil::random_stable_branch(rng, p);
        const auto fluct = build_model(branch, p);
        const auto eff = effective_coefficients(branch, fluct, p, c, 0.0);
        const double g2 = gamma_bracketed(branch, p, c);
        CHECK(eff.gamma == doctest::Approx(g2).epsilon(1e-12));
        // Gamma / Gamma0 always equals kappa^4 / Lambda^4.
        const double k = p.kappa();
        CHECK(eff.ratio ==
              doctest::Approx(std::pow(k * k / branch.lambda_sq, 2)).epsilon(1e-12));
        CHECK(eff.gamma ==
              doctest::Approx(eff.gamma0 * eff.ratio).epsilon(1e-12));
        // Gamma scales as lambda01^2; Delta as lambda01.
        CouplingParams c2{2.0 * c.lambda01};
        const auto eff2 = effective_coefficients(branch, fluct, p, c2, 0.0);
        CHECK(eff2.gamma == doctest::Approx(4.0 * eff.gamma).epsilon(1e-12));
        CHECK(eff2.delta == doctest::Approx(2.0 * eff.delta).epsilon(1e-12));
    }
}

TEST_CASE("linear-ancilla ratio is the squared Lorentzian") {
    AncillaParams p;
    p.epsilon = 0.9;
    CouplingParams c{0.01};
    for (double dw : {0.0, 0.3, -0.3, 1.0, -1.0, 2.5}) {
        p.delta_omega = dw;
        const auto [branch, fluct] = build(p);
        const auto eff = effective_coefficients(branch, fluct, p, c, 0.0);
        const double k = p.kappa();
        const double lorentzian_sq = std::pow(k * k / (k * k + dw * dw), 2);
        CHECK(eff.ratio == doctest::Approx(lorentzian_sq).epsilon(1e-12));
    }
    // Spot values: 1 on resonance, 1/4 at one linewidth detuning.
    p.delta_omega = 0.0;
    CHECK(build(p).branch.lambda_sq == doctest::Approx(1.0).epsilon(1e-13));
    p.delta_omega = p.kappa();
    const auto [b1, f1] = build(p);
    CHECK(effective_coefficients(b1, f1, p, c, 0.0).ratio ==
          doctest::Approx(0.25).epsilon(1e-12));
    p.delta_omega = -p.kappa();
    const auto [b2, f2] = build(p);
    CHECK(effective_coefficients(b2, f2, p, c, 0.0).ratio ==
          doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("gamma ratio sweep: symmetry and Kerr-shifted peak") {
    AncillaParams base;
    base.epsilon = 0.9;

    // lambda11 = 0: even in detuning, peak exactly at zero.
    auto rows = gamma_ratio_sweep(base, -3.0, 3.0, 601);
    REQUIRE(rows.size() == 601);
    std::size_t best = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].ratio ==
              doctest::Approx(rows[rows.size() - 1 - i].ratio).epsilon(1e-12));
        CHECK(rows[i].stable);
        if (rows[i].ratio > rows[best].ratio) best = i;
    }
    CHECK(rows[best].delta_omega == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rows[best].ratio == doctest::Approx(1.0).epsilon(1e-12));

    // Kerr ancilla: the peak moves to negative detuning and exceeds 1.
    base.lambda11 = 0.08;
    rows = gamma_ratio_sweep(base, -3.0, 3.0, 601);
    best = 0;
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i].ratio > rows[best].ratio) best = i;
    CHECK(rows[best].delta_omega < 0.0);
    CHECK(rows[best].ratio > 1.0);

    // Strong Kerr across the bistable window: every grid point still gets a
    // row, and the operating branch is stable throughout because the cubic
    // slope identity d(eps^2)/dn = Lambda^2 makes any single root stable.
    base.lambda11 = 0.5;
    base.epsilon = 1.65;
    rows = gamma_ratio_sweep(base, -4.0, 0.0, 801);
    CHECK(rows.size() == 801);
    for (const auto& r : rows) {
        CHECK(r.stable);
        CHECK(std::isfinite(r.ratio));
        CHECK(r.ratio > 0.0);
    }
}

TEST_CASE("literal complex Kerr transcription diagnostic") {
    AncillaParams p;
    p.delta_omega = -0.7;
    p.lambda11 = 0.12;
    p.epsilon = 1.4;
    CouplingParams c{0.02};
    const auto [branch, fluct] = build(p);
    const cd lit = theta_literal(branch, p, c, 1e-3);
    // The literal transcription is complex whenever lambda11 != 0 --
    // impossible for the coefficient of a Hermitian double commutator.
    CHECK(lit.imag() == doctest::Approx(c.lambda01 * c.lambda01 * branch.n0 *
                                        p.lambda11 / branch.lambda_sq)
                            .epsilon(1e-12));

    AncillaParams lin = p;
    lin.lambda11 = 0.0;
    const auto [lb, lf] = build(lin);
    const cd lit0 = theta_literal(lb, lin, c, 1e-3);
    CHECK(lit0.imag() == 0.0);
    const auto eff0 = effective_coefficients(lb, lf, lin, c, 1e-3);
    // Same magnitude of the induced Kerr term, opposite sign convention.
    CHECK(std::abs(lit0.real() - 1e-3) ==
          doctest::Approx(std::abs(eff0.theta - 1e-3)).epsilon(1e-12));
}

TEST_CASE("integral reconstruction of the coefficients") {
    CouplingParams c{0.02};
    const double lam00 = 2e-4;

    // Resonant linear case first.
    AncillaParams lin;
    lin.epsilon = 1.0;
    lin.occupation_thermal = 0.4;
    lin.occupation_measurement = 0.0;
    {
        const auto [branch, fluct] = build(lin);
        const auto eff = effective_coefficients(branch, fluct, lin, c, lam00);
        const auto ic = coefficients_from_integrals(fluct, branch, c, lam00, 40.0);
        CHECK(ic.gamma == doctest::Approx(eff.gamma).epsilon(1e-6));
        CHECK(ic.delta == doctest::Approx(eff.delta).epsilon(1e-6));
        CHECK(ic.theta == doctest::Approx(eff.theta)
                              .epsilon(1e-6)
                              .scale(std::max(std::abs(eff.theta), 1e-6)));
    }

    // Random stable draws, including an independent Simpson quadrature of
    // the correlator integral.
    std::mt19937_64 rng(53);
    for (int i = 0; i < 25; ++i) {
        AncillaParams p;
        const auto branch = testutil::random_stable_branch(rng, p);
        const auto fluct = build_model(branch, p);
        const double t_max = 45.0 / p.kappa();
        const auto eff = effective_coefficients(branch, fluct, p, c, lam00);
        const auto ic = coefficients_from_integrals(fluct, branch, c, lam00, t_max);
        const double gscale = std::max(std::abs(eff.gamma), 1e-9);
        CHECK(std::abs(ic.gamma - eff.gamma) < 1e-6 * gscale);
        CHECK(std::abs(ic.delta - eff.delta) <
              1e-6 * std::max(std::abs(eff.delta), 1e-9));
        CHECK(std::abs(ic.theta - eff.theta) <
              1e-6 * std::max(std::abs(eff.theta), 1e-9));

        const cd quad = correlator_integral(fluct, t_max);
        CHECK(std::abs(c.lambda01 * c.lambda01 * quad.real() - eff.gamma) <
              1e-6 * gscale);
        CHECK(std::abs(lam00 + c.lambda01 * c.lambda01 * quad.imag() - eff.theta) <
              1e-6 * std::max(std::abs(eff.theta), 1e-9));
    }
}

TEST_CASE("effective coefficients refuse unstable branches") {
    AncillaParams p;
    p.delta_omega = -3.0;
    p.lambda11 = 0.5;
    p.epsilon = 1.65;
    const auto sol = solve_steady_state(p);
    REQUIRE(sol.branches.size() == 3);
    const auto fluct = build_model(sol.branches[1], p);
    CouplingParams c{0.01};
    CHECK_THROWS_AS(effective_coefficients(sol.branches[1], fluct, p, c, 0.0),
                    std::domain_error);
    CHECK_THROWS_AS(coefficients_from_integrals(fluct, sol.branches[1], c, 0.0, 10.0),
                    std::domain_error);
}

TEST_CASE("QND figure of merit") {
    SystemParams sys;
    sys.nu = 1.2e6;
    const auto r = qnd_figure_of_merit(1.5e4, sys);
    CHECK(r.gamma_over_nu == doctest::Approx(0.0125).epsilon(1e-13));
    CHECK_FALSE(r.verdict);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2g", r.gamma_over_nu);
    CHECK(std::string(buf) == "0.013");

    sys.nu = 1.0;
    CHECK_FALSE(qnd_figure_of_merit(1.0, sys).verdict);  // ratio 1 is not >> 1
    CHECK(qnd_figure_of_merit(100.0, sys).verdict);
    CHECK(qnd_figure_of_merit(100.0, sys).gamma_over_nu ==
          doctest::Approx(100.0).epsilon(1e-14));

    sys.nu = 0.0;
    CHECK_THROWS(qnd_figure_of_merit(1.0, sys));
}
