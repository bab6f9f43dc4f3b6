#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "qnd/fluctuations.hpp"
#include "qnd/fock.hpp"
#include "qnd/steady_state.hpp"

using namespace qnd;
using namespace qnd::fock;
using cd = std::complex<double>;

namespace {

AncillaParams weak_kerr() {
    AncillaParams p;
    p.delta_omega = 0.3;
    p.lambda11 = 0.01;
    p.epsilon = 0.8;
    p.occupation_thermal = 0.2;
    p.occupation_measurement = 0.2;
    return p;
}

}  // namespace

TEST_CASE("operator algebra on the truncated space") {
    const int dim = 12;
    const Sparse a = annihilation(dim);
    const Sparse ad = creation(dim);
    const Matrix comm = Matrix(ad * a) - Matrix(number_op(dim));
    CHECK(comm.cwiseAbs().maxCoeff() < 1e-14);
    // [a, a+] = 1 except in the unavoidable top corner of the truncation.
    const Matrix c2 = Matrix(a * ad) - Matrix(ad * a);
    for (int i = 0; i < dim - 1; ++i) CHECK(std::abs(c2(i, i) - 1.0) < 1e-14);
    CHECK(std::abs(c2(dim - 1, dim - 1) + double(dim - 1)) < 1e-12);

    // kron dimensions and a mixed expectation value.
    const Sparse joint = kron(number_op(3), identity_op(4));
    CHECK(joint.rows() == 12);
    const Sparse proj = fock_projector(3, 2).sparseView();
    const Sparse th = thermal_state(4, 0.5).sparseView();
    const Matrix rho = Matrix(kron(proj, th));
    CHECK(expectation(joint, rho).real() == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("thermal state is stationary for the undriven ancilla") {
    AncillaParams p;
    p.epsilon = 0.0;
    p.occupation_thermal = 0.4;
    p.occupation_measurement = 0.4;
    const int dim = 30;
    const auto gen = ancilla_generator(p, dim);
    const Matrix rho0 = thermal_state(dim, 0.4);
    // The generator itself must annihilate the thermal state...
    CHECK(gen.apply(rho0).cwiseAbs().maxCoeff() < 1e-12);
    // ...and time evolution must preserve it (tight integrator tolerance:
    // the check is on the physics, not on integration noise).
    EvolveOptions tight;
    tight.tol = 1e-12;
    const Matrix rho1 = evolve(gen, rho0, 2.0, tight);
    CHECK((rho1 - rho0).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("amplitude decay rate is kappa") {
    // With the factor-2 dissipator convention, <n> of an initial |1><1|
    // relaxes to zero as e^{-2 kappa t} for a vacuum bath.
    AncillaParams p;
    p.epsilon = 0.0;
    const int dim = 6;
    const auto gen = ancilla_generator(p, dim);
    Matrix rho = fock_projector(dim, 1);
    const double t = 0.5;
    EvolveOptions opts;
    opts.tol = 1e-10;
    rho = evolve(gen, rho, t, opts);
    const double n = expectation(number_op(dim), rho).real();
    CHECK(n == doctest::Approx(std::exp(-2.0 * p.kappa() * t)).epsilon(1e-8));

    // And <b> of a superposition decays at kappa itself.
    Matrix sup = Matrix::Zero(dim, dim);
    sup(0, 0) = 0.5;
    sup(0, 1) = 0.5;
    sup(1, 0) = 0.5;
    sup(1, 1) = 0.5;
    const Matrix sup_t = evolve(gen, sup, t, opts);
    const cd b0 = expectation(annihilation(dim), sup);
    const cd bt = expectation(annihilation(dim), sup_t);
    CHECK(std::abs(bt - b0 * std::exp(-p.kappa() * t)) < 1e-8);
}

TEST_CASE("trace and Hermiticity are preserved") {
    const AncillaParams p = weak_kerr();
    const int dim = suggested_dim(1.0, 0.2);
    const auto gen = ancilla_generator(p, dim);
    Matrix rho = thermal_state(dim, 0.2);
    rho = evolve(gen, rho, 3.0);
    CHECK(std::abs(rho.trace().real() - 1.0) < 1e-7);
    CHECK((rho - rho.adjoint().eval()).cwiseAbs().maxCoeff() < 1e-9);
    // Populations stay a probability distribution.
    for (int i = 0; i < dim; ++i) CHECK(rho(i, i).real() > -1e-10);
}

TEST_CASE("driven linear ancilla: exact displaced thermal steady state") {
    AncillaParams p;
    p.delta_omega = 0.6;
    p.epsilon = 0.9;
    p.occupation_thermal = 0.3;
    p.occupation_measurement = 0.0;
    const auto br = solve_steady_state(p).operating_branch();
    const double N1 = p.combined_occupation();
    // Pad the default truncation: the displaced thermal tail limits the
    // achievable accuracy before the integrator tolerance does.
    const int dim = suggested_dim(br.n0, N1) + 8;
    EvolveOptions tight;
    tight.tol = 1e-13;
    const auto gen = ancilla_generator(p, dim);
    const auto ss_res =
        steady_state(gen, thermal_state(dim, N1), 1e-12, 2000.0, tight);
    const cd mean_b = expectation(annihilation(dim), ss_res.rho);
    CHECK(std::abs(mean_b - br.beta0) < 1e-8);
    const double mean_n = expectation(number_op(dim), ss_res.rho).real();
    CHECK(mean_n == doctest::Approx(br.n0 + N1).epsilon(1e-8));
    CHECK(ss_res.residual < 1e-12);
}

TEST_CASE("weak-Kerr steady state matches the mean-field amplitude") {
    const AncillaParams p = weak_kerr();
    const auto br = solve_steady_state(p).operating_branch();
    const auto ss = ancilla_steady_state_auto(p);
    const cd mean_b = expectation(annihilation(ss.dim), ss.rho);
    CHECK(std::abs(mean_b - br.beta0) < 0.02 * std::abs(br.beta0));

    // <b+b> = n0 + <alpha_1 beta_1> to linearization accuracy.
    const auto m = build_model(br, p);
    const double n_lin = br.n0 + m.one_time(0, 1).real();
    const double mean_n = expectation(number_op(ss.dim), ss.rho).real();
    CHECK(mean_n == doctest::Approx(n_lin).epsilon(0.03));
}

TEST_CASE("quantum regression against the linearized channels") {
    std::vector<double> taus;
    for (int i = 0; i <= 25; ++i) taus.push_back(0.2 * i);

    // Linear case first: exact analytic correlators.
    AncillaParams lin;
    lin.delta_omega = 0.4;
    lin.epsilon = 0.7;
    lin.occupation_thermal = 0.25;
    lin.occupation_measurement = 0.25;
    const auto lin_ss = ancilla_steady_state_auto(lin, 1e-11);
    const auto lin_gen = ancilla_generator(lin, lin_ss.dim);
    const auto qrt =
        regression_correlator(lin_ss.rho, lin_gen, Channel::b_bdag,
                              TimeOrder::later_first, taus, 1e-10);
    for (std::size_t i = 0; i < taus.size(); ++i) {
        const cd expect =
            (0.25 + 1.0) * std::exp(-cd(lin.kappa(), lin.delta_omega) * taus[i]);
        CHECK(std::abs(qrt[i] - expect) < 1e-6);
    }
    // tau = 0 commutator from the regression data.
    const auto qrt_rev =
        regression_correlator(lin_ss.rho, lin_gen, Channel::bdag_b,
                              TimeOrder::later_first, taus, 1e-10);
    CHECK(std::abs((qrt[0] - qrt_rev[0]) - 1.0) < 1e-8);

    // Weak Kerr: compare all four channels against the linearized model.
    const AncillaParams p = weak_kerr();
    const auto br = solve_steady_state(p).operating_branch();
    const auto m = build_model(br, p);
    const auto ss = ancilla_steady_state_auto(p);
    const auto gen = ancilla_generator(p, ss.dim);
    const double scale0 = std::abs(operator_correlator(m, 0.0, Channel::b_bdag,
                                                       TimeOrder::later_first));
    for (Channel ch : {Channel::bb, Channel::b_bdag, Channel::bdag_b,
                       Channel::bdag_bdag}) {
        const auto num =
            regression_correlator(ss.rho, gen, ch, TimeOrder::later_first, taus);
        for (std::size_t i = 0; i < taus.size(); ++i) {
            const cd ref = operator_correlator(m, taus[i], ch, TimeOrder::later_first);
            // 5% of the channel value, floored at 5% of the tau = 0 scale so
            // the exponentially small tail cannot dominate the comparison.
            const double tol = 0.05 * std::max(std::abs(ref), 0.05 * scale0);
            CHECK(std::abs(num[i] - ref) < tol);
        }
    }
}

TEST_CASE("tail monitoring catches under-truncation") {
    AncillaParams p;
    p.epsilon = 2.5;  // n0 ~ 6, far too big for dim 8
    const int dim = 8;
    const auto gen = ancilla_generator(p, dim);
    EvolveOptions opts;
    opts.tail_indices = ancilla_tail_indices(dim);
    CHECK_THROWS(evolve(gen, fock_projector(dim, 0), 20.0, opts));
}

TEST_CASE("joint model: decoupled and QND configurations") {
    SystemParams sys;
    sys.omega0 = 0.0;
    sys.lambda00 = 0.0;
    sys.nu = 0.05;
    sys.N0 = 0.0;
    AncillaParams anc;
    anc.epsilon = 0.6;
    anc.occupation_thermal = 0.1;
    anc.occupation_measurement = 0.1;

    const int sys_dim = 2;
    const auto anc_ss = ancilla_steady_state_auto(anc);
    const int anc_dim = anc_ss.dim;

    // lambda01 = 0: the system coherence decays at exactly nu (vacuum bath).
    Matrix psi = Matrix::Zero(sys_dim, sys_dim);
    psi << 0.5, 0.5, 0.5, 0.5;
    const Sparse psi_s = psi.sparseView();
    const Sparse anc_s = anc_ss.rho.sparseView();
    const Matrix rho0 = Matrix(kron(psi_s, anc_s));

    const auto gen0 = joint_generator(sys, anc, CouplingParams{0.0}, sys_dim, anc_dim);
    const auto series0 = joint_evolution(gen0, rho0, sys_dim, anc_dim, 4.0, 8);
    for (std::size_t i = 0; i < series0.t.size(); ++i) {
        const double t = series0.t[i];
        // Vacuum system bath: coherence decays at nu, population at 2 nu.
        CHECK(std::abs(std::abs(series0.rho_sys[i](0, 1)) -
                       0.5 * std::exp(-sys.nu * t)) < 1e-5);
        CHECK(series0.mean_n_sys[i] ==
              doctest::Approx(0.5 * std::exp(-2.0 * sys.nu * t)).epsilon(1e-5));
    }

    // QND configuration (nu = 0): phonon populations are conserved while
    // the coherence decays faster than the bare dephasing (backaction).
    sys.nu = 0.0;
    // nu = 0 fails SystemParams validation for standalone use but is the
    // pure-QND configuration of the joint model.
    const auto gen1 = joint_generator(sys, anc, CouplingParams{0.05}, sys_dim, anc_dim);
    const auto series1 = joint_evolution(gen1, rho0, sys_dim, anc_dim, 6.0, 6);
    const double p0_start = series1.rho_sys.front()(0, 0).real();
    const double p0_end = series1.rho_sys.back()(0, 0).real();
    CHECK(p0_end == doctest::Approx(p0_start).epsilon(1e-6));
    CHECK(series1.mean_n_sys.back() == doctest::Approx(0.5).epsilon(1e-5));
    CHECK(std::abs(series1.rho_sys.back()(0, 1)) < 0.5);
    CHECK(std::abs(series1.rho_sys.back()(0, 1)) <
          std::abs(series1.rho_sys.front()(0, 1)));
}

TEST_CASE("partial trace round trip") {
    const Matrix rs = thermal_state(3, 0.7);
    const Matrix ra = thermal_state(5, 0.2);
    const Sparse rs_s = rs.sparseView();
    const Sparse ra_s = ra.sparseView();
    const Matrix joint = Matrix(kron(rs_s, ra_s));
    const Matrix back = partial_trace_ancilla(joint, 3, 5);
    CHECK((back - rs).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("suggested truncation is monotone and adequate") {
    CHECK(suggested_dim(0.0, 0.0) >= 8);
    CHECK(suggested_dim(4.0, 0.5) > suggested_dim(1.0, 0.5));
    const AncillaParams p = weak_kerr();
    const auto ss = ancilla_steady_state_auto(p);
    // Doubling the dimension must not move <b> at the reported accuracy.
    const auto gen2 = ancilla_generator(p, 2 * ss.dim);
    EvolveOptions tight;
    tight.tol = 1e-11;  // keep the integrator noise below the residual target
    const Matrix rho2 =
        steady_state(gen2, thermal_state(2 * ss.dim, 0.2), 1e-9, 2000.0, tight).rho;
    const cd b1 = expectation(annihilation(ss.dim), ss.rho);
    const cd b2 = expectation(annihilation(2 * ss.dim), rho2);
    CHECK(std::abs(b1 - b2) < 1e-6);
}
