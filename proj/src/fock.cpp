#include "qnd/fock.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qnd::fock {

namespace {
constexpr Complex I{0.0, 1.0};
}

Sparse annihilation(int dim) {
    Sparse b(dim, dim);
    b.reserve(Eigen::VectorXi::Constant(dim, 1));
    for (int n = 1; n < dim; ++n) b.insert(n - 1, n) = std::sqrt(double(n));
    b.makeCompressed();
    return b;
}

Sparse creation(int dim) { return Sparse(annihilation(dim).adjoint()); }

Sparse number_op(int dim) {
    Sparse n(dim, dim);
    n.reserve(Eigen::VectorXi::Constant(dim, 1));
    for (int k = 0; k < dim; ++k) n.insert(k, k) = double(k);
    n.makeCompressed();
    return n;
}

Sparse identity_op(int dim) {
    Sparse id(dim, dim);
    id.setIdentity();
    return id;
}

Sparse kron(const Sparse& a, const Sparse& b) {
    Sparse out(a.rows() * b.rows(), a.cols() * b.cols());
    std::vector<Eigen::Triplet<Complex>> trip;
    trip.reserve(std::size_t(a.nonZeros()) * std::size_t(b.nonZeros()));
    for (int ka = 0; ka < a.outerSize(); ++ka)
        for (Sparse::InnerIterator ia(a, ka); ia; ++ia)
            for (int kb = 0; kb < b.outerSize(); ++kb)
                for (Sparse::InnerIterator ib(b, kb); ib; ++ib)
                    trip.emplace_back(int(ia.row() * b.rows() + ib.row()),
                                      int(ia.col() * b.cols() + ib.col()),
                                      ia.value() * ib.value());
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

Generator::Generator(Sparse hamiltonian, std::vector<std::pair<double, Sparse>> jumps)
    : h_(std::move(hamiltonian)) {
    for (auto& [rate, op] : jumps) {
        if (rate == 0.0) continue;
        Jump j;
        j.rate = rate;
        j.op = op;
        j.op_dag = Sparse(op.adjoint());
        j.opdag_op = j.op_dag * j.op;
        jumps_.push_back(std::move(j));
    }
}

Matrix Generator::apply(const Matrix& rho) const {
    Matrix out = -I * (h_ * rho - rho * h_);
    for (const auto& j : jumps_) {
        out.noalias() += (2.0 * j.rate) * (j.op * (rho * j.op_dag));
        out.noalias() -= j.rate * (j.opdag_op * rho);
        out.noalias() -= j.rate * (rho * j.opdag_op);
    }
    return out;
}

Generator ancilla_generator(const AncillaParams& p, int dim) {
    p.validate();
    const Sparse b = annihilation(dim);
    const Sparse bd = creation(dim);
    const Sparse n = number_op(dim);
    Sparse h = p.delta_omega * n + p.epsilon * Sparse(b + bd) +
               p.lambda11 * Sparse(n * n);
    const double kappa = p.kappa();
    const double N1 = p.combined_occupation();
    return Generator(std::move(h),
                     {{kappa * (N1 + 1.0), b}, {kappa * N1, bd}});
}

Generator joint_generator(const SystemParams& sys, const AncillaParams& anc,
                          const CouplingParams& coupling, int sys_dim, int anc_dim) {
    anc.validate();
    const Sparse a = kron(annihilation(sys_dim), identity_op(anc_dim));
    const Sparse b = kron(identity_op(sys_dim), annihilation(anc_dim));
    const Sparse na = kron(number_op(sys_dim), identity_op(anc_dim));
    const Sparse nb = kron(identity_op(sys_dim), number_op(anc_dim));

    Sparse h = sys.omega0 * na + sys.lambda00 * Sparse(na * na) +
               anc.delta_omega * nb +
               anc.epsilon * Sparse(b + Sparse(b.adjoint())) +
               anc.lambda11 * Sparse(nb * nb) + coupling.lambda01 * Sparse(na * nb);

    const double kappa = anc.kappa();
    const double N1 = anc.combined_occupation();
    std::vector<std::pair<double, Sparse>> jumps = {
        {kappa * (N1 + 1.0), b}, {kappa * N1, Sparse(b.adjoint())}};
    if (sys.nu > 0.0) {
        jumps.emplace_back(sys.nu * (sys.N0 + 1.0), a);
        jumps.emplace_back(sys.nu * sys.N0, Sparse(a.adjoint()));
    }
    return Generator(std::move(h), std::move(jumps));
}

int suggested_dim(double n0, double N1) {
    return int(std::ceil(n0 + 8.0 * std::sqrt(n0 + N1 + 1.0))) + 4;
}

namespace {
// Top decile of the ladder, but never empty: small truncations must still
// watch their highest level.
int tail_start(int dim) {
    return std::min(dim - 1, int(std::ceil(0.9 * dim)));
}
}  // namespace

std::vector<int> ancilla_tail_indices(int dim) {
    std::vector<int> idx;
    for (int k = tail_start(dim); k < dim; ++k) idx.push_back(k);
    return idx;
}

std::vector<int> joint_tail_indices(int sys_dim, int anc_dim) {
    std::vector<int> idx;
    for (int n = 0; n < sys_dim; ++n)
        for (int k = tail_start(anc_dim); k < anc_dim; ++k)
            idx.push_back(n * anc_dim + k);
    return idx;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

void check_tail(const Matrix& rho, const EvolveOptions& opts) {
    if (opts.tail_indices.empty()) return;
    double tail = 0.0;
    for (int k : opts.tail_indices) tail += rho(k, k).real();
    if (tail > opts.tail_tol)
        throw std::runtime_error(
            "fock::evolve: truncation tail population " + std::to_string(tail) +
            " exceeds tolerance; increase the Fock-space dimension");
}

// One adaptive integration from t = 0 to t_final. Calls sample(t, rho, k1)
// whenever a step lands on (or is clipped to) a requested sample time.
template <class Sampler>
Matrix integrate(const Generator& gen, Matrix rho, double t_final,
                 const EvolveOptions& opts, const std::vector<double>& sample_times,
                 Sampler&& sample) {
    double t = 0.0;
    std::size_t next_sample = 0;
    auto maybe_sample = [&](const Matrix& y) {
        while (next_sample < sample_times.size() &&
               t >= sample_times[next_sample] - 1e-12 * std::max(1.0, t_final)) {
            sample(sample_times[next_sample], y);
            ++next_sample;
        }
    };

    Matrix k1 = gen.apply(rho);
    maybe_sample(rho);

    double dt = std::min(0.05, t_final > 0.0 ? t_final : 0.05);
    const double dt_min = 1e-13 * std::max(1.0, t_final);
    int tail_countdown = 0;

    while (t < t_final) {
        double step = std::min(dt, t_final - t);
        if (next_sample < sample_times.size())
            step = std::min(step, sample_times[next_sample] - t);
        if (step < dt_min)
            throw std::runtime_error("fock::evolve: step size underflow");

        const Matrix k2 = gen.apply(rho + step * (a21 * k1));
        const Matrix k3 = gen.apply(rho + step * (a31 * k1 + a32 * k2));
        const Matrix k4 = gen.apply(rho + step * (a41 * k1 + a42 * k2 + a43 * k3));
        const Matrix k5 =
            gen.apply(rho + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Matrix k6 = gen.apply(
            rho + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const Matrix y5 =
            rho + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const Matrix k7 = gen.apply(y5);
        const Matrix err_mat = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 +
                                       e6 * k6 + e7 * k7);
        const double scale = std::max(1.0, rho.cwiseAbs().maxCoeff());
        const double err = err_mat.cwiseAbs().maxCoeff() / scale;

        if (err <= opts.tol) {
            rho = y5;
            t += step;
            k1 = k7;  // FSAL
            maybe_sample(rho);
            if (++tail_countdown >= 20) {
                tail_countdown = 0;
                check_tail(rho, opts);
            }
        }
        const double factor =
            err > 0.0 ? 0.9 * std::pow(opts.tol / err, 0.2) : 5.0;
        dt = step * std::clamp(factor, 0.2, 5.0);
    }
    check_tail(rho, opts);
    return rho;
}

void check_state(const Matrix& rho, const std::string& where) {
    const double trace_err = std::abs(rho.trace() - Complex(1.0, 0.0));
    if (trace_err > 1e-8)
        throw std::runtime_error(where + ": trace drifted by " +
                                 std::to_string(trace_err));
    const double herm_err = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    if (herm_err > 1e-8)
        throw std::runtime_error(where + ": Hermiticity violated by " +
                                 std::to_string(herm_err));
}

}  // namespace

Matrix evolve(const Generator& gen, Matrix rho, double t_final,
              const EvolveOptions& opts) {
    if (t_final < 0.0) throw std::invalid_argument("fock::evolve: t_final must be >= 0");
    rho = integrate(gen, std::move(rho), t_final, opts, {},
                    [](double, const Matrix&) {});
    if (opts.check_state) check_state(rho, "fock::evolve");
    return rho;
}

SteadyStateResult steady_state(const Generator& gen, const Matrix& rho0, double tol,
                               double max_time, const EvolveOptions& opts) {
    Matrix rho = rho0;
    double t = 0.0;
    const double chunk = 2.0;
    while (t < max_time) {
        rho = evolve(gen, std::move(rho), chunk, opts);
        t += chunk;
        const double residual = gen.apply(rho).cwiseAbs().maxCoeff();
        if (residual < tol) return {std::move(rho), residual, t};
    }
    throw std::runtime_error("fock::steady_state: no convergence within max_time");
}

AutoSteadyState ancilla_steady_state_auto(const AncillaParams& p, double tol,
                                          int max_dim) {
    const auto sol = solve_steady_state(p);
    const auto& branch = sol.operating_branch();
    int dim = suggested_dim(branch.n0, p.combined_occupation());
    while (true) {
        EvolveOptions opts;
        opts.tol = tol * 1e-2;
        opts.tail_indices = ancilla_tail_indices(dim);
        try {
            auto gen = ancilla_generator(p, dim);
            auto ss = steady_state(gen, thermal_state(dim, p.combined_occupation()),
                                   tol, 2000.0, opts);
            return {std::move(ss.rho), dim, ss.residual};
        } catch (const std::runtime_error&) {
            dim *= 2;
            if (dim > max_dim) throw;
        }
    }
}

Matrix thermal_state(int dim, double occupation) {
    Matrix rho = Matrix::Zero(dim, dim);
    if (occupation <= 0.0) {
        rho(0, 0) = 1.0;
        return rho;
    }
    const double q = occupation / (occupation + 1.0);
    double z = 0.0, w = 1.0;
    for (int n = 0; n < dim; ++n, w *= q) z += w;
    w = 1.0;
    for (int n = 0; n < dim; ++n, w *= q) rho(n, n) = w / z;
    return rho;
}

Matrix fock_projector(int dim, int n) {
    if (n < 0 || n >= dim) throw std::invalid_argument("fock_projector: n out of range");
    Matrix rho = Matrix::Zero(dim, dim);
    rho(n, n) = 1.0;
    return rho;
}

Complex expectation(const Sparse& op, const Matrix& rho) {
    return (op * rho).trace();
}

std::vector<Complex> regression_correlator(const Matrix& steady, const Generator& gen,
                                           Channel channel, TimeOrder order,
                                           const std::vector<double>& tau_grid,
                                           double tol) {
    const int dim = gen.dim();
    const Sparse b = annihilation(dim);
    const Complex beta_ss = expectation(b, steady);
    Sparse b1 = b;
    for (int k = 0; k < dim; ++k) b1.coeffRef(k, k) -= beta_ss;
    b1.makeCompressed();
    const Sparse b1d = Sparse(b1.adjoint());

    const bool later_is_bdag =
        channel == Channel::bdag_b || channel == Channel::bdag_bdag;
    const bool earlier_is_bdag =
        channel == Channel::b_bdag || channel == Channel::bdag_bdag;
    const Sparse& later = later_is_bdag ? b1d : b1;
    const Sparse& earlier = earlier_is_bdag ? b1d : b1;

    // QRT: <L(t+tau) E(t)> = Tr[L e^{L tau}(E rho)],
    //      <E(t) L(t+tau)> = Tr[L e^{L tau}(rho E)].
    Matrix seed = (order == TimeOrder::later_first) ? Matrix(earlier * steady)
                                                    : Matrix(steady * earlier);

    std::vector<Complex> out(tau_grid.size());
    EvolveOptions opts;
    opts.tol = tol;
    opts.check_state = false;  // seed is not a density matrix
    const double t_final = tau_grid.empty() ? 0.0 : tau_grid.back();
    std::size_t idx = 0;
    integrate(gen, std::move(seed), t_final, opts, tau_grid,
              [&](double, const Matrix& y) { out[idx++] = (later * y).trace(); });
    return out;
}

Eigen::MatrixXcd partial_trace_ancilla(const Matrix& rho, int sys_dim, int anc_dim) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(sys_dim, sys_dim);
    for (int n = 0; n < sys_dim; ++n)
        for (int m = 0; m < sys_dim; ++m)
            for (int k = 0; k < anc_dim; ++k)
                out(n, m) += rho(n * anc_dim + k, m * anc_dim + k);
    return out;
}

JointSeries joint_evolution(const Generator& gen, Matrix rho0, int sys_dim,
                            int anc_dim, double t_final, int n_samples,
                            const EvolveOptions& opts) {
    if (gen.dim() != sys_dim * anc_dim)
        throw std::invalid_argument("joint_evolution: dimension mismatch");
    if (n_samples < 1) throw std::invalid_argument("joint_evolution: n_samples >= 1");

    const Sparse na = kron(number_op(sys_dim), identity_op(anc_dim));
    const Sparse b = kron(identity_op(sys_dim), annihilation(anc_dim));
    const Sparse quad = Sparse(b + Sparse(b.adjoint()));

    std::vector<double> times(std::size_t(n_samples) + 1);
    for (int i = 0; i <= n_samples; ++i)
        times[std::size_t(i)] = t_final * double(i) / double(n_samples);

    JointSeries series;
    integrate(gen, std::move(rho0), t_final, opts, times,
              [&](double t, const Matrix& y) {
                  series.t.push_back(t);
                  series.mean_n_sys.push_back(expectation(na, y).real());
                  series.quad_anc.push_back(expectation(quad, y).real());
                  series.rho_sys.push_back(partial_trace_ancilla(y, sys_dim, anc_dim));
              });
    return series;
}

}  // namespace qnd::fock
