#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "qnd/fluctuations.hpp"
#include "qnd/params.hpp"

namespace qnd::fock {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Sparse = Eigen::SparseMatrix<Complex>;

Sparse annihilation(int dim);
Sparse creation(int dim);
Sparse number_op(int dim);
Sparse identity_op(int dim);
Sparse kron(const Sparse& a, const Sparse& b);

/// Lindblad generator L rho = -i[H, rho] + sum_k rate_k (2 O rho O+ - O+O rho - rho O+O).
/// The factor-2 dissipator convention makes kappa the amplitude decay rate.
class Generator {
  public:
    Generator(Sparse hamiltonian, std::vector<std::pair<double, Sparse>> jumps);

    Matrix apply(const Matrix& rho) const;
    int dim() const { return static_cast<int>(h_.rows()); }

  private:
    struct Jump {
        double rate;
        Sparse op;
        Sparse op_dag;
        Sparse opdag_op;
    };
    Sparse h_;
    std::vector<Jump> jumps_;
};

/// Driven Kerr ancilla master equation in the frame rotating at the drive:
/// H = dw b+b + eps (b + b+) + lambda11 (b+b)^2, baths kappa (N1+1) D[b] + kappa N1 D[b+].
Generator ancilla_generator(const AncillaParams& p, int dim);

/// Two-oscillator master equation on kron(system, ancilla). omega0 and
/// lambda00 enter the system Hamiltonian; set nu = 0 in sys for the pure
/// QND configuration.
Generator joint_generator(const SystemParams& sys, const AncillaParams& anc,
                          const CouplingParams& coupling, int sys_dim, int anc_dim);

/// Truncation covering displaced-thermal tails: ceil(n0 + 8 sqrt(n0 + N1 + 1)) + 4.
int suggested_dim(double n0, double N1);

struct EvolveOptions {
    double tol = 1e-8;       ///< local error per adaptive step
    double tail_tol = 1e-8;  ///< max total population in the monitored tail levels
    /// Diagonal indices whose summed population is bounded by tail_tol
    /// (empty disables the check). See ancilla_tail_indices / joint_tail_indices.
    std::vector<int> tail_indices;
    bool check_state = true;  ///< verify trace/Hermiticity on the result
};

std::vector<int> ancilla_tail_indices(int dim);
std::vector<int> joint_tail_indices(int sys_dim, int anc_dim);

/// Adaptive embedded Runge-Kutta integration of d rho/dt = L rho. No
/// per-step trace renormalization: trace drift stays visible as a
/// diagnostic. Throws on step-size underflow or tail violation (the
/// latter advising a larger truncation).
Matrix evolve(const Generator& gen, Matrix rho, double t_final,
              const EvolveOptions& opts = {});

struct SteadyStateResult {
    Matrix rho;
    double residual;  ///< max-entry norm of L rho at convergence
    double time;      ///< integrated time
};

/// Long-time integration until ||d rho/dt||_max < tol; throws on
/// non-convergence within max_time.
SteadyStateResult steady_state(const Generator& gen, const Matrix& rho0,
                               double tol = 1e-9, double max_time = 2000.0,
                               const EvolveOptions& opts = {});

/// Ancilla steady state with automatic truncation: starts from
/// suggested_dim and doubles on tail violation.
struct AutoSteadyState {
    Matrix rho;
    int dim;
    double residual;
};
AutoSteadyState ancilla_steady_state_auto(const AncillaParams& p,
                                          double tol = 1e-9, int max_dim = 512);

Matrix thermal_state(int dim, double occupation);
Matrix fock_projector(int dim, int n);

Complex expectation(const Sparse& op, const Matrix& rho);

/// Quantum-regression two-time correlators of the fluctuation operators
/// b1 = b - <b>_ss on a tau grid (tau >= 0, ascending).
std::vector<Complex> regression_correlator(const Matrix& steady, const Generator& gen,
                                           Channel channel, TimeOrder order,
                                           const std::vector<double>& tau_grid,
                                           double tol = 1e-9);

/// Observables of a joint two-oscillator run, sampled at n_samples+1
/// equally spaced times including t = 0.
struct JointSeries {
    std::vector<double> t;
    std::vector<double> mean_n_sys;           ///< <a+a>
    std::vector<double> quad_anc;             ///< <b + b+>
    std::vector<Eigen::MatrixXcd> rho_sys;    ///< reduced system density matrix
};
JointSeries joint_evolution(const Generator& gen, Matrix rho0, int sys_dim,
                            int anc_dim, double t_final, int n_samples,
                            const EvolveOptions& opts = {});

Eigen::MatrixXcd partial_trace_ancilla(const Matrix& rho, int sys_dim, int anc_dim);

}  // namespace qnd::fock
