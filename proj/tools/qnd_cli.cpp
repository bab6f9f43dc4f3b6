// qnd: analytic theory and numerical oracles for a phonon-number QND
// readout through a driven, damped Kerr ancilla oscillator.
//
// All inputs are in units of the ancilla damping rate kappa unless --si is
// given together with --kappa <value in 1/s>, in which case output columns
// are rescaled by the appropriate power of kappa.

#include <charconv>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qnd/config.hpp"
#include "qnd/effective.hpp"
#include "qnd/fluctuations.hpp"
#include "qnd/fock.hpp"
#include "qnd/measurement.hpp"
#include "qnd/params.hpp"
#include "qnd/positive_p.hpp"
#include "qnd/steady_state.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using json = nlohmann::json;
using Cell = std::variant<double, long, bool, std::string>;

std::string fmt(double x) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x,
                                   std::chars_format::general, 12);
    return std::string(buf, res.ptr);
}

// Output table: named columns (each with a kappa power for SI rescaling)
// plus a `# key = value` parameter header.
struct Table {
    struct Column {
        std::string name;
        double si_power = 0.0;
    };
    std::vector<Column> columns;
    std::vector<std::pair<std::string, std::string>> header;
    std::vector<std::vector<Cell>> rows;

    void col(std::string name, double si_power = 0.0) {
        columns.push_back({std::move(name), si_power});
    }
    void note(std::string key, std::string value) {
        header.emplace_back(std::move(key), std::move(value));
    }
    void note(std::string key, double value) { note(std::move(key), fmt(value)); }
    std::vector<Cell>& row() {
        rows.emplace_back();
        return rows.back();
    }
};

struct OutputOptions {
    std::string path;    // empty: stdout
    std::string format = "csv";
    bool si = false;
    double kappa_si = 0.0;  // 1/s
};

double rescale(double x, double power, const OutputOptions& o) {
    return o.si ? x * std::pow(o.kappa_si, power) : x;
}

void write_table(const Table& t, const OutputOptions& o, std::ostream& out) {
    if (o.format == "json") {
        json arr = json::array();
        for (const auto& r : t.rows) {
            json obj = json::object();
            for (std::size_t i = 0; i < t.columns.size(); ++i) {
                const auto& c = t.columns[i];
                std::visit(
                    [&](const auto& v) {
                        using T = std::decay_t<decltype(v)>;
                        if constexpr (std::is_same_v<T, double>)
                            obj[c.name] = rescale(v, c.si_power, o);
                        else
                            obj[c.name] = v;
                    },
                    r[i]);
            }
            arr.push_back(std::move(obj));
        }
        out << arr.dump(2) << "\n";
        return;
    }
    out << "# qnd version " << kVersion << "\n";
    out << "# units = "
        << (o.si ? "SI (kappa = " + fmt(o.kappa_si) + " /s)" : "kappa") << "\n";
    for (const auto& [k, v] : t.header) out << "# " << k << " = " << v << "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        out << (i ? "," : "") << t.columns[i].name;
    out << "\n";
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < t.columns.size(); ++i) {
            if (i) out << ",";
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, double>)
                        out << fmt(rescale(v, t.columns[i].si_power, o));
                    else if constexpr (std::is_same_v<T, bool>)
                        out << (v ? 1 : 0);
                    else if constexpr (std::is_same_v<T, long>)
                        out << v;
                    else
                        out << v;
                },
                r[i]);
        }
        out << "\n";
    }
}

void emit(const Table& t, const OutputOptions& o) {
    if (o.path.empty()) {
        write_table(t, o, std::cout);
        return;
    }
    std::ofstream f(o.path);
    if (!f) throw std::runtime_error("cannot open output file '" + o.path + "'");
    write_table(t, o, f);
}

void note_params(Table& t, const qnd::RunConfig& cfg) {
    const auto& a = cfg.ancilla;
    t.note("delta_omega", a.delta_omega);
    t.note("lambda11", a.lambda11);
    t.note("epsilon", a.epsilon);
    t.note("damping_thermal", a.damping_thermal);
    t.note("damping_measurement", a.damping_measurement);
    t.note("occupation_thermal", a.occupation_thermal);
    t.note("occupation_measurement", a.occupation_measurement);
    t.note("lambda01", cfg.coupling.lambda01);
    t.note("omega0", cfg.system.omega0);
    t.note("lambda00", cfg.system.lambda00);
    t.note("nu", cfg.system.nu);
    t.note("N0", cfg.system.N0);
    t.note("seed", fmt(double(cfg.seed)));
}

// Per-command shared state.
struct Context {
    qnd::RunConfig cfg;
    OutputOptions out;
};

double* sweep_target(qnd::RunConfig& cfg, const std::string& var) {
    if (var == "delta_omega") return &cfg.ancilla.delta_omega;
    if (var == "epsilon") return &cfg.ancilla.epsilon;
    if (var == "lambda11") return &cfg.ancilla.lambda11;
    if (var == "lambda01") return &cfg.coupling.lambda01;
    if (var == "occupation_thermal") return &cfg.ancilla.occupation_thermal;
    if (var == "occupation_measurement") return &cfg.ancilla.occupation_measurement;
    throw std::invalid_argument("unknown sweep variable '" + var + "'");
}

// Calls fn(cfg) for every point of the configured sweep grid (outer x
// inner for two sweeps), with the swept fields substituted.
template <typename Fn>
void for_each_sweep_point(const Context& ctx, Fn&& fn) {
    qnd::RunConfig cfg = ctx.cfg;
    if (cfg.sweeps.empty()) {
        fn(cfg);
        return;
    }
    const auto outer = cfg.sweeps[0].grid();
    double* p_outer = sweep_target(cfg, cfg.sweeps[0].variable);
    if (cfg.sweeps.size() == 1) {
        for (double x : outer) {
            *p_outer = x;
            fn(cfg);
        }
        return;
    }
    const auto inner = cfg.sweeps[1].grid();
    double* p_inner = sweep_target(cfg, cfg.sweeps[1].variable);
    for (double x : outer)
        for (double y : inner) {
            *p_outer = x;
            *p_inner = y;
            fn(cfg);
        }
}

// ---------------------------------------------------------------- commands

void cmd_steady_state(const Context& ctx) {
    Table t;
    note_params(t, ctx.cfg);
    t.col("delta_omega", 1);
    t.col("epsilon", 1);
    t.col("lambda11", 1);
    t.col("branch");
    t.col("n0");
    t.col("re_beta0");
    t.col("im_beta0");
    t.col("lambda1_sq", 2);
    t.col("lambda_sq", 2);
    t.col("stable");
    t.col("operating");
    for_each_sweep_point(ctx, [&](const qnd::RunConfig& cfg) {
        const auto sol = qnd::solve_steady_state(cfg.ancilla);
        for (std::size_t i = 0; i < sol.branches.size(); ++i) {
            const auto& b = sol.branches[i];
            auto& r = t.row();
            r = {cfg.ancilla.delta_omega, cfg.ancilla.epsilon,
                 cfg.ancilla.lambda11,    long(i),
                 b.n0,                    b.beta0.real(),
                 b.beta0.imag(),          b.lambda1_sq,
                 b.lambda_sq,             b.stable,
                 bool(i == sol.operating)};
        }
    });
    emit(t, ctx.out);
}

void cmd_correlators(const Context& ctx, double tau_max, int points,
                     const std::string& order_name) {
    const auto order = order_name == "earlier" ? qnd::TimeOrder::earlier_first
                                               : qnd::TimeOrder::later_first;
    const auto sol = qnd::solve_steady_state(ctx.cfg.ancilla);
    const auto m = qnd::build_model(sol.operating_branch(), ctx.cfg.ancilla);
    Table t;
    note_params(t, ctx.cfg);
    t.note("time_order", order_name == "earlier" ? "earlier_first" : "later_first");
    t.note("n0", m.n0);
    t.col("tau", -1);
    for (const char* ch : {"bb", "b_bdag", "bdag_b", "bdag_bdag"}) {
        t.col(std::string("re_") + ch);
        t.col(std::string("im_") + ch);
    }
    for (int i = 0; i < points; ++i) {
        const double tau = tau_max * double(i) / double(points - 1);
        auto& r = t.row();
        r.emplace_back(tau);
        for (auto ch : {qnd::Channel::bb, qnd::Channel::b_bdag,
                        qnd::Channel::bdag_b, qnd::Channel::bdag_bdag}) {
            const auto v = qnd::operator_correlator(m, tau, ch, order);
            r.emplace_back(v.real());
            r.emplace_back(v.imag());
        }
    }
    emit(t, ctx.out);
}

Table gamma_ratio_table(const qnd::RunConfig& cfg, double dmin, double dmax,
                        int points) {
    Table t;
    note_params(t, cfg);
    const auto rows = qnd::gamma_ratio_sweep(cfg.ancilla, dmin, dmax,
                                             std::size_t(points));
    t.col("delta_omega", 1);
    t.col("epsilon", 1);
    t.col("lambda11", 1);
    t.col("n0");
    t.col("lambda_sq", 2);
    t.col("ratio");
    t.col("stable");
    for (const auto& r : rows)
        t.row() = {r.delta_omega, r.epsilon, r.lambda11, r.n0,
                   r.lambda_sq,   r.ratio,   r.stable};
    return t;
}

void cmd_gamma_ratio(const Context& ctx, double dmin, double dmax, int points,
                     const std::vector<std::string>& variants) {
    if (variants.empty()) {
        emit(gamma_ratio_table(ctx.cfg, dmin, dmax, points), ctx.out);
        return;
    }
    // One file per epsilon:lambda11 variant, for external plotting.
    if (ctx.out.path.empty())
        throw std::invalid_argument("--variant requires --output as a filename prefix");
    int idx = 0;
    for (const auto& spec : variants) {
        const auto colon = spec.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("variant must be 'epsilon:lambda11', got '" +
                                        spec + "'");
        qnd::RunConfig cfg = ctx.cfg;
        cfg.ancilla.epsilon = std::stod(spec.substr(0, colon));
        cfg.ancilla.lambda11 = std::stod(spec.substr(colon + 1));
        OutputOptions out = ctx.out;
        out.path = ctx.out.path + "_variant" + std::to_string(idx++) +
                   (out.format == "json" ? ".json" : ".csv");
        emit(gamma_ratio_table(cfg, dmin, dmax, points), out);
        std::cout << out.path << "\n";
    }
}

void cmd_coefficients(const Context& ctx, std::optional<double> integral_tmax,
                      double threshold) {
    Table t;
    note_params(t, ctx.cfg);
    t.col("delta_omega", 1);
    t.col("epsilon", 1);
    t.col("lambda11", 1);
    t.col("n0");
    t.col("delta", 1);
    t.col("theta", 1);
    t.col("gamma", 1);
    t.col("gamma0", 1);
    t.col("ratio");
    t.col("gamma_over_nu");
    t.col("measurable");
    if (integral_tmax) {
        t.col("delta_integral", 1);
        t.col("theta_integral", 1);
        t.col("gamma_integral", 1);
    }
    for_each_sweep_point(ctx, [&](const qnd::RunConfig& cfg) {
        const auto sol = qnd::solve_steady_state(cfg.ancilla);
        const auto& b = sol.operating_branch();
        const auto m = qnd::build_model(b, cfg.ancilla);
        const auto co = qnd::effective_coefficients(b, m, cfg.ancilla, cfg.coupling,
                                                    cfg.system.lambda00);
        const auto fom = qnd::qnd_figure_of_merit(co.gamma, cfg.system, threshold);
        auto& r = t.row();
        r = {cfg.ancilla.delta_omega,
             cfg.ancilla.epsilon,
             cfg.ancilla.lambda11,
             b.n0,
             co.delta,
             co.theta,
             co.gamma,
             co.gamma0,
             co.ratio,
             fom.gamma_over_nu,
             fom.verdict};
        if (integral_tmax) {
            const auto ic = qnd::coefficients_from_integrals(
                m, b, cfg.coupling, cfg.system.lambda00, *integral_tmax);
            r.emplace_back(ic.delta);
            r.emplace_back(ic.theta);
            r.emplace_back(ic.gamma);
        }
    });
    emit(t, ctx.out);
}

void cmd_signal(const Context& ctx, double n_phonons) {
    const auto sol = qnd::solve_steady_state(ctx.cfg.ancilla);
    const auto& b = sol.operating_branch();
    const auto s = qnd::signal_gain(b, ctx.cfg.ancilla, ctx.cfg.coupling);
    const auto m = qnd::build_model(b, ctx.cfg.ancilla);
    const auto co = qnd::effective_coefficients(b, m, ctx.cfg.ancilla,
                                                ctx.cfg.coupling,
                                                ctx.cfg.system.lambda00);
    const auto cur = qnd::mean_current(s, n_phonons);
    Table t;
    note_params(t, ctx.cfg);
    t.note("n_phonons", n_phonons);
    t.col("gain", 0.5);
    t.col("gain_from_gamma", 0.5);
    t.col("background", 0.5);
    t.col("signal", 0.5);
    t.col("total_current", 0.5);
    t.col("gamma", 1);
    t.col("localization_time", -1);
    t.col("dwell_time", -1);
    t.col("gamma_over_nu");
    const double gain_from_gamma = s.sqrt_gamma_factor * std::sqrt(co.gamma);
    const auto d = qnd::distinguishability_time(co.gamma, ctx.cfg.system.nu);
    t.row() = {s.gain,          gain_from_gamma,       s.background,
               cur.signal,      cur.total(),           co.gamma,
               d.localization_time, d.dwell_time,      d.ratio};
    emit(t, ctx.out);
}

void cmd_sde(const Context& ctx, const qnd::pp::EnsembleOptions& opts,
             bool compare, long dump, long stride) {
    if (dump > 0) {
        const auto samples = qnd::pp::sample_trajectories(ctx.cfg.ancilla, opts,
                                                          dump, stride);
        Table t;
        note_params(t, ctx.cfg);
        t.note("dt", opts.dt);
        t.col("traj");
        t.col("t", -1);
        t.col("re_beta");
        t.col("im_beta");
        t.col("re_alpha");
        t.col("im_alpha");
        for (const auto& s : samples)
            t.row() = {s.traj, s.t, s.point.beta.real(), s.point.beta.imag(),
                       s.point.alpha.real(), s.point.alpha.imag()};
        emit(t, ctx.out);
        return;
    }
    const auto stats = qnd::pp::run_ensemble(ctx.cfg.ancilla, opts);
    Table t;
    note_params(t, ctx.cfg);
    t.note("n_traj", fmt(double(opts.n_traj)));
    t.note("dt", opts.dt);
    t.note("t_final", opts.t_final);
    t.note("transient", opts.transient);
    t.note("trajectories_used", fmt(double(stats.n_traj)));
    t.note("diverged", fmt(double(stats.divergence_count)));
    t.col("quantity");
    t.col("re_value");
    t.col("im_value");
    t.col("std_error");
    if (compare) {
        t.col("re_analytic");
        t.col("im_analytic");
        t.col("sigma_distance");
    }
    const auto sol = qnd::solve_steady_state(ctx.cfg.ancilla);
    const auto m = qnd::build_model(sol.operating_branch(), ctx.cfg.ancilla);
    const std::complex<double> refs[] = {
        m.beta0, std::conj(m.beta0), m.one_time(0, 0), m.one_time(0, 1),
        m.one_time(1, 1)};
    const char* names[] = {"mean_beta", "mean_alpha", "beta1_sq", "beta1_alpha1",
                           "alpha1_sq"};
    const qnd::pp::Estimate* est[] = {&stats.mean_beta, &stats.mean_alpha,
                                      &stats.beta1_sq, &stats.beta1_alpha1,
                                      &stats.alpha1_sq};
    for (int i = 0; i < 5; ++i) {
        auto& r = t.row();
        r = {std::string(names[i]), est[i]->value.real(), est[i]->value.imag(),
             est[i]->std_error};
        if (compare) {
            r.emplace_back(refs[i].real());
            r.emplace_back(refs[i].imag());
            r.emplace_back(std::abs(est[i]->value - refs[i]) /
                           std::max(est[i]->std_error, 1e-300));
        }
    }
    emit(t, ctx.out);
}

void cmd_oracle_steady(const Context& ctx, bool compare, double tol) {
    const auto res = qnd::fock::ancilla_steady_state_auto(ctx.cfg.ancilla, tol);
    const auto b_op = qnd::fock::annihilation(res.dim);
    const auto n_op = qnd::fock::number_op(res.dim);
    const auto mean_b = qnd::fock::expectation(b_op, res.rho);
    const auto mean_n = qnd::fock::expectation(n_op, res.rho).real();
    Table t;
    note_params(t, ctx.cfg);
    t.note("fock_dim", fmt(double(res.dim)));
    t.note("residual", res.residual);
    t.col("re_mean_b");
    t.col("im_mean_b");
    t.col("mean_n");
    if (compare) {
        t.col("re_beta0");
        t.col("im_beta0");
        t.col("mean_n_linearized");
        t.col("rel_err_b");
    }
    auto& r = t.row();
    r = {mean_b.real(), mean_b.imag(), mean_n};
    if (compare) {
        const auto sol = qnd::solve_steady_state(ctx.cfg.ancilla);
        const auto m = qnd::build_model(sol.operating_branch(), ctx.cfg.ancilla);
        // <b+b> = n0 + <b1+ b1> with <b1+ b1> = C21 entry of the covariance.
        const double n_lin = m.n0 + m.one_time(1, 0).real();
        r.emplace_back(m.beta0.real());
        r.emplace_back(m.beta0.imag());
        r.emplace_back(n_lin);
        r.emplace_back(std::abs(mean_b - m.beta0) /
                       std::max(std::abs(m.beta0), 1e-300));
    }
    emit(t, ctx.out);
}

void cmd_oracle_correlator(const Context& ctx, bool compare, double tau_max,
                           int points, const std::string& order_name) {
    const auto order = order_name == "earlier" ? qnd::TimeOrder::earlier_first
                                               : qnd::TimeOrder::later_first;
    const auto res = qnd::fock::ancilla_steady_state_auto(ctx.cfg.ancilla);
    const auto gen = qnd::fock::ancilla_generator(ctx.cfg.ancilla, res.dim);
    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
        grid[std::size_t(i)] = tau_max * double(i) / double(points - 1);

    const auto sol = qnd::solve_steady_state(ctx.cfg.ancilla);
    const auto m = qnd::build_model(sol.operating_branch(), ctx.cfg.ancilla);

    Table t;
    note_params(t, ctx.cfg);
    t.note("fock_dim", fmt(double(res.dim)));
    t.note("time_order", order_name == "earlier" ? "earlier_first" : "later_first");
    t.col("tau", -1);
    for (const char* ch : {"bb", "b_bdag", "bdag_b", "bdag_bdag"}) {
        t.col(std::string("re_") + ch);
        t.col(std::string("im_") + ch);
        if (compare) {
            t.col(std::string("re_") + ch + "_lin");
            t.col(std::string("im_") + ch + "_lin");
        }
    }
    const qnd::Channel channels[] = {qnd::Channel::bb, qnd::Channel::b_bdag,
                                     qnd::Channel::bdag_b, qnd::Channel::bdag_bdag};
    std::vector<std::vector<qnd::fock::Complex>> oracle;
    for (auto ch : channels)
        oracle.push_back(
            qnd::fock::regression_correlator(res.rho, gen, ch, order, grid));
    for (int i = 0; i < points; ++i) {
        auto& r = t.row();
        r.emplace_back(grid[std::size_t(i)]);
        for (int k = 0; k < 4; ++k) {
            r.emplace_back(oracle[std::size_t(k)][std::size_t(i)].real());
            r.emplace_back(oracle[std::size_t(k)][std::size_t(i)].imag());
            if (compare) {
                const auto v = qnd::operator_correlator(m, grid[std::size_t(i)],
                                                        channels[k], order);
                r.emplace_back(v.real());
                r.emplace_back(v.imag());
            }
        }
    }
    emit(t, ctx.out);
}

void cmd_oracle_joint(const Context& ctx, bool compare, int sys_dim, int anc_dim,
                      double t_final, int samples, int init_n) {
    if (init_n < 0 || init_n + 1 >= sys_dim)
        throw std::invalid_argument("oracle joint: need 0 <= init-n < sys-dim - 1");
    // System starts in (|n> + |n+1>)/sqrt(2): the coherence decay is the
    // phase-diffusion observable; the ancilla starts in its steady state.
    Eigen::MatrixXcd sys0 = Eigen::MatrixXcd::Zero(sys_dim, sys_dim);
    sys0(init_n, init_n) = 0.5;
    sys0(init_n + 1, init_n + 1) = 0.5;
    sys0(init_n, init_n + 1) = 0.5;
    sys0(init_n + 1, init_n) = 0.5;
    const auto anc = qnd::fock::ancilla_steady_state_auto(ctx.cfg.ancilla, 1e-9,
                                                          anc_dim);
    if (anc.dim > anc_dim)
        throw std::invalid_argument("oracle joint: ancilla truncation " +
                                    std::to_string(anc_dim) + " too small");
    qnd::fock::Sparse sys0_sp = sys0.sparseView();
    qnd::fock::Sparse anc_sp = anc.rho.sparseView();
    qnd::fock::Matrix rho0 = qnd::fock::Matrix(qnd::fock::kron(sys0_sp, anc_sp));

    // Build the generator at the truncation the steady-state search settled
    // on; anc_dim is only an upper bound for that search.
    const auto gen = qnd::fock::joint_generator(ctx.cfg.system, ctx.cfg.ancilla,
                                                ctx.cfg.coupling, sys_dim, anc.dim);

    qnd::fock::EvolveOptions opts;
    opts.tail_indices = qnd::fock::joint_tail_indices(sys_dim, anc.dim);
    const auto series = qnd::fock::joint_evolution(gen, rho0, sys_dim, anc.dim,
                                                   t_final, samples, opts);
    Table t;
    note_params(t, ctx.cfg);
    t.note("sys_dim", fmt(double(sys_dim)));
    t.note("anc_dim", fmt(double(anc.dim)));
    t.note("init_n", fmt(double(init_n)));
    t.col("t", -1);
    t.col("mean_n_sys");
    t.col("quad_anc", 0);
    for (int n = 0; n < sys_dim; ++n) t.col("p" + std::to_string(n));
    t.col("abs_coherence");
    if (compare) t.col("abs_coherence_analytic");

    double gamma = 0.0;
    if (compare) {
        const auto sol = qnd::solve_steady_state(ctx.cfg.ancilla);
        const auto& b = sol.operating_branch();
        const auto m = qnd::build_model(b, ctx.cfg.ancilla);
        gamma = qnd::effective_coefficients(b, m, ctx.cfg.ancilla, ctx.cfg.coupling,
                                            ctx.cfg.system.lambda00)
                    .gamma;
    }
    for (std::size_t i = 0; i < series.t.size(); ++i) {
        auto& r = t.row();
        r.emplace_back(series.t[i]);
        r.emplace_back(series.mean_n_sys[i]);
        r.emplace_back(series.quad_anc[i]);
        for (int n = 0; n < sys_dim; ++n)
            r.emplace_back(series.rho_sys[i](n, n).real());
        const double coh = std::abs(series.rho_sys[i](init_n, init_n + 1));
        r.emplace_back(coh);
        if (compare) r.emplace_back(0.5 * std::exp(-gamma * series.t[i]));
    }
    emit(t, ctx.out);
}

// Cross-oracle validation suite: fast internal consistency checks across
// independent code paths. Prints a pass/fail table; any failure exits 2.
int cmd_validate(const Context& ctx) {
    struct Check {
        std::string name;
        bool pass;
        double err;
    };
    std::vector<Check> checks;
    auto push = [&](const std::string& name, double err, double tol) {
        checks.push_back({name, err <= tol, err});
    };

    qnd::AncillaParams p = ctx.cfg.ancilla;
    if (p.epsilon == 0.0) p.epsilon = 1.2;  // a trivial drive validates nothing
    const auto sol = qnd::solve_steady_state(p);
    const auto& b = sol.operating_branch();
    const auto m = qnd::build_model(b, p);
    qnd::CouplingParams c = ctx.cfg.coupling;
    if (c.lambda01 == 0.0) c.lambda01 = 0.05;

    // Cubic residual.
    const double d = p.delta_omega + p.lambda11;
    const double res_cubic =
        std::abs(b.n0 * (p.kappa() * p.kappa() +
                         (d + 2.0 * p.lambda11 * b.n0) * (d + 2.0 * p.lambda11 * b.n0)) -
                 p.epsilon * p.epsilon) /
        std::max(p.epsilon * p.epsilon, 1e-300);
    push("steady-state cubic residual", res_cubic, 1e-10);

    // Drift matrix trace/determinant.
    const auto sc = qnd::stability_matrix_checks(b, p);
    push("Tr A = 2 kappa", std::abs(sc.trace - 2.0 * p.kappa()), 1e-12);
    push("Det A = Lambda^2",
         std::abs(sc.determinant - b.lambda_sq) / std::max(std::abs(b.lambda_sq), 1e-300),
         1e-12);

    // Lyapunov stationarity of the closed-form covariance.
    const qnd::Matrix2c lhs = m.A * m.one_time + m.one_time * m.A.transpose();
    push("Lyapunov A C + C A^T = D", (lhs - m.D).cwiseAbs().maxCoeff(), 1e-10);

    // Closed-form vs matrix-product two-time correlators; semigroup.
    double err_cf = 0.0, err_sg = 0.0;
    for (double tau : {0.0, 0.3, 1.0, 2.5}) {
        err_cf = std::max(err_cf, (qnd::c_number_correlators_closed_form(m, tau) -
                                   qnd::c_number_correlators(m, tau))
                                      .cwiseAbs()
                                      .maxCoeff());
        err_sg = std::max(err_sg, (qnd::propagator(m, tau) * qnd::propagator(m, 0.7) -
                                   qnd::propagator(m, tau + 0.7))
                                      .cwiseAbs()
                                      .maxCoeff());
    }
    push("closed-form correlators", err_cf, 1e-12);
    push("propagator semigroup", err_sg, 1e-10);

    // Gamma two-form identity and the ratio formula.
    const auto co = qnd::effective_coefficients(b, m, p, c, ctx.cfg.system.lambda00);
    const double gb = qnd::gamma_bracketed(b, p, c);
    push("Gamma two-form identity",
         std::abs(co.gamma - gb) / std::max(std::abs(co.gamma), 1e-300), 1e-12);
    push("Gamma/Gamma0 = kappa^4/Lambda^4",
         std::abs(co.ratio - std::pow(p.kappa() * p.kappa() / b.lambda_sq, 2)),
         1e-12);

    // Integral reconstruction of (Delta, Theta, Gamma).
    const auto ic =
        qnd::coefficients_from_integrals(m, b, c, ctx.cfg.system.lambda00, 60.0 / p.kappa());
    const double err_int = std::max(
        {std::abs(ic.gamma - co.gamma) / std::max(std::abs(co.gamma), 1e-300),
         std::abs(ic.delta - co.delta) / std::max(std::abs(co.delta), 1e-300),
         std::abs(ic.theta - co.theta) /
             std::max({std::abs(co.theta), std::abs(co.gamma), 1e-12})});
    push("integral reconstruction", err_int, 1e-6);

    // Measurement gain identity.
    const auto s = qnd::signal_gain(b, p, c);
    push("gain vs sqrt(Gamma)",
         std::abs(s.gain - s.sqrt_gamma_factor * std::sqrt(co.gamma)) /
             std::max(std::abs(s.gain), 1e-300),
         1e-12);

    // Small Fock-space oracle: <b> against beta0 in a weakly nonlinear
    // regime (independent of the linearization only through tiny terms).
    {
        qnd::AncillaParams q = p;
        q.lambda11 = 0.0;
        const auto res = qnd::fock::ancilla_steady_state_auto(q);
        const auto mean_b =
            qnd::fock::expectation(qnd::fock::annihilation(res.dim), res.rho);
        const auto beta0 = qnd::solve_steady_state(q).operating_branch().beta0;
        push("Fock oracle <b> (linear case)",
             std::abs(mean_b - beta0) / std::max(std::abs(beta0), 1e-300), 1e-6);
    }

    bool all = true;
    std::size_t width = 0;
    for (const auto& ck : checks) width = std::max(width, ck.name.size());
    for (const auto& ck : checks) {
        all = all && ck.pass;
        std::cout << (ck.pass ? "PASS  " : "FAIL  ") << ck.name
                  << std::string(width - ck.name.size() + 2, ' ')
                  << "err=" << fmt(ck.err) << "\n";
    }
    std::cout << (all ? "all checks passed" : "VALIDATION FAILED") << "\n";
    return all ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Phonon-number QND readout through a driven Kerr ancilla: "
                 "steady states, fluctuation correlators, effective "
                 "master-equation coefficients, and numerical oracles."};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    Context ctx;
    app.add_option("--config", config_path, "configuration file");
    app.add_option("--output,-o", ctx.out.path, "output file (default stdout)");
    app.add_option("--format", ctx.out.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    bool si = false;
    double kappa_si = 0.0;
    app.add_flag("--si", si, "emit SI-scaled output values");
    app.add_option("--kappa", kappa_si, "kappa in 1/s (required with --si)");

    // Frequently overridden parameters (take precedence over the config).
    std::optional<double> ov_dw, ov_eps, ov_l11, ov_l01, ov_n1, ov_nth;
    std::optional<long> ov_seed;
    app.add_option("--delta-omega", ov_dw, "ancilla detuning");
    app.add_option("--epsilon", ov_eps, "drive strength");
    app.add_option("--lambda11", ov_l11, "ancilla self-Kerr");
    app.add_option("--lambda01", ov_l01, "intermode coupling");
    app.add_option("--occupation-thermal", ov_n1, "thermal bath occupation");
    app.add_option("--occupation-measurement", ov_nth, "measurement bath occupation");
    app.add_option("--seed", ov_seed, "RNG seed");

    auto* c_ss = app.add_subcommand("steady-state",
                                    "steady-state branches and stability");
    auto* c_corr = app.add_subcommand("correlators",
                                      "two-time fluctuation correlators");
    double tau_max = 10.0;
    int corr_points = 201;
    std::string order = "later";
    c_corr->add_option("--tau-max", tau_max, "largest time separation");
    c_corr->add_option("--points", corr_points, "grid points")
        ->check(CLI::Range(2, 100000000));
    c_corr->add_option("--order", order, "later|earlier operator ordering")
        ->check(CLI::IsMember({"later", "earlier"}));

    auto* c_gr = app.add_subcommand("gamma-ratio",
                                    "back-action ratio over a detuning grid");
    double dmin = -3.0, dmax = 3.0;
    int gr_points = 601;
    std::vector<std::string> variants;
    c_gr->add_option("--min", dmin, "detuning grid start");
    c_gr->add_option("--max", dmax, "detuning grid end");
    c_gr->add_option("--points", gr_points, "grid points")
        ->check(CLI::Range(2, 100000000));
    c_gr->add_option("--variant", variants,
                     "epsilon:lambda11 pair; repeat for one file per variant");

    auto* c_coef = app.add_subcommand("coefficients",
                                      "effective master-equation coefficients");
    std::optional<double> integral_tmax;
    double fom_threshold = 1.0;
    c_coef->add_option("--integrals", integral_tmax,
                       "also rebuild coefficients by integration up to this time");
    c_coef->add_option("--threshold", fom_threshold, "figure-of-merit threshold");

    auto* c_sig = app.add_subcommand("signal", "homodyne gain and current");
    double n_phonons = 1.0;
    c_sig->add_option("--nbar", n_phonons, "system phonon number");

    auto* c_sde = app.add_subcommand("sde", "phase-space stochastic ensemble");
    qnd::pp::EnsembleOptions sde_opts;
    bool sde_compare = false;
    long dump = 0, stride = 10;
    c_sde->add_option("--trajectories", sde_opts.n_traj)->check(CLI::Range(1L, 100000000L));
    c_sde->add_option("--dt", sde_opts.dt);
    c_sde->add_option("--t-final", sde_opts.t_final);
    c_sde->add_option("--transient", sde_opts.transient);
    c_sde->add_option("--batches", sde_opts.n_batches)->check(CLI::Range(2, 100000));
    c_sde->add_flag("--compare", sde_compare, "add analytic reference columns");
    c_sde->add_option("--dump", dump, "emit the first N trajectories instead of stats");
    c_sde->add_option("--stride", stride, "sampling stride for --dump");

    auto* c_or = app.add_subcommand("oracle", "Fock-space numerical oracles");
    c_or->require_subcommand(1);
    bool or_compare = false;
    c_or->add_flag("--compare", or_compare, "add analytic reference columns");
    auto* c_or_ss = c_or->add_subcommand("steady-state", "ancilla steady state");
    double or_tol = 1e-9;
    c_or_ss->add_option("--tol", or_tol, "steady-state residual tolerance");
    auto* c_or_corr = c_or->add_subcommand("correlator",
                                           "quantum-regression correlators");
    double or_tau_max = 5.0;
    int or_points = 21;
    std::string or_order = "later";
    c_or_corr->add_option("--tau-max", or_tau_max);
    c_or_corr->add_option("--points", or_points)->check(CLI::Range(2, 100000));
    c_or_corr->add_option("--order", or_order)
        ->check(CLI::IsMember({"later", "earlier"}));
    auto* c_or_joint = c_or->add_subcommand("joint", "two-oscillator QND run");
    int sys_dim = 4, anc_dim = 30, samples = 40, init_n = 0;
    double joint_t_final = 200.0;
    c_or_joint->add_option("--sys-dim", sys_dim)->check(CLI::Range(2, 64));
    c_or_joint->add_option("--anc-dim", anc_dim)->check(CLI::Range(2, 512));
    c_or_joint->add_option("--t-final", joint_t_final);
    c_or_joint->add_option("--samples", samples)->check(CLI::Range(1, 100000));
    c_or_joint->add_option("--init-n", init_n, "lower state of the probed coherence");

    auto* c_val = app.add_subcommand("validate", "cross-oracle consistency suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (!config_path.empty()) ctx.cfg = qnd::load_config(config_path);
        if (ov_dw) ctx.cfg.ancilla.delta_omega = *ov_dw;
        if (ov_eps) ctx.cfg.ancilla.epsilon = *ov_eps;
        if (ov_l11) ctx.cfg.ancilla.lambda11 = *ov_l11;
        if (ov_l01) ctx.cfg.coupling.lambda01 = *ov_l01;
        if (ov_n1) ctx.cfg.ancilla.occupation_thermal = *ov_n1;
        if (ov_nth) ctx.cfg.ancilla.occupation_measurement = *ov_nth;
        if (ov_seed) {
            if (*ov_seed < 0) throw std::invalid_argument("seed must be non-negative");
            ctx.cfg.seed = std::uint64_t(*ov_seed);
        }
        if (ctx.out.format == "csv" && ctx.cfg.output_format == "json" &&
            !app.count("--format"))
            ctx.out.format = "json";
        if (ctx.out.path.empty()) ctx.out.path = ctx.cfg.output_path;
        ctx.out.si = si;
        ctx.out.kappa_si = kappa_si;
        if (si && !(kappa_si > 0.0))
            throw std::invalid_argument("--si requires --kappa <value> with a positive rate");
        ctx.cfg.ancilla.validate();
        ctx.cfg.coupling.validate();
        ctx.cfg.system.validate();
        sde_opts.seed = ctx.cfg.seed;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (*c_ss) cmd_steady_state(ctx);
        else if (*c_corr) cmd_correlators(ctx, tau_max, corr_points, order);
        else if (*c_gr) cmd_gamma_ratio(ctx, dmin, dmax, gr_points, variants);
        else if (*c_coef) cmd_coefficients(ctx, integral_tmax, fom_threshold);
        else if (*c_sig) cmd_signal(ctx, n_phonons);
        else if (*c_sde) cmd_sde(ctx, sde_opts, sde_compare, dump, stride);
        else if (*c_or) {
            if (*c_or_ss) cmd_oracle_steady(ctx, or_compare, or_tol);
            else if (*c_or_corr)
                cmd_oracle_correlator(ctx, or_compare, or_tau_max, or_points, or_order);
            else if (*c_or_joint)
                cmd_oracle_joint(ctx, or_compare, sys_dim, anc_dim, joint_t_final,
                                 samples, init_n);
        } else if (*c_val) {
            return cmd_validate(ctx);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
