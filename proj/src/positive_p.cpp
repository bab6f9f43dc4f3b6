#include "qnd/positive_p.hpp"

#include <cmath>
#include <stdexcept>

#include "qnd/steady_state.hpp"

namespace qnd::pp {

namespace {

using cd = std::complex<double>;
constexpr cd I{0.0, 1.0};

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Deterministic per-trajectory stream: xoshiro256++ whose state is drawn
// from a splitmix64 chain keyed on (seed, trajectory index). Nearby
// indices give statistically independent streams, which a plain
// splitmix offset scheme does not.
struct Rng {
    std::uint64_t s[4];

    explicit Rng(std::uint64_t seed, std::uint64_t traj) {
        std::uint64_t sm = mix64(seed + 0x9E3779B97F4A7C15ULL) ^
                           mix64(traj + 0xBF58476D1CE4E5B9ULL);
        for (auto& word : s) {
            sm += 0x9E3779B97F4A7C15ULL;
            word = mix64(sm);
        }
    }

    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
        const std::uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }

    double uniform() {  // (0, 1]
        return (double(next() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Box-Muller; hand-rolled so fixed seeds are reproducible across
    // standard libraries.
    std::pair<double, double> normal_pair() {
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 2.0 * M_PI * u2;
        return {r * std::cos(phi), r * std::sin(phi)};
    }
};

struct RawMoments {
    cd s_beta{0.0}, s_alpha{0.0}, s_bb{0.0}, s_ba{0.0}, s_aa{0.0};
    long count = 0;

    void add(const PhasePoint& pt) {
        s_beta += pt.beta;
        s_alpha += pt.alpha;
        s_bb += pt.beta * pt.beta;
        s_ba += pt.beta * pt.alpha;
        s_aa += pt.alpha * pt.alpha;
        ++count;
    }
    void merge(const RawMoments& o) {
        s_beta += o.s_beta;
        s_alpha += o.s_alpha;
        s_bb += o.s_bb;
        s_ba += o.s_ba;
        s_aa += o.s_aa;
        count += o.count;
    }
};

Estimate batch_estimate(const std::vector<cd>& batch_values) {
    const std::size_t nb = batch_values.size();
    cd mean{0.0};
    for (const cd& v : batch_values) mean += v;
    mean /= double(nb);
    double var = 0.0;
    for (const cd& v : batch_values) var += std::norm(v - mean);
    const double se = std::sqrt(var / (double(nb) * double(nb - 1)));
    return {mean, se};
}

}  // namespace

PhasePoint drift(const PhasePoint& pt, const AncillaParams& p) {
    const double kappa = p.kappa();
    const cd chi =
        cd(0.0, p.delta_omega + p.lambda11) + 2.0 * I * p.lambda11 * pt.beta * pt.alpha;
    PhasePoint d;
    d.beta = -I * p.epsilon - pt.beta * (kappa + chi);
    d.alpha = I * p.epsilon - pt.alpha * (kappa - chi);
    return d;
}

Eigen::Matrix2cd noise_factor(const PhasePoint& pt, const AncillaParams& p) {
    const double two_kn = 2.0 * p.kappa() * p.combined_occupation();
    Eigen::Matrix2cd D;
    D << -2.0 * I * p.lambda11 * pt.beta * pt.beta, cd(two_kn, 0.0),
         cd(two_kn, 0.0), 2.0 * I * p.lambda11 * pt.alpha * pt.alpha;

    const cd det = D(0, 0) * D(1, 1) - D(0, 1) * D(1, 0);
    const cd tr = D(0, 0) + D(1, 1);
    const double scale = D.cwiseAbs().maxCoeff();
    if (scale == 0.0) return Eigen::Matrix2cd::Zero();

    if (std::abs(det) <= 1e-28 * scale * scale) {
        // Rank-1: D = w w^T with w a scaled column.
        const int j = std::abs(D(0, 0)) >= std::abs(D(1, 1)) ? 0 : 1;
        if (std::abs(D(j, j)) <= 1e-14 * scale) return Eigen::Matrix2cd::Zero();
        const cd root = std::sqrt(D(j, j));
        Eigen::Matrix2cd B = Eigen::Matrix2cd::Zero();
        B(0, 0) = D(0, j) / root;
        B(1, 0) = D(1, j) / root;
        return B;
    }

    // Principal square root via Cayley-Hamilton: (D + s I)/t with
    // s = sqrt(det), t = sqrt(tr + 2s); flip the sqrt branch if t degenerates.
    cd s = std::sqrt(det);
    cd t2 = tr + 2.0 * s;
    if (std::abs(t2) <= 1e-14 * scale) {
        s = -s;
        t2 = tr + 2.0 * s;
    }
    const cd t = std::sqrt(t2);
    return (D + s * Eigen::Matrix2cd::Identity()) / t;
}

namespace {

// Integrates one trajectory; returns false if it hit the divergence cutoff.
bool run_trajectory(const AncillaParams& p, const EnsembleOptions& opts,
                    const PhasePoint& start, double cutoff_sq, std::uint64_t index,
                    RawMoments& acc) {
    Rng rng(opts.seed, index);
    PhasePoint pt = start;
    const double sqrt_dt = std::sqrt(opts.dt);
    const long n_steps = long(std::llround(opts.t_final / opts.dt));
    RawMoments local;
    for (long k = 0; k < n_steps; ++k) {
        const PhasePoint d = drift(pt, p);
        const Eigen::Matrix2cd B = noise_factor(pt, p);
        const auto [g1, g2] = rng.normal_pair();
        pt.beta += d.beta * opts.dt + (B(0, 0) * g1 + B(0, 1) * g2) * sqrt_dt;
        pt.alpha += d.alpha * opts.dt + (B(1, 0) * g1 + B(1, 1) * g2) * sqrt_dt;
        if (std::norm(pt.beta) > cutoff_sq || std::norm(pt.alpha) > cutoff_sq)
            return false;
        const double t = double(k + 1) * opts.dt;
        if (t >= opts.transient) local.add(pt);
    }
    acc.merge(local);
    return true;
}

}  // namespace

EnsembleStats run_ensemble(const AncillaParams& p, const EnsembleOptions& opts) {
    p.validate();
    if (opts.n_traj < opts.n_batches)
        throw std::invalid_argument("run_ensemble: need n_traj >= n_batches");
    if (!(opts.dt > 0.0) || !(opts.t_final > opts.transient))
        throw std::invalid_argument("run_ensemble: bad time grid");

    const auto sol = solve_steady_state(p);
    const auto& branch = sol.operating_branch();
    const PhasePoint start{branch.beta0, std::conj(branch.beta0)};
    const double cutoff =
        opts.divergence_cutoff * std::max(1.0, std::sqrt(branch.n0));
    const double cutoff_sq = cutoff * cutoff;

    std::vector<RawMoments> batches(std::size_t(opts.n_batches));
    long diverged = 0;
    long used = 0;
    for (long i = 0; i < opts.n_traj; ++i) {
        const std::size_t batch =
            std::size_t(i * opts.n_batches / opts.n_traj);
        if (run_trajectory(p, opts, start, cutoff_sq, std::uint64_t(i),
                           batches[batch]))
            ++used;
        else
            ++diverged;
    }

    RawMoments total;
    for (const auto& b : batches) total.merge(b);
    if (total.count == 0)
        throw std::runtime_error("run_ensemble: all trajectories diverged");

    const cd mean_beta = total.s_beta / double(total.count);
    const cd mean_alpha = total.s_alpha / double(total.count);

    std::vector<cd> vb, va, vbb, vba, vaa;
    for (const auto& b : batches) {
        if (b.count == 0) continue;
        const double n = double(b.count);
        vb.push_back(b.s_beta / n);
        va.push_back(b.s_alpha / n);
        // Centered second moments around the global means.
        vbb.push_back(b.s_bb / n - 2.0 * mean_beta * (b.s_beta / n) +
                      mean_beta * mean_beta);
        vba.push_back(b.s_ba / n - mean_beta * (b.s_alpha / n) -
                      mean_alpha * (b.s_beta / n) + mean_beta * mean_alpha);
        vaa.push_back(b.s_aa / n - 2.0 * mean_alpha * (b.s_alpha / n) +
                      mean_alpha * mean_alpha);
    }
    if (vb.size() < 2)
        throw std::runtime_error("run_ensemble: too few non-empty batches");

    EnsembleStats stats;
    stats.n_traj = used;
    stats.divergence_count = diverged;
    stats.mean_beta = batch_estimate(vb);
    stats.mean_alpha = batch_estimate(va);
    stats.beta1_sq = batch_estimate(vbb);
    stats.beta1_alpha1 = batch_estimate(vba);
    stats.alpha1_sq = batch_estimate(vaa);
    return stats;
}

std::vector<TrajectorySample> sample_trajectories(const AncillaParams& p,
                                                  const EnsembleOptions& opts,
                                                  long n_dump, long stride) {
    if (stride < 1) throw std::invalid_argument("sample_trajectories: stride >= 1");
    const auto sol = solve_steady_state(p);
    const auto& branch = sol.operating_branch();
    const PhasePoint start{branch.beta0, std::conj(branch.beta0)};
    const double cutoff =
        opts.divergence_cutoff * std::max(1.0, std::sqrt(branch.n0));
    const double cutoff_sq = cutoff * cutoff;
    const double sqrt_dt = std::sqrt(opts.dt);
    const long n_steps = long(std::llround(opts.t_final / opts.dt));

    std::vector<TrajectorySample> out;
    for (long i = 0; i < std::min(n_dump, opts.n_traj); ++i) {
        Rng rng(opts.seed, std::uint64_t(i));
        PhasePoint pt = start;
        out.push_back({i, 0.0, pt});
        for (long k = 0; k < n_steps; ++k) {
            const PhasePoint d = drift(pt, p);
            const Eigen::Matrix2cd B = noise_factor(pt, p);
            const auto [g1, g2] = rng.normal_pair();
            pt.beta += d.beta * opts.dt + (B(0, 0) * g1 + B(0, 1) * g2) * sqrt_dt;
            pt.alpha += d.alpha * opts.dt + (B(1, 0) * g1 + B(1, 1) * g2) * sqrt_dt;
            if (std::norm(pt.beta) > cutoff_sq || std::norm(pt.alpha) > cutoff_sq)
                break;
            if ((k + 1) % stride == 0)
                out.push_back({i, double(k + 1) * opts.dt, pt});
        }
    }
    return out;
}

}  // namespace qnd::pp
