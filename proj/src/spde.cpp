#include "rbnlab/spde.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rbnlab/parallel.hpp"
#include "rbnlab/rng.hpp"
#include "rbnlab/sewing.hpp"
#include "rbnlab/stats.hpp"

namespace rbnlab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

// evaluation grid for nonlinearities: power of two >= 4K (>= 2K+1 needed for
// alias-free transforms, 4K leaves headroom for the composition with sigma)
std::size_t eval_grid_size(int K) {
    std::size_t M = 8;
    while (M < 4 * static_cast<std::size_t>(K)) M <<= 1;
    return M;
}

std::size_t step_index(double time, double dt, std::size_t n_t, const char* where) {
    const double pos = time / dt;
    const auto idx = static_cast<std::size_t>(std::llround(pos));
    if (idx > n_t || std::abs(pos - static_cast<double>(idx)) > 1e-9)
        throw std::invalid_argument(std::string(where) + ": time " + std::to_string(time) +
                                    " is not on the scheme time grid");
    return idx;
}

// (mean |v|^q)^{1/q}
double lp_omega_norm(std::span<const double> v, double q) {
    double acc = 0.0;
    for (double x : v) acc += std::pow(std::abs(x), q);
    return std::pow(acc / static_cast<double>(v.size()), 1.0 / q);
}

// real orthonormal basis e_j sampled on the M-point torus grid
std::vector<double> basis_grid(int j, std::size_t M) {
    std::vector<double> b(M);
    const double inv_sqrt_2pi = 1.0 / std::sqrt(kTwoPi);
    const double inv_sqrt_pi = 1.0 / std::sqrt(kTwoPi / 2.0);
    const int m = (j + 1) / 2;
    for (std::size_t i = 0; i < M; ++i) {
        const double x = kTwoPi * static_cast<double>(i) / static_cast<double>(M);
        if (j == 0)
            b[i] = inv_sqrt_2pi;
        else if (j % 2 == 1)
            b[i] = std::cos(m * x) * inv_sqrt_pi;
        else
            b[i] = std::sin(m * x) * inv_sqrt_pi;
    }
    return b;
}

double grid_inner(std::span<const double> f, std::span<const double> g, double scale) {
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) acc += f[i] * g[i];
    return acc * scale;
}

bool monotone_within(std::span<const double> v, double slack) {
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
        if (v[i + 1] > (1.0 + slack) * v[i]) return false;
    return true;
}

std::vector<std::size_t> dyadic_indices(std::size_t lo, std::size_t hi, int level,
                                        const char* where) {
    const std::size_t span = hi - lo;
    const std::size_t blocks = std::size_t{1} << level;
    if (span % blocks != 0)
        throw std::invalid_argument(std::string(where) +
                                    ": window is not divisible into 2^level scheme steps");
    std::vector<std::size_t> idx(blocks + 1);
    for (std::size_t q = 0; q <= blocks; ++q) idx[q] = lo + q * (span / blocks);
    return idx;
}

} // namespace

CylindricalIncrements CylindricalIncrements::generate(std::size_t n_t, std::size_t K_noise,
                                                      double dt, std::uint64_t seed,
                                                      std::uint64_t stream) {
    if (n_t == 0 || K_noise == 0)
        throw std::invalid_argument("CylindricalIncrements: need n_t >= 1 and K_noise >= 1");
    if (!(dt > 0.0)) throw std::invalid_argument("CylindricalIncrements: dt must be positive");
    CylindricalIncrements inc;
    inc.n_t = n_t;
    inc.K_noise = K_noise;
    inc.dt = dt;
    inc.seed = seed;
    inc.stream = stream;
    inc.dbeta.resize(n_t * K_noise);
    RngStream rng(seed, stream);
    const double sd = std::sqrt(dt);
    for (double& d : inc.dbeta) d = sd * rng.gaussian(); // step-major, fixed draw order
    return inc;
}

SpectralField exponential_euler_step(const SpectralField& u, const SpectralField& g, double dt) {
    if (u.cutoff() != g.cutoff())
        throw std::invalid_argument("exponential_euler_step: cutoff mismatch");
    SpectralField out(u.cutoff());
    for (int k = 0; k <= u.cutoff(); ++k) {
        const double decay = std::exp(-static_cast<double>(k) * static_cast<double>(k) * dt);
        out.coeff(k) = decay * (u.coeff(k) + g.coeff(k));
    }
    out.fix_zero_mode();
    return out;
}

SpdeTrajectory solve_mollified(const SpectralField& u0, const MollifiedDiffusion& sigma_eps,
                               const SamplePath& w, std::size_t n_t, int K,
                               const CylindricalIncrements& increments, const SolveOptions& opts) {
    if (w.n_steps != n_t)
        throw std::invalid_argument("solve_mollified: time grids of w and the scheme must "
                                    "coincide (w.n_steps != n_t)");
    if (increments.n_t != n_t || increments.K_noise != sigma_eps.parent.K_noise)
        throw std::invalid_argument("solve_mollified: increments shape mismatch");
    if (sigma_eps.parent.K_noise > static_cast<std::size_t>(K) + 1)
        throw std::invalid_argument("solve_mollified: K_noise exceeds the mode cutoff K");
    if (u0.cutoff() != K) throw std::invalid_argument("solve_mollified: u0 cutoff != K");
    const double dt = w.dt();
    if (std::abs(increments.dt - dt) > 1e-12 * std::max(1.0, dt))
        throw std::invalid_argument("solve_mollified: increments dt mismatch");

    const std::size_t M = eval_grid_size(K);
    const double quad_weight = kTwoPi / static_cast<double>(M);
    const auto& weights = sigma_eps.parent.weights;

    SpdeTrajectory traj;
    traj.w = w;
    traj.epsilon = sigma_eps.epsilon;
    traj.K = K;
    traj.K_noise = sigma_eps.parent.K_noise;
    traj.noise_seed = increments.seed;
    traj.noise_stream = increments.stream;
    traj.times.resize(n_t + 1);
    for (std::size_t j = 0; j <= n_t; ++j) traj.times[j] = w.time(j);
    if (opts.store_states) traj.states.reserve(n_t + 1);

    SpectralField u = u0;
    u.fix_zero_mode();
    if (opts.store_states) traj.states.push_back(u);

    std::vector<double> h(M), g_grid(M);
    for (std::size_t n = 0; n < n_t; ++n) {
        const std::vector<double> u_grid = field_to_grid(u, M);
        const double w_n = w.values[n];
        double hs_sq = 0.0;
        for (std::size_t i = 0; i < M; ++i) {
            h[i] = sigma_eps.profile_eps(u_grid[i] - w_n);
            hs_sq += h[i] * h[i];
        }
        hs_sq *= quad_weight;

        double zeta = 0.0;
        for (std::size_t k = 0; k < weights.size(); ++k) zeta += weights[k] * increments.get(n, k);
        for (std::size_t i = 0; i < M; ++i) g_grid[i] = h[i] * zeta;
        const SpectralField g_hat = grid_to_field(g_grid, K);

        if (opts.observer)
            opts.observer(StepRecord{n, traj.times[n], w_n, u_grid, h, zeta, hs_sq, u, g_hat});

        u = exponential_euler_step(u, g_hat, dt);
        if (!u.finite())
            throw std::runtime_error("solve_mollified: non-finite state at step " +
                                     std::to_string(n + 1) +
                                     " (reduce dt or the singularity cap)");
        if (opts.store_states) traj.states.push_back(u);
    }
    traj.final_state = std::move(u);
    return traj;
}

namespace {

template <class SigmaSq>
double hs_norm_sq_impl(SigmaSq&& sigma_sq, const SpectralField& u, double shift) {
    const std::size_t M = eval_grid_size(u.cutoff());
    const std::vector<double> grid = field_to_grid(u, M);
    double acc = 0.0;
    for (double x : grid) {
        const double v = sigma_sq(x - shift);
        if (!std::isfinite(v))
            throw std::domain_error("hs_norm_sq: Sigma^2 is not finite at argument " +
                                    std::to_string(x - shift));
        acc += v;
    }
    return acc * kTwoPi / static_cast<double>(M);
}

} // namespace

double hs_norm_sq(const DiffusionCoefficient& sigma, const SpectralField& u, double shift) {
    return hs_norm_sq_impl([&](double x) { return sigma.sigma_sq(x); }, u, shift);
}

double hs_norm_sq(const MollifiedDiffusion& sigma, const SpectralField& u, double shift) {
    return hs_norm_sq_impl([&](double x) { return sigma.sigma_sq(x); }, u, shift);
}

double hs_norm_sq_modesum(const DiffusionCoefficient& sigma, const SpectralField& u,
                          double shift) {
    const std::size_t M = eval_grid_size(u.cutoff());
    const std::vector<double> grid = field_to_grid(u, M);
    double total = 0.0;
    for (std::size_t k = 0; k < sigma.K_noise; ++k) {
        double mode = 0.0;
        for (double x : grid) {
            const double v = sigma.sigma_k(k, x - shift);
            mode += v * v;
        }
        total += mode * kTwoPi / static_cast<double>(M);
    }
    return total;
}

SpdeTrajectory materialize(const TrajectoryEnsemble& ens, const MollifiedDiffusion& sigma_eps,
                           const SamplePath& w, std::size_t i, const SolveOptions& opts) {
    const auto inc = CylindricalIncrements::generate(ens.n_t, sigma_eps.parent.K_noise, w.dt(),
                                                     ens.noise_seed, ens.first_stream + i);
    return solve_mollified(ens.u0, sigma_eps, w, ens.n_t, ens.K, inc, opts);
}

ItoIsometryReport ito_isometry_check(const TrajectoryEnsemble& ens,
                                     const MollifiedDiffusion& sigma_eps, const SamplePath& w,
                                     int jobs) {
    const std::size_t N = ens.n_samples;
    const std::size_t M = eval_grid_size(ens.K);
    const double quad_weight = kTwoPi / static_cast<double>(M);
    std::vector<double> final_sq(N), sup_sq(N), qv(N);

    parallel_for(N, jobs, [&](std::size_t i) {
        std::vector<double> I(M, 0.0);
        double sup = 0.0, last = 0.0, qv_acc = 0.0;
        SolveOptions opts;
        opts.store_states = false;
        opts.observer = [&](const StepRecord& rec) {
            for (std::size_t x = 0; x < M; ++x) I[x] += rec.forcing_profile[x] * rec.zeta;
            double nrm = 0.0;
            for (double v : I) nrm += v * v;
            nrm *= quad_weight;
            sup = std::max(sup, nrm);
            last = nrm;
            qv_acc += rec.hs_sq * w.dt();
        };
        materialize(ens, sigma_eps, w, i, opts);
        final_sq[i] = last;
        sup_sq[i] = sup;
        qv[i] = qv_acc;
    });

    ItoIsometryReport rep;
    rep.n_samples = N;
    const McEstimate lhs = mc_summary(final_sq);
    const McEstimate rhs = mc_summary(qv);
    rep.lhs = lhs.value;
    rep.lhs_se = lhs.se;
    rep.rhs = rhs.value;
    rep.rhs_se = rhs.se;
    rep.rel_gap = rhs.value != 0.0 ? std::abs(lhs.value - rhs.value) / rhs.value
                                   : std::abs(lhs.value - rhs.value);

    double sup_m2 = 0.0, sup_m4 = 0.0, qv_m1 = 0.0, qv_m2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        sup_m2 += sup_sq[i];
        sup_m4 += sup_sq[i] * sup_sq[i];
        qv_m1 += qv[i];
        qv_m2 += qv[i] * qv[i];
    }
    rep.bdg_ratio_m2 = qv_m1 != 0.0 ? sup_m2 / qv_m1 : 0.0;
    rep.bdg_ratio_m4 = qv_m2 != 0.0 ? sup_m4 / qv_m2 : 0.0;
    return rep;
}

IdentificationReport identification_sewing(const TrajectoryEnsemble& ens,
                                           const MollifiedDiffusion& sigma_eps,
                                           const LocalTimeField& L, const SamplePath& w, double s,
                                           double t, const IdentificationOptions& opts,
                                           int jobs) {
    const double dt = w.dt();
    const std::size_t s_idx = step_index(s, dt, ens.n_t, "identification_sewing");
    const std::size_t t_idx = step_index(t, dt, ens.n_t, "identification_sewing");
    if (s_idx >= t_idx) throw std::invalid_argument("identification_sewing: need s < t");

    int level = opts.max_level;
    while ((std::size_t{1} << level) > (t_idx - s_idx)) --level;
    const auto snap_idx = dyadic_indices(s_idx, t_idx, level, "identification_sewing");
    const std::size_t n_snap = snap_idx.size();

    // map snapshot step indices into the local-time field's slice list
    std::vector<std::size_t> l_of(n_snap);
    for (std::size_t q = 0; q < n_snap; ++q) {
        const double time = static_cast<double>(snap_idx[q]) * dt;
        bool found = false;
        for (std::size_t j = 0; j < L.times.size(); ++j)
            if (std::abs(L.times[j] - time) < 1e-9 * std::max(1.0, time)) {
                l_of[q] = j;
                found = true;
                break;
            }
        if (!found)
            throw std::invalid_argument("identification_sewing: local-time field lacks a slice "
                                        "at a dyadic time");
    }

    const std::size_t M = eval_grid_size(ens.K);
    const double quad_weight = kTwoPi / static_cast<double>(M);
    const std::size_t B = L.grid.n_bins;
    const double dx_w = L.grid.dx();
    const std::size_t N = ens.n_samples;

    IdentificationReport rep;
    rep.m = opts.m;
    rep.level = level;
    rep.sewed.resize(N);
    rep.direct.resize(N);
    std::vector<std::size_t> conv_flags(N, 0);

    parallel_for(N, jobs, [&](std::size_t i) {
        // per-sample state: u on the grid at every snapshot time + cumulative HS^2
        std::vector<std::vector<double>> u_grids(n_snap);
        std::vector<double> Q(ens.n_t + 1, 0.0);
        SolveOptions sopts;
        sopts.store_states = false;
        sopts.observer = [&](const StepRecord& rec) {
            Q[rec.n + 1] = Q[rec.n] + rec.hs_sq * dt;
            const auto it = std::lower_bound(snap_idx.begin(), snap_idx.end(), rec.n);
            if (it != snap_idx.end() && *it == rec.n)
                u_grids[static_cast<std::size_t>(it - snap_idx.begin())] =
                    std::vector<double>(rec.u_grid.begin(), rec.u_grid.end());
        };
        const SpdeTrajectory traj = materialize(ens, sigma_eps, w, i, sopts);
        if (snap_idx.back() == ens.n_t) u_grids.back() = field_to_grid(traj.final_state, M);

        const double span = t - s;
        auto snap_of = [&](double time) {
            return static_cast<std::size_t>(
                std::llround((time - s) / span * static_cast<double>(n_snap - 1)));
        };
        Germ germ = [&](double a, double b) {
            const std::size_t qa = snap_of(a), qb = snap_of(b);
            const auto& la = L.values[l_of[qa]];
            const auto& lb = L.values[l_of[qb]];
            const auto& ug = u_grids[qa];
            double total = 0.0;
            for (std::size_t x = 0; x < M; ++x) {
                const double y = ug[x];
                double conv = 0.0;
                for (std::size_t bin = 0; bin < B; ++bin) {
                    const double dl = lb[bin] - la[bin];
                    if (dl == 0.0) continue;
                    conv += sigma_eps.sigma_sq(y - L.grid.center(bin)) * dl;
                }
                total += conv * dx_w;
            }
            return total * quad_weight;
        };

        SewOptions sew_opts;
        sew_opts.max_level = level;
        sew_opts.tol = opts.tol;
        const SewValue sv = sew_value(germ, s, t, sew_opts);
        rep.sewed[i] = sv.value;
        rep.direct[i] = Q[t_idx] - Q[s_idx];
        conv_flags[i] = sv.converged ? 1 : 0;
    });

    for (std::size_t f : conv_flags) rep.converged += f;
    const double q = opts.m / 2.0;
    std::vector<double> diff(N);
    for (std::size_t i = 0; i < N; ++i) diff[i] = rep.sewed[i] - rep.direct[i];
    rep.lm2_sewed = lp_omega_norm(rep.sewed, q);
    rep.lm2_direct = lp_omega_norm(rep.direct, q);
    rep.rel_gap = rep.lm2_direct != 0.0 ? lp_omega_norm(diff, q) / rep.lm2_direct : 0.0;
    return rep;
}

namespace {

// snapshot spectral states at dyadic mesh indices (final state patched by caller)
struct MeshSnapshots {
    std::vector<std::size_t> indices;
    std::vector<SpectralField> states;
};

// sup over mesh pairs of (E||u_b - u_a||^m)^{1/m} / (t_b - t_a)^{gamma0/2}
double holder_from_pairs(const std::vector<std::vector<double>>& pair_acc,
                         const std::vector<std::size_t>& mesh, double dt, double gamma0, double m,
                         std::size_t n_samples) {
    double worst = 0.0;
    std::size_t p = 0;
    for (std::size_t a = 0; a < mesh.size(); ++a)
        for (std::size_t b = a + 1; b < mesh.size(); ++b, ++p) {
            double mean = 0.0;
            for (double v : pair_acc[p]) mean += v;
            mean /= static_cast<double>(n_samples);
            const double gap = static_cast<double>(mesh[b] - mesh[a]) * dt;
            worst = std::max(worst, std::pow(mean, 1.0 / m) / std::pow(gap, gamma0 / 2.0));
        }
    return worst;
}

} // namespace

VolterraBoundReport volterra_bound_check(const TrajectoryEnsemble& ens,
                                         const MollifiedDiffusion& sigma_eps, const SamplePath& w,
                                         double eta, double s, double t,
                                         const VolterraBoundOptions& opts, int jobs) {
    if (!(eta < opts.gamma0 - opts.delta))
        throw std::invalid_argument("volterra_bound_check: need eta < gamma0 - delta");
    const double dt = w.dt();
    const std::size_t s_idx = step_index(s, dt, ens.n_t, "volterra_bound_check");
    const std::size_t t_idx = step_index(t, dt, ens.n_t, "volterra_bound_check");
    if (s_idx >= t_idx) throw std::invalid_argument("volterra_bound_check: need s < t");
    const auto mesh = dyadic_indices(0, ens.n_t, opts.holder_mesh_level, "volterra_bound_check");

    const std::size_t N = ens.n_samples;
    const std::size_t n_pairs = mesh.size() * (mesh.size() - 1) / 2;
    std::vector<double> values(N);
    std::vector<std::size_t> conv_flags(N, 0);
    std::vector<std::vector<double>> pair_acc(n_pairs, std::vector<double>(N, 0.0));

    int vlevel = 2;
    while ((std::size_t{1} << (vlevel + 1)) <= (t_idx - s_idx)) ++vlevel;

    parallel_for(N, jobs, [&](std::size_t i) {
        std::vector<double> Q(ens.n_t + 1, 0.0);
        std::vector<SpectralField> snaps(mesh.size());
        SolveOptions sopts;
        sopts.store_states = false;
        sopts.observer = [&](const StepRecord& rec) {
            Q[rec.n + 1] = Q[rec.n] + rec.hs_sq * dt;
            const auto it = std::lower_bound(mesh.begin(), mesh.end(), rec.n);
            if (it != mesh.end() && *it == rec.n)
                snaps[static_cast<std::size_t>(it - mesh.begin())] = rec.u_hat;
        };
        const SpdeTrajectory traj = materialize(ens, sigma_eps, w, i, sopts);
        if (mesh.back() == ens.n_t) snaps.back() = traj.final_state;

        Germ germ = [&](double a, double b) {
            const auto ia = static_cast<std::size_t>(std::llround(a / dt));
            const auto ib = static_cast<std::size_t>(std::llround(b / dt));
            return Q[ib] - Q[ia];
        };
        SewOptions vopts;
        vopts.max_level = vlevel;
        const SewValue sv = volterra_sew(germ, eta, s, t, vopts);
        values[i] = sv.value;
        conv_flags[i] = sv.converged ? 1 : 0;

        std::size_t p = 0;
        for (std::size_t a = 0; a < mesh.size(); ++a)
            for (std::size_t b = a + 1; b < mesh.size(); ++b, ++p) {
                SpectralField d(ens.K);
                for (int k = 0; k <= ens.K; ++k)
                    d.coeff(k) = snaps[b].coeff(k) - snaps[a].coeff(k);
                pair_acc[p][i] = std::pow(l2_norm(d), opts.m);
            }
    });

    VolterraBoundReport rep;
    rep.eta = eta;
    rep.s = s;
    rep.t = t;
    for (std::size_t f : conv_flags) rep.converged += f;
    rep.lm2_value = lp_omega_norm(values, opts.m / 2.0);
    rep.holder_estimate = holder_from_pairs(pair_acc, mesh, dt, opts.gamma0, opts.m, N);
    rep.bound_factor = std::pow(t - s, opts.gamma0 - eta - opts.delta) *
                       sigma_eps.lp_norm_sigma_sq * (1.0 + rep.holder_estimate);
    rep.fitted_C = rep.bound_factor != 0.0 ? rep.lm2_value / rep.bound_factor : 0.0;
    return rep;
}

AprioriHolderReport apriori_holder(const TrajectoryEnsemble& ens,
                                   std::span<const MollifiedDiffusion> ladder,
                                   const SamplePath& w, double gamma0, double m, int mesh_level,
                                   int jobs) {
    if (ladder.size() < 3)
        throw std::invalid_argument("apriori_holder: need an epsilon ladder of >= 3 rungs");
    const double dt = w.dt();
    const auto mesh = dyadic_indices(0, ens.n_t, mesh_level, "apriori_holder");
    const std::size_t n_pairs = mesh.size() * (mesh.size() - 1) / 2;
    const std::size_t N = ens.n_samples;

    AprioriHolderReport rep;
    rep.m = m;
    rep.gamma0 = gamma0;
    rep.u0_h_norm = sobolev_norm(ens.u0, gamma0 / 2.0);

    double max_lp = 0.0;
    for (const auto& rung : ladder) {
        std::vector<std::vector<double>> pair_acc(n_pairs, std::vector<double>(N, 0.0));
        parallel_for(N, jobs, [&](std::size_t i) {
            std::vector<SpectralField> snaps(mesh.size());
            SolveOptions sopts;
            sopts.store_states = false;
            sopts.observer = [&](const StepRecord& rec) {
                const auto it = std::lower_bound(mesh.begin(), mesh.end(), rec.n);
                if (it != mesh.end() && *it == rec.n)
                    snaps[static_cast<std::size_t>(it - mesh.begin())] = rec.u_hat;
            };
            const SpdeTrajectory traj = materialize(ens, rung, w, i, sopts);
            if (mesh.back() == ens.n_t) snaps.back() = traj.final_state;
            std::size_t p = 0;
            for (std::size_t a = 0; a < mesh.size(); ++a)
                for (std::size_t b = a + 1; b < mesh.size(); ++b, ++p) {
                    SpectralField d(ens.K);
                    for (int k = 0; k <= ens.K; ++k)
                        d.coeff(k) = snaps[b].coeff(k) - snaps[a].coeff(k);
                    pair_acc[p][i] = std::pow(l2_norm(d), m);
                }
        });
        rep.epsilons.push_back(rung.epsilon);
        rep.estimates.push_back(holder_from_pairs(pair_acc, mesh, dt, gamma0, m, N));
        max_lp = std::max(max_lp, rung.lp_norm_sigma_sq);
    }

    const auto [lo, hi] = std::minmax_element(rep.estimates.begin(), rep.estimates.end());
    rep.max_over_min = *lo > 0.0 ? *hi / *lo : 0.0;
    rep.composite = rep.u0_h_norm + std::sqrt(max_lp);
    rep.fitted_C = rep.composite > 0.0 ? *hi / rep.composite : 0.0;
    return rep;
}

AprioriSobolevReport apriori_sobolev(const TrajectoryEnsemble& ens,
                                     std::span<const MollifiedDiffusion> ladder,
                                     const SamplePath& w, double gamma0, double m, int mesh_level,
                                     int jobs) {
    if (ladder.size() < 3)
        throw std::invalid_argument("apriori_sobolev: need an epsilon ladder of >= 3 rungs");
    if (!(m >= 2.0)) throw std::invalid_argument("apriori_sobolev: need m >= 2");
    const double dt = w.dt();
    const auto mesh = dyadic_indices(0, ens.n_t, mesh_level, "apriori_sobolev");
    const std::size_t N = ens.n_samples;

    AprioriSobolevReport rep;
    rep.m = m;
    rep.gamma0 = gamma0;
    rep.alpha = 1.0 / m + 0.01;
    const double kernel_exp = 2.0 * rep.alpha + gamma0;
    rep.factorization_checked = kernel_exp < 1.0;
    if (!rep.factorization_checked)
        rep.note = "factorization kernel exponent 2*alpha+gamma0 = " +
                   std::to_string(kernel_exp) + " >= 1 (non-integrable); cross-check skipped";

    for (const auto& rung : ladder) {
        std::vector<double> sup_m(N, 0.0);
        std::vector<std::vector<double>> inner_q(mesh.size(), std::vector<double>(N, 0.0));
        parallel_for(N, jobs, [&](std::size_t i) {
            std::vector<double> hs(ens.n_t, 0.0);
            double sup = std::pow(sobolev_norm(ens.u0, gamma0), m);
            SolveOptions sopts;
            sopts.store_states = false;
            sopts.observer = [&](const StepRecord& rec) {
                hs[rec.n] = rec.hs_sq;
                if (rec.n > 0) sup = std::max(sup, std::pow(sobolev_norm(rec.u_hat, gamma0), m));
            };
            const SpdeTrajectory traj = materialize(ens, rung, w, i, sopts);
            sup = std::max(sup, std::pow(sobolev_norm(traj.final_state, gamma0), m));
            sup_m[i] = sup;
            if (rep.factorization_checked) {
                for (std::size_t q = 1; q < mesh.size(); ++q) {
                    const double ts = static_cast<double>(mesh[q]) * dt;
                    double inner = 0.0;
                    for (std::size_t r = 0; r < mesh[q]; ++r)
                        inner += std::pow(ts - static_cast<double>(r) * dt, -kernel_exp) *
                                 hs[r] * dt;
                    inner_q[q][i] = std::pow(inner, m / 2.0);
                }
            }
        });

        rep.epsilons.push_back(rung.epsilon);
        const McEstimate est = mc_summary(sup_m);
        rep.estimates.push_back(std::pow(est.value, 1.0 / m));
        if (rep.factorization_checked) {
            // trapezoid in s over the mesh of E[inner(s)^{m/2}]
            double rhs = 0.0;
            std::vector<double> means(mesh.size(), 0.0);
            for (std::size_t q = 0; q < mesh.size(); ++q)
                means[q] = mc_summary(inner_q[q]).value;
            for (std::size_t q = 0; q + 1 < mesh.size(); ++q) {
                const double width = static_cast<double>(mesh[q + 1] - mesh[q]) * dt;
                rhs += 0.5 * (means[q] + means[q + 1]) * width;
            }
            rep.factorization_c.push_back(rhs > 0.0 ? est.value / rhs : 0.0);
        }
    }

    const auto [lo, hi] = std::minmax_element(rep.estimates.begin(), rep.estimates.end());
    rep.max_over_min = *lo > 0.0 ? *hi / *lo : 0.0;
    return rep;
}

CauchyReport cauchy_in_epsilon(std::span<const TrajectoryEnsemble> ensembles,
                               std::span<const MollifiedDiffusion> ladder, const SamplePath& w,
                               int jobs) {
    if (ladder.size() < 2 || ensembles.size() != ladder.size())
        throw std::invalid_argument("cauchy_in_epsilon: need one ensemble per ladder rung, "
                                    ">= 2 rungs");
    for (std::size_t r = 1; r < ladder.size(); ++r)
        if (!(ladder[r].epsilon < ladder[r - 1].epsilon))
            throw std::invalid_argument("cauchy_in_epsilon: ladder must be strictly descending");
    const auto& ref = ensembles.front();
    for (const auto& e : ensembles)
        if (e.noise_seed != ref.noise_seed || e.first_stream != ref.first_stream ||
            e.n_samples != ref.n_samples || e.n_t != ref.n_t || e.K != ref.K)
            throw std::invalid_argument("cauchy_in_epsilon: mismatched seeds between ensembles; "
                                        "coupling is mandatory");

    const std::size_t R = ladder.size();
    const std::size_t n_rungs = R - 1;
    const std::size_t M = eval_grid_size(ref.K);
    const double quad_weight = kTwoPi / static_cast<double>(M);
    const std::size_t N = ref.n_samples;
    const MollifiedDiffusion& finest = ladder.back();

    std::vector<std::vector<double>> sup_dist(n_rungs, std::vector<double>(N, 0.0));
    parallel_for(N, jobs, [&](std::size_t i) {
        std::vector<std::vector<double>> D(n_rungs, std::vector<double>(M, 0.0));
        std::vector<double> sup(n_rungs, 0.0);
        std::vector<double> s_at(R);
        SolveOptions sopts;
        sopts.store_states = false;
        sopts.observer = [&](const StepRecord& rec) {
            for (std::size_t x = 0; x < M; ++x) {
                const double arg = rec.u_grid[x] - rec.w_t;
                for (std::size_t r = 0; r < R; ++r) s_at[r] = ladder[r].profile_eps(arg);
                for (std::size_t r = 0; r < n_rungs; ++r)
                    D[r][x] += (s_at[r] - s_at[r + 1]) * rec.zeta;
            }
            for (std::size_t r = 0; r < n_rungs; ++r) {
                double nrm = 0.0;
                for (double v : D[r]) nrm += v * v;
                sup[r] = std::max(sup[r], nrm * quad_weight);
            }
        };
        materialize(ref, finest, w, i, sopts);
        for (std::size_t r = 0; r < n_rungs; ++r) sup_dist[r][i] = sup[r];
    });

    CauchyReport rep;
    for (std::size_t r = 0; r < n_rungs; ++r) {
        rep.eps_lo.push_back(ladder[r].epsilon);
        rep.eps_hi.push_back(ladder[r + 1].epsilon);
        rep.distances.push_back(mc_summary(sup_dist[r]).value);
        rep.lp_distances.push_back(
            lp_distance_sigma_sq(ladder[r], ladder[r + 1], ladder[r].parent.p));
    }
    for (std::size_t r = 0; r + 1 < n_rungs; ++r)
        rep.shrink.push_back(rep.distances[r] > 0.0 ? rep.distances[r + 1] / rep.distances[r]
                                                    : 0.0);
    rep.distances_decreasing = monotone_within(rep.distances, 0.10);
    rep.lp_decreasing = monotone_within(rep.lp_distances, 0.10);
    return rep;
}

TestFunctional TestFunctional::one() {
    TestFunctional f;
    f.name = "one";
    f.kind = Kind::one;
    return f;
}

TestFunctional TestFunctional::bounded_evaluation(double anchor_time, int mode) {
    TestFunctional f;
    f.name = "tanh-eval(t=" + std::to_string(anchor_time) + ",j=" + std::to_string(mode) + ")";
    f.anchor_time = anchor_time;
    f.mode = mode;
    f.kind = Kind::tanh_evaluation;
    return f;
}

double real_basis_coeff(const SpectralField& u, int j) {
    if (j == 0) return u.coeff(0).real();
    const int m = (j + 1) / 2;
    if (m > u.cutoff()) throw std::invalid_argument("real_basis_coeff: mode beyond cutoff");
    const std::complex<double> c = u.coeff(m);
    return j % 2 == 1 ? std::sqrt(2.0) * c.real() : -std::sqrt(2.0) * c.imag();
}

MartingaleReport martingale_check(const TrajectoryEnsemble& ens,
                                  const MollifiedDiffusion& sigma_eps, const SamplePath& w,
                                  std::span<const TestFunctional> functionals,
                                  std::span<const std::pair<int, int>> mode_pairs, double s,
                                  double t, int jobs) {
    if (functionals.empty() || mode_pairs.empty())
        throw std::invalid_argument("martingale_check: empty functional or mode-pair list");
    const double dt = w.dt();
    const std::size_t s_idx = step_index(s, dt, ens.n_t, "martingale_check");
    const std::size_t t_idx = step_index(t, dt, ens.n_t, "martingale_check");
    if (s_idx >= t_idx) throw std::invalid_argument("martingale_check: need s < t");
    const std::size_t K_noise = sigma_eps.parent.K_noise;
    const auto& weights = sigma_eps.parent.weights;

    std::vector<std::size_t> anchor_idx(functionals.size(), 0);
    for (std::size_t f = 0; f < functionals.size(); ++f) {
        if (functionals[f].kind == TestFunctional::Kind::tanh_evaluation) {
            anchor_idx[f] = step_index(functionals[f].anchor_time, dt, ens.n_t,
                                       "martingale_check anchor");
            if (anchor_idx[f] > s_idx)
                throw std::invalid_argument("martingale_check: functional anchor after s "
                                            "(must be measurable at s)");
        }
    }

    // distinct projection modes and their grid representations
    std::vector<int> modes;
    for (const auto& [i, j] : mode_pairs) {
        if (i < 0 || static_cast<std::size_t>(i) >= K_noise)
            throw std::invalid_argument("martingale_check: Wiener coordinate beyond K_noise");
        if (std::find(modes.begin(), modes.end(), j) == modes.end()) modes.push_back(j);
    }
    const std::size_t M = eval_grid_size(ens.K);
    const double quad_weight = kTwoPi / static_cast<double>(M);
    std::vector<std::vector<double>> basis;
    basis.reserve(modes.size());
    for (int j : modes) basis.push_back(basis_grid(j, M));
    auto mode_slot = [&](int j) {
        return static_cast<std::size_t>(
            std::find(modes.begin(), modes.end(), j) - modes.begin());
    };

    const std::size_t n_rows = functionals.size() * mode_pairs.size() * 3;
    const std::size_t N = ens.n_samples;
    std::vector<std::vector<double>> slots(n_rows, std::vector<double>(N, 0.0));

    parallel_for(N, jobs, [&](std::size_t i) {
        const auto inc =
            CylindricalIncrements::generate(ens.n_t, K_noise, dt, ens.noise_seed,
                                            ens.first_stream + i);
        // per projection mode: M_s, M increment on [s,t), bracket sum on [s,t)
        std::vector<double> m_s(modes.size(), 0.0), dm(modes.size(), 0.0),
            qv(modes.size(), 0.0), phi_sum(modes.size(), 0.0);
        std::vector<double> anchor_coeff(functionals.size(), 0.0);
        // Wiener coordinates used
        std::vector<double> beta_s(K_noise, 0.0), dbeta_win(K_noise, 0.0);

        SolveOptions sopts;
        sopts.store_states = false;
        sopts.observer = [&](const StepRecord& rec) {
            for (std::size_t f = 0; f < functionals.size(); ++f)
                if (functionals[f].kind == TestFunctional::Kind::tanh_evaluation &&
                    rec.n == anchor_idx[f])
                    anchor_coeff[f] = real_basis_coeff(rec.u_hat, functionals[f].mode);
            const bool in_window = rec.n >= s_idx && rec.n < t_idx;
            const bool before = rec.n < s_idx;
            if (before || in_window) {
                for (std::size_t q = 0; q < modes.size(); ++q) {
                    const double phi = grid_inner(rec.forcing_profile, basis[q], quad_weight);
                    if (before) {
                        m_s[q] += rec.zeta * phi;
                    } else {
                        dm[q] += rec.zeta * phi;
                        qv[q] += phi * phi * dt;
                        phi_sum[q] += phi * dt;
                    }
                }
                for (std::size_t k = 0; k < K_noise; ++k) {
                    if (before)
                        beta_s[k] += inc.get(rec.n, k);
                    else
                        dbeta_win[k] += inc.get(rec.n, k);
                }
            }
        };
        solve_mollified(ens.u0, sigma_eps, w, ens.n_t, ens.K, inc, sopts);

        std::size_t row = 0;
        for (std::size_t f = 0; f < functionals.size(); ++f) {
            const double phi_f = functionals[f].kind == TestFunctional::Kind::one
                                     ? 1.0
                                     : std::tanh(anchor_coeff[f]);
            for (const auto& [wi, pj] : mode_pairs) {
                const std::size_t q = mode_slot(pj);
                const double m_t = m_s[q] + dm[q];
                const double beta_t = beta_s[static_cast<std::size_t>(wi)] +
                                      dbeta_win[static_cast<std::size_t>(wi)];
                // increment, quadratic-variation, cross-bracket defects
                slots[row++][i] = phi_f * dm[q];
                slots[row++][i] = phi_f * (m_t * m_t - m_s[q] * m_s[q] - qv[q]);
                slots[row++][i] =
                    phi_f * (m_t * beta_t - m_s[q] * beta_s[static_cast<std::size_t>(wi)] -
                             weights[static_cast<std::size_t>(wi)] * phi_sum[q]);
            }
        }
    });

    MartingaleReport rep;
    rep.n_samples = N;
    rep.s = s;
    rep.t = t;
    static const char* kDefectNames[3] = {"increment", "quadratic-variation", "cross-bracket"};
    std::size_t row = 0;
    for (std::size_t f = 0; f < functionals.size(); ++f)
        for (const auto& [wi, pj] : mode_pairs)
            for (int d = 0; d < 3; ++d) {
                const McEstimate est = mc_summary(slots[row++]);
                MartingaleDefectRow r;
                r.functional = functionals[f].name;
                r.mode_i = wi;
                r.mode_j = pj;
                r.defect = kDefectNames[d];
                r.value = est.value;
                r.se = est.se;
                r.pass = std::abs(est.value) <= 3.0 * est.se + 1e-15;
                rep.all_pass = rep.all_pass && r.pass;
                rep.rows.push_back(std::move(r));
            }
    return rep;
}

} // namespace rbnlab
