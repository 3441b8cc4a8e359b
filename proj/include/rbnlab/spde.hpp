#ifndef RBNLAB_SPDE_HPP
#define RBNLAB_SPDE_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rbnlab/diffusion.hpp"
#include "rbnlab/occupation.hpp"
#include "rbnlab/sample_path.hpp"
#include "rbnlab/spectral.hpp"

namespace rbnlab {

// scalar Brownian increments dbeta^k_n ~ N(0, dt), independent across (k, n)
struct CylindricalIncrements {
    std::size_t n_t = 0;
    std::size_t K_noise = 0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::vector<double> dbeta; // step-major: dbeta[n*K_noise + k]

    double get(std::size_t n, std::size_t k) const { return dbeta[n * K_noise + k]; }
    static CylindricalIncrements generate(std::size_t n_t, std::size_t K_noise, double dt,
                                          std::uint64_t seed, std::uint64_t stream);
};

struct SpdeTrajectory {
    std::vector<double> times;         // t_j, j = 0..n_t
    std::vector<SpectralField> states; // all states when SolveOptions::store_states
    SpectralField final_state;         // always populated
    SamplePath w;                      // the regularizing path used
    double epsilon = 0.0;
    int K = 0;
    std::size_t K_noise = 0;
    std::uint64_t noise_seed = 0, noise_stream = 0;
};

// Pre-update view of step n handed to observers; spans borrow solver scratch
// and are valid only inside the callback.
struct StepRecord {
    std::size_t n;                           // index of the pre-step state u^n
    double t;                                // t_n
    double w_t;                              // w_{t_n}
    std::span<const double> u_grid;          // u^n on the M-point torus grid
    std::span<const double> forcing_profile; // h^n(x) = s_eps(u^n(x) - w_{t_n})
    double zeta;                             // sum_k a_k dbeta^k_n ~ N(0, dt)
    double hs_sq;                            // (2pi/M) sum_x h^n(x)^2
    const SpectralField& u_hat;              // spectral u^n
    const SpectralField& g_hat;              // spectral forcing h^n * zeta
};
using StepObserver = std::function<void(const StepRecord&)>;

struct SolveOptions {
    bool store_states = true;
    StepObserver observer; // called for n = 0..n_t-1 before each update
};

// one mild update: u(k) <- e^{-k^2 dt} (u(k) + g(k))
SpectralField exponential_euler_step(const SpectralField& u, const SpectralField& g, double dt);

// Exponential-Euler mild scheme for du = Lap u dt + sigma_eps(u - w) dW on the
// torus: g^n(x) = s_eps(u^n(x) - w_{t_n}) * sum_k a_k dbeta^k_n on the M = 4K grid,
// transformed to spectral, then the semigroup update. Deterministic given seeds.
SpdeTrajectory solve_mollified(const SpectralField& u0, const MollifiedDiffusion& sigma_eps,
                               const SamplePath& w, std::size_t n_t, int K,
                               const CylindricalIncrements& increments,
                               const SolveOptions& opts = {});

// ||sigma(u - shift)||_HS^2 = quadrature of Sigma^2(u(x) - shift) at M = 4K torus points
double hs_norm_sq(const DiffusionCoefficient& sigma, const SpectralField& u, double shift = 0.0);
double hs_norm_sq(const MollifiedDiffusion& sigma, const SpectralField& u, double shift = 0.0);
// mode-sum form sum_k ||sigma_k(u)||^2_{L2}; agrees with hs_norm_sq
double hs_norm_sq_modesum(const DiffusionCoefficient& sigma, const SpectralField& u,
                          double shift = 0.0);

// Lazy Monte Carlo ensemble: sample i is solve_mollified with noise stream
// first_stream + i. Checks consume samples by streaming; nothing is retained.
struct TrajectoryEnsemble {
    SpectralField u0;
    std::size_t n_t = 0;
    int K = 0;
    std::size_t n_samples = 0;
    std::uint64_t noise_seed = 0;
    std::uint64_t first_stream = 0;
};

SpdeTrajectory materialize(const TrajectoryEnsemble& ens, const MollifiedDiffusion& sigma_eps,
                           const SamplePath& w, std::size_t i, const SolveOptions& opts = {});

// E||int_0^T sigma_eps(u - w) dW||^2_{L2} (integral assembled without the
// semigroup) against E int_0^T ||sigma_eps(u - w)||^2_HS dr, plus BDG ratios
// E sup_t ||I_t||^m / E[(int ||sigma_eps||^2_HS dr)^{m/2}] for m in {2, 4}.
struct ItoIsometryReport {
    double lhs = 0.0, lhs_se = 0.0;
    double rhs = 0.0, rhs_se = 0.0;
    double rel_gap = 0.0;
    double bdg_ratio_m2 = 0.0, bdg_ratio_m4 = 0.0;
    std::size_t n_samples = 0;
};

ItoIsometryReport ito_isometry_check(const TrajectoryEnsemble& ens,
                                     const MollifiedDiffusion& sigma_eps, const SamplePath& w,
                                     int jobs = 1);

// Germ A_{u,v} = integral over the torus of (Sigma_eps^2 * L_{u,v})(u_u(x)) dx,
// sewed samplewise over dyadic refinements of [s,t]; compared against the direct
// time quadrature int_s^t ||sigma_eps(u_r - w_r)||^2_HS dr per sample.
struct IdentificationOptions {
    int max_level = 12;
    double m = 2.0; // Omega-norms are L^{m/2}
    double tol = 1e-9;
};

struct IdentificationReport {
    std::vector<double> sewed, direct; // per sample
    double lm2_sewed = 0.0, lm2_direct = 0.0;
    double rel_gap = 0.0; // L^{m/2} norm of (sewed - direct), relative
    int level = 0;
    std::size_t converged = 0;
    double m = 2.0;
};

IdentificationReport identification_sewing(const TrajectoryEnsemble& ens,
                                           const MollifiedDiffusion& sigma_eps,
                                           const LocalTimeField& L, const SamplePath& w, double s,
                                           double t, const IdentificationOptions& opts = {},
                                           int jobs = 1);

// L^{m/2}(Omega) norm of int_s^t (t-r)^{-eta} ||sigma_eps(u_r - w_r)||^2_HS dr
// (volterra_sew per sample) against C (t-s)^{gamma0-eta-delta} ||Sigma_eps^2||_p
// (1 + Holder norm of u); C is fitted and must be stable across (s,t) and eps.
struct VolterraBoundOptions {
    double m = 2.0;
    double gamma0 = 0.8;
    double delta = 0.05;
    int holder_mesh_level = 5;
};

struct VolterraBoundReport {
    double eta = 0.0, s = 0.0, t = 0.0;
    double lm2_value = 0.0;
    double holder_estimate = 0.0;
    double bound_factor = 0.0; // (t-s)^{gamma0-eta-delta} ||Sigma_eps^2||_p (1 + Holder)
    double fitted_C = 0.0;     // lm2_value / bound_factor
    std::size_t converged = 0;
};

VolterraBoundReport volterra_bound_check(const TrajectoryEnsemble& ens,
                                         const MollifiedDiffusion& sigma_eps, const SamplePath& w,
                                         double eta, double s, double t,
                                         const VolterraBoundOptions& opts = {}, int jobs = 1);

// sup over dyadic mesh pairs of (E||u_t - u_s||^m_{L2})^{1/m} / |t-s|^{gamma0/2},
// per epsilon rung; uniformity = max/min ratio across the ladder.
struct AprioriHolderReport {
    std::vector<double> epsilons;
    std::vector<double> estimates;
    double max_over_min = 0.0;
    double u0_h_norm = 0.0;  // ||u0||_{H^{gamma0/2}}
    double composite = 0.0;  // u0_h_norm + max_eps ||Sigma_eps^2||_{L^p}^{1/2}
    double fitted_C = 0.0;   // max estimate / composite
    double m = 2.0, gamma0 = 0.0;
};

AprioriHolderReport apriori_holder(const TrajectoryEnsemble& ens,
                                   std::span<const MollifiedDiffusion> ladder,
                                   const SamplePath& w, double gamma0, double m,
                                   int mesh_level = 5, int jobs = 1);

// (E sup_t ||u_t||^m_{H^{gamma0}})^{1/m} per epsilon rung, with the optional
// factorization cross-check (only meaningful when 2*alpha + gamma0 < 1, i.e.
// the kernel (s-r)^{-2 alpha - gamma0} is integrable).
struct AprioriSobolevReport {
    std::vector<double> epsilons;
    std::vector<double> estimates;
    double max_over_min = 0.0;
    double alpha = 0.0; // 1/m + margin
    bool factorization_checked = false;
    std::vector<double> factorization_c; // fitted c per rung when checked
    std::string note;
    double m = 2.0, gamma0 = 0.0;
};

AprioriSobolevReport apriori_sobolev(const TrajectoryEnsemble& ens,
                                     std::span<const MollifiedDiffusion> ladder,
                                     const SamplePath& w, double gamma0, double m,
                                     int mesh_level = 5, int jobs = 1);

// Coupled-noise Cauchy property: one frozen trajectory u per sample (solved at
// the finest rung), identical increments for every rung; the rung (e, e')
// distance is E sup_t ||sum_{t_n < t} (s_e - s_e')(u^n - w_n) zeta_n||^2_{L2}.
struct CauchyReport {
    std::vector<double> eps_lo, eps_hi; // rung r couples ladder[r] and ladder[r+1]
    std::vector<double> distances;
    std::vector<double> lp_distances; // ||Sigma^2_{e,e'}||_{L^p}
    std::vector<double> shrink;       // distances[r+1] / distances[r]
    bool distances_decreasing = false; // monotone within 10% slack
    bool lp_decreasing = false;
};

CauchyReport cauchy_in_epsilon(std::span<const TrajectoryEnsemble> ensembles,
                               std::span<const MollifiedDiffusion> ladder, const SamplePath& w,
                               int jobs = 1);

// Bounded continuous functionals of the trajectory restricted to [0, s]:
// constants and smooth bounded maps of spectral evaluations.
struct TestFunctional {
    std::string name;
    double anchor_time = 0.0; // must be <= s
    int mode = 0;             // real-basis index

    enum class Kind { one, tanh_evaluation } kind = Kind::one;

    static TestFunctional one();
    static TestFunctional bounded_evaluation(double anchor_time, int mode);
};

// real orthonormal torus basis: j=0 -> 1/sqrt(2pi); j=2m-1 -> cos(mx)/sqrt(pi);
// j=2m -> sin(mx)/sqrt(pi)
double real_basis_coeff(const SpectralField& u, int j);

struct MartingaleDefectRow {
    std::string functional;
    int mode_i = 0, mode_j = 0; // Wiener coordinate i, projection mode j
    std::string defect;         // "increment" | "quadratic-variation" | "cross-bracket"
    double value = 0.0, se = 0.0;
    bool pass = false; // |value| <= 3 se, or exactly zero
};

struct MartingaleReport {
    std::vector<MartingaleDefectRow> rows;
    bool all_pass = true;
    std::size_t n_samples = 0;
    double s = 0.0, t = 0.0;
};

// Defect triple for M^j_t = <u_t - u_0 - int_0^t Lap u_r dr, e_j>: with the
// scheme-exact quadrature of the Laplacian integral the sum telescopes to
// M^j_t = sum_{t_n < t} <g^n, e_j>, so each defect is a mean-zero discrete
// martingale increment; reported |E Phi defect| must stay within 3 MC SE.
MartingaleReport martingale_check(const TrajectoryEnsemble& ens,
                                  const MollifiedDiffusion& sigma_eps, const SamplePath& w,
                                  std::span<const TestFunctional> functionals,
                                  std::span<const std::pair<int, int>> mode_pairs, double s,
                                  double t, int jobs = 1);

} // namespace rbnlab

#endif
