#include "rbnlab/sample_path.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "rbnlab/fft.hpp"
#include "rbnlab/rng.hpp"

namespace rbnlab {

namespace {

constexpr double kEigTol = -1e-10;

// Eigenvalues of the size-2n circulant embedding of the unit-spacing fGn
// covariance; negative values in [-1e-10, 0) are clipped to zero. Returns an
// empty vector when eigenvalues dip below the tolerance (caller falls back).
std::vector<double> embedding_eigenvalues(std::size_t n, double H) {
    const std::size_t m = 2 * n;
    std::vector<cdouble> row(m);
    for (std::size_t j = 0; j <= n; ++j) row[j] = fgn_covariance(j, H);
    for (std::size_t j = n + 1; j < m; ++j) row[j] = row[m - j];
    fft(row, false);
    std::vector<double> lam(m);
    for (std::size_t k = 0; k < m; ++k) {
        double v = row[k].real();
        if (v < kEigTol) return {};
        lam[k] = v < 0.0 ? 0.0 : v;
    }
    return lam;
}

// Cache: the eigenvalues depend only on (n, H); T enters through scaling.
const std::vector<double>& cached_eigenvalues(std::size_t n, double H, bool& breakdown) {
    static std::map<std::pair<std::size_t, double>, std::vector<double>> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_pair(n, H);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, embedding_eigenvalues(n, H)).first;
    breakdown = it->second.empty();
    return it->second;
}

// fGn sample of length n by Davies-Harte: x_j = Re sum_k sqrt(lam_k/m) Z_k e^{2pi i jk/m}
// with Z_0, Z_{m/2} real standard normal and Z_k = (U+iV)/sqrt(2), Z_{m-k} = conj(Z_k).
// Draw order is fixed (k = 0, then 1..m/2-1 as U,V pairs, then m/2) for reproducibility.
std::vector<double> fgn_circulant(const std::vector<double>& lam, std::size_t n, RngStream& rng) {
    const std::size_t m = 2 * n;
    std::vector<cdouble> b(m);
    const double inv_m = 1.0 / static_cast<double>(m);
    b[0] = std::sqrt(lam[0] * inv_m) * rng.gaussian();
    const double half = std::sqrt(0.5);
    for (std::size_t k = 1; k < n; ++k) {
        double u = rng.gaussian();
        double v = rng.gaussian();
        cdouble z(u * half, v * half);
        b[k] = std::sqrt(lam[k] * inv_m) * z;
        b[m - k] = std::conj(b[k]);
    }
    b[n] = std::sqrt(lam[n] * inv_m) * rng.gaussian();
    fft(b, true); // e^{+2pi i jk/m} sum, unnormalized
    std::vector<double> x(n);
    for (std::size_t j = 0; j < n; ++j) x[j] = b[j].real();
    return x;
}

// Dense Cholesky of the unit-spacing increment covariance; O(n^3), fallback only.
std::vector<double> fgn_cholesky(std::size_t n, double H, RngStream& rng) {
    std::vector<double> L(n * n, 0.0);
    auto at = [&](std::size_t i, std::size_t j) -> double& { return L[i * n + j]; };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = fgn_covariance(i - j, H);
            for (std::size_t k = 0; k < j; ++k) sum -= at(i, k) * at(j, k);
            if (i == j) {
                if (sum <= 0.0)
                    throw std::runtime_error(
                        "generate_fbm: increment covariance not positive definite (Cholesky abort)");
                at(i, j) = std::sqrt(sum);
            } else {
                at(i, j) = sum / at(j, j);
            }
        }
    }
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = rng.gaussian();
    std::vector<double> x(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k <= i; ++k) s += at(i, k) * z[k];
        x[i] = s;
    }
    return x;
}

} // namespace

double fgn_covariance(std::size_t lag, double H) {
    const double k = static_cast<double>(lag);
    const double h2 = 2.0 * H;
    return 0.5 * (std::pow(k + 1.0, h2) + std::pow(std::abs(k - 1.0), h2) - 2.0 * std::pow(k, h2));
}

SamplePath generate_fbm(std::size_t n_steps, double T, double H, std::uint64_t seed,
                        const FbmOptions& opts) {
    if (H <= 0.0 || H >= 1.0) throw std::invalid_argument("generate_fbm: H outside (0,1)");
    if (n_steps < 2) throw std::invalid_argument("generate_fbm: n_steps < 2");
    if (T <= 0.0) throw std::invalid_argument("generate_fbm: T <= 0");

    RngStream rng(seed, opts.stream);
    std::vector<double> fgn;
    bool fallback = opts.force_cholesky;
    if (!fallback) {
        bool breakdown = false;
        const auto& lam = cached_eigenvalues(n_steps, H, breakdown);
        if (breakdown)
            fallback = true;
        else
            fgn = fgn_circulant(lam, n_steps, rng);
    }
    if (fallback) fgn = fgn_cholesky(n_steps, H, rng);

    SamplePath path;
    path.horizon = T;
    path.n_steps = n_steps;
    path.hurst = H;
    path.seed = seed;
    path.cholesky_fallback = fallback;
    path.values.assign(n_steps + 1, 0.0);
    const double scale = std::pow(T / static_cast<double>(n_steps), H); // self-similar scaling
    double acc = 0.0;
    for (std::size_t j = 0; j < n_steps; ++j) {
        acc += scale * fgn[j];
        path.values[j + 1] = acc;
    }
    return path;
}

double holder_norm_estimate(const SamplePath& path, double alpha, std::size_t max_lag) {
    if (max_lag > path.n_steps)
        throw std::invalid_argument("holder_norm_estimate: max_lag > n_steps");
    if (max_lag == 0) return 0.0;
    const double dt = path.dt();
    double best = 0.0;
    for (std::size_t lag = 1; lag <= max_lag; ++lag) {
        const double denom = std::pow(static_cast<double>(lag) * dt, alpha);
        for (std::size_t i = 0; i + lag <= path.n_steps; ++i) {
            double d = std::abs(path.values[i + lag] - path.values[i]) / denom;
            if (d > best) best = d;
        }
    }
    return best;
}

} // namespace rbnlab
