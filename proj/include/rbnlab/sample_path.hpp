#ifndef RBNLAB_SAMPLE_PATH_HPP
#define RBNLAB_SAMPLE_PATH_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

namespace rbnlab {

// Discretized scalar path on the uniform grid t_j = j*T/n_steps, values[0] = 0.
struct SamplePath {
    double horizon = 1.0;       // T
    std::size_t n_steps = 0;    // n
    double hurst = 0.5;         // H
    std::uint64_t seed = 0;
    std::vector<double> values; // length n_steps + 1
    bool cholesky_fallback = false;

    double dt() const { return horizon / static_cast<double>(n_steps); }
    double time(std::size_t j) const { return static_cast<double>(j) * dt(); }
};

struct FbmOptions {
    bool force_cholesky = false;  // exercise the dense fallback directly
    std::uint64_t stream = 0;     // RNG stream id (one per Monte Carlo sample)
};

// Exact fractional Brownian motion on [0,T]: circulant embedding of the
// fractional-Gaussian-noise covariance (O(n log n)); falls back to dense
// Cholesky of the increment covariance if embedding eigenvalues dip below
// -1e-10. Deterministic given (n_steps, T, H, seed, stream).
SamplePath generate_fbm(std::size_t n_steps, double T, double H, std::uint64_t seed,
                        const FbmOptions& opts = {});

// Unit-spacing fGn covariance c(k) = 0.5(|k+1|^{2H} + |k-1|^{2H} - 2|k|^{2H}).
double fgn_covariance(std::size_t lag, double H);

// max over grid pairs with 0 < |i-j| <= max_lag of |w_i - w_j| / |t_i - t_j|^alpha.
double holder_norm_estimate(const SamplePath& path, double alpha, std::size_t max_lag);

} // namespace rbnlab

#endif
