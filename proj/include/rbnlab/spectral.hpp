#ifndef RBNLAB_SPECTRAL_HPP
#define RBNLAB_SPECTRAL_HPP

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rbnlab {

// Real field on the torus [0, 2*pi) in the orthonormal basis e_k = e^{ikx}/sqrt(2*pi),
// truncated at |k| <= K. Only k >= 0 is stored; u_{-k} = conj(u_k). Fields are
// values; operations are pure functions returning new fields.
class SpectralField {
public:
    SpectralField() = default;
    explicit SpectralField(int K) : coeff_(static_cast<std::size_t>(K) + 1, {0.0, 0.0}) {}

    int cutoff() const { return static_cast<int>(coeff_.size()) - 1; }

    std::complex<double>& coeff(int k) { return coeff_[static_cast<std::size_t>(k)]; }
    const std::complex<double>& coeff(int k) const { return coeff_[static_cast<std::size_t>(k)]; }

    std::span<const std::complex<double>> coeffs() const { return coeff_; }
    std::span<std::complex<double>> coeffs() { return coeff_; }

    // enforce real-valuedness of the zero mode
    void fix_zero_mode() { coeff_[0] = {coeff_[0].real(), 0.0}; }

    bool finite() const;

private:
    std::vector<std::complex<double>> coeff_;
};

// u_k <- e^{-k^2 t} u_k (exact heat semigroup on the torus).
SpectralField heat_apply(const SpectralField& u, double t);

// Bessel-potential norm (sum over k in [-K,K] of (1+k^2)^alpha |u_k|^2)^{1/2}.
double sobolev_norm(const SpectralField& u, double alpha);
double l2_norm(const SpectralField& u);

// Point values on M >= 2K+1 uniform torus points x_m = 2*pi*m/M.
std::vector<double> field_to_grid(const SpectralField& u, std::size_t M);

// Inverse transform: least |k| <= K coefficients of grid samples (requires M >= 2K+1).
SpectralField grid_to_field(std::span<const double> values, int K);

// k^rho |e^{-k^2 t} - e^{-k^2 s}|, the eigenvalue factor of (-Delta)^{rho/2}(P_t - P_s).
double heat_diff_factor(int k, double rho, double s, double t);

struct SchauderReport {
    double constant = 0.0;    // sup over the (s,t) grid of Q(s,t) at cutoff K
    double constant_2k = 0.0; // same at cutoff 2K
    double ratio = 0.0;       // constant_2k / constant
    bool k_stable = false;    // ratio within [0.9, 1.1]
};

// Q(s,t) = max_{1<=k<=K} k^rho |e^{-k^2 t} - e^{-k^2 s}| / [(t-s)^theta s^{-(rho/2+theta)}];
// k = 0 is skipped (its eigenvalue factor vanishes identically).
SchauderReport schauder_check(double rho, double theta, int K,
                              std::span<const std::pair<double, double>> st_grid);

// Raw coefficient dump: interleaved (re, im) IEEE-754 little-endian doubles
// ordered k = 0..K then -1..-K, plus JSON sidecar {"K":..,"convention":"exp/sqrt(2pi)"}.
void write_coefficients(const std::string& path, const SpectralField& u);
SpectralField read_coefficients(const std::string& path);

} // namespace rbnlab

#endif
