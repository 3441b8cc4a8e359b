#include "rbnlab/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace rbnlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Iterative Cooley-Tukey, n a power of two.
void fft_pow2(std::vector<cdouble>& a, bool inverse) {
    const std::size_t n = a.size();
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * kPi / static_cast<double>(len);
        const cdouble wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cdouble w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                cdouble u = a[i + j];
                cdouble v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// Bluestein's algorithm: arbitrary-size DFT as a convolution of pow2 FFTs.
void fft_bluestein(std::vector<cdouble>& a, bool inverse) {
    const std::size_t n = a.size();
    std::size_t m = 1;
    while (m < 2 * n - 1) m <<= 1;

    const double sign = inverse ? 1.0 : -1.0;
    std::vector<cdouble> chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        // angle = sign * pi * k^2 / n, with k^2 reduced mod 2n to keep precision
        std::size_t k2 = (k * k) % (2 * n);
        double ang = sign * kPi * static_cast<double>(k2) / static_cast<double>(n);
        chirp[k] = cdouble(std::cos(ang), std::sin(ang));
    }

    std::vector<cdouble> x(m, cdouble(0.0, 0.0)), y(m, cdouble(0.0, 0.0));
    for (std::size_t k = 0; k < n; ++k) x[k] = a[k] * chirp[k];
    y[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) y[k] = y[m - k] = std::conj(chirp[k]);

    fft_pow2(x, false);
    fft_pow2(y, false);
    for (std::size_t k = 0; k < m; ++k) x[k] *= y[k];
    fft_pow2(x, true);
    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * scale * chirp[k];
}

} // namespace

void fft(std::vector<cdouble>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n == 0) throw std::invalid_argument("fft: empty input");
    if (n == 1) return;
    if (is_pow2(n))
        fft_pow2(a, inverse);
    else
        fft_bluestein(a, inverse);
}

std::vector<cdouble> fft_copy(const std::vector<cdouble>& a, bool inverse) {
    std::vector<cdouble> b = a;
    fft(b, inverse);
    return b;
}

} // namespace rbnlab
