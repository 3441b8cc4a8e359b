#ifndef RBNLAB_FFT_HPP
#define RBNLAB_FFT_HPP

#include <complex>
#include <vector>

namespace rbnlab {

using cdouble = std::complex<double>;

// In-place complex DFT, unnormalized: X_k = sum_j x_j exp(-+2*pi*i*jk/n).
// Radix-2 for powers of two, Bluestein otherwise. Thread-safe, deterministic.
void fft(std::vector<cdouble>& a, bool inverse = false);

// Convenience: forward/backward on a copy.
std::vector<cdouble> fft_copy(const std::vector<cdouble>& a, bool inverse = false);

} // namespace rbnlab

#endif
