#pragma once

#include <complex>
#include <cstddef>
#include <vector>

// Complex FFT utilities. Power-of-two sizes use an iterative radix-2
// transform; all other sizes go through Bluestein's chirp-z algorithm, so
// every length computes the exact DFT. Forward transforms are unnormalized
// (X[k] = sum_n x[n] exp(-2*pi*i*k*n/N)), inverse transforms carry the 1/N.

namespace pwbeam::fft {

using cd = std::complex<double>;

std::size_t next_pow2(std::size_t n);

void fft_inplace(cd* x, std::size_t n);
void ifft_inplace(cd* x, std::size_t n);

inline void fft_inplace(std::vector<cd>& x) { fft_inplace(x.data(), x.size()); }
inline void ifft_inplace(std::vector<cd>& x) {
  ifft_inplace(x.data(), x.size());
}

// Analytic signal a = x + i*H(x) of a real sequence (FFT one-sided doubling).
void analytic(const double* x, std::size_t n, cd* out);

// Discrete Hilbert transform H(x) = Im(analytic(x)).
void hilbert(const double* x, std::size_t n, double* out);

}  // namespace pwbeam::fft
