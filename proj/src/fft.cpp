#include "pwbeam/fft.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace pwbeam::fft {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Twiddle factors exp(-2*pi*i*k/n) for k < n/2, cached per size.
const std::vector<cd>& twiddles(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::vector<cd>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<cd> w(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    double ang = -kTwoPi * static_cast<double>(k) / static_cast<double>(n);
    w[k] = cd(std::cos(ang), std::sin(ang));
  }
  return cache.emplace(n, std::move(w)).first->second;
}

void fft_pow2(cd* x, std::size_t n) {
  // bit-reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  const std::vector<cd>& w = twiddles(n);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    std::size_t stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        cd u = x[i + k];
        cd v = x[i + k + len / 2] * w[k * stride];
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
      }
    }
  }
}

// Bluestein chirp-z: exact DFT for arbitrary n via a power-of-two
// convolution. Chirp phases use n^2 mod 2N to keep arguments small.
void fft_bluestein(cd* x, std::size_t n) {
  const std::size_t m = next_pow2(2 * n - 1);
  std::vector<cd> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t r = (static_cast<unsigned long long>(k) * k) % (2 * n);
    double ang = -std::numbers::pi * static_cast<double>(r) /
                 static_cast<double>(n);
    chirp[k] = cd(std::cos(ang), std::sin(ang));
  }
  std::vector<cd> a(m, cd(0, 0)), b(m, cd(0, 0));
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
  b[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) {
    b[k] = std::conj(chirp[k]);
    b[m - k] = b[k];
  }
  fft_pow2(a.data(), m);
  fft_pow2(b.data(), m);
  for (std::size_t k = 0; k < m; ++k) a[k] *= b[k];
  // inverse pow2 fft of a
  for (auto& v : a) v = std::conj(v);
  fft_pow2(a.data(), m);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < n; ++k) {
    x[k] = std::conj(a[k]) * inv_m * chirp[k];
  }
}

}  // namespace

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft_inplace(cd* x, std::size_t n) {
  if (n <= 1) return;
  if ((n & (n - 1)) == 0) {
    fft_pow2(x, n);
  } else {
    fft_bluestein(x, n);
  }
}

void ifft_inplace(cd* x, std::size_t n) {
  if (n <= 1) return;
  for (std::size_t i = 0; i < n; ++i) x[i] = std::conj(x[i]);
  fft_inplace(x, n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::conj(x[i]) * inv_n;
}

void analytic(const double* x, std::size_t n, cd* out) {
  if (n < 2) throw std::invalid_argument("analytic: need at least 2 samples");
  for (std::size_t i = 0; i < n; ++i) out[i] = cd(x[i], 0.0);
  fft_inplace(out, n);
  // one-sided doubling: keep DC (and Nyquist for even n), double positive
  // frequencies, zero negative ones
  const std::size_t half = n / 2;
  for (std::size_t k = 1; k < (n + 1) / 2; ++k) out[k] *= 2.0;
  for (std::size_t k = half + 1; k < n; ++k) out[k] = cd(0.0, 0.0);
  ifft_inplace(out, n);
}

void hilbert(const double* x, std::size_t n, double* out) {
  std::vector<cd> a(n);
  analytic(x, n, a.data());
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i].imag();
}

}  // namespace pwbeam::fft
