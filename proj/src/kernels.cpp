#include "pwbeam/kernels.hpp"

#include <cstdlib>
#include <cstring>

#if defined(__x86_64__)
#include <immintrin.h>
#define PWBEAM_HAVE_AVX2_BUILD 1
#else
#define PWBEAM_HAVE_AVX2_BUILD 0
#endif

namespace pwbeam::kernels {

namespace detail {

void axpy_scalar(double* dst, const double* src, double a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] += a * src[i];
}

void axpby_scalar(double* dst, const double* x, const double* y, double a,
                  double b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = a * x[i] + b * y[i];
}

void scale_scalar(double* dst, double a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] *= a;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_scalar(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i];
  return s;
}

void sum_sumsq_scalar(const double* a, std::size_t n, double& s, double& s2) {
  double acc = 0.0, acc2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += a[i];
    acc2 += a[i] * a[i];
  }
  s = acc;
  s2 = acc2;
}

void relu_forward_scalar(double* dst, const double* src, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = src[i] > 0.0 ? src[i] : 0.0;
}

void relu_backward_scalar(double* gin, const double* gout, const double* x,
                          std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) gin[i] = x[i] > 0.0 ? gout[i] : 0.0;
}

}  // namespace detail

#if PWBEAM_HAVE_AVX2_BUILD

namespace avx2 {

__attribute__((target("avx2,fma"))) void axpy(double* dst, const double* src,
                                              double a, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_loadu_pd(dst + i);
    __m256d s = _mm256_loadu_pd(src + i);
    _mm256_storeu_pd(dst + i, _mm256_fmadd_pd(va, s, d));
  }
  for (; i < n; ++i) dst[i] += a * src[i];
}

__attribute__((target("avx2,fma"))) void axpby(double* dst, const double* x,
                                               const double* y, double a,
                                               double b, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vx = _mm256_loadu_pd(x + i);
    __m256d vy = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(dst + i, _mm256_fmadd_pd(va, vx, _mm256_mul_pd(vb, vy)));
  }
  for (; i < n; ++i) dst[i] = a * x[i] + b * y[i];
}

__attribute__((target("avx2,fma"))) void scale(double* dst, double a,
                                               std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(dst + i, _mm256_mul_pd(va, _mm256_loadu_pd(dst + i)));
  }
  for (; i < n; ++i) dst[i] *= a;
}

__attribute__((target("avx2,fma"))) double dot(const double* a,
                                               const double* b,
                                               std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i),
                           acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4),
                           _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i),
                           acc0);
  }
  acc0 = _mm256_add_pd(acc0, acc1);
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc0);
  double s = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

__attribute__((target("avx2,fma"))) double sum(const double* a,
                                               std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double s = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; i < n; ++i) s += a[i];
  return s;
}

__attribute__((target("avx2,fma"))) void sum_sumsq(const double* a,
                                                   std::size_t n, double& s,
                                                   double& s2) {
  __m256d acc = _mm256_setzero_pd();
  __m256d acc2 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(a + i);
    acc = _mm256_add_pd(acc, v);
    acc2 = _mm256_fmadd_pd(v, v, acc2);
  }
  alignas(32) double l1[4], l2[4];
  _mm256_store_pd(l1, acc);
  _mm256_store_pd(l2, acc2);
  double rs = l1[0] + l1[1] + l1[2] + l1[3];
  double rs2 = l2[0] + l2[1] + l2[2] + l2[3];
  for (; i < n; ++i) {
    rs += a[i];
    rs2 += a[i] * a[i];
  }
  s = rs;
  s2 = rs2;
}

__attribute__((target("avx2,fma"))) void relu_forward(double* dst,
                                                      const double* src,
                                                      std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(dst + i, _mm256_max_pd(zero, _mm256_loadu_pd(src + i)));
  }
  for (; i < n; ++i) dst[i] = src[i] > 0.0 ? src[i] : 0.0;
}

__attribute__((target("avx2,fma"))) void relu_backward(double* gin,
                                                       const double* gout,
                                                       const double* x,
                                                       std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(x + i), zero, _CMP_GT_OQ);
    _mm256_storeu_pd(gin + i, _mm256_and_pd(mask, _mm256_loadu_pd(gout + i)));
  }
  for (; i < n; ++i) gin[i] = x[i] > 0.0 ? gout[i] : 0.0;
}

}  // namespace avx2

#endif  // PWBEAM_HAVE_AVX2_BUILD

namespace {

Isa pick_initial() {
#if PWBEAM_HAVE_AVX2_BUILD
  if (const char* env = std::getenv("PWBEAM_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return Isa::scalar;
    if (std::strcmp(env, "avx2") == 0) return Isa::avx2;
  }
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    return Isa::avx2;
#endif
  return Isa::scalar;
}

Isa g_active = pick_initial();

}  // namespace

Isa active() { return g_active; }

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::avx2:
      return "avx2";
    default:
      return "scalar";
  }
}

void force(Isa isa) {
#if !PWBEAM_HAVE_AVX2_BUILD
  isa = Isa::scalar;
#endif
  g_active = isa;
}

#if PWBEAM_HAVE_AVX2_BUILD
#define PWBEAM_DISPATCH(fn, ...)              \
  do {                                        \
    if (g_active == Isa::avx2)                \
      return avx2::fn(__VA_ARGS__);           \
    return detail::fn##_scalar(__VA_ARGS__);  \
  } while (0)
#else
#define PWBEAM_DISPATCH(fn, ...) return detail::fn##_scalar(__VA_ARGS__)
#endif

void axpy(double* dst, const double* src, double a, std::size_t n) {
  PWBEAM_DISPATCH(axpy, dst, src, a, n);
}

void axpby(double* dst, const double* x, const double* y, double a, double b,
           std::size_t n) {
  PWBEAM_DISPATCH(axpby, dst, x, y, a, b, n);
}

void scale(double* dst, double a, std::size_t n) {
  PWBEAM_DISPATCH(scale, dst, a, n);
}

double dot(const double* a, const double* b, std::size_t n) {
  PWBEAM_DISPATCH(dot, a, b, n);
}

double sum(const double* a, std::size_t n) { PWBEAM_DISPATCH(sum, a, n); }

void sum_sumsq(const double* a, std::size_t n, double& s, double& s2) {
  PWBEAM_DISPATCH(sum_sumsq, a, n, s, s2);
}

void relu_forward(double* dst, const double* src, std::size_t n) {
  PWBEAM_DISPATCH(relu_forward, dst, src, n);
}

void relu_backward(double* gin, const double* gout, const double* x,
                   std::size_t n) {
  PWBEAM_DISPATCH(relu_backward, gin, gout, x, n);
}

#undef PWBEAM_DISPATCH

}  // namespace pwbeam::kernels
