#pragma once

#include <cstddef>

// Data-parallel inner-loop primitives used by the convolution, normalization
// and image chains. Every primitive has a scalar reference implementation and
// (on x86-64) an AVX2/FMA variant; the active set is chosen once at startup
// from CPU capabilities and can be overridden for testing.

namespace pwbeam::kernels {

enum class Isa { scalar, avx2 };

// Currently selected instruction set.
Isa active();
const char* isa_name(Isa isa);

// Override dispatch (tests, PWBEAM_SIMD=scalar env var honoured at startup).
void force(Isa isa);

// dst[i] += a * src[i]
void axpy(double* dst, const double* src, double a, std::size_t n);

// dst[i] = a * x[i] + b * y[i]
void axpby(double* dst, const double* x, const double* y, double a, double b,
           std::size_t n);

// dst[i] *= a
void scale(double* dst, double a, std::size_t n);

double dot(const double* a, const double* b, std::size_t n);

double sum(const double* a, std::size_t n);

// One-pass sum and sum of squares.
void sum_sumsq(const double* a, std::size_t n, double& s, double& s2);

// dst[i] = max(src[i], 0)
void relu_forward(double* dst, const double* src, std::size_t n);

// gin[i] = x[i] > 0 ? gout[i] : 0   (derivative at 0 defined as 0)
void relu_backward(double* gin, const double* gout, const double* x,
                   std::size_t n);

namespace detail {
// Scalar reference implementations, exposed for equivalence tests.
void axpy_scalar(double*, const double*, double, std::size_t);
void axpby_scalar(double*, const double*, const double*, double, double,
                  std::size_t);
void scale_scalar(double*, double, std::size_t);
double dot_scalar(const double*, const double*, std::size_t);
double sum_scalar(const double*, std::size_t);
void sum_sumsq_scalar(const double*, std::size_t, double&, double&);
void relu_forward_scalar(double*, const double*, std::size_t);
void relu_backward_scalar(double*, const double*, const double*, std::size_t);
}  // namespace detail

}  // namespace pwbeam::kernels
