#include "pwbeam/fk.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "pwbeam/fft.hpp"
#include "pwbeam/kernels.hpp"

namespace pwbeam {

namespace {

using fft::cd;

// Signed FFT bin frequency in cycles per unit (bin spacing 1/(n*step)).
double fft_freq(int k, int n, double step) {
  const int s = (k <= n / 2) ? k : k - n;
  return static_cast<double>(s) / (static_cast<double>(n) * step);
}

struct Taps {
  bool valid = false;
  int idx[4] = {0, 0, 0, 0};
  double w[4] = {0, 0, 0, 0};
  int count = 0;
};

// Resampling taps for output bin (KX, KZ) on one kx row: where to read along
// the temporal-frequency axis and with what weights (Jacobian included).
Taps stolt_taps(double kx_cyc, double kz_cyc, double c, double fs, int nt,
                double sin_a, double cos_a, Interp interp) {
  Taps t;
  const double denom = kz_cyc * cos_a + kx_cyc * sin_a;
  if (denom == 0.0) return t;
  const double k2 = kx_cyc * kx_cyc + kz_cyc * kz_cyc;
  const double f = c * k2 / (2.0 * denom);
  if (!(std::fabs(f) <= fs / 2.0)) return t;
  const double kxd = kx_cyc - (f / c) * sin_a;
  const double rad = (f / c) * (f / c) - kxd * kxd;
  if (rad < 0.0) return t;
  const double kzr = kz_cyc - (f / c) * cos_a;
  if (f * kzr < 0.0) return t;  // wrong propagation branch
  // Jacobian df/dKZ
  const double jac =
      c * (2.0 * kz_cyc * denom - k2 * cos_a) / (2.0 * denom * denom);

  const double df = fs / static_cast<double>(nt);
  const double u = f / df;  // fractional bin, may be negative
  const double fl = std::floor(u);
  const double frac = u - fl;
  const auto wrap = [nt](long long k) {
    long long m = k % nt;
    if (m < 0) m += nt;
    return static_cast<int>(m);
  };
  const auto base = static_cast<long long>(fl);
  if (interp == Interp::linear) {
    t.count = 2;
    t.idx[0] = wrap(base);
    t.idx[1] = wrap(base + 1);
    t.w[0] = jac * (1.0 - frac);
    t.w[1] = jac * frac;
  } else {
    // Catmull-Rom cubic spline
    const double s = frac;
    const double s2 = s * s, s3 = s2 * s;
    t.count = 4;
    t.idx[0] = wrap(base - 1);
    t.idx[1] = wrap(base);
    t.idx[2] = wrap(base + 1);
    t.idx[3] = wrap(base + 2);
    t.w[0] = jac * 0.5 * (-s3 + 2.0 * s2 - s);
    t.w[1] = jac * 0.5 * (3.0 * s3 - 5.0 * s2 + 2.0);
    t.w[2] = jac * 0.5 * (-3.0 * s3 + 4.0 * s2 + s);
    t.w[3] = jac * 0.5 * (s3 - s2);
  }
  t.valid = true;
  return t;
}

void transpose(const std::vector<cd>& in, std::vector<cd>& out, int rows,
               int cols) {
  // in: rows x cols, out: cols x rows
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      out[static_cast<std::size_t>(c) * rows + r] =
          in[static_cast<std::size_t>(r) * cols + c];
    }
  }
}

void row_fft(std::vector<cd>& buf, int rows, int cols) {
  for (int r = 0; r < rows; ++r)
    fft::fft_inplace(buf.data() + static_cast<std::size_t>(r) * cols, cols);
}

void row_ifft(std::vector<cd>& buf, int rows, int cols) {
  for (int r = 0; r < rows; ++r)
    fft::ifft_inplace(buf.data() + static_cast<std::size_t>(r) * cols, cols);
}

// Phase ramp combining the t0 reference shift and the steering shear:
// exp(+2 pi i f (x_e sin(theta)/c - t0)) applied per element row in the
// (x, f) domain.
void apply_phase(std::vector<cd>& buf, const MigrationPlan& plan, double angle,
                 int nt, bool conjugate) {
  const double c = plan.acq.sound_speed;
  const double fs = plan.acq.sampling_freq;
  const double sin_a = std::sin(angle);
  for (int e = 0; e < plan.geom.num_elements; ++e) {
    const double shift = plan.geom.element_positions[e] * sin_a / c -
                         plan.acq.t0;
    cd* row = buf.data() + static_cast<std::size_t>(e) * nt;
    for (int k = 0; k < nt; ++k) {
      const double f = fft_freq(k, nt, 1.0 / fs);
      double ang = 2.0 * std::numbers::pi * f * shift;
      if (conjugate) ang = -ang;
      row[k] *= cd(std::cos(ang), std::sin(ang));
    }
  }
}

}  // namespace

MigrationPlan MigrationPlan::create(const ProbeGeometry& geom,
                                    const AcquisitionParams& acq,
                                    Interp interp, int pad_time,
                                    int pad_lateral) {
  MigrationPlan p;
  p.geom = geom;
  p.acq = acq;
  p.interp = interp;
  p.pad_time = pad_time > 0
                   ? pad_time
                   : static_cast<int>(fft::next_pow2(2u * acq.num_samples));
  p.pad_lateral =
      pad_lateral > 0
          ? pad_lateral
          : static_cast<int>(fft::next_pow2(2u * geom.num_elements));
  p.nz = acq.num_samples;
  p.nx = geom.num_elements;
  p.dz = acq.sound_speed / (2.0 * acq.sampling_freq);
  p.dx = geom.pitch;
  p.validate();
  return p;
}

void MigrationPlan::validate() const {
  geom.validate();
  acq.validate();
  if (pad_time < acq.num_samples)
    throw ValidationError("plan: pad_time smaller than num_samples");
  if (pad_lateral < geom.num_elements)
    throw ValidationError("plan: pad_lateral smaller than num_elements");
  if ((pad_time & (pad_time - 1)) != 0 || (pad_lateral & (pad_lateral - 1)) != 0)
    throw ValidationError("plan: padded sizes must be powers of two");
  if (nx != geom.num_elements || nz != acq.num_samples)
    throw ValidationError("plan: output grid must match data dimensions");
}

Mat migrate_data(const Mat& data, int angle_index, const MigrationPlan& plan) {
  if (data.rows != plan.geom.num_elements || data.cols != plan.acq.num_samples)
    throw ValidationError("migrate: data dimensions do not match plan");
  if (angle_index < 0 ||
      angle_index >= static_cast<int>(plan.acq.angles.size()))
    throw ValidationError("migrate: angle outside acquisition angles");
  if (!all_finite(data)) throw ValidationError("migrate: non-finite input");

  const int nt = plan.pad_time;
  const int nx = plan.pad_lateral;
  const double angle = plan.acq.angles[angle_index];
  const double sin_a = std::sin(angle);
  const double cos_a = std::cos(angle);
  const double c = plan.acq.sound_speed;
  const double fs = plan.acq.sampling_freq;
  const int ne = plan.geom.num_elements;

  // [x][t], zero padded
  std::vector<cd> bufa(static_cast<std::size_t>(nx) * nt, cd(0, 0));
  for (int e = 0; e < ne; ++e) {
    const double* src = data.row(e);
    cd* dst = bufa.data() + static_cast<std::size_t>(e) * nt;
    for (int n = 0; n < plan.acq.num_samples; ++n) dst[n] = cd(src[n], 0.0);
  }

  for (int e = 0; e < ne; ++e)
    fft::fft_inplace(bufa.data() + static_cast<std::size_t>(e) * nt, nt);
  apply_phase(bufa, plan, angle, nt, /*conjugate=*/false);

  // -> [f][x], FFT over x
  std::vector<cd> bufb(static_cast<std::size_t>(nt) * nx);
  transpose(bufa, bufb, nx, nt);
  row_fft(bufb, nt, nx);

  // -> [kx][f], Stolt remap along f
  transpose(bufb, bufa, nt, nx);
  std::vector<cd> remapped(static_cast<std::size_t>(nx) * nt, cd(0, 0));
  for (int i = 0; i < nx; ++i) {
    const double kx = fft_freq(i, nx, plan.dx);
    const cd* src = bufa.data() + static_cast<std::size_t>(i) * nt;
    cd* dst = remapped.data() + static_cast<std::size_t>(i) * nt;
    for (int j = 0; j < nt; ++j) {
      const double kz = fft_freq(j, nt, plan.dz);
      const Taps t = stolt_taps(kx, kz, c, fs, nt, sin_a, cos_a, plan.interp);
      if (!t.valid) continue;
      cd acc(0, 0);
      for (int q = 0; q < t.count; ++q) acc += t.w[q] * src[t.idx[q]];
      dst[j] = acc;
    }
  }

  // inverse FFT along KZ, then along kx for the kept depth rows only
  row_ifft(remapped, nx, nt);
  transpose(remapped, bufb, nx, nt);  // -> [z][kx]
  row_ifft(bufb, plan.nz, nx);

  Mat img(plan.nz, plan.nx);
  for (int zi = 0; zi < plan.nz; ++zi) {
    const cd* row = bufb.data() + static_cast<std::size_t>(zi) * nx;
    double* out = img.row(zi);
    for (int xi = 0; xi < plan.nx; ++xi) out[xi] = row[xi].real();
  }
  return img;
}

Mat migrate_adjoint(const Mat& grad_image, int angle_index,
                    const MigrationPlan& plan) {
  if (grad_image.rows != plan.nz || grad_image.cols != plan.nx)
    throw ValidationError("migrate_adjoint: gradient dimensions do not match plan");
  if (angle_index < 0 ||
      angle_index >= static_cast<int>(plan.acq.angles.size()))
    throw ValidationError("migrate_adjoint: angle outside acquisition angles");

  const int nt = plan.pad_time;
  const int nx = plan.pad_lateral;
  const double angle = plan.acq.angles[angle_index];
  const double sin_a = std::sin(angle);
  const double cos_a = std::cos(angle);
  const double c = plan.acq.sound_speed;
  const double fs = plan.acq.sampling_freq;
  const int ne = plan.geom.num_elements;

  // adjoint of (crop + Re): embed gradient, zeros elsewhere; [z][kx] layout
  std::vector<cd> bufb(static_cast<std::size_t>(nt) * nx, cd(0, 0));
  for (int zi = 0; zi < plan.nz; ++zi) {
    const double* src = grad_image.row(zi);
    cd* row = bufb.data() + static_cast<std::size_t>(zi) * nx;
    for (int xi = 0; xi < plan.nx; ++xi) row[xi] = cd(src[xi], 0.0);
  }

  // adjoint of ifft along kx: (1/NX) * forward fft
  const double inv_nx = 1.0 / static_cast<double>(nx);
  for (int zi = 0; zi < plan.nz; ++zi) {
    cd* row = bufb.data() + static_cast<std::size_t>(zi) * nx;
    fft::fft_inplace(row, nx);
    for (int xi = 0; xi < nx; ++xi) row[xi] *= inv_nx;
  }

  std::vector<cd> bufa(static_cast<std::size_t>(nx) * nt);
  transpose(bufb, bufa, nt, nx);  // -> [kx][z]

  // adjoint of ifft along KZ: (1/NT) * forward fft
  const double inv_nt = 1.0 / static_cast<double>(nt);
  for (int i = 0; i < nx; ++i) {
    cd* row = bufa.data() + static_cast<std::size_t>(i) * nt;
    fft::fft_inplace(row, nt);
    for (int j = 0; j < nt; ++j) row[j] *= inv_nt;
  }

  // adjoint of the remap: scatter with the same real weights
  std::vector<cd> spread(static_cast<std::size_t>(nx) * nt, cd(0, 0));
  for (int i = 0; i < nx; ++i) {
    const double kx = fft_freq(i, nx, plan.dx);
    const cd* src = bufa.data() + static_cast<std::size_t>(i) * nt;
    cd* dst = spread.data() + static_cast<std::size_t>(i) * nt;
    for (int j = 0; j < nt; ++j) {
      const Taps t = stolt_taps(kx, fft_freq(j, nt, plan.dz), c, fs, nt, sin_a,
                                cos_a, plan.interp);
      if (!t.valid) continue;
      for (int q = 0; q < t.count; ++q) dst[t.idx[q]] += t.w[q] * src[j];
    }
  }

  // adjoint of fft along x: NX * ifft = conj-transpose
  transpose(spread, bufb, nx, nt);  // -> [f][kx]
  row_ifft(bufb, nt, nx);
  const double scale_x = static_cast<double>(nx);
  for (auto& v : bufb) v *= scale_x;

  transpose(bufb, bufa, nt, nx);  // -> [x][f]
  apply_phase(bufa, plan, angle, nt, /*conjugate=*/true);

  // adjoint of fft along t: NT * ifft; then crop + Re
  Mat out(ne, plan.acq.num_samples);
  const double scale_t = static_cast<double>(nt);
  for (int e = 0; e < ne; ++e) {
    cd* row = bufa.data() + static_cast<std::size_t>(e) * nt;
    fft::ifft_inplace(row, nt);
    double* dst = out.row(e);
    for (int n = 0; n < plan.acq.num_samples; ++n)
      dst[n] = row[n].real() * scale_t;
  }
  return out;
}

BeamformedImage migrate(const RFFrame& frame, const MigrationPlan& plan) {
  BeamformedImage img;
  img.pixels = migrate_data(frame.data, frame.angle_index, plan);
  img.dz = plan.dz;
  img.dx = plan.dx;
  img.stage = Stage::migrated;
  return img;
}

BeamformedImage compound(const std::vector<BeamformedImage>& images) {
  if (images.empty()) throw ValidationError("compound: empty image list");
  const BeamformedImage& first = images.front();
  for (const BeamformedImage& im : images) {
    if (im.stage != Stage::migrated)
      throw ValidationError("compound: images must be stage=migrated");
    if (!im.pixels.same_shape(first.pixels) || im.dz != first.dz ||
        im.dx != first.dx)
      throw ValidationError("compound: grid mismatch");
  }
  BeamformedImage out = first;
  const double w = 1.0 / static_cast<double>(images.size());
  kernels::scale(out.pixels.v.data(), w, out.pixels.size());
  for (std::size_t k = 1; k < images.size(); ++k) {
    kernels::axpy(out.pixels.v.data(), images[k].pixels.v.data(), w,
                  out.pixels.size());
  }
  return out;
}

}  // namespace pwbeam
