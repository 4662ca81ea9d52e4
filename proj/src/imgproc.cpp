#include "pwbeam/imgproc.hpp"

#include <cmath>
#include <fstream>

#include "pwbeam/fft.hpp"

namespace pwbeam {

namespace {

constexpr double kDbScale = 20.0;
const double kLn10 = std::log(10.0);

void require_stage(const BeamformedImage& img, Stage want, const char* op) {
  if (img.stage != want)
    throw ValidationError(std::string(op) + ": expected stage " +
                          stage_name(want) + ", got " +
                          stage_name(img.stage));
}

}  // namespace

void ProcessingConfig::validate() const {
  if (!(dynamic_range > 0.0))
    throw ValidationError("processing: dynamic_range must be > 0");
  if (!(log_floor_rel > 0.0) || !(envelope_floor_rel > 0.0))
    throw ValidationError("processing: floors must be > 0");
}

BeamformedImage envelope(const BeamformedImage& img, EnvelopeSaved* saved) {
  require_stage(img, Stage::migrated, "envelope");
  const int nz = img.pixels.rows;
  const int nx = img.pixels.cols;
  if (nz < 8) throw ValidationError("envelope: need at least 8 depth samples");

  Mat hx(nz, nx), e(nz, nx);
  std::vector<double> col(nz);
  std::vector<fft::cd> a(nz);
  for (int x = 0; x < nx; ++x) {
    for (int z = 0; z < nz; ++z) col[z] = img.pixels.at(z, x);
    fft::analytic(col.data(), nz, a.data());
    for (int z = 0; z < nz; ++z) {
      hx.at(z, x) = a[z].imag();
      e.at(z, x) = std::hypot(col[z], a[z].imag());
    }
  }
  if (saved) {
    saved->x = img.pixels;
    saved->hx = hx;
    saved->e = e;
  }
  BeamformedImage out = img;
  out.pixels = std::move(e);
  out.stage = Stage::envelope;
  return out;
}

Mat envelope_backward(const Mat& grad_out, const EnvelopeSaved& saved,
                      const ProcessingConfig& cfg) {
  cfg.validate();
  if (!grad_out.same_shape(saved.e))
    throw ValidationError("envelope_backward: gradient shape mismatch");
  const int nz = saved.e.rows, nx = saved.e.cols;

  double e_max = 0.0;
  for (double v : saved.e.v) e_max = std::max(e_max, v);
  const double floor = std::max(cfg.envelope_floor_rel * e_max,
                                std::numeric_limits<double>::min());

  Mat grad_in(nz, nx);
  std::vector<double> tmp(nz), h(nz);
  for (int x = 0; x < nx; ++x) {
    for (int z = 0; z < nz; ++z) {
      const double eh = std::max(saved.e.at(z, x), floor);
      tmp[z] = saved.hx.at(z, x) * grad_out.at(z, x) / eh;
      grad_in.at(z, x) = saved.x.at(z, x) * grad_out.at(z, x) / eh;
    }
    fft::hilbert(tmp.data(), nz, h.data());
    for (int z = 0; z < nz; ++z) grad_in.at(z, x) -= h[z];
  }
  return grad_in;
}

BeamformedImage log_compress(const BeamformedImage& img,
                             const ProcessingConfig& cfg, LogSaved* saved) {
  require_stage(img, Stage::envelope, "log_compress");
  cfg.validate();
  for (double v : img.pixels.v)
    if (v < 0.0) throw ValidationError("log_compress: negative envelope value");

  const std::size_t n = img.pixels.size();
  double e_max = 0.0;
  for (double v : img.pixels.v) e_max = std::max(e_max, v);

  BeamformedImage out = img;
  out.stage = Stage::log_db;
  out.dynamic_range = cfg.dynamic_range;
  if (saved) {
    saved->e = img.pixels;
    saved->e_max = e_max;
    saved->active.assign(n, 0);
  }
  if (e_max == 0.0) {
    for (double& v : out.pixels.v) v = -cfg.dynamic_range;
    return out;
  }
  const double floor = cfg.log_floor_rel * e_max;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = img.pixels.v[i];
    const double y = kDbScale * std::log10(std::max(e, floor) / e_max);
    if (e > floor && y > -cfg.dynamic_range) {
      if (saved) saved->active[i] = 1;
      out.pixels.v[i] = y;
    } else {
      out.pixels.v[i] = std::max(y, -cfg.dynamic_range);
    }
  }
  return out;
}

Mat log_compress_backward(const Mat& grad_out, const LogSaved& saved) {
  if (!grad_out.same_shape(saved.e))
    throw ValidationError("log_compress_backward: gradient shape mismatch");
  Mat grad_in(saved.e.rows, saved.e.cols);
  for (std::size_t i = 0; i < grad_in.size(); ++i) {
    grad_in.v[i] = saved.active[i]
                       ? grad_out.v[i] * kDbScale / (kLn10 * saved.e.v[i])
                       : 0.0;
  }
  return grad_in;
}

BeamformedImage to_unit_range(const BeamformedImage& img,
                              const ProcessingConfig& cfg) {
  require_stage(img, Stage::log_db, "to_unit_range");
  cfg.validate();
  BeamformedImage out = img;
  out.stage = Stage::normalized;
  out.dynamic_range = cfg.dynamic_range;
  for (double& v : out.pixels.v) {
    v = (v + cfg.dynamic_range) / cfg.dynamic_range;
    v = std::clamp(v, 0.0, 1.0);  // guard rounding at the endpoints
  }
  return out;
}

Mat to_unit_range_backward(const Mat& grad_out, const ProcessingConfig& cfg) {
  cfg.validate();
  Mat grad_in = grad_out;
  for (double& v : grad_in.v) v /= cfg.dynamic_range;
  return grad_in;
}

BeamformedImage process_to_normalized(const BeamformedImage& migrated,
                                      const ProcessingConfig& cfg) {
  return to_unit_range(log_compress(envelope(migrated), cfg), cfg);
}

Mat normalized_to_linear(const Mat& normalized, double dynamic_range) {
  Mat out = normalized;
  for (double& v : out.v)
    v = std::pow(10.0, (v * dynamic_range - dynamic_range) / kDbScale);
  return out;
}

void write_pgm(const BeamformedImage& img, const std::filesystem::path& path) {
  if (img.stage != Stage::normalized)
    throw ValidationError("write_pgm: image must be stage=normalized");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("write_pgm: cannot open " + path.string());
  os << "P5\n" << img.pixels.cols << " " << img.pixels.rows << "\n255\n";
  std::vector<unsigned char> row(img.pixels.cols);
  for (int z = 0; z < img.pixels.rows; ++z) {
    for (int x = 0; x < img.pixels.cols; ++x) {
      row[x] = static_cast<unsigned char>(
          std::lround(255.0 * std::clamp(img.pixels.at(z, x), 0.0, 1.0)));
    }
    os.write(reinterpret_cast<const char*>(row.data()),
             static_cast<std::streamsize>(row.size()));
  }
}

}  // namespace pwbeam
