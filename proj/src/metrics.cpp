#include "pwbeam/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace pwbeam {

namespace {

void check_pair(const Mat& x, const Mat& y, const char* op) {
  if (!x.same_shape(y))
    throw ValidationError(std::string(op) + ": shape mismatch");
  if (x.size() == 0) throw ValidationError(std::string(op) + ": empty images");
}

double mean_of(const Mat& m, const std::vector<std::size_t>& idx) {
  double s = 0.0;
  for (std::size_t i : idx) s += m.v[i];
  return s / static_cast<double>(idx.size());
}

double var_of(const Mat& m, const std::vector<std::size_t>& idx, double mean) {
  double s = 0.0;
  for (std::size_t i : idx) {
    const double d = m.v[i] - mean;
    s += d * d;
  }
  return s / static_cast<double>(idx.size());
}

}  // namespace

// ---------------------------------------------------------------- global

double l1_metric(const Mat& x, const Mat& y) {
  check_pair(x, y, "l1");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::fabs(x.v[i] - y.v[i]);
  return s / static_cast<double>(x.size());
}

double l2_metric(const Mat& x, const Mat& y) {
  check_pair(x, y, "l2");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x.v[i] - y.v[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(x.size()));
}

double psnr_metric(const Mat& x, const Mat& y) {
  check_pair(x, y, "psnr");
  const double denom = l2_metric(x, y);
  double peak = -std::numeric_limits<double>::infinity();
  for (double v : y.v) peak = std::max(peak, v);
  if (denom == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(peak / denom);
}

double ncc_metric(const Mat& x, const Mat& y) {
  check_pair(x, y, "ncc");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x.v[i];
    my += y.v[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = x.v[i] - mx;
    const double b = y.v[i] - my;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  if (sxx == 0.0 || syy == 0.0)
    return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

// ---------------------------------------------------------------- rois

RoiMask make_lesion_roi(int nz, int nx, double dz, double dx, double cx,
                        double cz, double nominal_radius) {
  if (!(nominal_radius > 0.0))
    throw ValidationError("roi: radius must be > 0");
  const double r_in = 0.8 * nominal_radius;
  const double r_ring0 = 1.2 * nominal_radius;
  const double r_ring1 = 1.8 * nominal_radius;
  RoiMask roi;
  const double x_center = 0.5 * (nx - 1);
  for (int z = 0; z < nz; ++z) {
    for (int x = 0; x < nx; ++x) {
      const double px = (x - x_center) * dx - cx;
      const double pz = z * dz - cz;
      const double r2 = px * px + pz * pz;
      if (r2 <= r_in * r_in)
        roi.lesion.push_back(static_cast<std::size_t>(z) * nx + x);
      else if (r2 >= r_ring0 * r_ring0 && r2 <= r_ring1 * r_ring1)
        roi.background.push_back(static_cast<std::size_t>(z) * nx + x);
    }
  }
  if (roi.lesion.empty() || roi.background.empty())
    throw ValidationError("roi: region outside the image grid");
  return roi;
}

double cr_db(const RoiMask& roi, const Mat& image) {
  const double m1 = mean_of(image, roi.lesion);
  const double m2 = mean_of(image, roi.background);
  if (!(m1 > 0.0) || !(m2 > 0.0))
    throw ValidationError("cr: region means must be positive");
  return 20.0 * std::log10(m1 / m2);
}

double cnr_db(const RoiMask& roi, const Mat& image) {
  const double m1 = mean_of(image, roi.lesion);
  const double m2 = mean_of(image, roi.background);
  const double v1 = var_of(image, roi.lesion, m1);
  const double v2 = var_of(image, roi.background, m2);
  const double num = std::fabs(m1 - m2);
  const double den = std::sqrt((v1 + v2) / 2.0);
  if (num == 0.0 && den == 0.0)
    return std::numeric_limits<double>::quiet_NaN();
  if (num == 0.0) return -std::numeric_limits<double>::infinity();
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(num / den);
}

double gcnr(const RoiMask& roi, const Mat& image, int bins) {
  if (roi.lesion.empty() || roi.background.empty())
    throw ValidationError("gcnr: empty region");
  if (bins < 1) throw ValidationError("gcnr: bins must be >= 1");
  double vmin = std::numeric_limits<double>::infinity();
  double vmax = -vmin;
  for (std::size_t i : roi.lesion) {
    vmin = std::min(vmin, image.v[i]);
    vmax = std::max(vmax, image.v[i]);
  }
  for (std::size_t i : roi.background) {
    vmin = std::min(vmin, image.v[i]);
    vmax = std::max(vmax, image.v[i]);
  }
  if (vmin == vmax) return 0.0;  // identical single-valued regions

  // normalized histograms share bin edges; the bin width cancels in the
  // overlap sum min(h1, h2) * ds = min(c1/n1, c2/n2)
  std::vector<double> h1(bins, 0.0), h2(bins, 0.0);
  const double scale = bins / (vmax - vmin);
  auto bin_of = [&](double v) {
    const int b = static_cast<int>((v - vmin) * scale);
    return std::min(b, bins - 1);
  };
  for (std::size_t i : roi.lesion) h1[bin_of(image.v[i])] += 1.0;
  for (std::size_t i : roi.background) h2[bin_of(image.v[i])] += 1.0;
  const double n1 = static_cast<double>(roi.lesion.size());
  const double n2 = static_cast<double>(roi.background.size());
  double overlap = 0.0;
  for (int b = 0; b < bins; ++b)
    overlap += std::min(h1[b] / n1, h2[b] / n2);
  return 1.0 - overlap;
}

// ---------------------------------------------------------------- fwhm

namespace {

// Solve the 4x4 system (JtJ + lambda diag) dx = Jtr by Gaussian elimination.
bool solve4(double a[4][4], double b[4], double out[4]) {
  int piv[4] = {0, 1, 2, 3};
  for (int c = 0; c < 4; ++c) {
    int best = c;
    for (int r = c + 1; r < 4; ++r)
      if (std::fabs(a[piv[r]][c]) > std::fabs(a[piv[best]][c])) best = r;
    std::swap(piv[c], piv[best]);
    const double d = a[piv[c]][c];
    if (std::fabs(d) < 1e-300) return false;
    for (int r = c + 1; r < 4; ++r) {
      const double f = a[piv[r]][c] / d;
      for (int k = c; k < 4; ++k) a[piv[r]][k] -= f * a[piv[c]][k];
      b[piv[r]] -= f * b[piv[c]];
    }
  }
  for (int c = 3; c >= 0; --c) {
    double s = b[piv[c]];
    for (int k = c + 1; k < 4; ++k) s -= a[piv[c]][k] * out[k];
    out[c] = s / a[piv[c]][c];
  }
  return true;
}

}  // namespace

FwhmResult fit_gaussian_fwhm(const std::vector<double>& profile,
                             double spacing) {
  FwhmResult res;
  const int n = static_cast<int>(profile.size());
  if (n < 5) throw ValidationError("fwhm: profile too short");

  // init from (max, argmax, second-moment width) with a baseline term
  double pmin = profile[0], pmax = profile[0];
  int argmax = 0;
  for (int i = 1; i < n; ++i) {
    pmin = std::min(pmin, profile[i]);
    if (profile[i] > pmax) {
      pmax = profile[i];
      argmax = i;
    }
  }
  if (!(pmax > pmin)) throw ValidationError("fwhm: flat profile");
  double wsum = 0.0, wu = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = std::max(0.0, profile[i] - pmin);
    wsum += w;
    wu += w * i;
  }
  const double mu0 = wu / wsum;
  double wuu = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = std::max(0.0, profile[i] - pmin);
    wuu += w * (i - mu0) * (i - mu0);
  }
  double a = pmin;
  double b = pmax - pmin;
  double mu = mu0;
  double sigma = std::max(0.5, std::sqrt(wuu / wsum));

  const int max_iter = 100;
  const double rel_tol = 1e-8;
  double lambda = 1e-3;

  auto sse = [&](double aa, double bb, double mm, double ss) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double t = (i - mm) / ss;
      const double r = aa + bb * std::exp(-0.5 * t * t) - profile[i];
      s += r * r;
    }
    return s;
  };

  double err = sse(a, b, mu, sigma);
  int it = 0;
  for (; it < max_iter; ++it) {
    // accumulate JtJ and Jtr
    double jtj[4][4] = {};
    double jtr[4] = {};
    for (int i = 0; i < n; ++i) {
      const double t = (i - mu) / sigma;
      const double e = std::exp(-0.5 * t * t);
      const double r = a + b * e - profile[i];
      const double j[4] = {1.0, e, b * e * t / sigma, b * e * t * t / sigma};
      for (int p = 0; p < 4; ++p) {
        jtr[p] += j[p] * r;
        for (int q = 0; q < 4; ++q) jtj[p][q] += j[p] * j[q];
      }
    }
    bool stepped = false;
    for (int attempt = 0; attempt < 12 && !stepped; ++attempt) {
      double lhs[4][4];
      double rhs[4] = {-jtr[0], -jtr[1], -jtr[2], -jtr[3]};
      for (int p = 0; p < 4; ++p)
        for (int q = 0; q < 4; ++q)
          lhs[p][q] = jtj[p][q] + (p == q ? lambda * jtj[p][p] : 0.0);
      double dx[4];
      if (!solve4(lhs, rhs, dx)) {
        lambda *= 10.0;
        continue;
      }
      const double na = a + dx[0], nb = b + dx[1], nm = mu + dx[2],
                   ns = sigma + dx[3];
      if (!(std::fabs(ns) > 1e-12)) {
        lambda *= 10.0;
        continue;
      }
      const double nerr = sse(na, nb, nm, ns);
      if (nerr <= err) {
        const double step = std::fabs(dx[0]) + std::fabs(dx[1]) +
                            std::fabs(dx[2]) + std::fabs(dx[3]);
        const double scale = std::fabs(a) + std::fabs(b) + std::fabs(mu) +
                             std::fabs(sigma);
        a = na;
        b = nb;
        mu = nm;
        sigma = ns;
        lambda = std::max(lambda * 0.3, 1e-12);
        stepped = true;
        if (step <= rel_tol * std::max(1.0, scale)) {
          err = nerr;
          res.converged = true;
        }
      } else {
        lambda *= 10.0;
      }
      if (stepped) err = nerr;
    }
    if (!stepped || res.converged) break;
  }
  res.converged = res.converged || err <= 1e-20;
  res.iterations = it + 1;
  res.sigma = std::fabs(sigma);
  res.fwhm = 2.0 * std::sqrt(2.0 * std::log(2.0)) * res.sigma * spacing;
  res.residual = std::sqrt(err / n);
  return res;
}

FwhmResult fwhm_metric(const WireRoi& roi, const Mat& image, ProfileAxis axis,
                       double spacing) {
  if (roi.z0 < 0 || roi.z1 > image.rows || roi.x0 < 0 || roi.x1 > image.cols ||
      roi.z0 >= roi.z1 || roi.x0 >= roi.x1)
    throw ValidationError("fwhm: ROI outside image");
  std::vector<double> profile;
  if (axis == ProfileAxis::axial) {
    profile.assign(roi.z1 - roi.z0, 0.0);
    for (int z = roi.z0; z < roi.z1; ++z) {
      double s = 0.0;
      for (int x = roi.x0; x < roi.x1; ++x) s += image.at(z, x);
      profile[z - roi.z0] = s / (roi.x1 - roi.x0);
    }
  } else {
    profile.assign(roi.x1 - roi.x0, 0.0);
    for (int x = roi.x0; x < roi.x1; ++x) {
      double s = 0.0;
      for (int z = roi.z0; z < roi.z1; ++z) s += image.at(z, x);
      profile[x - roi.x0] = s / (roi.z1 - roi.z0);
    }
  }
  return fit_gaussian_fwhm(profile, spacing);
}

// ---------------------------------------------------------------- report

void MetricReport::add(std::string sample, std::string subject,
                       std::string metric, std::string scale, double value) {
  rows.push_back({std::move(sample), std::move(subject), std::move(metric),
                  std::move(scale), value});
}

void MetricReport::write(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw FormatError("report: cannot open " + path.string());
  for (const MetricRow& r : rows) {
    os << "sample=" << r.sample << " subject=" << r.subject
       << " metric=" << r.metric << " scale=" << r.scale << " value=";
    if (std::isnan(r.value))
      os << "nan";
    else if (std::isinf(r.value))
      os << (r.value > 0 ? "inf" : "-inf");
    else
      os << format_double(r.value);
    os << "\n";
  }
}

// ---------------------------------------------------------------- roi file

std::vector<RoiFileEntry> read_roi_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("roi file: cannot open " + path.string());
  std::vector<RoiFileEntry> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    RoiFileEntry e;
    if (kind == "lesion")
      e.kind = RoiFileEntry::Kind::lesion;
    else if (kind == "wire")
      e.kind = RoiFileEntry::Kind::wire;
    else
      throw FormatError("roi file: unknown kind: " + kind);
    std::string tok;
    bool have_x = false, have_z = false, have_r = false;
    while (ls >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos)
        throw FormatError("roi file: malformed token: " + tok);
      const std::string key = tok.substr(0, eq);
      const double val = std::strtod(tok.c_str() + eq + 1, nullptr);
      if (key == "x_mm") {
        e.x_mm = val;
        have_x = true;
      } else if (key == "z_mm") {
        e.z_mm = val;
        have_z = true;
      } else if (key == "radius_mm" || key == "half_mm") {
        e.radius_mm = val;
        have_r = true;
      } else {
        throw FormatError("roi file: unknown key: " + key);
      }
    }
    if (!have_x || !have_z || !have_r)
      throw FormatError("roi file: missing x_mm/z_mm/radius_mm in: " + line);
    out.push_back(e);
  }
  return out;
}

}  // namespace pwbeam
