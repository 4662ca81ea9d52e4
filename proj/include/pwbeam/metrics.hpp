#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pwbeam/core.hpp"

// Image quality metrics: global image-pair measures, ROI-based contrast and
// detectability measures, and Gaussian-fit FWHM resolution.

namespace pwbeam {

// ---------------------------------------------------------------- global

// mean absolute difference
double l1_metric(const Mat& x, const Mat& y);
// root mean squared difference
double l2_metric(const Mat& x, const Mat& y);
// 20 log10(max(y)/l2); +inf sentinel when x == y
double psnr_metric(const Mat& x, const Mat& y);
// Pearson correlation over pixels; NaN sentinel for constant images
double ncc_metric(const Mat& x, const Mat& y);

// ---------------------------------------------------------------- rois

// Pixel masks for a lesion disk and a concentric background ring, on a grid
// with depth z = row*dz and centered lateral x = (col - (nx-1)/2)*dx.
// The disk uses 0.8x the nominal radius; the ring spans 1.2x..1.8x.
struct RoiMask {
  std::vector<std::size_t> lesion;      // region 1
  std::vector<std::size_t> background;  // region 2
};

RoiMask make_lesion_roi(int nz, int nx, double dz, double dx, double cx,
                        double cz, double nominal_radius);

// region means/stddev on the given intensity values
double cr_db(const RoiMask& roi, const Mat& image);
double cnr_db(const RoiMask& roi, const Mat& image);
// 1 - histogram overlap, 256 shared equal-width bins over the joint range
double gcnr(const RoiMask& roi, const Mat& image, int bins = 256);

// ---------------------------------------------------------------- fwhm

struct WireRoi {
  int z0 = 0, z1 = 0;  // [z0, z1) rows
  int x0 = 0, x1 = 0;  // [x0, x1) cols
};

enum class ProfileAxis { axial, lateral };

struct FwhmResult {
  bool converged = false;
  double fwhm = 0.0;      // [m]
  double sigma = 0.0;     // [samples]
  double residual = 0.0;  // final rms residual of the fit
  int iterations = 0;
};

// Average the ROI intensity across the orthogonal axis, fit
// a + b exp(-(u-mu)^2/(2 sigma^2)), return 2 sqrt(2 ln 2) sigma * spacing.
FwhmResult fwhm_metric(const WireRoi& roi, const Mat& image, ProfileAxis axis,
                       double spacing);

// Least-squares Gaussian fit on a raw profile (exposed for tests).
FwhmResult fit_gaussian_fwhm(const std::vector<double>& profile,
                             double spacing);

// ---------------------------------------------------------------- report

struct MetricRow {
  std::string sample;
  std::string subject;  // model | baseline | target
  std::string metric;
  std::string scale;    // normalized | linear | -
  double value = 0.0;
};

struct MetricReport {
  std::vector<MetricRow> rows;
  void add(std::string sample, std::string subject, std::string metric,
           std::string scale, double value);
  void write(const std::filesystem::path& path) const;
};

// ---------------------------------------------------------------- roi file

struct RoiFileEntry {
  enum class Kind { lesion, wire } kind = Kind::lesion;
  double x_mm = 0.0;
  double z_mm = 0.0;
  double radius_mm = 0.0;  // lesion: nominal radius; wire: half window
};

std::vector<RoiFileEntry> read_roi_file(const std::filesystem::path& path);

}  // namespace pwbeam
