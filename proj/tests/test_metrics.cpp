#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "doctest.h"
#include "pwbeam/core.hpp"
#include "pwbeam/metrics.hpp"

using namespace pwbeam;

namespace {

Mat vec_mat(std::vector<double> v) {
  Mat m(1, static_cast<int>(v.size()));
  m.v = std::move(v);
  return m;
}

}  // namespace

TEST_CASE("l1 and l2 on the worked four-pixel example") {
  Mat x = vec_mat({0, 1, 1, 0});
  Mat y = vec_mat({1, 1, 0, 0});
  CHECK(l1_metric(x, y) == doctest::Approx(0.5));
  CHECK(l2_metric(x, y) == doctest::Approx(std::sqrt(0.5)));
  CHECK(l2_metric(x, y) == doctest::Approx(0.70711).epsilon(1e-4));

  CHECK(l1_metric(x, x) == 0.0);
  CHECK(l2_metric(y, y) == 0.0);
  CHECK(l2_metric(x, y) >= 0.0);
  Mat bad(2, 1);
  CHECK_THROWS_AS(l1_metric(x, bad), ValidationError);
}

TEST_CASE("psnr") {
  // max(y) = 1 and l2 = 0.1 -> 20 dB
  Mat y = vec_mat({1, 0, 0, 0});
  Mat x = vec_mat({1.2, 0, 0, 0});  // l2 = sqrt(0.04/4) = 0.1
  CHECK(psnr_metric(x, y) == doctest::Approx(20.0));

  CHECK(psnr_metric(y, y) == std::numeric_limits<double>::infinity());

  // scaling both images leaves psnr unchanged
  Rng rng(1);
  Mat a(4, 4), b(4, 4);
  for (double& v : a.v) v = rng.uniform01();
  for (double& v : b.v) v = rng.uniform01();
  const double p0 = psnr_metric(a, b);
  Mat a2 = a, b2 = b;
  for (double& v : a2.v) v *= 3.7;
  for (double& v : b2.v) v *= 3.7;
  CHECK(psnr_metric(a2, b2) == doctest::Approx(p0).epsilon(1e-12));
}

TEST_CASE("ncc") {
  Rng rng(2);
  Mat x(4, 4);
  for (double& v : x.v) v = rng.uniform(-1, 1);
  CHECK(ncc_metric(x, x) == doctest::Approx(1.0));

  Mat pos = x, neg = x;
  for (double& v : pos.v) v = 2.5 * v + 0.3;
  for (double& v : neg.v) v = -1.5 * v + 0.2;
  CHECK(ncc_metric(x, pos) == doctest::Approx(1.0));
  CHECK(ncc_metric(x, neg) == doctest::Approx(-1.0));

  // hand-computed zero-covariance case
  Mat a = vec_mat({0, 1, 1, 0});
  Mat b = vec_mat({1, 1, 0, 0});
  CHECK(ncc_metric(a, b) == doctest::Approx(0.0));

  Mat c = vec_mat({2, 2, 2, 2});
  CHECK(std::isnan(ncc_metric(a, c)));
}

TEST_CASE("global metrics are permutation consistent") {
  Rng rng(3);
  Mat x(3, 5), y(3, 5);
  for (double& v : x.v) v = rng.uniform01();
  for (double& v : y.v) v = rng.uniform01();
  std::vector<int> perm(15);
  for (int i = 0; i < 15; ++i) perm[i] = i;
  rng.shuffle(perm);
  Mat xp(3, 5), yp(3, 5);
  for (int i = 0; i < 15; ++i) {
    xp.v[i] = x.v[perm[i]];
    yp.v[i] = y.v[perm[i]];
  }
  CHECK(l1_metric(xp, yp) == doctest::Approx(l1_metric(x, y)).epsilon(1e-13));
  CHECK(l2_metric(xp, yp) == doctest::Approx(l2_metric(x, y)).epsilon(1e-13));
  CHECK(psnr_metric(xp, yp) ==
        doctest::Approx(psnr_metric(x, y)).epsilon(1e-13));
  CHECK(ncc_metric(xp, yp) == doctest::Approx(ncc_metric(x, y)).epsilon(1e-13));
}

TEST_CASE("cr values") {
  RoiMask roi;
  roi.lesion = {0, 1};
  roi.background = {2, 3};

  Mat img = vec_mat({0.5, 0.5, 0.5, 0.5});
  CHECK(cr_db(roi, img) == doctest::Approx(0.0));

  Mat img2 = vec_mat({0.05, 0.05, 0.5, 0.5});
  CHECK(cr_db(roi, img2) == doctest::Approx(-20.0));

  Mat img3 = vec_mat({0.0, 0.0, 0.5, 0.5});
  CHECK_THROWS_AS(cr_db(roi, img3), ValidationError);
}

TEST_CASE("cnr sentinels") {
  RoiMask roi;
  roi.lesion = {0, 1};
  roi.background = {2, 3};
  Mat same = vec_mat({0.5, 0.5, 0.5, 0.5});
  CHECK(std::isnan(cnr_db(roi, same)));  // equal means, zero variance
  Mat eqmean = vec_mat({0.4, 0.6, 0.3, 0.7});
  CHECK(cnr_db(roi, eqmean) == -std::numeric_limits<double>::infinity());
  Mat normal = vec_mat({0.1, 0.2, 0.7, 0.9});
  CHECK(std::isfinite(cnr_db(roi, normal)));
}

TEST_CASE("gcnr endpoints") {
  RoiMask roi;
  roi.lesion = {0, 1, 2, 3};
  roi.background = {4, 5, 6, 7};

  // identical value lists -> identical histograms -> 0
  Mat same = vec_mat({0.1, 0.4, 0.7, 0.9, 0.9, 0.1, 0.7, 0.4});
  CHECK(gcnr(roi, same) == doctest::Approx(0.0));

  // disjoint supports -> 1
  Mat disjoint = vec_mat({0.0, 0.1, 0.2, 0.35, 0.6, 0.72, 0.9, 1.0});
  CHECK(gcnr(roi, disjoint) == doctest::Approx(1.0));

  // degenerate single-value regions
  Mat allsame = vec_mat({0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5});
  CHECK(gcnr(roi, allsame) == 0.0);
  Mat twovals = vec_mat({0.2, 0.2, 0.2, 0.2, 0.8, 0.8, 0.8, 0.8});
  CHECK(gcnr(roi, twovals) == doctest::Approx(1.0));

  // bounded in [0, 1] and invariant to a constant shift of both regions
  Rng rng(5);
  Mat rnd(1, 8);
  for (double& v : rnd.v) v = rng.uniform01();
  const double g0 = gcnr(roi, rnd);
  CHECK(g0 >= 0.0);
  CHECK(g0 <= 1.0);
  Mat shifted = rnd;
  for (double& v : shifted.v) v += 10.0;
  CHECK(gcnr(roi, shifted) == doctest::Approx(g0).epsilon(1e-12));
}

TEST_CASE("cnr is invariant to a constant shift of both regions") {
  RoiMask roi;
  roi.lesion = {0, 1, 2, 3};
  roi.background = {4, 5, 6, 7};
  Rng rng(6);
  Mat img(1, 8);
  for (double& v : img.v) v = rng.uniform01();
  const double c0 = cnr_db(roi, img);
  Mat shifted = img;
  for (double& v : shifted.v) v += 3.0;
  CHECK(cnr_db(roi, shifted) == doctest::Approx(c0).epsilon(1e-10));
}

TEST_CASE("lesion roi geometry") {
  // 10 mm x 10 mm grid, 0.1 mm spacing
  RoiMask roi = make_lesion_roi(100, 100, 1e-4, 1e-4, 0.0, 5e-3, 2e-3);
  CHECK(!roi.lesion.empty());
  CHECK(!roi.background.empty());
  // disjoint
  std::vector<std::size_t> inter;
  std::set_intersection(roi.lesion.begin(), roi.lesion.end(),
                        roi.background.begin(), roi.background.end(),
                        std::back_inserter(inter));
  CHECK(inter.empty());
  // ring encloses more area than the eroded disk
  CHECK(roi.background.size() > roi.lesion.size());
}

TEST_CASE("gaussian fwhm is exact on noiseless profiles") {
  for (double sigma : {1.5, 2.0, 4.0}) {
    std::vector<double> p(64);
    const double mu = 31.4;
    for (int i = 0; i < 64; ++i)
      p[i] = 0.05 + 0.9 * std::exp(-(i - mu) * (i - mu) / (2 * sigma * sigma));
    const double spacing = 1e-4;  // 0.1 mm
    FwhmResult r = fit_gaussian_fwhm(p, spacing);
    CHECK(r.converged);
    const double expect = 2.0 * std::sqrt(2.0 * std::log(2.0)) * sigma * spacing;
    CHECK(std::fabs(r.fwhm - expect) <= 1e-3 * expect);
    if (sigma == 2.0) CHECK(r.fwhm == doctest::Approx(0.47096e-3).epsilon(1e-3));
  }
}

TEST_CASE("fwhm is scale invariant") {
  std::vector<double> p(48), p5(48);
  for (int i = 0; i < 48; ++i) {
    p[i] = std::exp(-(i - 24.0) * (i - 24.0) / (2 * 9.0));
    p5[i] = 5.0 * p[i];
  }
  FwhmResult a = fit_gaussian_fwhm(p, 1.0);
  FwhmResult b = fit_gaussian_fwhm(p5, 1.0);
  CHECK(a.converged);
  CHECK(b.converged);
  CHECK(a.fwhm == doctest::Approx(b.fwhm).epsilon(1e-9));
}

TEST_CASE("fwhm over a 2D roi averages the orthogonal axis") {
  Mat img(40, 20);
  const double sigma_z = 3.0, sigma_x = 2.0;
  for (int z = 0; z < 40; ++z)
    for (int x = 0; x < 20; ++x)
      img.at(z, x) = std::exp(-(z - 20.0) * (z - 20.0) / (2 * sigma_z * sigma_z)) *
                     std::exp(-(x - 10.0) * (x - 10.0) / (2 * sigma_x * sigma_x));
  WireRoi roi{5, 35, 2, 18};
  FwhmResult az = fwhm_metric(roi, img, ProfileAxis::axial, 1.0);
  FwhmResult lat = fwhm_metric(roi, img, ProfileAxis::lateral, 1.0);
  CHECK(az.converged);
  CHECK(lat.converged);
  // separable Gaussian: averaging the other axis preserves sigma
  CHECK(az.sigma == doctest::Approx(sigma_z).epsilon(1e-3));
  CHECK(lat.sigma == doctest::Approx(sigma_x).epsilon(1e-3));
}

TEST_CASE("metric report serializes sentinels") {
  namespace fs = std::filesystem;
  MetricReport rep;
  rep.add("s0", "model", "l2", "normalized", 0.125);
  rep.add("s0", "model", "psnr", "normalized",
          std::numeric_limits<double>::infinity());
  rep.add("s0", "baseline", "ncc", "normalized",
          std::numeric_limits<double>::quiet_NaN());
  const fs::path p = fs::temp_directory_path() / "pwbeam_report.txt";
  rep.write(p);
  std::ifstream is(p);
  std::string text((std::istreambuf_iterator<char>(is)),
                   std::istreambuf_iterator<char>());
  CHECK(text.find("metric=l2 scale=normalized value=0.125") !=
        std::string::npos);
  CHECK(text.find("value=inf") != std::string::npos);
  CHECK(text.find("value=nan") != std::string::npos);
  fs::remove(p);
}

TEST_CASE("roi file parsing") {
  namespace fs = std::filesystem;
  const fs::path p = fs::temp_directory_path() / "pwbeam_roi.txt";
  std::ofstream(p) << "# comment\n"
                   << "lesion x_mm=0 z_mm=15 radius_mm=3\n"
                   << "wire x_mm=-2.5 z_mm=20 half_mm=1.5\n";
  auto entries = read_roi_file(p);
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].kind == RoiFileEntry::Kind::lesion);
  CHECK(entries[0].z_mm == doctest::Approx(15.0));
  CHECK(entries[1].kind == RoiFileEntry::Kind::wire);
  CHECK(entries[1].x_mm == doctest::Approx(-2.5));
  std::ofstream(p) << "blob x_mm=0 z_mm=1 radius_mm=1\n";
  CHECK_THROWS_AS(read_roi_file(p), FormatError);
  fs::remove(p);
}
