#include <cmath>
#include <numbers>

#include "doctest.h"
#include "pwbeam/core.hpp"
#include "pwbeam/fft.hpp"
#include "pwbeam/fk.hpp"
#include "pwbeam/sim.hpp"

using namespace pwbeam;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

AcquisitionParams oracle_acq(int ns, std::vector<double> angles) {
  AcquisitionParams acq;
  acq.sampling_freq = 31.2e6;
  acq.center_freq = 7.8e6;
  acq.sound_speed = 1540.0;
  acq.num_samples = ns;
  acq.t0 = 0.0;
  acq.angles = std::move(angles);
  return acq;
}

Mat random_mat(Rng& rng, int r, int c) {
  Mat m(r, c);
  for (double& x : m.v) x = rng.uniform(-1, 1);
  return m;
}

double dot_flat(const Mat& a, const Mat& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.v[i] * b.v[i];
  return s;
}

double norm_flat(const Mat& a) { return std::sqrt(dot_flat(a, a)); }

// Envelope peak (row, col) of a migrated image.
std::pair<int, int> envelope_peak(const Mat& img) {
  const int nz = img.rows, nx = img.cols;
  std::vector<double> col(nz), env(nz);
  double best = -1.0;
  int bz = 0, bx = 0;
  for (int x = 0; x < nx; ++x) {
    for (int z = 0; z < nz; ++z) col[z] = img.at(z, x);
    std::vector<fft::cd> a(nz);
    fft::analytic(col.data(), nz, a.data());
    for (int z = 0; z < nz; ++z) env[z] = std::abs(a[z]);
    for (int z = 0; z < nz; ++z) {
      if (env[z] > best) {
        best = env[z];
        bz = z;
        bx = x;
      }
    }
  }
  return {bz, bx};
}

struct PeakError {
  double dz_mm;
  double dx_mm;
};

PeakError locate_error(double x_true, double z_true, double angle_deg,
                       double t0 = 0.0, Interp interp = Interp::linear) {
  ProbeGeometry geom = ProbeGeometry::linear_array(64, 0.0003);
  std::vector<double> angles{-16.0 * kDeg, -8.0 * kDeg, 0.0, 8.0 * kDeg,
                             16.0 * kDeg};
  AcquisitionParams acq = oracle_acq(1280, angles);
  acq.t0 = t0;
  int aidx = -1;
  for (std::size_t i = 0; i < angles.size(); ++i)
    if (std::fabs(angles[i] - angle_deg * kDeg) < 1e-12)
      aidx = static_cast<int>(i);
  REQUIRE(aidx >= 0);

  Scatterer s{x_true, z_true, 1.0};
  RFFrame frame = simulate_rf({s}, geom, acq, aidx);
  MigrationPlan plan = MigrationPlan::create(geom, acq, interp);
  BeamformedImage img = migrate(frame, plan);

  auto [pz, px] = envelope_peak(img.pixels);
  const double z_hat = pz * plan.dz;
  const double x_hat = geom.element_positions[px];
  return {(z_hat - z_true) * 1e3, (x_hat - x_true) * 1e3};
}

}  // namespace

TEST_CASE("all-zero frame migrates to an all-zero image") {
  ProbeGeometry geom = ProbeGeometry::linear_array(8, 0.0003);
  AcquisitionParams acq = oracle_acq(64, {0.0});
  MigrationPlan plan = MigrationPlan::create(geom, acq);
  RFFrame f;
  f.angle_index = 0;
  f.data = Mat(8, 64);
  BeamformedImage img = migrate(f, plan);
  CHECK(max_abs(img.pixels) == 0.0);
  CHECK(img.stage == Stage::migrated);
  CHECK(img.pixels.rows == 64);
  CHECK(img.pixels.cols == 8);
}

TEST_CASE("migrate is linear") {
  ProbeGeometry geom = ProbeGeometry::linear_array(8, 0.0003);
  AcquisitionParams acq = oracle_acq(64, {0.0, 8.0 * kDeg});
  MigrationPlan plan = MigrationPlan::create(geom, acq);
  Rng rng(31);
  for (int aidx : {0, 1}) {
    Mat x = random_mat(rng, 8, 64);
    Mat y = random_mat(rng, 8, 64);
    Mat comb(8, 64);
    const double alpha = 1.7, beta = -0.4;
    for (std::size_t i = 0; i < comb.size(); ++i)
      comb.v[i] = alpha * x.v[i] + beta * y.v[i];
    Mat mx = migrate_data(x, aidx, plan);
    Mat my = migrate_data(y, aidx, plan);
    Mat mc = migrate_data(comb, aidx, plan);
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < mc.size(); ++i) {
      err = std::max(err,
                     std::fabs(mc.v[i] - (alpha * mx.v[i] + beta * my.v[i])));
      scale = std::max(scale, std::fabs(mc.v[i]));
    }
    CHECK(err <= 1e-10 * scale);
  }
}

TEST_CASE("adjoint satisfies the dot-product identity") {
  Rng rng(17);
  struct PlanCfg {
    int ne, ns, pad_t, pad_x;
    Interp interp;
  };
  const PlanCfg cfgs[] = {
      {8, 64, 0, 0, Interp::linear},
      {12, 96, 256, 32, Interp::linear},
      {8, 64, 256, 64, Interp::spline},
  };
  for (const auto& cfg : cfgs) {
    ProbeGeometry geom = ProbeGeometry::linear_array(cfg.ne, 0.0003);
    AcquisitionParams acq =
        oracle_acq(cfg.ns, {-16.0 * kDeg, 0.0, 16.0 * kDeg});
    acq.t0 = 1e-6;
    MigrationPlan plan =
        MigrationPlan::create(geom, acq, cfg.interp, cfg.pad_t, cfg.pad_x);
    for (int trial = 0; trial < 20; ++trial) {
      const int aidx = static_cast<int>(rng.uniform_int(3));
      Mat x = random_mat(rng, cfg.ne, cfg.ns);
      Mat y = random_mat(rng, plan.nz, plan.nx);
      Mat ax = migrate_data(x, aidx, plan);
      Mat aty = migrate_adjoint(y, aidx, plan);
      const double lhs = dot_flat(ax, y);
      const double rhs = dot_flat(x, aty);
      CHECK(std::fabs(lhs - rhs) <= 1e-6 * norm_flat(ax) * norm_flat(y));
    }
  }
}

TEST_CASE("zero gradient image has zero adjoint") {
  ProbeGeometry geom = ProbeGeometry::linear_array(8, 0.0003);
  AcquisitionParams acq = oracle_acq(64, {0.0});
  MigrationPlan plan = MigrationPlan::create(geom, acq);
  Mat g(plan.nz, plan.nx);
  Mat back = migrate_adjoint(g, 0, plan);
  CHECK(max_abs(back) == 0.0);
}

TEST_CASE("A^T A is positive on point-scatterer data") {
  ProbeGeometry geom = ProbeGeometry::linear_array(16, 0.0003);
  AcquisitionParams acq = oracle_acq(256, {0.0});
  MigrationPlan plan = MigrationPlan::create(geom, acq);
  Scatterer s{0.0, 0.004, 1.0};
  RFFrame f = simulate_rf({s}, geom, acq, 0);
  Mat ax = migrate_data(f.data, 0, plan);
  Mat atax = migrate_adjoint(ax, 0, plan);
  CHECK(dot_flat(atax, f.data) > 0.0);
}

TEST_CASE("point scatterer localization oracle") {
  // normal incidence, depths 10/20/30 mm
  for (double z : {0.010, 0.020, 0.030}) {
    PeakError e = locate_error(0.0, z, 0.0);
    CAPTURE(z);
    CAPTURE(e.dz_mm);
    CAPTURE(e.dx_mm);
    CHECK(std::fabs(e.dz_mm) <= 0.4);
    CHECK(std::fabs(e.dx_mm) <= 0.4);
  }
  // steered to the paper's extreme angles
  for (double deg : {-16.0, 16.0}) {
    for (double z : {0.010, 0.020, 0.030}) {
      PeakError e = locate_error(0.0, z, deg);
      CAPTURE(deg);
      CAPTURE(z);
      CAPTURE(e.dz_mm);
      CAPTURE(e.dx_mm);
      CHECK(std::fabs(e.dz_mm) <= 0.6);
      CHECK(std::fabs(e.dx_mm) <= 0.6);
    }
  }
  // off-center scatterer, intermediate angle
  PeakError e = locate_error(0.003, 0.020, 8.0);
  CHECK(std::fabs(e.dz_mm) <= 0.6);
  CHECK(std::fabs(e.dx_mm) <= 0.6);
}

TEST_CASE("nonzero t0 is compensated") {
  PeakError e = locate_error(0.0, 0.020, 0.0, /*t0=*/2e-6);
  CHECK(std::fabs(e.dz_mm) <= 0.4);
  CHECK(std::fabs(e.dx_mm) <= 0.4);
  PeakError es = locate_error(0.0, 0.020, 16.0, /*t0=*/2e-6);
  CHECK(std::fabs(es.dz_mm) <= 0.6);
  CHECK(std::fabs(es.dx_mm) <= 0.6);
}

TEST_CASE("spline interpolation localizes as well as linear") {
  PeakError e = locate_error(0.0, 0.020, 16.0, 0.0, Interp::spline);
  CHECK(std::fabs(e.dz_mm) <= 0.6);
  CHECK(std::fabs(e.dx_mm) <= 0.6);
}

TEST_CASE("lateral shift covariance within one column") {
  ProbeGeometry geom = ProbeGeometry::linear_array(32, 0.0003);
  AcquisitionParams acq = oracle_acq(1024, {0.0});
  MigrationPlan plan = MigrationPlan::create(geom, acq);
  Scatterer s1{0.0, 0.015, 1.0};
  Scatterer s2{geom.pitch, 0.015, 1.0};
  RFFrame f1 = simulate_rf({s1}, geom, acq, 0);
  RFFrame f2 = simulate_rf({s2}, geom, acq, 0);
  auto [z1, x1] = envelope_peak(migrate(f1, plan).pixels);
  auto [z2, x2] = envelope_peak(migrate(f2, plan).pixels);
  CHECK(std::abs((x2 - x1) - 1) <= 1);
  CHECK(std::abs(z2 - z1) <= 1);
}

TEST_CASE("operator norm estimate by power iteration is finite") {
  ProbeGeometry geom = ProbeGeometry::linear_array(8, 0.0003);
  AcquisitionParams acq = oracle_acq(64, {0.0});
  MigrationPlan plan = MigrationPlan::create(geom, acq);
  Rng rng(5);
  Mat x = random_mat(rng, 8, 64);
  double lambda = 0.0;
  for (int it = 0; it < 8; ++it) {
    Mat ax = migrate_data(x, 0, plan);
    Mat atax = migrate_adjoint(ax, 0, plan);
    lambda = norm_flat(atax) / norm_flat(x);
    const double inv = 1.0 / norm_flat(atax);
    for (std::size_t i = 0; i < x.size(); ++i) x.v[i] = atax.v[i] * inv;
  }
  const double op_norm = std::sqrt(lambda);
  MESSAGE("estimated operator norm C = ", op_norm);
  CHECK(std::isfinite(op_norm));
  CHECK(op_norm > 0.0);

  // energy bound holds for fresh random inputs
  for (int trial = 0; trial < 5; ++trial) {
    Mat v = random_mat(rng, 8, 64);
    CHECK(norm_flat(migrate_data(v, 0, plan)) <= 1.05 * op_norm * norm_flat(v));
  }
}

TEST_CASE("migrate input validation") {
  ProbeGeometry geom = ProbeGeometry::linear_array(8, 0.0003);
  AcquisitionParams acq = oracle_acq(64, {0.0});
  MigrationPlan plan = MigrationPlan::create(geom, acq);
  Mat bad(8, 64);
  bad.at(0, 0) = std::nan("");
  CHECK_THROWS_AS(migrate_data(bad, 0, plan), ValidationError);
  Mat ok(8, 64);
  CHECK_THROWS_AS(migrate_data(ok, 1, plan), ValidationError);
  Mat wrong(4, 64);
  CHECK_THROWS_AS(migrate_data(wrong, 0, plan), ValidationError);
}

TEST_CASE("compound") {
  BeamformedImage a;
  a.pixels = Mat(4, 4, 2.0);
  a.dz = 1e-4;
  a.dx = 2e-4;
  a.stage = Stage::migrated;
  BeamformedImage b = a;
  for (double& x : b.pixels.v) x = 6.0;

  SUBCASE("mean of identical copies is the image itself") {
    BeamformedImage m = compound({a, a, a});
    CHECK(m.pixels == a.pixels);
  }
  SUBCASE("two images average pixelwise") {
    BeamformedImage m = compound({a, b});
    for (double x : m.pixels.v) CHECK(x == doctest::Approx(4.0));
  }
  SUBCASE("empty list rejected") {
    CHECK_THROWS_AS(compound({}), ValidationError);
  }
  SUBCASE("grid mismatch rejected") {
    BeamformedImage c = a;
    c.dz *= 2;
    CHECK_THROWS_AS(compound({a, c}), ValidationError);
  }
  SUBCASE("stage mismatch rejected") {
    BeamformedImage c = a;
    c.stage = Stage::envelope;
    CHECK_THROWS_AS(compound({a, c}), ValidationError);
  }
}
