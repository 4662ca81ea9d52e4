#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// Domain types shared by the whole toolkit: probe/acquisition descriptions,
// RF frames, beamformed images, and the plane-wave container file format.
// All types are immutable value objects once constructed.

namespace pwbeam {

// ---------------------------------------------------------------- errors

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- matrix

// Dense row-major double matrix.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0)
      : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, fill) {}

  double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const {
    return v[static_cast<std::size_t>(r) * cols + c];
  }
  double* row(int r) { return v.data() + static_cast<std::size_t>(r) * cols; }
  const double* row(int r) const {
    return v.data() + static_cast<std::size_t>(r) * cols;
  }
  std::size_t size() const { return v.size(); }
  bool same_shape(const Mat& o) const {
    return rows == o.rows && cols == o.cols;
  }
  bool operator==(const Mat& o) const = default;
};

bool all_finite(const Mat& m);
double max_abs(const Mat& m);

// ---------------------------------------------------------------- probe

struct ProbeGeometry {
  int num_elements = 0;
  double pitch = 0.0;                     // [m]
  std::vector<double> element_positions;  // [m], centered on 0

  // Uniform centered array.
  static ProbeGeometry linear_array(int num_elements, double pitch);
  // 256 elements spread over a 50 mm aperture.
  static ProbeGeometry default_array();

  void validate() const;
  // physical footprint (element span plus one pitch of element width)
  double aperture() const { return num_elements * pitch; }
};

struct AcquisitionParams {
  double sampling_freq = 0.0;  // [Hz]
  double center_freq = 0.0;    // [Hz]
  double sound_speed = 1540.0; // [m/s]
  int num_samples = 0;
  double t0 = 0.0;             // [s], time of first sample
  std::vector<double> angles;  // [rad]

  void validate() const;
  // Uniform span [-half_span, +half_span]; odd counts include 0 exactly.
  static std::vector<double> uniform_angles(int count, double half_span_rad);
  // Index of the angle closest to 0; throws if none within 1e-9 rad.
  int zero_angle_index() const;
};

// ---------------------------------------------------------------- frames

struct RFFrame {
  Mat data;  // [num_elements x num_samples], linear amplitude
  int angle_index = 0;

  void validate(const ProbeGeometry& geom, const AcquisitionParams& acq) const;
};

// Scale so that max |value| = 1; all-zero frames pass through unchanged.
RFFrame normalize_rf(const RFFrame& frame);

// ---------------------------------------------------------------- images

enum class Stage { migrated, envelope, log_db, normalized };

const char* stage_name(Stage s);
Stage stage_from_name(const std::string& name);

struct BeamformedImage {
  Mat pixels;  // [nz x nx]
  double dz = 0.0;  // [m]
  double dx = 0.0;  // [m]
  Stage stage = Stage::migrated;
  double dynamic_range = 0.0;  // [dB], meaningful for log_db/normalized

  void validate() const;
};

// ---------------------------------------------------------------- samples

enum class LesionClass { hyperechoic, hypoechoic, normal, mixed };

const char* lesion_class_name(LesionClass c);
LesionClass lesion_class_from_name(const std::string& name);

struct DataSample {
  ProbeGeometry geom;
  AcquisitionParams acq;
  std::vector<RFFrame> frames;  // one per angle, in angle order
  LesionClass lesion_class = LesionClass::normal;
  std::optional<BeamformedImage> target;  // stage=normalized

  void validate() const;
};

// ---------------------------------------------------------------- container

// Text key/value header terminated by a blank line, followed by a raw
// float32 little-endian payload: frames in [angle][element][sample] order,
// then the optional target image row-major [z][x].
void write_container(const DataSample& sample, const std::filesystem::path& p);
DataSample read_container(const std::filesystem::path& p);

// ---------------------------------------------------------------- rng

// Deterministic random source. Distribution transforms are implemented here
// so streams are reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

  std::uint64_t next_u64();
  double uniform01();                    // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  double normal();                       // standard normal, Box-Muller
  std::uint64_t uniform_int(std::uint64_t n);  // [0, n)

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_int(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// ---------------------------------------------------------------- misc

std::string format_double(double v);  // shortest round-trip decimal

}  // namespace pwbeam
