#include "pwbeam/core.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "container payload I/O assumes a little-endian host");

namespace pwbeam {

// ---------------------------------------------------------------- matrix

bool all_finite(const Mat& m) {
  for (double x : m.v)
    if (!std::isfinite(x)) return false;
  return true;
}

double max_abs(const Mat& m) {
  double peak = 0.0;
  for (double x : m.v) peak = std::max(peak, std::fabs(x));
  return peak;
}

// ---------------------------------------------------------------- probe

ProbeGeometry ProbeGeometry::linear_array(int num_elements, double pitch) {
  ProbeGeometry g;
  g.num_elements = num_elements;
  g.pitch = pitch;
  g.element_positions.resize(num_elements);
  const double c0 = 0.5 * static_cast<double>(num_elements - 1);
  for (int e = 0; e < num_elements; ++e) {
    g.element_positions[e] = (static_cast<double>(e) - c0) * pitch;
  }
  g.validate();
  return g;
}

ProbeGeometry ProbeGeometry::default_array() {
  // 50 mm aperture split across 256 elements
  return linear_array(256, 0.050 / 256.0);
}

void ProbeGeometry::validate() const {
  if (num_elements < 2) throw ValidationError("probe: num_elements must be >= 2");
  if (!(pitch > 0.0)) throw ValidationError("probe: pitch must be > 0");
  if (static_cast<int>(element_positions.size()) != num_elements)
    throw ValidationError("probe: element_positions size mismatch");
  constexpr double tol = 1e-12;
  for (int e = 1; e < num_elements; ++e) {
    double d = element_positions[e] - element_positions[e - 1];
    if (!(d > 0.0)) throw ValidationError("probe: positions not increasing");
    if (std::fabs(d - pitch) > tol)
      throw ValidationError("probe: positions not uniform");
  }
  for (int e = 0; e < num_elements; ++e) {
    if (std::fabs(element_positions[e] +
                  element_positions[num_elements - 1 - e]) > tol)
      throw ValidationError("probe: positions not symmetric about 0");
  }
}

// ---------------------------------------------------------------- acquisition

void AcquisitionParams::validate() const {
  if (!(sampling_freq > 2.0 * center_freq))
    throw ValidationError("acq: sampling_freq must exceed 2*center_freq");
  if (!(sound_speed > 0.0)) throw ValidationError("acq: sound_speed must be > 0");
  if (num_samples < 64) throw ValidationError("acq: num_samples must be >= 64");
  if (angles.empty()) throw ValidationError("acq: needs at least one angle");
  for (double a : angles) {
    if (!(a >= -std::numbers::pi / 2 && a <= std::numbers::pi / 2))
      throw ValidationError("acq: angle outside [-pi/2, pi/2]");
  }
}

std::vector<double> AcquisitionParams::uniform_angles(int count,
                                                      double half_span_rad) {
  if (count < 1) throw ValidationError("uniform_angles: count must be >= 1");
  std::vector<double> a(count);
  if (count == 1) {
    a[0] = 0.0;
    return a;
  }
  for (int i = 0; i < count; ++i) {
    a[i] = -half_span_rad +
           2.0 * half_span_rad * static_cast<double>(i) / (count - 1);
  }
  // odd uniform spans hit 0 exactly; clean the rounding residue
  if (count % 2 == 1) a[count / 2] = 0.0;
  return a;
}

int AcquisitionParams::zero_angle_index() const {
  for (std::size_t i = 0; i < angles.size(); ++i) {
    if (std::fabs(angles[i]) < 1e-9) return static_cast<int>(i);
  }
  throw ValidationError("acq: no zero-degree angle present");
}

// ---------------------------------------------------------------- frames

void RFFrame::validate(const ProbeGeometry& geom,
                       const AcquisitionParams& acq) const {
  if (data.rows != geom.num_elements || data.cols != acq.num_samples)
    throw ValidationError("frame: dimensions do not match geometry/params");
  if (angle_index < 0 || angle_index >= static_cast<int>(acq.angles.size()))
    throw ValidationError("frame: angle_index out of range");
  if (!all_finite(data)) throw ValidationError("frame: non-finite entries");
}

RFFrame normalize_rf(const RFFrame& frame) {
  if (!all_finite(frame.data))
    throw ValidationError("normalize_rf: non-finite input");
  const double peak = max_abs(frame.data);
  if (peak == 0.0 || peak == 1.0) return frame;
  RFFrame out = frame;
  // division (not reciprocal multiply) so the peak maps to exactly 1.0 and
  // the operation is a fixed point
  for (double& x : out.data.v) x /= peak;
  return out;
}

// ---------------------------------------------------------------- images

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::migrated: return "migrated";
    case Stage::envelope: return "envelope";
    case Stage::log_db: return "log_db";
    case Stage::normalized: return "normalized";
  }
  return "?";
}

Stage stage_from_name(const std::string& name) {
  if (name == "migrated") return Stage::migrated;
  if (name == "envelope") return Stage::envelope;
  if (name == "log_db") return Stage::log_db;
  if (name == "normalized") return Stage::normalized;
  throw FormatError("unknown stage: " + name);
}

void BeamformedImage::validate() const {
  if (pixels.rows < 1 || pixels.cols < 1)
    throw ValidationError("image: empty grid");
  if (!(dz > 0.0) || !(dx > 0.0))
    throw ValidationError("image: spacings must be > 0");
  if (stage == Stage::log_db || stage == Stage::normalized) {
    if (!(dynamic_range > 0.0))
      throw ValidationError("image: dynamic_range required for this stage");
  }
  if (stage == Stage::normalized) {
    for (double p : pixels.v)
      if (!(p >= 0.0 && p <= 1.0))
        throw ValidationError("image: normalized pixels outside [0, 1]");
  } else if (stage == Stage::log_db) {
    for (double p : pixels.v)
      if (!(p >= -dynamic_range && p <= 0.0))
        throw ValidationError("image: log_db pixels outside [-DR, 0]");
  }
}

// ---------------------------------------------------------------- samples

const char* lesion_class_name(LesionClass c) {
  switch (c) {
    case LesionClass::hyperechoic: return "hyperechoic";
    case LesionClass::hypoechoic: return "hypoechoic";
    case LesionClass::normal: return "normal";
    case LesionClass::mixed: return "mixed";
  }
  return "?";
}

LesionClass lesion_class_from_name(const std::string& name) {
  if (name == "hyperechoic") return LesionClass::hyperechoic;
  if (name == "hypoechoic") return LesionClass::hypoechoic;
  if (name == "normal") return LesionClass::normal;
  if (name == "mixed") return LesionClass::mixed;
  throw FormatError("unknown lesion class: " + name);
}

void DataSample::validate() const {
  geom.validate();
  acq.validate();
  if (frames.size() != acq.angles.size())
    throw ValidationError("sample: frames must cover all angles exactly once");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].angle_index != static_cast<int>(i))
      throw ValidationError("sample: frames out of angle order");
    frames[i].validate(geom, acq);
  }
  if (target) {
    target->validate();
    if (target->stage != Stage::normalized)
      throw ValidationError("sample: target must be stage=normalized");
  }
}

// ---------------------------------------------------------------- container

namespace {

void put_f32(std::ostream& os, const Mat& m) {
  std::vector<float> buf(m.v.size());
  for (std::size_t i = 0; i < m.v.size(); ++i)
    buf[i] = static_cast<float>(m.v[i]);
  os.write(reinterpret_cast<const char*>(buf.data()),
           static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

void get_f32(std::istream& is, Mat& m, const char* what) {
  std::vector<float> buf(m.v.size());
  is.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (static_cast<std::size_t>(is.gcount()) != buf.size() * sizeof(float))
    throw FormatError(std::string("container: payload truncated while reading ") +
                      what);
  for (std::size_t i = 0; i < m.v.size(); ++i) m.v[i] = buf[i];
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_container(const DataSample& sample,
                     const std::filesystem::path& path) {
  sample.validate();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("container: cannot open for writing: " + path.string());

  std::ostringstream hdr;
  hdr << "version=1\n";
  hdr << "num_elements=" << sample.geom.num_elements << "\n";
  hdr << "pitch_m=" << format_double(sample.geom.pitch) << "\n";
  hdr << "sampling_freq_hz=" << format_double(sample.acq.sampling_freq) << "\n";
  hdr << "center_freq_hz=" << format_double(sample.acq.center_freq) << "\n";
  hdr << "sound_speed_mps=" << format_double(sample.acq.sound_speed) << "\n";
  hdr << "num_samples=" << sample.acq.num_samples << "\n";
  hdr << "t0_s=" << format_double(sample.acq.t0) << "\n";
  hdr << "angles_rad=";
  for (std::size_t i = 0; i < sample.acq.angles.size(); ++i) {
    if (i) hdr << ",";
    hdr << format_double(sample.acq.angles[i]);
  }
  hdr << "\n";
  hdr << "lesion_class=" << lesion_class_name(sample.lesion_class) << "\n";
  hdr << "has_target=" << (sample.target ? 1 : 0) << "\n";
  if (sample.target) {
    hdr << "target_nz=" << sample.target->pixels.rows << "\n";
    hdr << "target_nx=" << sample.target->pixels.cols << "\n";
    hdr << "target_dz_m=" << format_double(sample.target->dz) << "\n";
    hdr << "target_dx_m=" << format_double(sample.target->dx) << "\n";
    hdr << "target_dynamic_range_db="
        << format_double(sample.target->dynamic_range) << "\n";
  }
  hdr << "\n";
  os << hdr.str();

  for (const RFFrame& f : sample.frames) put_f32(os, f.data);
  if (sample.target) put_f32(os, sample.target->pixels);
  if (!os) throw FormatError("container: write failed: " + path.string());
}

DataSample read_container(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("container: cannot open: " + path.string());

  std::map<std::string, std::string> kv;
  std::string line;
  bool saw_blank = false;
  while (std::getline(is, line)) {
    if (line.empty()) {
      saw_blank = true;
      break;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw FormatError("container: malformed header line: " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  if (!saw_blank) throw FormatError("container: missing end-of-header blank line");

  auto need = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end())
      throw FormatError("container: missing header key: " + key);
    return it->second;
  };
  auto to_int = [](const std::string& key, const std::string& s) {
    try {
      std::size_t pos = 0;
      int v = std::stoi(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw FormatError("container: bad integer for key " + key + ": " + s);
    }
  };
  auto to_dbl = [](const std::string& key, const std::string& s) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || s.empty())
      throw FormatError("container: bad number for key " + key + ": " + s);
    return v;
  };

  if (need("version") != "1")
    throw FormatError("container: unsupported version: " + kv["version"]);

  DataSample s;
  int ne = to_int("num_elements", need("num_elements"));
  double pitch = to_dbl("pitch_m", need("pitch_m"));
  s.geom = ProbeGeometry::linear_array(ne, pitch);
  s.acq.sampling_freq = to_dbl("sampling_freq_hz", need("sampling_freq_hz"));
  s.acq.center_freq = to_dbl("center_freq_hz", need("center_freq_hz"));
  s.acq.sound_speed = to_dbl("sound_speed_mps", need("sound_speed_mps"));
  s.acq.num_samples = to_int("num_samples", need("num_samples"));
  s.acq.t0 = to_dbl("t0_s", need("t0_s"));
  {
    std::stringstream as(need("angles_rad"));
    std::string tok;
    while (std::getline(as, tok, ',')) {
      s.acq.angles.push_back(to_dbl("angles_rad", tok));
    }
  }
  s.lesion_class = lesion_class_from_name(need("lesion_class"));
  const bool has_target = to_int("has_target", need("has_target")) != 0;

  s.geom.validate();
  s.acq.validate();

  const int na = static_cast<int>(s.acq.angles.size());
  s.frames.resize(na);
  for (int a = 0; a < na; ++a) {
    s.frames[a].angle_index = a;
    s.frames[a].data = Mat(ne, s.acq.num_samples);
    get_f32(is, s.frames[a].data, "frames");
  }
  if (has_target) {
    BeamformedImage t;
    t.pixels = Mat(to_int("target_nz", need("target_nz")),
                   to_int("target_nx", need("target_nx")));
    t.dz = to_dbl("target_dz_m", need("target_dz_m"));
    t.dx = to_dbl("target_dx_m", need("target_dx_m"));
    t.dynamic_range =
        to_dbl("target_dynamic_range_db", need("target_dynamic_range_db"));
    t.stage = Stage::normalized;
    get_f32(is, t.pixels, "target");
    s.target = std::move(t);
  }
  // trailing bytes mean the header undercounts the payload
  char extra;
  if (is.read(&extra, 1); is.gcount() != 0)
    throw FormatError("container: payload larger than header declares");

  s.validate();
  return s;
}

// ---------------------------------------------------------------- rng

std::uint64_t Rng::next_u64() {
  // splitmix64
  state_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform01();  // (0, 1]
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

std::uint64_t Rng::uniform_int(std::uint64_t n) {
  return n ? next_u64() % n : 0;
}

}  // namespace pwbeam
