#include "pwbeam/sim.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

namespace pwbeam {

void PhantomSpec::validate() const {
  if (kind == PhantomKind::wires) {
    if (wire_positions.empty())
      throw ValidationError("phantom: wires kind needs wire positions");
    return;
  }
  if (!(width > 0.0) || !(depth > 0.0))
    throw ValidationError("phantom: empty region");
  if (!(z_min > 0.0)) throw ValidationError("phantom: z_min must be > 0");
  if (!(density >= 0.0)) throw ValidationError("phantom: negative density");
  for (const LesionSpec& l : lesions) {
    if (!(l.radius > 0.0)) throw ValidationError("phantom: lesion radius <= 0");
    if (l.contrast_db < -40.0 || l.contrast_db > 40.0)
      throw ValidationError("phantom: lesion contrast outside [-40, 40] dB");
    if (l.cx - l.radius < -width / 2 || l.cx + l.radius > width / 2 ||
        l.cz - l.radius < z_min || l.cz + l.radius > z_min + depth)
      throw ValidationError("phantom: lesion not inside region");
  }
}

std::vector<Scatterer> make_phantom(const PhantomSpec& spec) {
  spec.validate();
  std::vector<Scatterer> out;
  if (spec.kind == PhantomKind::wires) {
    out.reserve(spec.wire_positions.size());
    for (auto [x, z] : spec.wire_positions) out.push_back({x, z, 1.0});
    return out;
  }
  Rng rng(spec.rng_seed);
  const double area_mm2 = spec.width * spec.depth * 1e6;
  const auto count = static_cast<std::size_t>(
      std::llround(spec.density * area_mm2));
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Scatterer s;
    s.x = rng.uniform(-spec.width / 2, spec.width / 2);
    s.z = rng.uniform(spec.z_min, spec.z_min + spec.depth);
    s.amplitude = rng.normal();
    for (const LesionSpec& l : spec.lesions) {
      const double dx = s.x - l.cx;
      const double dz = s.z - l.cz;
      if (dx * dx + dz * dz <= l.radius * l.radius)
        s.amplitude *= std::pow(10.0, l.contrast_db / 20.0);
    }
    out.push_back(s);
  }
  return out;
}

PhantomSpec read_phantom_spec(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("phantom spec: cannot open " + path.string());
  PhantomSpec spec;
  std::string line;
  auto parse_kv = [](const std::string& tok, std::string& key, double& val) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos)
      throw FormatError("phantom spec: malformed token: " + tok);
    key = tok.substr(0, eq);
    val = std::strtod(tok.c_str() + eq + 1, nullptr);
  };
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    if (head == "lesion" || head == "wire") {
      LesionSpec l;
      double x = 0, z = 0;
      std::string tok, key;
      double val;
      while (ls >> tok) {
        parse_kv(tok, key, val);
        if (key == "x_mm") x = val * 1e-3;
        else if (key == "z_mm") z = val * 1e-3;
        else if (key == "radius_mm") l.radius = val * 1e-3;
        else if (key == "contrast_db") l.contrast_db = val;
        else throw FormatError("phantom spec: unknown key " + key);
      }
      if (head == "wire") {
        spec.wire_positions.emplace_back(x, z);
      } else {
        l.cx = x;
        l.cz = z;
        spec.lesions.push_back(l);
      }
    } else {
      std::string key;
      double val;
      parse_kv(head, key, val);
      if (key == "kind") {
        const std::string v = head.substr(head.find('=') + 1);
        if (v == "speckle_lesions") spec.kind = PhantomKind::speckle_lesions;
        else if (v == "wires") spec.kind = PhantomKind::wires;
        else if (v == "cyst") spec.kind = PhantomKind::cyst;
        else throw FormatError("phantom spec: unknown kind " + v);
      } else if (key == "width_mm") {
        spec.width = val * 1e-3;
      } else if (key == "depth_mm") {
        spec.depth = val * 1e-3;
      } else if (key == "z_min_mm") {
        spec.z_min = val * 1e-3;
      } else if (key == "density") {
        spec.density = val;
      } else if (key == "seed") {
        spec.rng_seed = static_cast<std::uint64_t>(val);
      } else {
        throw FormatError("phantom spec: unknown key " + key);
      }
    }
  }
  spec.validate();
  return spec;
}

double PulseModel::sigma(double center_freq) const {
  // amplitude spectrum exp(-2 pi^2 sigma^2 f^2) down 6 dB at
  // f = fractional_bandwidth * f0 / 2
  return std::sqrt(2.0 * std::numbers::ln2) /
         (std::numbers::pi * fractional_bandwidth * center_freq);
}

double PulseModel::eval(double t, double center_freq) const {
  const double s = sigma(center_freq);
  return std::exp(-t * t / (2.0 * s * s)) *
         std::cos(2.0 * std::numbers::pi * center_freq * t);
}

double travel_time(const Scatterer& s, double x_elem, double angle,
                   double sound_speed) {
  const double tx = s.z * std::cos(angle) + s.x * std::sin(angle);
  const double dx = x_elem - s.x;
  const double rx = std::sqrt(dx * dx + s.z * s.z);
  return (tx + rx) / sound_speed;
}

RFFrame simulate_rf(const std::vector<Scatterer>& scatterers,
                    const ProbeGeometry& geom, const AcquisitionParams& acq,
                    int angle_index, const PulseModel& pulse) {
  geom.validate();
  acq.validate();
  if (angle_index < 0 || angle_index >= static_cast<int>(acq.angles.size()))
    throw ValidationError("simulate_rf: angle_index out of range");

  const double angle = acq.angles[angle_index];
  const double c = acq.sound_speed;
  const double fs = acq.sampling_freq;
  const double sig = pulse.sigma(acq.center_freq);
  const double halfwin = 5.0 * sig;
  const double dz = c / (2.0 * fs);  // spreading floor

  RFFrame frame;
  frame.angle_index = angle_index;
  frame.data = Mat(geom.num_elements, acq.num_samples);

  bool any_hit = false;
  for (const Scatterer& s : scatterers) {
    if (!(std::isfinite(s.x) && std::isfinite(s.z) && std::isfinite(s.amplitude)))
      throw ValidationError("simulate_rf: non-finite scatterer");
    if (!(s.z > 0.0))
      throw ValidationError("simulate_rf: scatterer outside half-space z > 0");
    for (int e = 0; e < geom.num_elements; ++e) {
      const double xe = geom.element_positions[e];
      const double tau = travel_time(s, xe, angle, c);
      const double ddx = xe - s.x;
      const double dist = std::sqrt(ddx * ddx + s.z * s.z);
      const double amp = s.amplitude / std::max(dist, dz);
      const int n0 = std::max(
          0, static_cast<int>(std::ceil((tau - halfwin - acq.t0) * fs)));
      const int n1 = std::min(
          acq.num_samples - 1,
          static_cast<int>(std::floor((tau + halfwin - acq.t0) * fs)));
      if (n0 > n1) continue;
      any_hit = true;
      double* row = frame.data.row(e);
      for (int n = n0; n <= n1; ++n) {
        const double t = acq.t0 + n / fs;
        row[n] += amp * pulse.eval(t - tau, acq.center_freq);
      }
    }
  }
  if (!scatterers.empty() && !any_hit) {
    std::cerr << "simulate_rf: warning: no scatterer falls inside the "
                 "recorded window; returning zero frame\n";
  }
  return frame;
}

std::pair<double, double> arrival_bounds(
    const std::vector<Scatterer>& scatterers, const ProbeGeometry& geom,
    const std::vector<double>& angles, double sound_speed, double center_freq,
    const PulseModel& pulse) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const Scatterer& s : scatterers) {
    for (double a : angles) {
      for (int e = 0; e < geom.num_elements; ++e) {
        const double tau = travel_time(s, geom.element_positions[e], a,
                                       sound_speed);
        lo = std::min(lo, tau);
        hi = std::max(hi, tau);
      }
    }
  }
  const double guard = 5.0 * pulse.sigma(center_freq);
  return {lo - guard, hi + guard};
}

}  // namespace pwbeam
