#pragma once

#include <vector>

#include "pwbeam/core.hpp"

// Synthetic plane-wave RF data: point scatterers insonified with a tilted
// plane wave, ideal point receivers, single scattering, no attenuation.
// The forward model is linear in the scatterer amplitudes, which is what
// makes it usable as an exact oracle for the migration operator.

namespace pwbeam {

struct Scatterer {
  double x = 0.0;          // [m] lateral
  double z = 0.0;          // [m] depth, > 0
  double amplitude = 0.0;  // reflectivity
};

enum class PhantomKind { speckle_lesions, wires, cyst };

struct LesionSpec {
  double cx = 0.0;           // [m]
  double cz = 0.0;           // [m]
  double radius = 0.0;       // [m]
  double contrast_db = 0.0;  // amplitude contrast vs background
};

struct PhantomSpec {
  PhantomKind kind = PhantomKind::speckle_lesions;
  double width = 0.0;    // [m] lateral extent, centered on 0
  double depth = 0.0;    // [m] axial extent
  double z_min = 5e-3;   // [m] start depth of the region
  double density = 0.0;  // scatterers per mm^2
  std::vector<LesionSpec> lesions;
  std::vector<std::pair<double, double>> wire_positions;  // (x, z) [m]
  std::uint64_t rng_seed = 0;

  void validate() const;
};

// Deterministic in rng_seed. Speckle amplitudes are i.i.d. standard normal,
// scaled by 10^(contrast_db/20) inside each lesion disk; wires kind emits
// exactly the wire positions with amplitude 1.
std::vector<Scatterer> make_phantom(const PhantomSpec& spec);

// Text key/value phantom description:
//   kind=cyst            (speckle_lesions | wires | cyst)
//   width_mm=12  depth_mm=11  z_min_mm=6.5  density=120  seed=1001
//   lesion x_mm=0 z_mm=12.5 radius_mm=3 contrast_db=-30
//   wire x_mm=0 z_mm=15
PhantomSpec read_phantom_spec(const std::filesystem::path& path);

// Gaussian-modulated cosine transmit pulse. Bandwidth is fractional at
// -6 dB on the amplitude spectrum.
struct PulseModel {
  double fractional_bandwidth = 0.67;

  double sigma(double center_freq) const;  // [s] envelope std dev
  double eval(double t, double center_freq) const;
};

// Two-way travel time from plane-wave transmit at `angle` to scatterer s and
// back to lateral position x_elem. The transmit wavefront passes the array
// center (0, 0) at t = 0.
double travel_time(const Scatterer& s, double x_elem, double angle,
                   double sound_speed);

// Simulate one receive frame for acq.angles[angle_index].
RFFrame simulate_rf(const std::vector<Scatterer>& scatterers,
                    const ProbeGeometry& geom, const AcquisitionParams& acq,
                    int angle_index, const PulseModel& pulse = {});

// Earliest/latest pulse energy [s] over all scatterers, elements and angles;
// used to size the recording window.
std::pair<double, double> arrival_bounds(
    const std::vector<Scatterer>& scatterers, const ProbeGeometry& geom,
    const std::vector<double>& angles, double sound_speed,
    double center_freq, const PulseModel& pulse = {});

}  // namespace pwbeam
