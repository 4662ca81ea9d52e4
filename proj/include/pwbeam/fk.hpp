#pragma once

#include <vector>

#include "pwbeam/core.hpp"

// Stolt f-k migration of tilted plane-wave channel data.
//
// The recorded field of a plane wave steered by theta relates to the
// reflectivity spectrum through
//     KX = kx + (f/c) sin(theta)
//     KZ = sqrt((f/c)^2 - kx^2) + (f/c) cos(theta)
// which inverts to the resampling rule
//     f(KX, KZ) = c (KX^2 + KZ^2) / (2 (KZ cos(theta) + KX sin(theta))).
// The kx/KX shear is removed exactly with a per-element phase ramp (a time
// advance of x sin(theta)/c), so the remaining remap is one-dimensional
// along the temporal-frequency axis, per lateral wavenumber, with the
// Jacobian df/dKZ as amplitude weight. At theta = 0 this reduces to the
// classical exploding-reflector mapping f = c (KX^2 + KZ^2) / (2 KZ).
//
// Every stage is linear, so the exact adjoint is the stage-by-stage
// transpose in reverse order; migrate_adjoint implements it and the pair is
// contract-tested through the dot-product identity.

namespace pwbeam {

enum class Interp { linear, spline };

struct MigrationPlan {
  ProbeGeometry geom;
  AcquisitionParams acq;
  int pad_time = 0;     // FFT length along time/depth, >= num_samples
  int pad_lateral = 0;  // FFT length along x, >= num_elements
  Interp interp = Interp::linear;
  int nz = 0;
  int nx = 0;
  double dz = 0.0;  // sound_speed / (2 * sampling_freq)
  double dx = 0.0;  // pitch

  // Default padding doubles each axis and rounds up to a power of two.
  static MigrationPlan create(const ProbeGeometry& geom,
                              const AcquisitionParams& acq,
                              Interp interp = Interp::linear,
                              int pad_time = 0, int pad_lateral = 0);

  void validate() const;
};

// Data [num_elements x num_samples] -> image [nz x nx], stage=migrated.
BeamformedImage migrate(const RFFrame& frame, const MigrationPlan& plan);

// Raw-matrix forms used inside network layers.
Mat migrate_data(const Mat& data, int angle_index, const MigrationPlan& plan);
Mat migrate_adjoint(const Mat& grad_image, int angle_index,
                    const MigrationPlan& plan);

// Pixelwise mean of coherently migrated images on a shared grid.
BeamformedImage compound(const std::vector<BeamformedImage>& images);

}  // namespace pwbeam
