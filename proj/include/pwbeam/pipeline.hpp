#pragma once

#include "pwbeam/core.hpp"
#include "pwbeam/fk.hpp"
#include "pwbeam/imgproc.hpp"
#include "pwbeam/sim.hpp"

// End-to-end helpers tying the simulator, migration and post-processing:
// dataset samples with compounded targets, and the reference single-angle /
// compounded reconstructions.

namespace pwbeam {

// Simulate every angle of `acq` for the given scatterers and attach the
// 75-angle-style compounded, processed target image. noise_rms_rel adds
// white receive noise to every frame, scaled to that fraction of the overall
// signal RMS (seeded, deterministic); the target is compounded from the
// noisy frames, so compounding averages the noise down as in a real
// acquisition.
DataSample simulate_sample(const std::vector<Scatterer>& scatterers,
                           const ProbeGeometry& geom,
                           const AcquisitionParams& acq,
                           LesionClass lesion_class,
                           const ProcessingConfig& cfg,
                           const PulseModel& pulse = {},
                           double noise_rms_rel = 0.0,
                           std::uint64_t noise_seed = 0);

// Reconstruct from the zero-angle frame only.
BeamformedImage beamform_single(const DataSample& sample,
                                const MigrationPlan& plan,
                                const ProcessingConfig& cfg);

// Coherently compound every frame, then post-process.
BeamformedImage beamform_compound(const DataSample& sample,
                                  const MigrationPlan& plan,
                                  const ProcessingConfig& cfg);

}  // namespace pwbeam
