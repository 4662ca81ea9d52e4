#include "pwbeam/pipeline.hpp"
#include <cmath>

namespace pwbeam {

DataSample simulate_sample(const std::vector<Scatterer>& scatterers,
                           const ProbeGeometry& geom,
                           const AcquisitionParams& acq,
                           LesionClass lesion_class,
                           const ProcessingConfig& cfg,
                           const PulseModel& pulse, double noise_rms_rel,
                           std::uint64_t noise_seed) {
  DataSample sample;
  sample.geom = geom;
  sample.acq = acq;
  sample.lesion_class = lesion_class;
  const int na = static_cast<int>(acq.angles.size());
  sample.frames.reserve(na);
  for (int a = 0; a < na; ++a)
    sample.frames.push_back(simulate_rf(scatterers, geom, acq, a, pulse));

  if (noise_rms_rel > 0.0) {
    double energy = 0.0;
    std::size_t count = 0;
    for (const RFFrame& f : sample.frames) {
      for (double x : f.data.v) energy += x * x;
      count += f.data.size();
    }
    const double sigma =
        noise_rms_rel * std::sqrt(energy / std::max<std::size_t>(count, 1));
    Rng rng(noise_seed ^ 0xce6a1c1d9bf5a87fULL);
    for (RFFrame& f : sample.frames)
      for (double& x : f.data.v) x += sigma * rng.normal();
  }

  // target: quantize frames to the container's float32 precision first so a
  // reader recomputing the compound from disk reproduces it
  MigrationPlan plan = MigrationPlan::create(geom, acq);
  std::vector<BeamformedImage> migrated;
  migrated.reserve(na);
  for (int a = 0; a < na; ++a) {
    RFFrame f = sample.frames[a];
    for (double& x : f.data.v) x = static_cast<float>(x);
    migrated.push_back(migrate(f, plan));
  }
  sample.target = process_to_normalized(compound(migrated), cfg);
  return sample;
}

BeamformedImage beamform_single(const DataSample& sample,
                                const MigrationPlan& plan,
                                const ProcessingConfig& cfg) {
  const int zero = sample.acq.zero_angle_index();
  return process_to_normalized(migrate(sample.frames[zero], plan), cfg);
}

BeamformedImage beamform_compound(const DataSample& sample,
                                  const MigrationPlan& plan,
                                  const ProcessingConfig& cfg) {
  std::vector<BeamformedImage> migrated;
  migrated.reserve(sample.frames.size());
  for (const RFFrame& f : sample.frames) migrated.push_back(migrate(f, plan));
  return process_to_normalized(compound(migrated), cfg);
}

}  // namespace pwbeam
