#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pwbeam/core.hpp"
#include "pwbeam/nn.hpp"

// Supervised end-to-end training: MSE loss, AMSGrad, stratified nested
// training subsets, and a sequential batch-size-1 loop that is bit
// deterministic for a fixed seed.

namespace pwbeam {

// ---------------------------------------------------------------- config

struct TrainConfig {
  int epochs = 70;
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_opt = 1e-8;
  int batch_size = 1;  // fixed by design
  double fraction = 1.0;
  std::uint64_t seed = 0;
  std::string loss = "mse";

  void validate() const;
};

// ---------------------------------------------------------------- loss

double mse_loss(const Tensor3& x, const Tensor3& y);
Tensor3 mse_loss_gradient(const Tensor3& x, const Tensor3& y);  // 2(x-y)/N

// ---------------------------------------------------------------- optimizer

struct AmsgradState {
  std::vector<std::vector<double>> m, v, vhat;
  long step = 0;

  void init(const std::vector<ParamView>& params);
};

// One AMSGrad update over all parameter tensors. A non-finite gradient
// rejects the whole step (state untouched) with a NumericalError.
void amsgrad_step(std::vector<ParamView>& params, AmsgradState& state,
                  const TrainConfig& cfg);

// ---------------------------------------------------------------- subsets

// Stratified (per-class counts differ by <= 1), nested (prefix property in
// the fraction) and deterministic in the seed.
std::vector<std::string> select_subset(
    const std::vector<std::pair<std::string, LesionClass>>& labeled_ids,
    double fraction, std::uint64_t seed);

// ---------------------------------------------------------------- dataset

struct TrainItem {
  std::string id;
  LesionClass lesion_class = LesionClass::normal;
  Mat rf0;     // theta = 0 receive frame, raw scale
  Mat target;  // compounded normalized target image
};

struct Dataset {
  ProbeGeometry geom;
  AcquisitionParams acq;
  double dynamic_range = 60.0;
  std::vector<TrainItem> items;
};

// Read every *.pwc container in a directory (sorted by filename).
Dataset load_dataset(const std::filesystem::path& dir);

// Held-out split: test ids picked by seed-0 stratified selection.
struct Split {
  std::vector<int> train;  // indices into Dataset::items
  std::vector<int> test;
};
Split split_train_test(const Dataset& ds, double test_fraction);

// ---------------------------------------------------------------- loop

struct TrainRun {
  std::vector<double> history;          // mean loss per epoch
  std::vector<std::string> subset_ids;  // training manifest
  bool diverged = false;
};

// Trains in place. Inputs are normalize_rf(theta=0 frame); targets the
// stored compounded images. Deterministic given (seed, single thread).
TrainRun train(Model& model, const std::vector<TrainItem>& dataset,
               const TrainConfig& cfg);

// Text manifest: resolved config, subset ids, per-epoch losses.
void write_run_manifest(const std::filesystem::path& path,
                        const TrainConfig& cfg, const TrainRun& run);

}  // namespace pwbeam
