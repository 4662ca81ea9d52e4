#include "pwbeam/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

namespace pwbeam {

// ---------------------------------------------------------------- config

void TrainConfig::validate() const {
  if (epochs < 1) throw ValidationError("train: epochs must be >= 1");
  if (!(lr > 0.0)) throw ValidationError("train: lr must be > 0");
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw ValidationError("train: fraction must be in (0, 1]");
  if (batch_size != 1) throw ValidationError("train: batch_size is fixed to 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0))
    throw ValidationError("train: betas must be in [0, 1)");
  if (!(eps_opt > 0.0)) throw ValidationError("train: eps_opt must be > 0");
  if (loss != "mse") throw ValidationError("train: unknown loss " + loss);
}

// ---------------------------------------------------------------- loss

double mse_loss(const Tensor3& x, const Tensor3& y) {
  if (!x.same_shape(y)) throw ValidationError("mse: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x.v[i] - y.v[i];
    s += d * d;
  }
  return s / static_cast<double>(x.size());
}

Tensor3 mse_loss_gradient(const Tensor3& x, const Tensor3& y) {
  if (!x.same_shape(y)) throw ValidationError("mse: shape mismatch");
  Tensor3 g(x.c, x.h, x.w);
  const double scale = 2.0 / static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    g.v[i] = scale * (x.v[i] - y.v[i]);
  return g;
}

// ---------------------------------------------------------------- optimizer

void AmsgradState::init(const std::vector<ParamView>& params) {
  m.clear();
  v.clear();
  vhat.clear();
  for (const ParamView& p : params) {
    m.emplace_back(p.value->size(), 0.0);
    v.emplace_back(p.value->size(), 0.0);
    vhat.emplace_back(p.value->size(), 0.0);
  }
  step = 0;
}

void amsgrad_step(std::vector<ParamView>& params, AmsgradState& state,
                  const TrainConfig& cfg) {
  if (state.m.size() != params.size())
    throw ValidationError("amsgrad: state not initialized for these params");
  for (const ParamView& p : params)
    for (double g : *p.grad)
      if (!std::isfinite(g))
        throw NumericalError("amsgrad: non-finite gradient in " + p.name +
                             ", step rejected");

  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t t = 0; t < params.size(); ++t) {
    std::vector<double>& theta = *params[t].value;
    const std::vector<double>& g = *params[t].grad;
    std::vector<double>& m = state.m[t];
    std::vector<double>& v = state.v[t];
    std::vector<double>& vh = state.vhat[t];
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      vh[i] = std::max(vh[i], v[i]);
      const double mhat = m[i] / bc1;
      const double vcorr = vh[i] / bc2;
      theta[i] -= cfg.lr * mhat / (std::sqrt(vcorr) + cfg.eps_opt);
    }
  }
}

// ---------------------------------------------------------------- subsets

std::vector<std::string> select_subset(
    const std::vector<std::pair<std::string, LesionClass>>& labeled_ids,
    double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw ValidationError("select_subset: fraction must be in (0, 1]");
  const std::size_t total = labeled_ids.size();
  const auto want = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(total)));
  if (want == 0)
    throw ValidationError("select_subset: fraction yields zero samples");

  // bucket per class, shuffle each bucket, then round-robin so every prefix
  // is class balanced; nesting follows from taking prefixes
  constexpr LesionClass kOrder[] = {LesionClass::hyperechoic,
                                    LesionClass::hypoechoic,
                                    LesionClass::normal, LesionClass::mixed};
  std::map<LesionClass, std::vector<std::string>> buckets;
  for (const auto& [id, cls] : labeled_ids) buckets[cls].push_back(id);
  Rng rng(seed);
  for (LesionClass cls : kOrder) {
    auto it = buckets.find(cls);
    if (it != buckets.end()) rng.shuffle(it->second);
  }

  std::vector<std::string> priority;
  priority.reserve(total);
  std::size_t level = 0;
  while (priority.size() < total) {
    for (LesionClass cls : kOrder) {
      auto it = buckets.find(cls);
      if (it != buckets.end() && level < it->second.size())
        priority.push_back(it->second[level]);
    }
    ++level;
  }
  priority.resize(want);
  return priority;
}

// ---------------------------------------------------------------- dataset

Dataset load_dataset(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pwc")
      files.push_back(entry.path());
  }
  if (files.empty())
    throw ValidationError("dataset: no .pwc containers in " + dir.string());
  std::sort(files.begin(), files.end());

  Dataset ds;
  bool first = true;
  for (const fs::path& f : files) {
    DataSample s = read_container(f);
    if (!s.target)
      throw ValidationError("dataset: sample without target: " + f.string());
    if (first) {
      ds.geom = s.geom;
      ds.acq = s.acq;
      ds.dynamic_range = s.target->dynamic_range;
      first = false;
    } else if (s.geom.num_elements != ds.geom.num_elements ||
               s.acq.num_samples != ds.acq.num_samples ||
               s.acq.angles.size() != ds.acq.angles.size()) {
      throw ValidationError("dataset: inconsistent geometry across containers");
    }
    TrainItem item;
    item.id = f.stem().string();
    item.lesion_class = s.lesion_class;
    item.rf0 = s.frames[s.acq.zero_angle_index()].data;
    item.target = s.target->pixels;
    ds.items.push_back(std::move(item));
  }
  return ds;
}

Split split_train_test(const Dataset& ds, double test_fraction) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw ValidationError("split: test_fraction must be in (0, 1)");
  std::vector<std::pair<std::string, LesionClass>> labeled;
  std::map<std::string, int> index_of;
  for (std::size_t i = 0; i < ds.items.size(); ++i) {
    labeled.emplace_back(ds.items[i].id, ds.items[i].lesion_class);
    index_of[ds.items[i].id] = static_cast<int>(i);
  }
  // held-out selection pinned to seed 0
  std::vector<std::string> test_ids = select_subset(labeled, test_fraction, 0);
  std::vector<bool> is_test(ds.items.size(), false);
  Split split;
  for (const std::string& id : test_ids) {
    split.test.push_back(index_of.at(id));
    is_test[index_of.at(id)] = true;
  }
  for (std::size_t i = 0; i < ds.items.size(); ++i)
    if (!is_test[i]) split.train.push_back(static_cast<int>(i));
  return split;
}

// ---------------------------------------------------------------- loop

TrainRun train(Model& model, const std::vector<TrainItem>& dataset,
               const TrainConfig& cfg) {
  cfg.validate();
  if (dataset.empty()) throw ValidationError("train: empty dataset");

  std::vector<std::pair<std::string, LesionClass>> labeled;
  std::map<std::string, const TrainItem*> by_id;
  for (const TrainItem& item : dataset) {
    labeled.emplace_back(item.id, item.lesion_class);
    by_id[item.id] = &item;
  }

  TrainRun run;
  run.subset_ids = select_subset(labeled, cfg.fraction, cfg.seed);

  std::vector<ParamView> params = model.params();
  AmsgradState opt;
  opt.init(params);

  // epoch shuffles draw from their own stream so subset selection stays a
  // function of the seed alone
  Rng shuffle_rng(cfg.seed ^ 0x5bf0f3a5c1d2e96bULL);

  auto snapshot = [&]() {
    std::vector<std::vector<double>> keep;
    keep.reserve(params.size());
    for (const ParamView& p : params) keep.push_back(*p.value);
    return keep;
  };
  std::vector<std::vector<double>> last_good = snapshot();

  std::vector<std::string> order = run.subset_ids;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    for (const std::string& id : order) {
      const TrainItem& item = *by_id.at(id);
      RFFrame f;
      f.data = item.rf0;
      Tensor3 input = mat_to_tensor(normalize_rf(f).data);
      Tensor3 target = mat_to_tensor(item.target);

      Tensor3 out = model.forward(input);
      const double loss = mse_loss(out, target);
      if (!std::isfinite(loss)) {
        // divergence: restore the last epoch-end parameters and stop
        for (std::size_t t = 0; t < params.size(); ++t)
          *params[t].value = last_good[t];
        run.diverged = true;
        return run;
      }
      loss_sum += loss;
      model.zero_grad();
      model.backward(mse_loss_gradient(out, target));
      amsgrad_step(params, opt, cfg);
    }
    run.history.push_back(loss_sum / static_cast<double>(order.size()));
    last_good = snapshot();
  }
  return run;
}

void write_run_manifest(const std::filesystem::path& path,
                        const TrainConfig& cfg, const TrainRun& run) {
  std::ofstream os(path);
  if (!os) throw FormatError("manifest: cannot open " + path.string());
  os << "epochs=" << cfg.epochs << "\n";
  os << "lr=" << format_double(cfg.lr) << "\n";
  os << "beta1=" << format_double(cfg.beta1) << "\n";
  os << "beta2=" << format_double(cfg.beta2) << "\n";
  os << "eps_opt=" << format_double(cfg.eps_opt) << "\n";
  os << "batch_size=" << cfg.batch_size << "\n";
  os << "fraction=" << format_double(cfg.fraction) << "\n";
  os << "seed=" << cfg.seed << "\n";
  os << "loss=" << cfg.loss << "\n";
  os << "diverged=" << (run.diverged ? 1 : 0) << "\n";
  os << "subset_ids=";
  for (std::size_t i = 0; i < run.subset_ids.size(); ++i) {
    if (i) os << ",";
    os << run.subset_ids[i];
  }
  os << "\n";
  for (std::size_t e = 0; e < run.history.size(); ++e)
    os << "epoch_" << e << "_loss=" << format_double(run.history[e]) << "\n";
}

}  // namespace pwbeam
