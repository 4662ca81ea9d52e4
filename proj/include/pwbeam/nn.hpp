#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pwbeam/core.hpp"
#include "pwbeam/fk.hpp"
#include "pwbeam/imgproc.hpp"

// Layer-granularity network components with explicit forward/backward, and
// the builders for the three model variants: a data-domain ResNet and an
// image-domain ResNet around a frozen migration + post-processing chain.

namespace pwbeam {

// ---------------------------------------------------------------- tensor

struct Tensor3 {
  int c = 0, h = 0, w = 0;
  std::vector<double> v;

  Tensor3() = default;
  Tensor3(int c_, int h_, int w_, double fill = 0.0)
      : c(c_), h(h_), w(w_),
        v(static_cast<std::size_t>(c_) * h_ * w_, fill) {}

  std::size_t plane_size() const { return static_cast<std::size_t>(h) * w; }
  double* plane(int ci) { return v.data() + ci * plane_size(); }
  const double* plane(int ci) const { return v.data() + ci * plane_size(); }
  double* row(int ci, int hi) { return plane(ci) + static_cast<std::size_t>(hi) * w; }
  const double* row(int ci, int hi) const {
    return plane(ci) + static_cast<std::size_t>(hi) * w;
  }
  std::size_t size() const { return v.size(); }
  bool same_shape(const Tensor3& o) const {
    return c == o.c && h == o.h && w == o.w;
  }
};

Tensor3 mat_to_tensor(const Mat& m);
Mat tensor_to_mat(const Tensor3& t);  // requires c == 1

// ---------------------------------------------------------------- layers

struct ParamView {
  std::string name;
  std::vector<double>* value = nullptr;
  std::vector<double>* grad = nullptr;
};

class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor3 forward(const Tensor3& x) = 0;
  virtual Tensor3 backward(const Tensor3& grad_out) = 0;
  virtual void collect_params(std::vector<ParamView>&) {}
  virtual void zero_grad() {}
};

// 2D convolution with per-output-channel weight standardization, zero
// padding, odd kernel, spatial size preserved.
class Conv2dWS : public Layer {
 public:
  static constexpr double kEps = 1e-5;

  Conv2dWS(int c_in, int c_out, int kernel, Rng& rng, std::string name);

  Tensor3 forward(const Tensor3& x) override;
  Tensor3 backward(const Tensor3& grad_out) override;
  void collect_params(std::vector<ParamView>& out) override;
  void zero_grad() override;

  int c_in() const { return c_in_; }
  int c_out() const { return c_out_; }
  // standardized weights of the most recent forward (exposed for tests)
  const std::vector<double>& standardized() const { return w_hat_; }

 private:
  int c_in_, c_out_, kernel_, pad_;
  std::string name_;
  std::vector<double> w_, b_, gw_, gb_;
  // saved by forward
  std::vector<double> w_hat_;
  std::vector<double> inv_std_;  // per output channel
  Tensor3 x_saved_;
};

class GroupNorm : public Layer {
 public:
  static constexpr double kEps = 1e-5;

  GroupNorm(int channels, int groups, std::string name);

  Tensor3 forward(const Tensor3& x) override;
  Tensor3 backward(const Tensor3& grad_out) override;
  void collect_params(std::vector<ParamView>& out) override;
  void zero_grad() override;

 private:
  int channels_, groups_;
  std::string name_;
  std::vector<double> gamma_, beta_, ggamma_, gbeta_;
  Tensor3 xhat_saved_;
  std::vector<double> inv_std_;  // per group
};

enum class Act { relu, tanh, sigmoid };

class Activation : public Layer {
 public:
  explicit Activation(Act kind) : kind_(kind) {}
  Tensor3 forward(const Tensor3& x) override;
  Tensor3 backward(const Tensor3& grad_out) override;

 private:
  Act kind_;
  Tensor3 saved_;  // input for relu, output for tanh/sigmoid
};

// Frozen migration layer: [1 x ne x ns] data -> [1 x nz x nx] image, with
// the exact adjoint as gradient.
class MigrationLayer : public Layer {
 public:
  MigrationLayer(MigrationPlan plan, int angle_index);
  Tensor3 forward(const Tensor3& x) override;
  Tensor3 backward(const Tensor3& grad_out) override;

 private:
  MigrationPlan plan_;
  int angle_index_;
};

class EnvelopeLayer : public Layer {
 public:
  EnvelopeLayer(double dz, double dx, ProcessingConfig cfg);
  Tensor3 forward(const Tensor3& x) override;
  Tensor3 backward(const Tensor3& grad_out) override;

 private:
  double dz_, dx_;
  ProcessingConfig cfg_;
  EnvelopeSaved saved_;
};

class LogCompressLayer : public Layer {
 public:
  LogCompressLayer(double dz, double dx, ProcessingConfig cfg);
  Tensor3 forward(const Tensor3& x) override;
  Tensor3 backward(const Tensor3& grad_out) override;

 private:
  double dz_, dx_;
  ProcessingConfig cfg_;
  LogSaved saved_;
};

class UnitRangeLayer : public Layer {
 public:
  UnitRangeLayer(double dz, double dx, ProcessingConfig cfg);
  Tensor3 forward(const Tensor3& x) override;
  Tensor3 backward(const Tensor3& grad_out) override;

 private:
  double dz_, dx_;
  ProcessingConfig cfg_;
};

// One ResNet unit: stem conv, residual blocks with identity skips, and a
// head conv back to a single channel. The skip of the last block closes
// before the head conv so shapes match. Interior activations are ReLU; the
// caller appends the unit-final activation.
class ResNetUnit : public Layer {
 public:
  ResNetUnit(int channels, int kernel, int blocks, int convs, int groups,
             Rng& rng, const std::string& name);

  Tensor3 forward(const Tensor3& x) override;
  Tensor3 backward(const Tensor3& grad_out) override;
  void collect_params(std::vector<ParamView>& out) override;
  void zero_grad() override;

  // convs = 1 stem + blocks*convs_per_block, last conv maps back to 1 channel
  static int convs_per_block(int convs, int blocks);

 private:
  struct ConvGnRelu {
    std::unique_ptr<Conv2dWS> conv;
    std::unique_ptr<GroupNorm> gn;
    Activation act{Act::relu};

    Tensor3 forward(const Tensor3& x);
    Tensor3 backward(const Tensor3& g);
  };

  ConvGnRelu stem_;
  std::vector<std::vector<ConvGnRelu>> blocks_;  // last block holds K-1 convs
  std::unique_ptr<Conv2dWS> head_;
};

// ---------------------------------------------------------------- model

enum class ModelVariant { complete, pre_only, post_only };

const char* variant_name(ModelVariant v);
ModelVariant variant_from_name(const std::string& s);

struct ModelSpec {
  ModelVariant variant = ModelVariant::complete;
  int channels = 64;
  int kernel = 5;
  int blocks_per_resnet = 3;
  int convs_per_resnet = 16;  // per ResNet unit; solo variants stack 2 units
  int groups = 8;

  void validate() const;
};

class Model {
 public:
  Model(ModelSpec spec, MigrationPlan plan, ProcessingConfig cfg,
        std::uint64_t init_seed);

  // [1 x ne x ns] raw data -> [1 x nz x nx] image in [0, 1]
  Tensor3 forward(const Tensor3& data);
  Tensor3 backward(const Tensor3& grad_out);

  std::vector<ParamView> params();
  std::size_t param_count() const;
  void zero_grad();

  const ModelSpec& spec() const { return spec_; }
  const MigrationPlan& plan() const { return plan_; }
  const ProcessingConfig& processing() const { return cfg_; }
  std::uint64_t init_seed() const { return init_seed_; }

 private:
  ModelSpec spec_;
  MigrationPlan plan_;
  ProcessingConfig cfg_;
  std::uint64_t init_seed_;
  std::vector<std::unique_ptr<Layer>> layers_;
};

Model build_model(const ModelSpec& spec, const MigrationPlan& plan,
                  const ProcessingConfig& cfg, std::uint64_t init_seed);

// ---------------------------------------------------------------- checkpoint

// Text manifest + float32 little-endian parameter blob in declaration order.
void save_checkpoint(Model& model, int epoch, std::uint64_t run_seed,
                     const std::filesystem::path& path);

struct Checkpoint {
  ModelSpec spec;
  int epoch = 0;
  std::uint64_t run_seed = 0;
  std::vector<float> params;
};

Checkpoint read_checkpoint(const std::filesystem::path& path);

// Rebuild a model from a checkpoint against a migration plan/config.
Model load_model(const Checkpoint& ckpt, const MigrationPlan& plan,
                 const ProcessingConfig& cfg);

}  // namespace pwbeam
