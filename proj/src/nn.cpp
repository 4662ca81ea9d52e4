#include "pwbeam/nn.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "pwbeam/kernels.hpp"

namespace pwbeam {

// ---------------------------------------------------------------- tensor

Tensor3 mat_to_tensor(const Mat& m) {
  Tensor3 t(1, m.rows, m.cols);
  t.v = m.v;
  return t;
}

Mat tensor_to_mat(const Tensor3& t) {
  if (t.c != 1) throw ValidationError("tensor_to_mat: expected single channel");
  Mat m(t.h, t.w);
  m.v = t.v;
  return m;
}

// ---------------------------------------------------------------- conv

Conv2dWS::Conv2dWS(int c_in, int c_out, int kernel, Rng& rng, std::string name)
    : c_in_(c_in), c_out_(c_out), kernel_(kernel), pad_((kernel - 1) / 2),
      name_(std::move(name)) {
  if (c_in < 1 || c_out < 1) throw ValidationError("conv: bad channel counts");
  if (kernel < 1 || kernel % 2 == 0)
    throw ValidationError("conv: kernel must be odd");
  const std::size_t nw =
      static_cast<std::size_t>(c_out) * c_in * kernel * kernel;
  w_.resize(nw);
  gw_.assign(nw, 0.0);
  b_.assign(c_out, 0.0);
  gb_.assign(c_out, 0.0);
  // fan-in scaled uniform init
  const double bound =
      1.0 / std::sqrt(static_cast<double>(c_in) * kernel * kernel);
  for (double& x : w_) x = rng.uniform(-bound, bound);
}

Tensor3 Conv2dWS::forward(const Tensor3& x) {
  if (x.c != c_in_)
    throw ValidationError(name_ + ": input channel mismatch");
  const int H = x.h, W = x.w, k = kernel_, p = pad_;

  // weight standardization per output channel
  const std::size_t per_oc = static_cast<std::size_t>(c_in_) * k * k;
  w_hat_.resize(w_.size());
  inv_std_.resize(c_out_);
  for (int oc = 0; oc < c_out_; ++oc) {
    const double* wspan = w_.data() + oc * per_oc;
    double s, s2;
    kernels::sum_sumsq(wspan, per_oc, s, s2);
    const double n = static_cast<double>(per_oc);
    const double mean = s / n;
    const double var = std::max(0.0, s2 / n - mean * mean);
    const double inv = 1.0 / std::sqrt(var + kEps);
    inv_std_[oc] = inv;
    double* hspan = w_hat_.data() + oc * per_oc;
    for (std::size_t i = 0; i < per_oc; ++i)
      hspan[i] = (wspan[i] - mean) * inv;
  }
  x_saved_ = x;

  Tensor3 y(c_out_, H, W);
  for (int oc = 0; oc < c_out_; ++oc) {
    double* yp = y.plane(oc);
    const double bias = b_[oc];
    for (std::size_t i = 0; i < y.plane_size(); ++i) yp[i] = bias;
    for (int ic = 0; ic < c_in_; ++ic) {
      const double* wh =
          w_hat_.data() + (static_cast<std::size_t>(oc) * c_in_ + ic) * k * k;
      for (int u = 0; u < k; ++u) {
        const int i_lo = std::max(0, p - u);
        const int i_hi = std::min(H, H + p - u);
        for (int i = i_lo; i < i_hi; ++i) {
          const double* xrow = x.row(ic, i + u - p);
          double* yrow = y.row(oc, i);
          for (int v = 0; v < k; ++v) {
            const int d = v - p;
            const int j0 = std::max(0, -d);
            const int j1 = std::min(W, W - d);
            if (j1 > j0)
              kernels::axpy(yrow + j0, xrow + j0 + d, wh[u * k + v], j1 - j0);
          }
        }
      }
    }
  }
  return y;
}

Tensor3 Conv2dWS::backward(const Tensor3& gy) {
  const int H = x_saved_.h, W = x_saved_.w, k = kernel_, p = pad_;
  if (gy.c != c_out_ || gy.h != H || gy.w != W)
    throw ValidationError(name_ + ": gradient shape mismatch");

  for (int oc = 0; oc < c_out_; ++oc)
    gb_[oc] += kernels::sum(gy.plane(oc), gy.plane_size());

  const std::size_t per_oc = static_cast<std::size_t>(c_in_) * k * k;
  std::vector<double> ghat(w_.size(), 0.0);
  Tensor3 gx(c_in_, H, W);
  for (int oc = 0; oc < c_out_; ++oc) {
    for (int ic = 0; ic < c_in_; ++ic) {
      const std::size_t wbase =
          (static_cast<std::size_t>(oc) * c_in_ + ic) * k * k;
      for (int u = 0; u < k; ++u) {
        const int i_lo = std::max(0, p - u);
        const int i_hi = std::min(H, H + p - u);
        for (int i = i_lo; i < i_hi; ++i) {
          const double* xrow = x_saved_.row(ic, i + u - p);
          double* gxrow = gx.row(ic, i + u - p);
          const double* gyrow = gy.row(oc, i);
          for (int v = 0; v < k; ++v) {
            const int d = v - p;
            const int j0 = std::max(0, -d);
            const int j1 = std::min(W, W - d);
            if (j1 <= j0) continue;
            ghat[wbase + u * k + v] +=
                kernels::dot(gyrow + j0, xrow + j0 + d, j1 - j0);
            kernels::axpy(gxrow + j0 + d, gyrow + j0,
                          w_hat_[wbase + u * k + v], j1 - j0);
          }
        }
      }
    }
  }

  // back through the standardization:
  // gw = inv_std * (ghat - mean(ghat) - w_hat * mean(ghat .* w_hat))
  for (int oc = 0; oc < c_out_; ++oc) {
    const double* gh = ghat.data() + oc * per_oc;
    const double* wh = w_hat_.data() + oc * per_oc;
    double* gwspan = gw_.data() + oc * per_oc;
    const double n = static_cast<double>(per_oc);
    const double mg = kernels::sum(gh, per_oc) / n;
    const double mgw = kernels::dot(gh, wh, per_oc) / n;
    const double inv = inv_std_[oc];
    for (std::size_t i = 0; i < per_oc; ++i)
      gwspan[i] += inv * (gh[i] - mg - wh[i] * mgw);
  }
  return gx;
}

void Conv2dWS::collect_params(std::vector<ParamView>& out) {
  out.push_back({name_ + ".weight", &w_, &gw_});
  out.push_back({name_ + ".bias", &b_, &gb_});
}

void Conv2dWS::zero_grad() {
  std::fill(gw_.begin(), gw_.end(), 0.0);
  std::fill(gb_.begin(), gb_.end(), 0.0);
}

// ---------------------------------------------------------------- groupnorm

GroupNorm::GroupNorm(int channels, int groups, std::string name)
    : channels_(channels), groups_(groups), name_(std::move(name)) {
  if (groups < 1 || channels % groups != 0)
    throw ValidationError("group_norm: groups must divide channels");
  gamma_.assign(channels, 1.0);
  beta_.assign(channels, 0.0);
  ggamma_.assign(channels, 0.0);
  gbeta_.assign(channels, 0.0);
}

Tensor3 GroupNorm::forward(const Tensor3& x) {
  if (x.c != channels_)
    throw ValidationError(name_ + ": channel mismatch");
  const int cpg = channels_ / groups_;
  const std::size_t span = static_cast<std::size_t>(cpg) * x.plane_size();

  xhat_saved_ = Tensor3(x.c, x.h, x.w);
  inv_std_.resize(groups_);
  Tensor3 y(x.c, x.h, x.w);
  for (int g = 0; g < groups_; ++g) {
    const double* xs = x.plane(g * cpg);
    double s, s2;
    kernels::sum_sumsq(xs, span, s, s2);
    const double n = static_cast<double>(span);
    const double mean = s / n;
    const double var = std::max(0.0, s2 / n - mean * mean);
    const double inv = 1.0 / std::sqrt(var + kEps);
    inv_std_[g] = inv;
    double* xh = xhat_saved_.plane(g * cpg);
    for (std::size_t i = 0; i < span; ++i) xh[i] = (xs[i] - mean) * inv;
    for (int c = 0; c < cpg; ++c) {
      const int ch = g * cpg + c;
      const double* xhp = xhat_saved_.plane(ch);
      double* yp = y.plane(ch);
      const double ga = gamma_[ch], be = beta_[ch];
      for (std::size_t i = 0; i < x.plane_size(); ++i)
        yp[i] = ga * xhp[i] + be;
    }
  }
  return y;
}

Tensor3 GroupNorm::backward(const Tensor3& gy) {
  if (!gy.same_shape(xhat_saved_))
    throw ValidationError(name_ + ": gradient shape mismatch");
  const int cpg = channels_ / groups_;
  const std::size_t psize = gy.plane_size();
  const std::size_t span = static_cast<std::size_t>(cpg) * psize;

  Tensor3 gx(gy.c, gy.h, gy.w);
  std::vector<double> g1(span);
  for (int g = 0; g < groups_; ++g) {
    // per-channel affine gradients and g1 = gy * gamma
    for (int c = 0; c < cpg; ++c) {
      const int ch = g * cpg + c;
      const double* gyp = gy.plane(ch);
      const double* xhp = xhat_saved_.plane(ch);
      ggamma_[ch] += kernels::dot(gyp, xhp, psize);
      gbeta_[ch] += kernels::sum(gyp, psize);
      double* g1p = g1.data() + c * psize;
      for (std::size_t i = 0; i < psize; ++i) g1p[i] = gyp[i] * gamma_[ch];
    }
    const double* xh = xhat_saved_.plane(g * cpg);
    const double n = static_cast<double>(span);
    const double m1 = kernels::sum(g1.data(), span) / n;
    const double m2 = kernels::dot(g1.data(), xh, span) / n;
    const double inv = inv_std_[g];
    double* gxp = gx.plane(g * cpg);
    for (std::size_t i = 0; i < span; ++i)
      gxp[i] = inv * (g1[i] - m1 - xh[i] * m2);
  }
  return gx;
}

void GroupNorm::collect_params(std::vector<ParamView>& out) {
  out.push_back({name_ + ".gamma", &gamma_, &ggamma_});
  out.push_back({name_ + ".beta", &beta_, &gbeta_});
}

void GroupNorm::zero_grad() {
  std::fill(ggamma_.begin(), ggamma_.end(), 0.0);
  std::fill(gbeta_.begin(), gbeta_.end(), 0.0);
}

// ---------------------------------------------------------------- activation

Tensor3 Activation::forward(const Tensor3& x) {
  Tensor3 y(x.c, x.h, x.w);
  switch (kind_) {
    case Act::relu:
      kernels::relu_forward(y.v.data(), x.v.data(), x.size());
      saved_ = x;
      break;
    case Act::tanh:
      for (std::size_t i = 0; i < x.size(); ++i) y.v[i] = std::tanh(x.v[i]);
      saved_ = y;
      break;
    case Act::sigmoid:
      for (std::size_t i = 0; i < x.size(); ++i)
        y.v[i] = 1.0 / (1.0 + std::exp(-x.v[i]));
      saved_ = y;
      break;
  }
  return y;
}

Tensor3 Activation::backward(const Tensor3& gy) {
  if (!gy.same_shape(saved_))
    throw ValidationError("activation: gradient shape mismatch");
  Tensor3 gx(gy.c, gy.h, gy.w);
  switch (kind_) {
    case Act::relu:
      kernels::relu_backward(gx.v.data(), gy.v.data(), saved_.v.data(),
                             gy.size());
      break;
    case Act::tanh:
      for (std::size_t i = 0; i < gy.size(); ++i) {
        const double y = saved_.v[i];
        gx.v[i] = gy.v[i] * (1.0 - y * y);
      }
      break;
    case Act::sigmoid:
      for (std::size_t i = 0; i < gy.size(); ++i) {
        const double y = saved_.v[i];
        gx.v[i] = gy.v[i] * y * (1.0 - y);
      }
      break;
  }
  return gx;
}

// ---------------------------------------------------------------- migration

MigrationLayer::MigrationLayer(MigrationPlan plan, int angle_index)
    : plan_(std::move(plan)), angle_index_(angle_index) {}

Tensor3 MigrationLayer::forward(const Tensor3& x) {
  return mat_to_tensor(migrate_data(tensor_to_mat(x), angle_index_, plan_));
}

Tensor3 MigrationLayer::backward(const Tensor3& gy) {
  return mat_to_tensor(migrate_adjoint(tensor_to_mat(gy), angle_index_, plan_));
}

// ---------------------------------------------------------------- us chain

namespace {

BeamformedImage wrap_image(const Tensor3& t, double dz, double dx, Stage st,
                           double dr = 0.0) {
  BeamformedImage img;
  img.pixels = tensor_to_mat(t);
  img.dz = dz;
  img.dx = dx;
  img.stage = st;
  img.dynamic_range = dr;
  return img;
}

}  // namespace

EnvelopeLayer::EnvelopeLayer(double dz, double dx, ProcessingConfig cfg)
    : dz_(dz), dx_(dx), cfg_(cfg) {}

Tensor3 EnvelopeLayer::forward(const Tensor3& x) {
  BeamformedImage out =
      envelope(wrap_image(x, dz_, dx_, Stage::migrated), &saved_);
  return mat_to_tensor(out.pixels);
}

Tensor3 EnvelopeLayer::backward(const Tensor3& gy) {
  return mat_to_tensor(envelope_backward(tensor_to_mat(gy), saved_, cfg_));
}

LogCompressLayer::LogCompressLayer(double dz, double dx, ProcessingConfig cfg)
    : dz_(dz), dx_(dx), cfg_(cfg) {}

Tensor3 LogCompressLayer::forward(const Tensor3& x) {
  BeamformedImage out =
      log_compress(wrap_image(x, dz_, dx_, Stage::envelope), cfg_, &saved_);
  return mat_to_tensor(out.pixels);
}

Tensor3 LogCompressLayer::backward(const Tensor3& gy) {
  return mat_to_tensor(log_compress_backward(tensor_to_mat(gy), saved_));
}

UnitRangeLayer::UnitRangeLayer(double dz, double dx, ProcessingConfig cfg)
    : dz_(dz), dx_(dx), cfg_(cfg) {}

Tensor3 UnitRangeLayer::forward(const Tensor3& x) {
  BeamformedImage out = to_unit_range(
      wrap_image(x, dz_, dx_, Stage::log_db, cfg_.dynamic_range), cfg_);
  return mat_to_tensor(out.pixels);
}

Tensor3 UnitRangeLayer::backward(const Tensor3& gy) {
  return mat_to_tensor(to_unit_range_backward(tensor_to_mat(gy), cfg_));
}

// ---------------------------------------------------------------- resnet

Tensor3 ResNetUnit::ConvGnRelu::forward(const Tensor3& x) {
  Tensor3 y = conv->forward(x);
  if (gn) y = gn->forward(y);
  return act.forward(y);
}

Tensor3 ResNetUnit::ConvGnRelu::backward(const Tensor3& g) {
  Tensor3 gb = act.backward(g);
  if (gn) gb = gn->backward(gb);
  return conv->backward(gb);
}

int ResNetUnit::convs_per_block(int convs, int blocks) {
  if (blocks < 1) throw ValidationError("resnet: blocks must be >= 1");
  if (convs < 2 || (convs - 1) % blocks != 0)
    throw ValidationError(
        "resnet: convs must be 1 (stem) + blocks * convs_per_block");
  return (convs - 1) / blocks;
}

ResNetUnit::ResNetUnit(int channels, int kernel, int blocks, int convs,
                       int groups, Rng& rng, const std::string& name) {
  const int per_block = convs_per_block(convs, blocks);
  stem_.conv = std::make_unique<Conv2dWS>(1, channels, kernel, rng,
                                          name + ".stem");
  stem_.gn = std::make_unique<GroupNorm>(channels, groups, name + ".stem.gn");

  blocks_.resize(blocks);
  for (int b = 0; b < blocks; ++b) {
    // the last block gives up its final conv slot to the head
    const int n = (b == blocks - 1) ? per_block - 1 : per_block;
    for (int i = 0; i < n; ++i) {
      ConvGnRelu cu;
      const std::string cname =
          name + ".b" + std::to_string(b) + ".c" + std::to_string(i);
      cu.conv = std::make_unique<Conv2dWS>(channels, channels, kernel, rng,
                                           cname);
      cu.gn = std::make_unique<GroupNorm>(channels, groups, cname + ".gn");
      blocks_[b].push_back(std::move(cu));
    }
  }
  head_ = std::make_unique<Conv2dWS>(channels, 1, kernel, rng, name + ".head");
}

Tensor3 ResNetUnit::forward(const Tensor3& x) {
  Tensor3 cur = stem_.forward(x);
  for (auto& block : blocks_) {
    Tensor3 inp = cur;
    for (auto& cu : block) cur = cu.forward(cur);
    for (std::size_t i = 0; i < cur.size(); ++i) cur.v[i] += inp.v[i];
  }
  return head_->forward(cur);
}

Tensor3 ResNetUnit::backward(const Tensor3& grad_out) {
  Tensor3 g = head_->backward(grad_out);
  for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) {
    Tensor3 gb = g;
    for (auto cu = it->rbegin(); cu != it->rend(); ++cu)
      gb = cu->backward(gb);
    for (std::size_t i = 0; i < g.size(); ++i) g.v[i] += gb.v[i];
  }
  return stem_.backward(g);
}

void ResNetUnit::collect_params(std::vector<ParamView>& out) {
  stem_.conv->collect_params(out);
  stem_.gn->collect_params(out);
  for (auto& block : blocks_) {
    for (auto& cu : block) {
      cu.conv->collect_params(out);
      cu.gn->collect_params(out);
    }
  }
  head_->collect_params(out);
}

void ResNetUnit::zero_grad() {
  stem_.conv->zero_grad();
  stem_.gn->zero_grad();
  for (auto& block : blocks_) {
    for (auto& cu : block) {
      cu.conv->zero_grad();
      cu.gn->zero_grad();
    }
  }
  head_->zero_grad();
}

// ---------------------------------------------------------------- model

const char* variant_name(ModelVariant v) {
  switch (v) {
    case ModelVariant::complete: return "complete";
    case ModelVariant::pre_only: return "pre";
    case ModelVariant::post_only: return "post";
  }
  return "?";
}

ModelVariant variant_from_name(const std::string& s) {
  if (s == "complete") return ModelVariant::complete;
  if (s == "pre" || s == "pre_only") return ModelVariant::pre_only;
  if (s == "post" || s == "post_only") return ModelVariant::post_only;
  throw ValidationError("unknown model variant: " + s);
}

void ModelSpec::validate() const {
  if (channels < 1) throw ValidationError("model: channels must be >= 1");
  if (kernel < 1 || kernel % 2 == 0)
    throw ValidationError("model: kernel must be odd");
  if (groups < 1 || channels % groups != 0)
    throw ValidationError("model: groups must divide channels");
  ResNetUnit::convs_per_block(convs_per_resnet, blocks_per_resnet);
}

Model::Model(ModelSpec spec, MigrationPlan plan, ProcessingConfig cfg,
             std::uint64_t init_seed)
    : spec_(spec), plan_(std::move(plan)), cfg_(cfg), init_seed_(init_seed) {
  spec_.validate();
  cfg_.validate();
  Rng rng(init_seed);
  const int zero_idx = plan_.acq.zero_angle_index();

  auto add_unit = [&](const std::string& name) {
    layers_.push_back(std::make_unique<ResNetUnit>(
        spec_.channels, spec_.kernel, spec_.blocks_per_resnet,
        spec_.convs_per_resnet, spec_.groups, rng, name));
  };
  auto add_migration_chain = [&]() {
    layers_.push_back(std::make_unique<MigrationLayer>(plan_, zero_idx));
    layers_.push_back(std::make_unique<EnvelopeLayer>(plan_.dz, plan_.dx, cfg_));
    layers_.push_back(
        std::make_unique<LogCompressLayer>(plan_.dz, plan_.dx, cfg_));
    layers_.push_back(
        std::make_unique<UnitRangeLayer>(plan_.dz, plan_.dx, cfg_));
  };

  switch (spec_.variant) {
    case ModelVariant::complete:
      add_unit("pre0");
      layers_.push_back(std::make_unique<Activation>(Act::tanh));
      add_migration_chain();
      add_unit("post0");
      layers_.push_back(std::make_unique<Activation>(Act::sigmoid));
      break;
    case ModelVariant::pre_only:
      // twice-as-deep data-domain network
      add_unit("pre0");
      layers_.push_back(std::make_unique<Activation>(Act::relu));
      add_unit("pre1");
      layers_.push_back(std::make_unique<Activation>(Act::tanh));
      add_migration_chain();
      break;
    case ModelVariant::post_only:
      add_migration_chain();
      add_unit("post0");
      layers_.push_back(std::make_unique<Activation>(Act::relu));
      add_unit("post1");
      layers_.push_back(std::make_unique<Activation>(Act::sigmoid));
      break;
  }
}

Tensor3 Model::forward(const Tensor3& data) {
  Tensor3 cur = data;
  for (auto& layer : layers_) cur = layer->forward(cur);
  return cur;
}

Tensor3 Model::backward(const Tensor3& grad_out) {
  Tensor3 g = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
    g = (*it)->backward(g);
  return g;
}

std::vector<ParamView> Model::params() {
  std::vector<ParamView> out;
  for (auto& layer : layers_) layer->collect_params(out);
  return out;
}

std::size_t Model::param_count() const {
  std::size_t n = 0;
  for (auto& layer : layers_) {
    std::vector<ParamView> views;
    layer->collect_params(views);
    for (const ParamView& p : views) n += p.value->size();
  }
  return n;
}

void Model::zero_grad() {
  for (auto& layer : layers_) layer->zero_grad();
}

Model build_model(const ModelSpec& spec, const MigrationPlan& plan,
                  const ProcessingConfig& cfg, std::uint64_t init_seed) {
  return Model(spec, plan, cfg, init_seed);
}

// ---------------------------------------------------------------- checkpoint

void save_checkpoint(Model& model, int epoch, std::uint64_t run_seed,
                     const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("checkpoint: cannot open " + path.string());
  const ModelSpec& s = model.spec();
  const std::size_t n = model.param_count();
  os << "version=1\n";
  os << "variant=" << variant_name(s.variant) << "\n";
  os << "channels=" << s.channels << "\n";
  os << "kernel=" << s.kernel << "\n";
  os << "blocks_per_resnet=" << s.blocks_per_resnet << "\n";
  os << "convs_per_resnet=" << s.convs_per_resnet << "\n";
  os << "groups=" << s.groups << "\n";
  os << "epoch=" << epoch << "\n";
  os << "run_seed=" << run_seed << "\n";
  os << "init=fan_in_uniform,ws_eps=1e-5,gn_eps=1e-5\n";
  os << "param_count=" << n << "\n";
  // AMSGrad keeps three moment buffers of the same shape as the parameters
  os << "opt_state_dims=" << n << "," << n << "," << n << "\n";
  os << "\n";
  std::vector<float> buf;
  buf.reserve(n);
  for (const ParamView& p : model.params())
    for (double x : *p.value) buf.push_back(static_cast<float>(x));
  os.write(reinterpret_cast<const char*>(buf.data()),
           static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("checkpoint: cannot open " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  bool blank = false;
  while (std::getline(is, line)) {
    if (line.empty()) {
      blank = true;
      break;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw FormatError("checkpoint: malformed line: " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  if (!blank) throw FormatError("checkpoint: missing blank line");
  auto need = [&](const char* k) {
    auto it = kv.find(k);
    if (it == kv.end())
      throw FormatError(std::string("checkpoint: missing key ") + k);
    return it->second;
  };
  Checkpoint c;
  c.spec.variant = variant_from_name(need("variant"));
  c.spec.channels = std::stoi(need("channels"));
  c.spec.kernel = std::stoi(need("kernel"));
  c.spec.blocks_per_resnet = std::stoi(need("blocks_per_resnet"));
  c.spec.convs_per_resnet = std::stoi(need("convs_per_resnet"));
  c.spec.groups = std::stoi(need("groups"));
  c.epoch = std::stoi(need("epoch"));
  c.run_seed = std::stoull(need("run_seed"));
  const std::size_t n = std::stoull(need("param_count"));
  c.params.resize(n);
  is.read(reinterpret_cast<char*>(c.params.data()),
          static_cast<std::streamsize>(n * sizeof(float)));
  if (static_cast<std::size_t>(is.gcount()) != n * sizeof(float))
    throw FormatError("checkpoint: parameter blob truncated");
  return c;
}

Model load_model(const Checkpoint& ckpt, const MigrationPlan& plan,
                 const ProcessingConfig& cfg) {
  Model model(ckpt.spec, plan, cfg, /*init_seed=*/0);
  if (model.param_count() != ckpt.params.size())
    throw FormatError("checkpoint: parameter count mismatch");
  std::size_t off = 0;
  for (ParamView p : model.params()) {
    for (double& x : *p.value) x = ckpt.params[off++];
  }
  return model;
}

}  // namespace pwbeam
