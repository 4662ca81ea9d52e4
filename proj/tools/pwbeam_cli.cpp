// pwbeam: plane-wave ultrasound simulation, beamforming, training and
// evaluation from the command line.
//
// Exit codes: 0 success, 2 usage error, 3 data/validation error,
// 4 numerical failure.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <thread>

#include "CLI11.hpp"
#include "pwbeam/core.hpp"
#include "pwbeam/fk.hpp"
#include "pwbeam/imgproc.hpp"
#include "pwbeam/kernels.hpp"
#include "pwbeam/metrics.hpp"
#include "pwbeam/nn.hpp"
#include "pwbeam/pipeline.hpp"
#include "pwbeam/sim.hpp"
#include "pwbeam/train.hpp"

namespace fs = std::filesystem;
using namespace pwbeam;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct GlobalFlags {
  int threads = 1;
  bool deterministic = false;
};

// fn(worker, index); indices are sharded round-robin over workers so the
// result layout is independent of scheduling
void run_parallel(int n, int threads,
                  const std::function<void(int, int)>& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(0, i);
    return;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      for (int i = t; i < n; i += threads) fn(t, i);
    });
  }
  for (auto& th : pool) th.join();
}

void write_manifest(const fs::path& path,
                    const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ofstream os(path);
  if (!os) throw FormatError("manifest: cannot open " + path.string());
  for (const auto& [k, v] : kv) os << k << "=" << v << "\n";
}

// ------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string phantom = "cyst";
  std::string phantom_file;  // overrides --phantom when set
  std::string out_dir;
  int num_samples = 1;
  int num_angles = 75;
  double angle_span_deg = 16.0;
  std::uint64_t seed = 0;
  int elements = 64;
  double pitch_mm = 0.3;
  double fs_mhz = 31.2;
  double f0_mhz = 7.8;
  double sound_speed = 1540.0;
  double depth_mm = 20.0;
  double z_min_mm = 5.0;
  double density = 20.0;
  double contrast_db = -30.0;
  double lesion_radius_mm = 3.0;
  double dynamic_range = 60.0;
  double noise_rms = 0.0;  // receive noise, fraction of signal RMS
};

AcquisitionParams simulate_acq(const SimulateArgs& a,
                               const ProbeGeometry& geom) {
  AcquisitionParams acq;
  acq.sampling_freq = a.fs_mhz * 1e6;
  acq.center_freq = a.f0_mhz * 1e6;
  acq.sound_speed = a.sound_speed;
  acq.t0 = 0.0;
  acq.angles = AcquisitionParams::uniform_angles(a.num_angles,
                                                 a.angle_span_deg * kDeg);
  // recording window: worst-case two-way time over the region and angles
  const double z_max = (a.z_min_mm + a.depth_mm) * 1e-3;
  const double half_width = geom.aperture() / 2 + 2e-3;
  const double span = a.angle_span_deg * kDeg;
  const double t_tx = (z_max + half_width * std::sin(span)) / a.sound_speed;
  const double t_rx = std::hypot(z_max, 2 * half_width) / a.sound_speed;
  const double guard = 1e-6;
  acq.num_samples = std::max(
      64, static_cast<int>(std::ceil((t_tx + t_rx + guard) * acq.sampling_freq)));
  return acq;
}

LesionClass class_of_lesions(const PhantomSpec& spec) {
  if (spec.kind == PhantomKind::wires) return LesionClass::normal;
  bool hyper = false, hypo = false;
  for (const LesionSpec& l : spec.lesions) (l.contrast_db >= 0 ? hyper : hypo) = true;
  if (hyper && hypo) return LesionClass::mixed;
  if (hyper) return LesionClass::hyperechoic;
  if (hypo) return LesionClass::hypoechoic;
  return LesionClass::normal;
}

PhantomSpec phantom_for(const SimulateArgs& a, int index, LesionClass& cls) {
  if (!a.phantom_file.empty()) {
    PhantomSpec spec = read_phantom_spec(a.phantom_file);
    spec.rng_seed += static_cast<std::uint64_t>(index);
    cls = class_of_lesions(spec);
    return spec;
  }
  PhantomSpec spec;
  spec.width = 0.8 * (a.elements * a.pitch_mm * 1e-3);
  spec.depth = a.depth_mm * 1e-3;
  spec.z_min = a.z_min_mm * 1e-3;
  spec.density = a.density;
  spec.rng_seed = a.seed + static_cast<std::uint64_t>(index);
  Rng jitter(spec.rng_seed ^ 0xa5a5a5a5ULL);
  const double cz0 = spec.z_min + spec.depth / 2;
  const double r = a.lesion_radius_mm * 1e-3;
  const double jx = jitter.uniform(-1e-3, 1e-3);
  const double jz = jitter.uniform(-1e-3, 1e-3);

  if (a.phantom == "cyst") {
    spec.kind = PhantomKind::cyst;
    spec.lesions = {{jx, cz0 + jz, r, a.contrast_db}};
    cls = a.contrast_db < 0 ? LesionClass::hypoechoic
                            : LesionClass::hyperechoic;
  } else if (a.phantom == "lesions" || a.phantom == "speckle_lesions") {
    spec.kind = PhantomKind::speckle_lesions;
    switch (index % 4) {
      case 0:
        spec.lesions = {{jx, cz0 + jz, r, 6.0}};
        cls = LesionClass::hyperechoic;
        break;
      case 1:
        spec.lesions = {{jx, cz0 + jz, r, -6.0}};
        cls = LesionClass::hypoechoic;
        break;
      case 2:
        spec.lesions = {};
        cls = LesionClass::normal;
        break;
      default:
        spec.lesions = {{jx - r, cz0 + jz, 0.6 * r, 6.0},
                        {jx + r, cz0 + jz, 0.6 * r, -6.0}};
        cls = LesionClass::mixed;
        break;
    }
  } else if (a.phantom == "wires") {
    spec.kind = PhantomKind::wires;
    for (double frac : {0.25, 0.5, 0.75})
      spec.wire_positions.emplace_back(0.0, spec.z_min + frac * spec.depth);
    cls = LesionClass::normal;
  } else {
    throw CLI::ValidationError("--phantom",
                               "unknown phantom kind: " + a.phantom);
  }
  return spec;
}

int cmd_simulate(const SimulateArgs& a, const GlobalFlags& g) {
  const ProbeGeometry geom =
      ProbeGeometry::linear_array(a.elements, a.pitch_mm * 1e-3);
  const AcquisitionParams acq = simulate_acq(a, geom);
  ProcessingConfig cfg;
  cfg.dynamic_range = a.dynamic_range;

  fs::create_directories(a.out_dir);
  std::vector<std::string> files(a.num_samples);
  const int threads = g.deterministic ? 1 : g.threads;
  run_parallel(a.num_samples, threads, [&](int, int i) {
    LesionClass cls = LesionClass::normal;
    PhantomSpec spec = phantom_for(a, i, cls);
    DataSample sample =
        simulate_sample(make_phantom(spec), geom, acq, cls, cfg, PulseModel{},
                        a.noise_rms, spec.rng_seed);
    char name[32];
    std::snprintf(name, sizeof(name), "sample_%04d.pwc", i);
    write_container(sample, fs::path(a.out_dir) / name);
    files[i] = name;
  });

  std::vector<std::pair<std::string, std::string>> kv = {
      {"command", "simulate"},
      {"phantom", a.phantom},
      {"num_samples", std::to_string(a.num_samples)},
      {"angles", std::to_string(a.num_angles)},
      {"angle_span_deg", format_double(a.angle_span_deg)},
      {"seed", std::to_string(a.seed)},
      {"elements", std::to_string(a.elements)},
      {"pitch_mm", format_double(a.pitch_mm)},
      {"sampling_freq_mhz", format_double(a.fs_mhz)},
      {"center_freq_mhz", format_double(a.f0_mhz)},
      {"sound_speed_mps", format_double(a.sound_speed)},
      {"num_time_samples", std::to_string(acq.num_samples)},
      {"depth_mm", format_double(a.depth_mm)},
      {"z_min_mm", format_double(a.z_min_mm)},
      {"density_per_mm2", format_double(a.density)},
      {"contrast_db", format_double(a.contrast_db)},
      {"lesion_radius_mm", format_double(a.lesion_radius_mm)},
      {"dynamic_range_db", format_double(a.dynamic_range)},
      {"noise_rms", format_double(a.noise_rms)},
      {"threads", std::to_string(threads)},
      {"deterministic", g.deterministic ? "1" : "0"},
  };
  for (int i = 0; i < a.num_samples; ++i)
    kv.emplace_back("file_" + std::to_string(i), files[i]);
  write_manifest(fs::path(a.out_dir) / "manifest.txt", kv);
  std::cout << "wrote " << a.num_samples << " container(s) to " << a.out_dir
            << "\n";
  return 0;
}

// ------------------------------------------------------------- beamform

struct BeamformArgs {
  std::string input;
  std::string angles = "single";
  std::string out_image;
  std::string interp = "linear";
};

int cmd_beamform(const BeamformArgs& a) {
  DataSample sample = read_container(a.input);
  const Interp interp =
      a.interp == "spline" ? Interp::spline : Interp::linear;
  MigrationPlan plan = MigrationPlan::create(sample.geom, sample.acq, interp);
  ProcessingConfig cfg;
  if (sample.target) cfg.dynamic_range = sample.target->dynamic_range;

  BeamformedImage img;
  if (a.angles == "single") {
    img = beamform_single(sample, plan, cfg);
  } else if (a.angles == "all") {
    img = beamform_compound(sample, plan, cfg);
  } else {
    throw CLI::ValidationError("--angles", "expected single or all");
  }
  write_pgm(img, a.out_image);

  write_manifest(fs::path(a.out_image).string() + ".manifest", {
      {"command", "beamform"},
      {"input", a.input},
      {"angles", a.angles},
      {"interp", a.interp},
      {"out", a.out_image},
      {"nz", std::to_string(img.pixels.rows)},
      {"nx", std::to_string(img.pixels.cols)},
      {"dz_m", format_double(img.dz)},
      {"dx_m", format_double(img.dx)},
      {"dynamic_range_db", format_double(img.dynamic_range)},
  });
  std::cout << "wrote " << a.out_image << "\n";
  return 0;
}

// ------------------------------------------------------------- train

struct TrainArgs {
  std::string data_dir;
  std::string model = "complete";
  double fraction = 1.0;
  std::uint64_t seed = 0;
  int epochs = 70;
  double lr = 0.01;
  std::string out_ckpt;
  double test_fraction = 0.2;
  int channels = 64;
  int kernel = 5;
  int blocks = 3;
  int convs = 16;
  int groups = 8;
};

int cmd_train(const TrainArgs& a, const GlobalFlags& g) {
  Dataset ds = load_dataset(a.data_dir);
  Split split = split_train_test(ds, a.test_fraction);
  std::vector<TrainItem> train_items;
  for (int idx : split.train) train_items.push_back(ds.items[idx]);

  MigrationPlan plan = MigrationPlan::create(ds.geom, ds.acq);
  ProcessingConfig cfg;
  cfg.dynamic_range = ds.dynamic_range;

  ModelSpec spec;
  spec.variant = variant_from_name(a.model);
  spec.channels = a.channels;
  spec.kernel = a.kernel;
  spec.blocks_per_resnet = a.blocks;
  spec.convs_per_resnet = a.convs;
  spec.groups = a.groups;

  TrainConfig tc;
  tc.epochs = a.epochs;
  tc.lr = a.lr;
  tc.fraction = a.fraction;
  tc.seed = a.seed;

  Model model(spec, plan, cfg, a.seed);
  TrainRun run = train(model, train_items, tc);
  save_checkpoint(model, static_cast<int>(run.history.size()), a.seed,
                  a.out_ckpt);
  write_run_manifest(fs::path(a.out_ckpt).string() + ".manifest", tc, run);
  {
    std::ofstream os(fs::path(a.out_ckpt).string() + ".manifest",
                     std::ios::app);
    os << "command=train\n";
    os << "data=" << a.data_dir << "\n";
    os << "model=" << a.model << "\n";
    os << "channels=" << a.channels << "\n";
    os << "kernel=" << a.kernel << "\n";
    os << "blocks=" << a.blocks << "\n";
    os << "convs=" << a.convs << "\n";
    os << "groups=" << a.groups << "\n";
    os << "test_fraction=" << format_double(a.test_fraction) << "\n";
    os << "train_pool=" << split.train.size() << "\n";
    os << "deterministic=" << (g.deterministic ? 1 : 0) << "\n";
  }

  std::cout << "trained " << a.model << " on " << run.subset_ids.size()
            << " of " << split.train.size() << " training samples ("
            << run.history.size() << " epochs)\n";
  if (!run.history.empty())
    std::cout << "first-epoch loss " << run.history.front()
              << ", final loss " << run.history.back() << "\n";
  if (run.diverged) {
    std::cerr << "training diverged; checkpoint holds the last good epoch\n";
    return 4;
  }
  return 0;
}

// ------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string ckpt;
  std::string data_dir;
  std::string roi_file;
  std::string report;
  double test_fraction = 0.2;
};

void add_global_rows(MetricReport& rep, const std::string& sample,
                     const std::string& subject, const Mat& img,
                     const Mat& target) {
  rep.add(sample, subject, "l1", "normalized", l1_metric(img, target));
  rep.add(sample, subject, "l2", "normalized", l2_metric(img, target));
  rep.add(sample, subject, "psnr", "normalized", psnr_metric(img, target));
  rep.add(sample, subject, "ncc", "normalized", ncc_metric(img, target));
}

void add_roi_rows(MetricReport& rep, const std::string& sample,
                  const std::string& subject, const Mat& img,
                  const std::vector<RoiFileEntry>& rois, double dz, double dx,
                  double dynamic_range) {
  int lesion_idx = 0, wire_idx = 0;
  for (const RoiFileEntry& e : rois) {
    if (e.kind == RoiFileEntry::Kind::lesion) {
      const std::string name = "roi" + std::to_string(lesion_idx++);
      RoiMask roi = make_lesion_roi(img.rows, img.cols, dz, dx, e.x_mm * 1e-3,
                                    e.z_mm * 1e-3, e.radius_mm * 1e-3);
      const Mat linear = normalized_to_linear(img, dynamic_range);
      rep.add(sample, subject, name + "_cr_db", "linear", cr_db(roi, linear));
      rep.add(sample, subject, name + "_cnr_db", "linear",
              cnr_db(roi, linear));
      rep.add(sample, subject, name + "_gcnr", "linear", gcnr(roi, linear));
      // the same statistics on the display scale, for transparency
      rep.add(sample, subject, name + "_cnr_db", "normalized",
              cnr_db(roi, img));
      rep.add(sample, subject, name + "_gcnr", "normalized", gcnr(roi, img));
    } else {
      const std::string name = "wire" + std::to_string(wire_idx++);
      const double half = e.radius_mm * 1e-3;
      WireRoi roi;
      roi.z0 = std::max(0, static_cast<int>((e.z_mm * 1e-3 - half) / dz));
      roi.z1 = std::min(img.rows,
                        static_cast<int>((e.z_mm * 1e-3 + half) / dz) + 1);
      const double x_center = 0.5 * (img.cols - 1);
      roi.x0 = std::max(
          0, static_cast<int>(x_center + (e.x_mm * 1e-3 - half) / dx));
      roi.x1 = std::min(
          img.cols, static_cast<int>(x_center + (e.x_mm * 1e-3 + half) / dx) + 1);
      for (ProfileAxis axis : {ProfileAxis::axial, ProfileAxis::lateral}) {
        const char* ax = axis == ProfileAxis::axial ? "axial" : "lateral";
        FwhmResult r = fwhm_metric(roi, img, axis,
                                   axis == ProfileAxis::axial ? dz : dx);
        if (r.converged) {
          rep.add(sample, subject, name + std::string("_fwhm_") + ax + "_mm",
                  "normalized", r.fwhm * 1e3);
        } else {
          rep.add(sample, subject,
                  name + std::string("_fwhm_") + ax + "_fit_failed",
                  "normalized", r.residual);
        }
      }
    }
  }
}

int cmd_evaluate(const EvaluateArgs& a, const GlobalFlags& g) {
  Dataset ds = load_dataset(a.data_dir);
  Split split = split_train_test(ds, a.test_fraction);

  MigrationPlan plan = MigrationPlan::create(ds.geom, ds.acq);
  ProcessingConfig cfg;
  cfg.dynamic_range = ds.dynamic_range;

  Checkpoint ckpt = read_checkpoint(a.ckpt);
  Model model = load_model(ckpt, plan, cfg);

  std::vector<RoiFileEntry> rois;
  if (!a.roi_file.empty()) rois = read_roi_file(a.roi_file);

  const int n = static_cast<int>(split.test.size());
  std::vector<MetricReport> parts(n);
  const int threads =
      g.deterministic ? 1 : std::max(1, std::min(g.threads, n));
  // models keep mutable forward caches, so each worker gets its own copy
  std::vector<std::unique_ptr<Model>> workers;
  workers.push_back(std::make_unique<Model>(std::move(model)));
  for (int t = 1; t < threads; ++t)
    workers.push_back(std::make_unique<Model>(load_model(ckpt, plan, cfg)));
  run_parallel(n, threads, [&](int worker, int i) {
    const TrainItem& item = ds.items[split.test[i]];
    RFFrame f;
    f.data = item.rf0;
    Tensor3 out = workers[worker]->forward(mat_to_tensor(normalize_rf(f).data));
    Mat model_img = tensor_to_mat(out);

    BeamformedImage baseline;
    {
      DataSample s;  // rebuild minimal sample for the single-angle baseline
      s.geom = ds.geom;
      s.acq = ds.acq;
      RFFrame zf;
      zf.angle_index = ds.acq.zero_angle_index();
      zf.data = item.rf0;
      s.frames.resize(ds.acq.angles.size());
      for (std::size_t k = 0; k < s.frames.size(); ++k) {
        s.frames[k].angle_index = static_cast<int>(k);
        s.frames[k].data = Mat(ds.geom.num_elements, ds.acq.num_samples);
      }
      s.frames[zf.angle_index] = zf;
      baseline = beamform_single(s, plan, cfg);
    }

    if (model_img.rows != item.target.rows ||
        model_img.cols != item.target.cols)
      throw ValidationError("evaluate: model output grid mismatch vs target");

    MetricReport& rep = parts[i];
    add_global_rows(rep, item.id, "model", model_img, item.target);
    add_global_rows(rep, item.id, "baseline", baseline.pixels, item.target);
    if (!rois.empty()) {
      add_roi_rows(rep, item.id, "model", model_img, rois, plan.dz, plan.dx,
                   cfg.dynamic_range);
      add_roi_rows(rep, item.id, "baseline", baseline.pixels, rois, plan.dz,
                   plan.dx, cfg.dynamic_range);
      add_roi_rows(rep, item.id, "target", item.target, rois, plan.dz,
                   plan.dx, cfg.dynamic_range);
    }
  });

  MetricReport rep;
  for (MetricReport& p : parts)
    for (MetricRow& r : p.rows) rep.rows.push_back(std::move(r));
  rep.write(a.report);
  write_manifest(fs::path(a.report).string() + ".manifest", {
      {"command", "evaluate"},
      {"ckpt", a.ckpt},
      {"data", a.data_dir},
      {"roi", a.roi_file},
      {"test_fraction", format_double(a.test_fraction)},
      {"test_samples", std::to_string(n)},
      {"threads", std::to_string(threads)},
      {"deterministic", g.deterministic ? "1" : "0"},
  });
  std::cout << "evaluated " << n << " held-out sample(s), report at "
            << a.report << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"plane-wave ultrasound beamforming and learning toolkit"};
  app.require_subcommand(1);

  GlobalFlags g;
  app.add_option("--threads", g.threads, "worker threads for per-sample work");
  app.add_flag("--deterministic", g.deterministic,
               "force single-threaded, bit-reproducible runs");

  SimulateArgs sa;
  CLI::App* sim = app.add_subcommand("simulate", "generate synthetic datasets");
  sim->add_option("--phantom", sa.phantom, "cyst | lesions | wires");
  sim->add_option("--phantom-file", sa.phantom_file,
                  "phantom description file (overrides --phantom)");
  sim->add_option("--out", sa.out_dir, "output directory")->required();
  sim->add_option("--num-samples", sa.num_samples, "number of containers");
  sim->add_option("--angles", sa.num_angles, "number of steering angles");
  sim->add_option("--angle-span", sa.angle_span_deg, "half span in degrees");
  sim->add_option("--seed", sa.seed, "rng seed");
  sim->add_option("--elements", sa.elements, "probe elements");
  sim->add_option("--pitch-mm", sa.pitch_mm, "element pitch [mm]");
  sim->add_option("--fs-mhz", sa.fs_mhz, "sampling frequency [MHz]");
  sim->add_option("--f0-mhz", sa.f0_mhz, "center frequency [MHz]");
  sim->add_option("--sound-speed", sa.sound_speed, "speed of sound [m/s]");
  sim->add_option("--depth-mm", sa.depth_mm, "phantom depth extent [mm]");
  sim->add_option("--z-min-mm", sa.z_min_mm, "phantom start depth [mm]");
  sim->add_option("--density", sa.density, "scatterers per mm^2");
  sim->add_option("--contrast-db", sa.contrast_db, "cyst contrast [dB]");
  sim->add_option("--lesion-radius-mm", sa.lesion_radius_mm,
                  "lesion radius [mm]");
  sim->add_option("--dynamic-range", sa.dynamic_range, "display range [dB]");
  sim->add_option("--noise-rms", sa.noise_rms,
                  "receive noise as a fraction of signal RMS");

  BeamformArgs ba;
  CLI::App* bf = app.add_subcommand("beamform", "reconstruct one container");
  bf->add_option("--in", ba.input, "container file")->required();
  bf->add_option("--angles", ba.angles, "single | all");
  bf->add_option("--out", ba.out_image, "output PGM image")->required();
  bf->add_option("--interp", ba.interp, "linear | spline");

  TrainArgs ta;
  CLI::App* tr = app.add_subcommand("train", "train a model variant");
  tr->add_option("--data", ta.data_dir, "dataset directory")->required();
  tr->add_option("--model", ta.model, "complete | pre | post");
  tr->add_option("--fraction", ta.fraction, "training subset fraction")
      ->check(CLI::Range(std::numeric_limits<double>::min(), 1.0));
  tr->add_option("--seed", ta.seed, "run seed");
  tr->add_option("--epochs", ta.epochs, "training epochs");
  tr->add_option("--lr", ta.lr, "learning rate");
  tr->add_option("--out", ta.out_ckpt, "checkpoint path")->required();
  tr->add_option("--test-fraction", ta.test_fraction, "held-out fraction");
  tr->add_option("--channels", ta.channels, "conv channels");
  tr->add_option("--kernel", ta.kernel, "conv kernel size");
  tr->add_option("--blocks", ta.blocks, "residual blocks per unit");
  tr->add_option("--convs", ta.convs, "convs per ResNet unit");
  tr->add_option("--groups", ta.groups, "group-norm groups");

  EvaluateArgs ea;
  CLI::App* ev = app.add_subcommand("evaluate", "metric report for a checkpoint");
  ev->add_option("--ckpt", ea.ckpt, "checkpoint file")->required();
  ev->add_option("--data", ea.data_dir, "dataset directory")->required();
  ev->add_option("--roi", ea.roi_file, "ROI spec file");
  ev->add_option("--report", ea.report, "output report path")->required();
  ev->add_option("--test-fraction", ea.test_fraction, "held-out fraction");

  try {
    app.parse(argc, argv);
    if (g.deterministic) g.threads = 1;
    if (sim->parsed()) return cmd_simulate(sa, g);
    if (bf->parsed()) return cmd_beamform(ba);
    if (tr->parsed()) return cmd_train(ta, g);
    if (ev->parsed()) return cmd_evaluate(ea, g);
    return 2;
  } catch (const CLI::ParseError& e) {
    // includes our CLI::ValidationError usage errors
    app.exit(e);
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 4;
  }
}
