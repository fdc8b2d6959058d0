#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "swbf/dataset.hpp"
#include "swbf/error.hpp"
#include "swbf/io/archive.hpp"
#include "swbf/io/config.hpp"
#include "swbf/io/dataset_file.hpp"
#include "swbf/io/pgm.hpp"
#include "swbf/io/rf_file.hpp"
#include "swbf/io/weights.hpp"
#include "swbf/metrics.hpp"
#include "swbf/pipeline.hpp"
#include "swbf/training.hpp"

namespace swbf::cli {

namespace fs = std::filesystem;
using io::ExperimentConfig;

namespace {

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::InvalidArgument:
    case ErrorKind::ShapeMismatch:
    case ErrorKind::EmptyPhantom:
      return kUsage;
    case ErrorKind::CorruptFile:
      return kCorrupt;
    case ErrorKind::EmptyRegion:
    case ErrorKind::ZeroVariance:
    case ErrorKind::ZeroMean:
    case ErrorKind::NoPeak:
      return kMetric;
    default:
      return kFailure;
  }
}

// The trailer holds the CRC-32 of everything before it.
std::uint32_t file_crc(const std::string& bytes) {
  return io::crc32(std::string_view(bytes).substr(0, bytes.size() - 4));
}

std::string hex32(std::uint32_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(8) << std::setfill('0') << v;
  return s.str();
}

Style style_arg(const std::string& name) {
  const auto s = parse_style(name);
  if (!s) fail(ErrorKind::Config, "unknown style '" + name + "' (expected das, despeckle, deconv or deconv-despeckle)");
  return *s;
}

// Geometry of a decoded cube, completed with the aperture size.
ArrayGeometry cube_geometry(const RfCube& cube, const ExperimentConfig* cfg, std::optional<std::size_t> aperture) {
  ArrayGeometry g = cfg ? cfg->geometry : ArrayGeometry{};
  g.scan_lines = cube.geom.scan_lines;
  g.depth_samples = cube.geom.depth_samples;
  g.element_count = cube.geom.element_count;
  g.sampling_freq = cube.geom.sampling_freq;
  g.center_freq = cube.geom.center_freq;
  g.sound_speed = cube.geom.sound_speed;
  g.pitch = cube.geom.pitch;
  if (aperture) {
    g.aperture_size = *aperture;
  } else if (!cfg) {
    g.aperture_size = io::infer_aperture_size(cube);
    require(g.aperture_size > 0, ErrorKind::Config, "cannot infer the aperture size of an all-zero cube; pass --aperture");
  }
  g.validate();
  return g;
}

ApertureCube load_aperture_cube(const std::string& path, const ExperimentConfig* cfg,
                                std::optional<std::size_t> aperture) {
  RfCube rf = io::load_cube(path);
  rf.geom = cube_geometry(rf, cfg, aperture);
  return beamform_channels(rf);
}

ApertureCube tile_depth(const ApertureCube& cube, std::size_t times) {
  const std::size_t L = cube.data.lines(), N = cube.data.depth(), J = cube.data.channels();
  ApertureCube out{Cube(L, N * times, J), cube.offsets, cube.geom};
  out.geom.depth_samples = N * times;
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t n = 0; n < N * times; ++n) {
      const auto src = cube.data.row(l, n % N);
      std::copy(src.begin(), src.end(), out.data.row(l, n).begin());
    }
  }
  return out;
}

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct SimulateArgs {
  std::string config, out;
  std::optional<std::uint64_t> seed;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const auto cfg = io::load_config(a.config);
  const auto phantom = sample_diffuse_scatterers(cfg.phantom, a.seed.value_or(cfg.phantom_seed));
  const auto rf = simulate_rf(cfg.geometry, phantom, cfg.pulse);
  const auto bytes = io::encode_cube(rf);
  io::write_file(a.out, bytes);
  out << "lines=" << rf.data.lines() << " depth=" << rf.data.depth() << " elements=" << rf.data.channels()
      << " scatterers=" << phantom.scatterers.size() << " bytes=" << bytes.size()
      << " crc32=" << hex32(file_crc(bytes)) << "\n";
  return kOk;
}

struct BeamformArgs {
  std::string cube, style, out, config;
  std::optional<std::size_t> aperture;
  std::optional<double> dynamic_range;
};

int cmd_beamform(const BeamformArgs& a, std::ostream& out) {
  const Style style = style_arg(a.style);
  std::optional<ExperimentConfig> cfg;
  if (!a.config.empty()) cfg = io::load_config(a.config);
  const auto cube = load_aperture_cube(a.cube, cfg ? &*cfg : nullptr, a.aperture);
  ExperimentConfig settings = cfg.value_or(ExperimentConfig{});
  settings.pulse.center_freq = cube.geom.center_freq;
  if (a.dynamic_range) settings.pipeline.dynamic_range = *a.dynamic_range;
  const Psf psf = io::resolve_psf(settings, cube);
  const auto img = classical_image(cube, style, psf, settings.pipeline);
  io::save_pgm(img, a.out, settings.pipeline.dynamic_range);
  Eigen::Index r = 0, c = 0;
  img.db.maxCoeff(&r, &c);
  out << "style=" << style_name(style) << " rows=" << img.db.rows() << " cols=" << img.db.cols()
      << " aperture=" << cube.geom.aperture_size << " peak_row=" << r << " peak_col=" << c << "\n";
  return kOk;
}

struct DatasetArgs {
  std::string config, out;
  std::vector<std::string> cubes;
};

int cmd_make_dataset(const DatasetArgs& a, std::ostream& out) {
  const auto cfg = io::load_config(a.config);
  std::vector<ApertureCube> frames;
  if (a.cubes.empty()) {
    for (std::size_t f = 0; f < cfg.training.frames; ++f) {
      const auto phantom = sample_diffuse_scatterers(cfg.phantom, cfg.phantom_seed + f);
      frames.push_back(beamform_channels(simulate_rf(cfg.geometry, phantom, cfg.pulse)));
    }
  } else {
    for (const auto& path : a.cubes) frames.push_back(load_aperture_cube(path, &cfg, cfg.geometry.aperture_size));
  }
  const Psf psf = io::resolve_psf(cfg, frames.front());
  const auto ds = build_dataset(frames, psf, cfg.pipeline, cfg.training.split_seed, cfg.arch.context,
                                cfg.training.val_fraction);
  const auto bytes = io::encode_dataset(ds);
  io::write_file(a.out, bytes);
  out << "frames=" << frames.size() << " train=" << ds.train.size() << " val=" << ds.val.size()
      << " channels=" << ds.channels << " lines=" << ds.lines << " context=" << ds.context
      << " crc32=" << hex32(file_crc(bytes)) << "\n";
  return kOk;
}

struct TrainArgs {
  std::string config, dataset, out, history;
  std::optional<std::size_t> epochs;
  bool verbose = false;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  auto cfg = io::load_config(a.config);
  const auto ds = io::load_dataset(a.dataset);
  Architecture arch = cfg.arch;
  require(ds.channels == arch.in_channels && ds.lines == arch.lines && ds.context == arch.context,
          ErrorKind::ShapeMismatch, "dataset shape does not match the configured geometry and architecture");
  TrainConfig tc = cfg.training.train;
  if (a.epochs) tc.epochs = *a.epochs;
  SwitchableModel<float> model(arch);
  model.initialize(cfg.training.init_seed);
  const auto start = std::chrono::steady_clock::now();
  const auto hist = train(model, ds, tc, [&](const EpochRecord& r) {
    if (a.verbose) {
      out << "epoch=" << r.epoch << " train=" << r.train_loss << " val=" << r.val_total << " seconds=" << r.seconds
          << "\n";
    }
  });
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  io::save_weights(model, a.out);
  if (!a.history.empty()) {
    std::ofstream h(a.history);
    if (!h) fail(ErrorKind::Io, "cannot create " + a.history);
    h << "# epoch train_loss val_das val_despeckle val_deconv val_deconv_despeckle val_total seconds\n";
    h << std::setprecision(9);
    for (const auto& r : hist.epochs) {
      h << r.epoch << ' ' << r.train_loss;
      for (double v : r.val_loss) h << ' ' << v;
      h << ' ' << r.val_total << ' ' << r.seconds << '\n';
    }
    if (!h) fail(ErrorKind::Io, "write failed: " + a.history);
  }
  const auto& first = hist.epochs.front();
  const auto& best = hist.epochs[hist.best_epoch];
  out << "epochs=" << hist.epochs.size() << " best_epoch=" << hist.best_epoch << " early_stopped="
      << (hist.early_stopped ? 1 : 0) << " steps=" << hist.steps << " initial_val=" << first.val_total
      << " best_val=" << best.val_total << " seconds=" << seconds << " degenerate=" << hist.degenerate << "\n";
  return kOk;
}

struct InferArgs {
  std::string weights, cube, out_dir = ".", prefix = "infer";
  std::vector<std::string> styles{"all"};
  std::size_t threads = 1;
  double dynamic_range = 60.0;
};

int cmd_infer(const InferArgs& a, std::ostream& out) {
  const auto model = io::load_weights(a.weights);
  const auto cube = load_aperture_cube(a.cube, nullptr, model.arch().in_channels);
  std::vector<Style> styles;
  for (const auto& s : a.styles) {
    if (s == "all") {
      styles.insert(styles.end(), kAllStyles.begin(), kAllStyles.end());
    } else {
      styles.push_back(style_arg(s));
    }
  }
  fs::create_directories(a.out_dir);
  for (Style s : styles) {
    const auto res = infer_frame(model, cube, s, a.dynamic_range, a.threads);
    const auto path = fs::path(a.out_dir) / (a.prefix + "_" + std::string(style_key(s)) + ".pgm");
    io::save_pgm(res.display, path, a.dynamic_range);
    double total = 0.0;
    for (double t : res.plane_seconds) total += t;
    out << "style=" << style_name(s) << " file=" << path.string() << " rows=" << res.display.db.rows()
        << " mean_plane_ms=" << 1e3 * total / static_cast<double>(res.plane_seconds.size())
        << " degenerate=" << res.degenerate << "\n";
  }
  return kOk;
}

struct MetricsArgs {
  std::string image, mask;
  double dynamic_range = 60.0;
  std::size_t bins = 256;
};

int cmd_metrics(const MetricsArgs& a, std::ostream& out) {
  const auto img = io::load_pgm(a.image, a.dynamic_range);
  const auto mask = io::load_mask_spec(a.mask, static_cast<std::size_t>(img.db.rows()),
                                       static_cast<std::size_t>(img.db.cols()));
  const auto t = region_stats(img.db, mask.target);
  const auto b = region_stats(img.db, mask.background);
  out << std::setprecision(10);
  out << "target_mean=" << t.mean << "\ntarget_std=" << t.std << "\nbackground_mean=" << b.mean
      << "\nbackground_std=" << b.std << "\n";
  out << "cr=" << cr(img, mask) << "\ncnr=" << cnr(img, mask) << "\ngcnr=" << gcnr(img, mask, a.bins) << "\n";
  return kOk;
}

struct BenchArgs {
  std::string weights, cube, style = "das";
  std::size_t repeats = 3;
  std::size_t threads = 1;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  require(a.repeats >= 1, ErrorKind::Config, "--repeats must be >= 1");
  const Style style = style_arg(a.style);
  const auto model = io::load_weights(a.weights);
  const auto cube = load_aperture_cube(a.cube, nullptr, model.arch().in_channels);
  const auto doubled = tile_depth(cube, 2);
  std::vector<double> planes, frame_n, frame_2n;
  for (std::size_t r = 0; r < a.repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = infer_frame(model, cube, style, 60.0, a.threads);
    const auto t1 = std::chrono::steady_clock::now();
    infer_frame(model, doubled, style, 60.0, a.threads);
    const auto t2 = std::chrono::steady_clock::now();
    planes.insert(planes.end(), res.plane_seconds.begin(), res.plane_seconds.end());
    frame_n.push_back(std::chrono::duration<double>(t1 - t0).count());
    frame_2n.push_back(std::chrono::duration<double>(t2 - t1).count());
  }
  double mean = 0.0;
  for (double p : planes) mean += p;
  mean /= static_cast<double>(planes.size());
  const double ratio = percentile(frame_2n, 0.5) / percentile(frame_n, 0.5);
  const bool linear = ratio >= 1.6 && ratio <= 2.4;
  out << std::setprecision(6);
  out << "threads=" << a.threads << "\nrepeats=" << a.repeats << "\nplanes=" << cube.data.depth()
      << "\nsamples_per_plane=" << a.repeats << "\nplane_mean_ms=" << 1e3 * mean
      << "\nplane_median_ms=" << 1e3 * percentile(planes, 0.5) << "\nplane_p95_ms=" << 1e3 * percentile(planes, 0.95)
      << "\nframe_ms=" << 1e3 * percentile(frame_n, 0.5) << "\nframe_2x_ms=" << 1e3 * percentile(frame_2n, 0.5)
      << "\nscaling_ratio=" << ratio << "\nlinear_scaling=" << (linear ? "ok" : "fail") << "\n";
  return linear ? kOk : kMetric;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Switchable deep beamformer toolkit"};
  app.name("swbf");
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Simulate a channel-data cube from a config");
  c_sim->add_option("-c,--config", sim.config, "Experiment config")->required();
  c_sim->add_option("-o,--out", sim.out, "Output cube (URFC)")->required();
  c_sim->add_option("--seed", sim.seed, "Override the phantom seed");

  BeamformArgs bf;
  auto* c_bf = app.add_subcommand("beamform", "Classical image of one style from a cube");
  c_bf->add_option("-i,--cube", bf.cube, "Input cube (URFC)")->required();
  c_bf->add_option("-s,--style", bf.style, "das, despeckle, deconv or deconv-despeckle")->required();
  c_bf->add_option("-o,--out", bf.out, "Output image (PGM)")->required();
  c_bf->add_option("-c,--config", bf.config, "Experiment config for pipeline settings");
  c_bf->add_option("--aperture", bf.aperture, "Active aperture size J");
  c_bf->add_option("--dynamic-range", bf.dynamic_range, "Displayed range in dB");

  DatasetArgs dsa;
  auto* c_ds = app.add_subcommand("make-dataset", "Build the four-style training set");
  c_ds->add_option("-c,--config", dsa.config, "Experiment config")->required();
  c_ds->add_option("-o,--out", dsa.out, "Output dataset (SWDS)")->required();
  c_ds->add_option("--cube", dsa.cubes, "Input cubes; simulated from the config when absent");

  TrainArgs tr;
  auto* c_tr = app.add_subcommand("train", "Train the switchable model");
  c_tr->add_option("-c,--config", tr.config, "Experiment config")->required();
  c_tr->add_option("-d,--dataset", tr.dataset, "Dataset (SWDS)")->required();
  c_tr->add_option("-o,--out", tr.out, "Output weights (SWBF)")->required();
  c_tr->add_option("--history", tr.history, "Loss history text file");
  c_tr->add_option("--epochs", tr.epochs, "Override the configured epoch count");
  c_tr->add_flag("-v,--verbose", tr.verbose, "Print one line per epoch");

  InferArgs inf;
  auto* c_inf = app.add_subcommand("infer", "Run the trained model on a cube");
  c_inf->add_option("-w,--weights", inf.weights, "Weights (SWBF)")->required();
  c_inf->add_option("-i,--cube", inf.cube, "Input cube (URFC)")->required();
  c_inf->add_option("-s,--style", inf.styles, "Style(s) or 'all'");
  c_inf->add_option("--out-dir", inf.out_dir, "Output directory");
  c_inf->add_option("--prefix", inf.prefix, "Output file prefix");
  c_inf->add_option("--threads", inf.threads, "Worker threads over depth planes");
  c_inf->add_option("--dynamic-range", inf.dynamic_range, "Displayed range in dB");

  MetricsArgs met;
  auto* c_met = app.add_subcommand("metrics", "Contrast metrics of an image");
  c_met->add_option("-i,--image", met.image, "Image (PGM)")->required();
  c_met->add_option("-m,--mask", met.mask, "Mask spec")->required();
  c_met->add_option("--dynamic-range", met.dynamic_range, "Range the PGM was rendered with");
  c_met->add_option("--bins", met.bins, "GCNR histogram bins");

  BenchArgs bench;
  auto* c_bench = app.add_subcommand("bench", "Per-depth-plane inference timing");
  c_bench->add_option("-w,--weights", bench.weights, "Weights (SWBF)")->required();
  c_bench->add_option("-i,--cube", bench.cube, "Input cube (URFC)")->required();
  c_bench->add_option("-s,--style", bench.style, "Style to time");
  c_bench->add_option("--repeats", bench.repeats, "Timed runs");
  c_bench->add_option("--threads", bench.threads, "Worker threads over depth planes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (c_sim->parsed()) return cmd_simulate(sim, out);
    if (c_bf->parsed()) return cmd_beamform(bf, out);
    if (c_ds->parsed()) return cmd_make_dataset(dsa, out);
    if (c_tr->parsed()) return cmd_train(tr, out);
    if (c_inf->parsed()) return cmd_infer(inf, out);
    if (c_met->parsed()) return cmd_metrics(met, out);
    if (c_bench->parsed()) return cmd_bench(bench, out);
  } catch (const Error& e) {
    err << "swbf: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "swbf: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

}  // namespace swbf::cli
