// Acceptance suite: one PASS/FAIL line per criterion on stdout, progress on stderr.
// Usage: swbf_acceptance [--weights trained.swbf] [--keep-weights out.swbf] [criterion ...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "swbf/beamform.hpp"
#include "swbf/dataset.hpp"
#include "swbf/deconv.hpp"
#include "swbf/despeckle.hpp"
#include "swbf/envelope.hpp"
#include "swbf/error.hpp"
#include "swbf/io/archive.hpp"
#include "swbf/io/config.hpp"
#include "swbf/io/rf_file.hpp"
#include "swbf/io/weights.hpp"
#include "swbf/metrics.hpp"
#include "swbf/nn/adain.hpp"
#include "swbf/nn/layers.hpp"
#include "swbf/pipeline.hpp"
#include "swbf/rng.hpp"
#include "swbf/switchable.hpp"
#include "swbf/training.hpp"

namespace fs = std::filesystem;
using namespace swbf;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string config_path(const std::string& name) { return (fs::path(SWBF_CONFIG_DIR) / name).string(); }

template <typename... Args>
std::string fmt(Args&&... args) {
  std::ostringstream s;
  s << std::setprecision(4);
  (s << ... << args);
  return s.str();
}

void log(const std::string& msg) { std::cerr << "  .. " << msg << std::endl; }

ApertureCube simulate_fixture(const io::ExperimentConfig& cfg, std::uint64_t seed) {
  const auto phantom = sample_diffuse_scatterers(cfg.phantom, seed);
  return beamform_channels(simulate_rf(cfg.geometry, phantom, cfg.pulse));
}

std::size_t peak_row(const Matrix& db) {
  Eigen::Index r = 0, c = 0;
  db.maxCoeff(&r, &c);
  return static_cast<std::size_t>(r);
}

// ---------------------------------------------------------------------------
// 1. AdaIN / optimal transport equivalence

Outcome criterion_adain_ot() {
  const auto t0 = Clock::now();
  Rng rng(2024);
  double worst = 0.0;
  const std::size_t vectors = 128;
  const Eigen::Index d = 16;
  for (std::size_t v = 0; v < vectors; ++v) {
    std::vector<double> u(static_cast<std::size_t>(d));
    const double scale = std::exp(rng.uniform(-2.0, 2.0));
    const double shift = rng.uniform(-5.0, 5.0);
    for (auto& x : u) x = shift + scale * rng.normal();
    const auto st = nn::instance_stats<double>(u);
    const double m = rng.uniform(-3.0, 3.0);
    const double s = std::exp(rng.uniform(-2.0, 2.0));
    const auto ada = nn::adain_transform<double>(u, m, s);
    const nn::GaussianMoments src{Eigen::VectorXd::Constant(d, st.mean),
                                  Eigen::MatrixXd::Identity(d, d) * (st.std * st.std)};
    const nn::GaussianMoments dst{Eigen::VectorXd::Constant(d, m), Eigen::MatrixXd::Identity(d, d) * (s * s)};
    const Eigen::VectorXd uv = Eigen::Map<const Eigen::VectorXd>(u.data(), d);
    const Eigen::VectorXd ot = nn::ot_map_gaussian(src, dst, uv);
    for (Eigen::Index i = 0; i < d; ++i) worst = std::max(worst, std::abs(ot(i) - ada[static_cast<std::size_t>(i)]));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-10 && secs < 1.0,
          fmt(vectors, " vectors, max |OT - AdaIN| = ", worst, " (tol 1e-10), ", secs, " s (limit 1 s)")};
}

// ---------------------------------------------------------------------------
// 2. Gradient integrity

nn::Tensor<double> random_tensor(std::vector<std::size_t> shape, Rng& rng) {
  nn::Tensor<double> t(std::move(shape));
  for (auto& v : t.data()) v = rng.normal();
  return t;
}

// Norm-wise relative error between central differences of f over t and the analytic gradient.
double grad_error(nn::Tensor<double>& t, const std::vector<double>& analytic, const std::function<double()>& f,
                  double h = 1e-6) {
  double num = 0.0, den_fd = 0.0, den_an = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double keep = t[i];
    t[i] = keep + h;
    const double up = f();
    t[i] = keep - h;
    const double dn = f();
    t[i] = keep;
    const double fd = (up - dn) / (2.0 * h);
    num += (fd - analytic[i]) * (fd - analytic[i]);
    den_fd += fd * fd;
    den_an += analytic[i] * analytic[i];
  }
  const double den = std::max({std::sqrt(den_fd), std::sqrt(den_an), 1e-300});
  return std::sqrt(num) / den;
}

std::vector<double> as_vec(const nn::Tensor<double>& t) { return {t.data().begin(), t.data().end()}; }

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Outcome criterion_gradients() {
  const auto t0 = Clock::now();
  Rng rng(77);
  std::map<std::string, double> err;

  {
    auto x = random_tensor({3, 6, 5}, rng);
    auto w = random_tensor({4, 3, 3, 3}, rng);
    auto b = random_tensor({4}, rng);
    const auto g = random_tensor({4, 6, 5}, rng);
    const nn::Padding p{1, 1};
    const auto gr = nn::conv2d_backward(x, w, g, p);
    auto f = [&] { return dot(as_vec(nn::conv2d_forward(x, w, b, p)), as_vec(g)); };
    err["conv.x"] = grad_error(x, as_vec(gr.dx), f);
    err["conv.w"] = grad_error(w, as_vec(gr.dw), f);
    err["conv.b"] = grad_error(b, as_vec(gr.db), f);
  }
  for (auto act : {nn::Activation::Linear, nn::Activation::Relu}) {
    const std::string tag = act == nn::Activation::Relu ? "dense_relu" : "dense";
    auto x = random_tensor({5}, rng);
    auto w = random_tensor({6, 5}, rng);
    auto b = random_tensor({6}, rng);
    const auto g = as_vec(random_tensor({6}, rng));
    const auto gr = nn::dense_backward(as_vec(x), w, b, act, g);
    auto f = [&] { return dot(nn::dense_forward(as_vec(x), w, b, act), g); };
    err[tag + ".x"] = grad_error(x, gr.dx, f);
    err[tag + ".w"] = grad_error(w, as_vec(gr.dw), f);
    err[tag + ".b"] = grad_error(b, as_vec(gr.db), f);
  }
  {
    // Keep inputs away from the kink so central differences stay on one side.
    auto x = random_tensor({40}, rng);
    for (auto& v : x.data()) v = (v >= 0.0 ? 0.1 : -0.1) + v;
    const auto g = random_tensor({40}, rng);
    auto fr = [&] { return dot(as_vec(nn::relu(x)), as_vec(g)); };
    err["relu"] = grad_error(x, as_vec(nn::relu_backward(x, g)), fr);
    auto fl = [&] { return dot(as_vec(nn::leaky_relu(x, 0.2)), as_vec(g)); };
    err["leaky_relu"] = grad_error(x, as_vec(nn::leaky_relu_backward(x, g, 0.2)), fl);
  }
  {
    auto u = random_tensor({24}, rng);
    nn::Tensor<double> tgt({2}, std::vector<double>{0.7, 1.9});
    const auto g = as_vec(random_tensor({24}, rng));
    const auto gr = nn::adain_backward<double>(u.data(), tgt[0], tgt[1], g);
    auto f = [&] { return dot(nn::adain_transform<double>(u.data(), tgt[0], tgt[1]), g); };
    err["adain.u"] = grad_error(u, gr.du, f);
    err["adain.targets"] = grad_error(tgt, {gr.dmean, gr.dstd}, f);
  }
  double layer_worst = 0.0;
  for (const auto& [k, v] : err) layer_worst = std::max(layer_worst, v);

  double model_err = 0.0;
  {
    Architecture a;
    a.in_channels = 3;
    a.lines = 6;
    a.context = 3;
    a.width = 4;
    a.bottleneck = 5;
    a.gen_hidden1 = 4;
    a.gen_hidden2 = 6;
    SwitchableModel<double> m(a);
    m.initialize(5);
    nn::Tensor<double> slab({3, 6, 3});
    for (auto& v : slab.data()) v = rng.normal();
    std::vector<double> target(6);
    for (auto& v : target) v = rng.normal();
    std::vector<nn::Tensor<double>> grads;
    m.accumulate_gradient(slab, 0.5, target, grads);
    double num = 0.0, den_fd = 0.0, den_an = 0.0;
    const double h = 1e-6;
    for (std::size_t p = 0; p < m.parameters().size(); ++p) {
      auto& t = m.parameters()[p];
      for (std::size_t i = 0; i < t.size(); ++i) {
        const double keep = t[i];
        t[i] = keep + h;
        const double up = m.loss(slab, 0.5, target);
        t[i] = keep - h;
        const double dn = m.loss(slab, 0.5, target);
        t[i] = keep;
        const double fd = (up - dn) / (2.0 * h);
        num += (fd - grads[p][i]) * (fd - grads[p][i]);
        den_fd += fd * fd;
        den_an += grads[p][i] * grads[p][i];
      }
    }
    model_err = std::sqrt(num) / std::max(std::sqrt(den_fd), std::sqrt(den_an));
  }
  const double secs = seconds_since(t0);
  std::string worst_name;
  for (const auto& [k, v] : err) {
    if (v == layer_worst) worst_name = k;
  }
  return {layer_worst < 1e-5 && model_err < 1e-4 && secs < 30.0,
          fmt(err.size(), " layer checks, worst ", worst_name, " = ", layer_worst, " (tol 1e-5); full model = ",
              model_err, " (tol 1e-4); ", secs, " s (limit 30 s)")};
}

// ---------------------------------------------------------------------------
// 3. DAS correctness

// Receive focusing, aperture selection and averaging straight from X.
Matrix naive_das(const RfCube& rf) {
  const auto& g = rf.geom;
  Matrix u(static_cast<Eigen::Index>(g.scan_lines), static_cast<Eigen::Index>(g.depth_samples));
  for (std::size_t l = 0; l < g.scan_lines; ++l) {
    const std::size_t d = g.aperture_offset(l);
    for (std::size_t n = 0; n < g.depth_samples; ++n) {
      const double z = static_cast<double>(n) * g.sound_speed / (2.0 * g.sampling_freq);
      double sum = 0.0;
      for (std::size_t i = 0; i < g.aperture_size; ++i) {
        const double dx = g.element_x(d + i) - g.line_x(l);
        const double idx = (z + std::sqrt(z * z + dx * dx)) / g.sound_speed * g.sampling_freq;
        if (idx > static_cast<double>(g.depth_samples - 1)) continue;
        const auto i0 = static_cast<std::size_t>(std::floor(idx));
        const double fr = idx - static_cast<double>(i0);
        const double a = rf.data(l, i0, d + i);
        const double b = i0 + 1 < g.depth_samples ? rf.data(l, i0 + 1, d + i) : 0.0;
        sum += (1.0 - fr) * a + fr * b;
      }
      u(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(n)) = sum / static_cast<double>(g.aperture_size);
    }
  }
  return u;
}

Outcome criterion_das() {
  const auto cfg = io::load_config(config_path("point_target.ini"));
  const auto rf = simulate_rf(cfg.geometry, cfg.phantom, cfg.pulse);
  const Matrix u = das(beamform_channels(rf));
  const double oracle_err = (u - naive_das(rf)).cwiseAbs().maxCoeff() / std::max(1.0, u.cwiseAbs().maxCoeff());

  const auto img = log_compress(envelope_image(u));
  Eigen::Index r = 0, c = 0;
  img.db.maxCoeff(&r, &c);
  const auto& s = cfg.phantom.scatterers.front();
  const auto& g = cfg.geometry;
  const double expect_row = 2.0 * s.axial * g.sampling_freq / g.sound_speed;
  double expect_col = 0.0;
  double best = 1e9;
  for (std::size_t l = 0; l < g.scan_lines; ++l) {
    if (std::abs(g.line_x(l) - s.lateral) < best) {
      best = std::abs(g.line_x(l) - s.lateral);
      expect_col = static_cast<double>(l);
    }
  }
  const double dr = std::abs(static_cast<double>(r) - expect_row);
  const double dc = std::abs(static_cast<double>(c) - expect_col);
  return {oracle_err <= 1e-12 && dr <= 1.0 && dc <= 1.0,
          fmt("peak at row ", r, " col ", c, " vs expected ", expect_row, ", ", expect_col, " (|d| ", dr, ", ", dc,
              " <= 1); das vs naive oracle ", oracle_err, " (tol 1e-12)")};
}

// ---------------------------------------------------------------------------
// 4. Deconvolution

Outcome criterion_deconv() {
  Matrix y(1, 3);
  y << 1.0, 0.005, -0.5;
  DeconvProblem delta{y, Psf{Matrix::Ones(1, 1)}, 0.02, 5000, 1e-15, std::nullopt};
  const auto dres = fista_deconvolve(delta);
  Matrix closed(1, 3);
  for (Eigen::Index i = 0; i < 3; ++i) closed(0, i) = soft_threshold(y(0, i), 0.01);
  const double delta_err = (dres.x - closed).cwiseAbs().maxCoeff();

  const auto cfg = io::load_config(config_path("point_target.ini"));
  const auto cube = beamform_channels(simulate_rf(cfg.geometry, cfg.phantom, cfg.pulse));
  const Matrix env = envelope_image(das(cube));
  const Psf psf = io::resolve_psf(cfg, cube);
  DeconvProblem p{env / env.maxCoeff(), psf, cfg.pipeline.deconv.lambda, cfg.pipeline.deconv.max_iters,
                  cfg.pipeline.deconv.tol, std::nullopt};
  const auto res = fista_deconvolve(p);
  std::size_t increases = 0;
  for (std::size_t k = 1; k < res.objective.size(); ++k) increases += res.objective[k] > res.objective[k - 1];
  const bool start_ok = res.objective.front() <= deconv_objective(p, Matrix::Zero(env.rows(), env.cols()));

  const auto das_img = log_compress(env);
  const auto dec_img = deconv_target(env, psf, cfg.pipeline.deconv);
  const double w_das = fwhm_lateral(das_img, peak_row(das_img.db));
  const double w_dec = fwhm_lateral(dec_img, peak_row(dec_img.db));
  return {increases == 0 && start_ok && delta_err <= 1e-6 && w_dec <= w_das,
          fmt("objective increases ", increases, " over ", res.iterations, " iterations; delta-PSF error ", delta_err,
              " (tol 1e-6); -6 dB width deconv ", w_dec, " <= das ", w_das, " lines")};
}

// ---------------------------------------------------------------------------
// 5. Despeckle

Outcome criterion_despeckle() {
  const auto cfg = io::load_config(config_path("homogeneous_speckle.ini"));
  const auto cube = simulate_fixture(cfg, cfg.phantom_seed);
  const auto base = classical_image(cube, Style::Das, Psf{Matrix::Ones(1, 1)}, cfg.pipeline);
  const auto out = despeckle_target(base, cfg.pipeline.despeckle);
  // Interior of the speckle slab, clear of the array edges and the near field.
  const BoolMatrix region = rect_mask(cfg.geometry, -4e-3, 4e-3, 2e-3, 12e-3);
  const auto before = speckle_snr(base, region);
  const auto after = speckle_snr(out, region);
  const double gain = after.value / before.value;
  const double shift = std::abs(region_stats(out.db, region).mean - region_stats(base.db, region).mean);

  DespeckleParams cp = cfg.pipeline.despeckle;
  cp.noise_sigma = 3.0;
  const BModeImage flat{Matrix::Constant(64, 32, -25.0), 1.0};
  const double fixed = (despeckle_target(flat, cp).db - flat.db).cwiseAbs().maxCoeff();
  return {gain >= 1.3 && shift <= 1.0 && fixed <= 1e-9,
          fmt("speckle SNR ", before.value, " -> ", after.value, " (x", gain, ", need >= 1.3); mean shift ", shift,
              " dB (<= 1); constant image drift ", fixed, " (tol 1e-9)")};
}

// ---------------------------------------------------------------------------
// 6. Switching (trains the model reused by 7 and 9)

struct TrainedModel {
  SwitchableModel<float> model;
  double train_seconds = 0.0;
  bool fresh = false;
};

std::optional<TrainedModel> g_model;

std::string style_list(const std::array<double, 4>& v) {
  std::ostringstream s;
  s << std::setprecision(4);
  for (std::size_t i = 0; i < 4; ++i) s << (i ? "/" : "") << v[i];
  return s.str();
}

Outcome criterion_switching(const std::optional<std::string>& keep) {
  const auto t0 = Clock::now();
  const auto cfg = io::load_config(config_path("desk_training.ini"));
  std::vector<ApertureCube> frames;
  for (std::size_t f = 0; f < cfg.training.frames; ++f) frames.push_back(simulate_fixture(cfg, cfg.phantom_seed + f));
  const Psf psf = io::resolve_psf(cfg, frames.front());
  const Dataset ds = build_dataset(frames, psf, cfg.pipeline, cfg.training.split_seed, cfg.arch.context,
                                   cfg.training.val_fraction);
  log(fmt("dataset: ", frames.size(), " frames, ", ds.train.size(), " train / ", ds.val.size(), " held-out slabs, ",
          seconds_since(t0), " s"));

  const auto t_train = Clock::now();
  SwitchableModel<float> model(cfg.arch);
  model.initialize(cfg.training.init_seed);
  const auto hist = train(model, ds, cfg.training.train, [&](const EpochRecord& r) {
    log(fmt("switchable epoch ", r.epoch, " train ", r.train_loss, " val ", r.val_total, " (", r.seconds, " s)"));
  });
  const double train_secs = seconds_since(t_train);
  const double total_secs = seconds_since(t0);
  if (keep) io::save_weights(model, *keep);
  g_model = TrainedModel{model, train_secs, true};

  const auto mse = cross_style_mse(model, ds.val);
  bool switches = true;
  std::array<double, 4> margin{};
  for (Style s : kAllStyles) {
    const auto i = index_of(s);
    double other = std::numeric_limits<double>::infinity();
    for (Style t : kAllStyles) {
      if (t != s) other = std::min(other, mse[i][index_of(t)]);
    }
    margin[i] = other / mse[i][i];
    switches = switches && mse[i][i] < other;
  }

  std::array<double, 4> own{}, dedicated{}, ratio{};
  bool within = true;
  for (Style s : kAllStyles) {
    const auto i = index_of(s);
    SwitchableModel<float> single(cfg.arch);
    single.initialize(cfg.training.init_seed);
    TrainConfig tc = cfg.training.train;
    tc.styles = {s};
    train(single, ds, tc, [&](const EpochRecord& r) {
      log(fmt("dedicated ", style_name(s), " epoch ", r.epoch, " val ", r.val_total));
    });
    own[i] = mse[i][i];
    dedicated[i] = style_mse(single, ds.val, s, s);
    ratio[i] = own[i] / dedicated[i];
    within = within && ratio[i] <= 1.5;
  }
  const bool fast = total_secs <= 600.0;
  return {switches && within && fast,
          fmt("own/nearest-other MSE margin ", style_list(margin), " (each > 1); switchable/dedicated val MSE ",
              style_list(ratio), " (each <= 1.5); ", hist.epochs.size(), " epochs, data+training ", total_secs,
              " s (limit 600 s)")};
}

SwitchableModel<float>& trained_model(const std::optional<std::string>& weights) {
  if (!g_model) {
    if (weights) {
      g_model = TrainedModel{io::load_weights(*weights), 0.0, false};
    } else {
      log("training the switchable model for this criterion");
      criterion_switching(std::nullopt);
    }
  }
  return g_model->model;
}

// ---------------------------------------------------------------------------
// 7. Metric orderings

Outcome criterion_orderings(const std::optional<std::string>& weights) {
  const auto& model = trained_model(weights);
  const auto cfg = io::load_config(config_path("anechoic_disk.ini"));
  const auto mask = io::load_mask_spec(config_path("masks/disk_center.mask"), cfg.geometry.depth_samples,
                                       cfg.geometry.scan_lines);
  const std::size_t phantoms = 5;
  double g_das = 0.0, g_desp = 0.0, cr_das = 0.0, cr_dec = 0.0;
  double cg_das = 0.0, cg_desp = 0.0, ccr_das = 0.0, ccr_dec = 0.0;
  for (std::size_t k = 0; k < phantoms; ++k) {
    const auto cube = simulate_fixture(cfg, cfg.phantom_seed + k);
    const auto das_img = infer_frame(model, cube, Style::Das, cfg.pipeline.dynamic_range).display;
    const auto desp_img = infer_frame(model, cube, Style::Despeckle, cfg.pipeline.dynamic_range).display;
    const auto dec_img = infer_frame(model, cube, Style::Deconvolution, cfg.pipeline.dynamic_range).display;
    g_das += gcnr(das_img, mask) / phantoms;
    g_desp += gcnr(desp_img, mask) / phantoms;
    cr_das += cr(das_img, mask) / phantoms;
    cr_dec += cr(dec_img, mask) / phantoms;
    const auto ref = classical_style_images(cube, io::resolve_psf(cfg, cube), cfg.pipeline);
    cg_das += gcnr(ref[0], mask) / phantoms;
    cg_desp += gcnr(ref[1], mask) / phantoms;
    ccr_das += cr(ref[0], mask) / phantoms;
    ccr_dec += cr(ref[2], mask) / phantoms;
    log(fmt("phantom ", k, ": gcnr das ", gcnr(das_img, mask), " despeckle ", gcnr(desp_img, mask), "; cr das ",
            cr(das_img, mask), " deconv ", cr(dec_img, mask)));
  }
  return {g_desp > g_das && cr_dec > cr_das,
          fmt("model, mean of ", phantoms, ": gcnr despeckle ", std::setprecision(6), g_desp, " > das ", g_das,
              "; cr deconv ", cr_dec, " > das ", cr_das, " dB (classical targets: gcnr ", cg_desp, " vs ", cg_das,
              ", cr ", ccr_dec, " vs ", ccr_das, ")")};
}

// ---------------------------------------------------------------------------
// 8. GCNR sanity

Outcome criterion_gcnr() {
  const Eigen::Index n = 100000;
  Rng rng(8);
  BModeImage img{Matrix(1, 2 * n), 1.0};
  RegionMask m{BoolMatrix::Constant(1, 2 * n, false), BoolMatrix::Constant(1, 2 * n, false)};
  m.target.leftCols(n).setConstant(true);
  m.background.rightCols(n).setConstant(true);

  for (Eigen::Index i = 0; i < n; ++i) img.db(0, i) = img.db(0, n + i) = -30.0 + 5.0 * rng.normal();
  const double same = gcnr(img, m, 256);
  for (Eigen::Index i = 0; i < n; ++i) {
    img.db(0, i) = rng.uniform(-10.0, 0.0);
    img.db(0, n + i) = rng.uniform(-60.0, -10.5);
  }
  const double disjoint = gcnr(img, m, 256);
  for (Eigen::Index i = 0; i < n; ++i) {
    img.db(0, i) = rng.uniform(0.0, 1.0);
    img.db(0, n + i) = rng.uniform(0.5, 1.5);
  }
  const double half = gcnr(img, m, 256);
  return {std::abs(same) <= 1e-12 && disjoint == 1.0 && std::abs(half - 0.5) <= 0.02,
          fmt("identical ", same, " (0 +- 1e-12); disjoint ", std::setprecision(17), disjoint, std::setprecision(4),
              " (exactly 1); uniform overlap ", half, " (0.5 +- 0.02), ", n, " samples per region")};
}

// ---------------------------------------------------------------------------
// 9. Performance harness

ApertureCube tile_depth(const ApertureCube& c, std::size_t times) {
  ApertureCube out = c;
  const std::size_t N = c.data.depth();
  out.geom.depth_samples = N * times;
  out.data = Cube(c.data.lines(), N * times, c.data.channels());
  for (std::size_t l = 0; l < c.data.lines(); ++l) {
    for (std::size_t n = 0; n < N * times; ++n) {
      const auto src = c.data.row(l, n % N);
      std::copy(src.begin(), src.end(), out.data.row(l, n).begin());
    }
  }
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

Outcome criterion_performance(const std::optional<std::string>& weights) {
  const auto& model = trained_model(weights);
  const auto cfg = io::load_config(config_path("anechoic_disk.ini"));
  const auto cube = simulate_fixture(cfg, cfg.phantom_seed);
  const auto doubled = tile_depth(cube, 2);
  std::vector<double> planes, t1, t2;
  infer_frame(model, cube, Style::Das);  // warm-up
  for (int r = 0; r < 9; ++r) {
    auto a = Clock::now();
    const auto res = infer_frame(model, cube, Style::Das);
    t1.push_back(seconds_since(a));
    a = Clock::now();
    infer_frame(model, doubled, Style::Das);
    t2.push_back(seconds_since(a));
    planes.insert(planes.end(), res.plane_seconds.begin(), res.plane_seconds.end());
  }
  const double plane_ms = 1e3 * median(planes);
  const double ratio = median(t2) / median(t1);
  return {ratio >= 1.6 && ratio <= 2.4 && plane_ms < 10.0,
          fmt("per-plane median ", plane_ms, " ms (< 10); frame ", cube.data.depth(), " planes ", 1e3 * median(t1),
              " ms, ", doubled.data.depth(), " planes ", 1e3 * median(t2), " ms, ratio ", ratio, " (2 +- 20%)")};
}

// ---------------------------------------------------------------------------
// 10. Serialization and CLI contract

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "swbf");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
}

bool throws_corrupt(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind() == ErrorKind::CorruptFile;
  }
  return false;
}

Outcome criterion_serialization(const std::optional<std::string>& weights) {
  std::vector<std::string> failures;
  const auto cfg = io::load_config(config_path("point_target.ini"));
  const auto rf = simulate_rf(cfg.geometry, cfg.phantom, cfg.pulse);
  const std::string cube_bytes = io::encode_cube(rf);
  auto cube_back = io::decode_cube(cube_bytes);
  cube_back.geom.aperture_size = io::infer_aperture_size(cube_back);
  bool narrowed_equal = true;
  for (std::size_t i = 0; i < rf.data.size(); ++i) {
    narrowed_equal = narrowed_equal && cube_back.data.data()[i] == static_cast<double>(static_cast<float>(rf.data.data()[i]));
  }
  if (!narrowed_equal || io::encode_cube(cube_back) != cube_bytes) failures.push_back("cube round trip");

  SwitchableModel<float> model = weights ? io::load_weights(*weights) : [] {
    SwitchableModel<float> m(Architecture{});
    m.initialize(1);
    m.freeze_codes();
    return m;
  }();
  const std::string w_bytes = io::encode_weights(model);
  const auto w_back = io::decode_weights(w_bytes);
  if (w_back.parameters() != model.parameters() || io::encode_weights(w_back) != w_bytes) {
    failures.push_back("weights round trip");
  }

  auto flip = [](std::string s, std::size_t pos) {
    s[pos] = static_cast<char>(s[pos] ^ 0x01);
    return s;
  };
  if (!throws_corrupt([&] { io::decode_cube(flip(cube_bytes, cube_bytes.size() / 2)); })) failures.push_back("cube crc");
  if (!throws_corrupt([&] { io::decode_cube(flip(cube_bytes, cube_bytes.size() - 2)); })) failures.push_back("cube trailer");
  if (!throws_corrupt([&] { io::decode_weights(flip(w_bytes, w_bytes.size() / 2)); })) failures.push_back("weights crc");

  const fs::path dir = fs::temp_directory_path() / "swbf_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto p = [&](const std::string& name) { return (dir / name).string(); };
  std::size_t checks = 0;
  auto expect = [&](const std::string& what, int got, int want) {
    ++checks;
    if (got != want) failures.push_back(fmt(what, " exit ", got, " != ", want));
  };
  for (const char* fixture : {"point_target.ini", "anechoic_disk.ini", "hyperechoic_disk.ini", "homogeneous_speckle.ini"}) {
    const std::string name = fs::path(fixture).stem().string();
    expect(name + " simulate", run_cli({"simulate", "-c", config_path(fixture), "-o", p(name + ".urfc")}), cli::kOk);
    expect(name + " beamform", run_cli({"beamform", "-i", p(name + ".urfc"), "-c", config_path(fixture), "-s", "das", "-o", p(name + ".pgm")}), cli::kOk);
    expect(name + " metrics", run_cli({"metrics", "-i", p(name + ".pgm"), "-m", config_path("masks/disk_center.mask")}), cli::kOk);
  }
  io::save_weights(model, p("model.swbf"));
  expect("infer", run_cli({"infer", "-w", p("model.swbf"), "-i", p("anechoic_disk.urfc"), "-s", "all", "--out-dir", dir.string()}), cli::kOk);
  expect("unknown style", run_cli({"beamform", "-i", p("point_target.urfc"), "-s", "sharpen", "-o", p("x.pgm")}), cli::kUsage);
  expect("missing option", run_cli({"simulate", "-c", config_path("point_target.ini")}), cli::kUsage);
  {
    std::ifstream in(config_path("point_target.ini"));
    std::stringstream text;
    text << in.rdbuf();
    std::string s = text.str();
    s.erase(s.find("sound_speed"), std::string("sound_speed = 1540\n").size());
    std::ofstream(p("bad.ini")) << s;
  }
  expect("missing sound_speed", run_cli({"simulate", "-c", p("bad.ini"), "-o", p("bad.urfc")}), cli::kUsage);
  io::write_file(p("corrupt.urfc"), flip(io::read_file(p("point_target.urfc")), 1000));
  expect("corrupt cube", run_cli({"beamform", "-i", p("corrupt.urfc"), "-s", "das", "-o", p("x.pgm")}), cli::kCorrupt);
  io::write_file(p("corrupt.swbf"), flip(io::read_file(p("model.swbf")), 500));
  expect("corrupt weights", run_cli({"infer", "-w", p("corrupt.swbf"), "-i", p("point_target.urfc")}), cli::kCorrupt);
  std::ofstream(p("empty.mask")) << "[target]\nshape = rect\nrow_min = 400\nrow_max = 500\ncol_min = 0\ncol_max = 4\n"
                                     "[background]\nshape = rect\nrow_min = 0\nrow_max = 20\ncol_min = 0\ncol_max = 4\n";
  expect("empty region", run_cli({"metrics", "-i", p("point_target.pgm"), "-m", p("empty.mask")}), cli::kMetric);
  fs::remove_all(dir);

  std::string detail = fmt("cube ", cube_bytes.size(), " B and weights ", w_bytes.size(),
                           " B round-trip bit-exactly; CRC corruption detected; ", checks, " CLI exit-code checks");
  if (!failures.empty()) {
    detail += "; failed:";
    for (const auto& f : failures) detail += " [" + f + "]";
  }
  return {failures.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  std::optional<std::string> weights, keep;
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--weights" && i + 1 < argc) {
      weights = argv[++i];
    } else if (a == "--keep-weights" && i + 1 < argc) {
      keep = argv[++i];
    } else {
      selected.insert(std::stoi(a));
    }
  }

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"adain-ot-equivalence", criterion_adain_ot},
      {"gradient-integrity", criterion_gradients},
      {"das-correctness", criterion_das},
      {"deconvolution", criterion_deconv},
      {"despeckle", criterion_despeckle},
      {"style-switching", [&] { return criterion_switching(keep); }},
      {"metric-orderings", [&] { return criterion_orderings(weights); }},
      {"gcnr-sanity", criterion_gcnr},
      {"performance", [&] { return criterion_performance(weights); }},
      {"serialization-cli", [&] { return criterion_serialization(weights); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    std::cerr << "criterion " << id << " (" << criteria[i].first << ")" << std::endl;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << std::setw(2) << id << " " << std::left << std::setw(22)
              << criteria[i].first << std::right << " " << o.detail << " [" << std::fixed << std::setprecision(1)
              << seconds_since(t0) << " s]" << std::defaultfloat << std::endl;
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
