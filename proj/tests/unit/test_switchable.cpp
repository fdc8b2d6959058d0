#include <cmath>
#include <limits>

#include "doctest.h"
#include "swbf/beamform.hpp"
#include "swbf/dataset.hpp"
#include "swbf/error.hpp"
#include "swbf/pipeline.hpp"
#include "swbf/rng.hpp"
#include "swbf/switchable.hpp"
#include "swbf/training.hpp"

using namespace swbf;

namespace {

Architecture tiny_arch() {
  Architecture a;
  a.in_channels = 2;
  a.lines = 4;
  a.context = 3;
  a.width = 3;
  a.bottleneck = 4;
  a.gen_hidden1 = 3;
  a.gen_hidden2 = 5;
  return a;
}

template <typename T>
nn::Tensor<T> random_slab(const Architecture& a, std::uint64_t seed) {
  nn::Tensor<T> t({a.in_channels, a.lines, a.context});
  Rng rng(seed);
  for (auto& v : t.data()) v = static_cast<T>(rng.normal());
  return t;
}

TrainingSample random_sample(const Architecture& a, std::uint64_t seed) {
  TrainingSample s;
  s.input = random_slab<float>(a, seed);
  Rng rng(seed + 1000);
  for (auto& t : s.targets) {
    t.resize(a.lines);
    for (auto& v : t) v = static_cast<float>(-30.0 + 5.0 * rng.normal());
  }
  s.level_db = -20.0f;
  s.depth = static_cast<std::uint32_t>(seed);
  return s;
}

Dataset random_dataset(const Architecture& a, std::size_t n_train, std::size_t n_val) {
  Dataset d{a.in_channels, a.lines, a.context, {}, {}};
  for (std::size_t i = 0; i < n_train; ++i) d.train.push_back(random_sample(a, i + 1));
  for (std::size_t i = 0; i < n_val; ++i) d.val.push_back(random_sample(a, i + 500));
  return d;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

ArrayGeometry small_geometry() {
  ArrayGeometry g;
  g.element_count = 12;
  g.aperture_size = 4;
  g.scan_lines = 8;
  g.depth_samples = 48;
  return g;
}

ApertureCube small_cube(std::uint64_t seed) {
  const auto g = small_geometry();
  Phantom ph;
  RegionSpec r;
  r.label = "speckle";
  r.x_min = -1.6e-3;
  r.x_max = 1.6e-3;
  r.z_min = 0.2e-3;
  r.z_max = 3.0e-3;
  r.density_per_mm2 = 20.0;
  ph.regions.push_back(r);
  return beamform_channels(simulate_rf(g, sample_diffuse_scatterers(ph, seed), PulseModel{}));
}

PipelineSettings fast_settings() {
  PipelineSettings s;
  s.deconv.max_iters = 50;
  s.despeckle.patch = 4;
  s.despeckle.stride = 2;
  s.despeckle.search_radius = 4;
  s.despeckle.group_size = 6;
  s.despeckle.guidance_window = 3;
  s.despeckle.iterations = 1;
  return s;
}

}  // namespace

TEST_CASE("default architecture parameter count") {
  const Architecture a;
  SwitchableModel<float> m(a);
  const std::size_t J = 16, W = 16, P = 32;
  auto conv = [](std::size_t ci, std::size_t co, std::size_t kh, std::size_t kw) { return ci * co * kh * kw + co; };
  auto dense = [](std::size_t i, std::size_t o) { return i * o + o; };
  // Blue blocks hold two convs, yellow blocks one.
  const std::size_t encoder = conv(J, W, 3, 3) + 5 * conv(W, W, 3, 3) + conv(W, P, 3, 3);
  const std::size_t decoder = conv(P, W, 3, 3) + 8 * conv(W, W, 3, 3) + conv(W, 1, 1, 7);
  const std::size_t gen = dense(1, 16) + dense(16, 64) + 2 * dense(64, P);
  CHECK(m.scalar_count() == encoder + decoder + gen);
  CHECK(m.parameters().size() == m.parameter_names().size());
  CHECK(m.parameter_names().front() == "enc1.conv1.weight");
  CHECK(m.parameter_names().back() == "gen.var.bias");
}

TEST_CASE("architecture validation") {
  auto a = tiny_arch();
  a.context = 4;
  CHECK_THROWS_AS(a.validate(), Error);
  a = tiny_arch();
  a.width = 0;
  CHECK_THROWS_AS(a.validate(), Error);
}

TEST_CASE("initial codes have non-negative variance and differ across styles") {
  SwitchableModel<float> m(Architecture{});
  m.initialize(3);
  std::vector<float> first;
  for (Style s : kAllStyles) {
    const auto code = m.code_for(s);
    REQUIRE(code.mean.size() == 32);
    for (float v : code.variance) CHECK(v >= 0.0f);
  }
  const auto slab = random_slab<float>(m.arch(), 4);
  const auto a = m.forward(slab, Style::Das);
  const auto b = m.forward(slab, Style::DeconvDespeckle);
  REQUIRE(a.size() == 32);
  double gap = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) gap = std::max(gap, static_cast<double>(std::abs(a[i] - b[i])));
  CHECK(gap > 0.0);
}

TEST_CASE("AdaIN with the features' own statistics is the identity") {
  SwitchableModel<double> m(tiny_arch());
  m.initialize(5);
  const auto slab = random_slab<double>(m.arch(), 6);
  const auto st = m.bottleneck_stats(slab);
  AdaInCode<double> own{st.mean, {}};
  for (double s : st.std) own.variance.push_back(s * s);
  CHECK(max_abs_diff(m.forward(slab, own), m.forward_without_adain(slab)) < 1e-9);
}

TEST_CASE("forward is deterministic and checks the slab shape") {
  SwitchableModel<float> a(tiny_arch());
  SwitchableModel<float> b(tiny_arch());
  a.initialize(9);
  b.initialize(9);
  CHECK(a.parameters() == b.parameters());
  const auto slab = random_slab<float>(a.arch(), 1);
  CHECK(a.forward(slab, Style::Deconvolution) == b.forward(slab, Style::Deconvolution));
  nn::Tensor<float> bad({2, 4, 5});
  CHECK_THROWS_AS(a.forward(bad, Style::Das), Error);
}

TEST_CASE("stored codes match the generator and survive casting") {
  SwitchableModel<float> m(tiny_arch());
  m.initialize(2);
  CHECK_FALSE(m.stored_codes().has_value());
  m.freeze_codes();
  REQUIRE(m.stored_codes().has_value());
  const auto g = m.generate_code(static_cast<float>(style_code(Style::Despeckle)));
  CHECK((*m.stored_codes())[index_of(Style::Despeckle)].mean == g.mean);
  const auto d = m.cast<double>();
  REQUIRE(d.stored_codes().has_value());
  CHECK((*d.stored_codes())[1].variance.size() == 4);
}

TEST_CASE("full-model gradient matches finite differences") {
  SwitchableModel<double> m(tiny_arch());
  m.initialize(11);
  const auto slab = random_slab<double>(m.arch(), 12);
  const std::vector<double> target{0.3, -0.7, 1.1, 0.2};
  const double c = 0.5;
  std::vector<nn::Tensor<double>> grads;
  m.accumulate_gradient(slab, c, target, grads);
  REQUIRE(grads.size() == m.parameters().size());
  const double h = 1e-6;
  double worst = 0.0;
  for (std::size_t p = 0; p < m.parameters().size(); ++p) {
    auto& t = m.parameters()[p];
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double keep = t[i];
      t[i] = keep + h;
      const double up = m.loss(slab, c, target);
      t[i] = keep - h;
      const double dn = m.loss(slab, c, target);
      t[i] = keep;
      const double fd = (up - dn) / (2.0 * h);
      const double err = std::abs(fd - grads[p][i]) / std::max(1.0, std::abs(fd));
      if (err > worst) worst = err;
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("gradient accumulation is linear in the weight") {
  SwitchableModel<double> m(tiny_arch());
  m.initialize(13);
  const auto slab = random_slab<double>(m.arch(), 14);
  const std::vector<double> target{1.0, 0.0, -1.0, 0.5};
  std::vector<nn::Tensor<double>> one;
  std::vector<nn::Tensor<double>> two;
  const double l1 = m.accumulate_gradient(slab, -1.0, target, one, 1.0);
  m.accumulate_gradient(slab, -1.0, target, two, 0.5);
  m.accumulate_gradient(slab, -1.0, target, two, 0.5);
  CHECK(l1 == doctest::Approx(m.loss(slab, -1.0, target)));
  for (std::size_t p = 0; p < one.size(); ++p) {
    for (std::size_t i = 0; i < one[p].size(); ++i) CHECK(two[p][i] == doctest::Approx(one[p][i]).epsilon(1e-12));
  }
}

TEST_CASE("shared-encoder gradient equals the sum of single-style gradients") {
  SwitchableModel<double> m(tiny_arch());
  m.initialize(17);
  const auto slab = random_slab<double>(m.arch(), 18);
  const std::vector<double> t1{0.3, -0.7, 1.1, 0.2};
  const std::vector<double> t2{-1.0, 0.4, 0.0, 0.9};
  std::vector<nn::Tensor<double>> separate;
  const double l1 = m.accumulate_gradient(slab, -1.0, t1, separate, 0.25);
  const double l2 = m.accumulate_gradient(slab, 0.5, t2, separate, 0.25);
  const std::vector<StyleTarget<double>> items{{-1.0, t1}, {0.5, t2}};
  std::vector<nn::Tensor<double>> shared;
  const auto losses = m.accumulate_gradient(slab, items, shared, 0.25);
  REQUIRE(losses.size() == 2);
  CHECK(losses[0] == doctest::Approx(l1).epsilon(1e-14));
  CHECK(losses[1] == doctest::Approx(l2).epsilon(1e-14));
  double worst = 0.0;
  for (std::size_t p = 0; p < shared.size(); ++p) {
    for (std::size_t i = 0; i < shared[p].size(); ++i) {
      worst = std::max(worst, std::abs(shared[p][i] - separate[p][i]) / std::max(1.0, std::abs(separate[p][i])));
    }
  }
  CHECK(worst < 1e-12);

  // Central differences of the summed loss.
  const double h = 1e-6;
  double fd_worst = 0.0;
  auto& w = m.parameters()[0];
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double keep = w[i];
    w[i] = keep + h;
    const double up = m.loss(slab, -1.0, t1) + m.loss(slab, 0.5, t2);
    w[i] = keep - h;
    const double dn = m.loss(slab, -1.0, t1) + m.loss(slab, 0.5, t2);
    w[i] = keep;
    const double fd = 0.25 * (up - dn) / (2.0 * h);
    fd_worst = std::max(fd_worst, std::abs(fd - shared[0][i]) / std::max(1.0, std::abs(fd)));
  }
  CHECK(fd_worst < 1e-4);
}

TEST_CASE("all-style training reports the summed loss") {
  const auto a = tiny_arch();
  const Dataset d = random_dataset(a, 3, 1);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch = 3;
  cfg.adam.lr0 = 0.0;
  SwitchableModel<float> m(a);
  m.initialize(19);
  const auto hist = train(m, d, cfg);
  double expect = 0.0;
  for (Style s : kAllStyles) expect += style_mse(m, d.train, s, s);
  CHECK(hist.epochs.front().train_loss == doctest::Approx(expect).epsilon(1e-4));

  cfg.sampling = StyleSampling::Random;
  cfg.styles = {Style::Despeckle};
  SwitchableModel<float> r(a);
  r.initialize(19);
  const auto one = train(r, d, cfg);
  CHECK(one.epochs.front().train_loss ==
        doctest::Approx(style_mse(r, d.train, Style::Despeckle, Style::Despeckle)).epsilon(1e-4));
}

TEST_CASE("training overfits a single sample") {
  const auto a = tiny_arch();
  SwitchableModel<float> m(a);
  m.initialize(15);
  const Dataset d = random_dataset(a, 1, 0);
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.batch = 1;
  cfg.patience = 200;
  cfg.styles = {Style::Das};
  cfg.adam.lr0 = 1e-2;
  const auto hist = train(m, d, cfg);
  REQUIRE(hist.epochs.size() == 200);
  CHECK(hist.steps == 200);
  const double initial = hist.epochs.front().train_loss;
  CHECK(style_mse(m, d.train, Style::Das, Style::Das) < 0.01 * initial);
  CHECK(std::isnan(hist.epochs.back().val_loss[index_of(Style::Deconvolution)]));
  REQUIRE(m.stored_codes().has_value());
}

TEST_CASE("early stopping honours patience and restores the best epoch") {
  const auto a = tiny_arch();
  SwitchableModel<float> m(a);
  m.initialize(16);
  const auto before = m.parameters();
  const Dataset d = random_dataset(a, 6, 2);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.batch = 4;
  cfg.patience = 3;
  cfg.adam.lr0 = 0.0;  // frozen weights: validation never improves after epoch 0
  std::size_t calls = 0;
  const auto hist = train(m, d, cfg, [&](const EpochRecord&) { ++calls; });
  CHECK(hist.early_stopped);
  CHECK(hist.best_epoch == 0);
  CHECK(hist.epochs.size() == 4);
  CHECK(calls == 4);
  CHECK(hist.steps == 8);
  CHECK(m.parameters() == before);
}

TEST_CASE("training is reproducible from its seeds") {
  const auto a = tiny_arch();
  const Dataset d = random_dataset(a, 10, 2);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch = 3;
  auto run = [&] {
    SwitchableModel<float> m(a);
    m.initialize(17);
    const auto h = train(m, d, cfg);
    std::vector<double> losses;
    for (const auto& e : h.epochs) losses.push_back(e.train_loss);
    return std::pair{losses, m.parameters()};
  };
  const auto x = run();
  const auto y = run();
  CHECK(x.first == y.first);
  CHECK(x.second == y.second);
}

TEST_CASE("training rejects bad configurations") {
  const auto a = tiny_arch();
  SwitchableModel<float> m(a);
  m.initialize(1);
  TrainConfig cfg;
  CHECK_THROWS_AS(train(m, Dataset{}, cfg), Error);
  cfg.styles.clear();
  CHECK_THROWS_AS(train(m, random_dataset(a, 2, 0), cfg), Error);
}

TEST_CASE("cross-style matrix diagonal equals per-style mse") {
  const auto a = tiny_arch();
  SwitchableModel<float> m(a);
  m.initialize(18);
  const Dataset d = random_dataset(a, 4, 0);
  const auto mat = cross_style_mse(m, d.train);
  for (Style s : kAllStyles) {
    CHECK(mat[index_of(s)][index_of(s)] == doctest::Approx(style_mse(m, d.train, s, s)));
  }
}

TEST_CASE("dataset construction from simulated frames") {
  const std::vector<ApertureCube> cubes{small_cube(1), small_cube(2)};
  const Psf psf = simulated_psf(cubes[0].geom, PulseModel{});
  const auto settings = fast_settings();
  const Dataset d = build_dataset(cubes, psf, settings, 5, 3, 0.1);
  const std::size_t total = 2 * 48;
  CHECK(d.train.size() + d.val.size() == total);
  CHECK(d.val.size() == static_cast<std::size_t>(std::llround(0.1 * total)));
  CHECK(d.channels == 4);
  CHECK(d.lines == 8);
  CHECK(d.context == 3);
  for (const auto& s : d.train) {
    CHECK(s.input.shape() == std::vector<std::size_t>{4, 8, 3});
    CHECK(s.level_db >= -60.0f);
    for (const auto& t : s.targets) {
      REQUIRE(t.size() == 8);
      for (float v : t) {
        CHECK(v >= -60.0f);
        CHECK(v <= 0.0f);
      }
    }
  }
  CHECK(build_dataset(cubes, psf, settings, 5, 3, 0.1) == d);
  const Dataset other = build_dataset(cubes, psf, settings, 6, 3, 0.1);
  CHECK_FALSE(other.val == d.val);
}

TEST_CASE("prepared slabs are standardized") {
  const auto cube = small_cube(3);
  const double fs = frame_scale(cube);
  const auto p = prepare_slab(cube, 20, 3, fs);
  double mean = 0.0;
  for (float v : p.input.data()) mean += v;
  mean /= static_cast<double>(p.input.size());
  double var = 0.0;
  for (float v : p.input.data()) var += (v - mean) * (v - mean);
  var /= static_cast<double>(p.input.size());
  CHECK(std::abs(mean) < 1e-5);
  CHECK(var == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(p.level_db == doctest::Approx(std::max(20.0 * std::log10(p.std / fs), -60.0)));
}

TEST_CASE("frame inference shape, timing and thread independence") {
  const auto cube = small_cube(4);
  Architecture a = tiny_arch();
  a.in_channels = 4;
  a.lines = 8;
  SwitchableModel<float> m(a);
  m.initialize(19);
  m.freeze_codes();
  const auto r1 = infer_frame(m, cube, Style::Despeckle, 60.0, 1);
  CHECK(r1.raw.db.rows() == 48);
  CHECK(r1.raw.db.cols() == 8);
  CHECK(r1.plane_seconds.size() == 48);
  CHECK(r1.display.db.maxCoeff() <= 0.0);
  CHECK(r1.display.db.minCoeff() >= -60.0);
  const auto r3 = infer_frame(m, cube, Style::Despeckle, 60.0, 3);
  CHECK(r1.raw.db == r3.raw.db);
}
