#include <benchmark/benchmark.h>

#include "swbf/beamform.hpp"
#include "swbf/deconv.hpp"
#include "swbf/despeckle.hpp"
#include "swbf/envelope.hpp"
#include "swbf/pipeline.hpp"
#include "swbf/switchable.hpp"

using namespace swbf;

namespace {

// Default geometry: 48 elements, 16-element aperture, 32 lines, 6 mm focus.
ArrayGeometry desk_geometry(std::size_t depth) {
  ArrayGeometry g;
  g.depth_samples = depth;
  return g;
}

ApertureCube speckle_cube(std::size_t depth) {
  const auto g = desk_geometry(depth);
  Phantom spec;
  RegionSpec r;
  r.label = "speckle";
  r.x_min = -6e-3;
  r.x_max = 6e-3;
  r.z_min = 0.5e-3;
  r.z_max = 11e-3;
  r.density_per_mm2 = 40.0;
  spec.regions.push_back(r);
  const auto phantom = sample_diffuse_scatterers(spec, 3);
  return beamform_channels(simulate_rf(g, phantom, PulseModel{}));
}

void BM_SimulateAndBeamform(benchmark::State& state) {
  const auto g = desk_geometry(static_cast<std::size_t>(state.range(0)));
  Phantom spec;
  spec.scatterers.push_back({0.0, 6e-3, 1.0});
  for (auto _ : state) benchmark::DoNotOptimize(beamform_channels(simulate_rf(g, spec, PulseModel{})));
}
BENCHMARK(BM_SimulateAndBeamform)->Arg(192)->Unit(benchmark::kMillisecond);

void BM_Das(benchmark::State& state) {
  const auto cube = speckle_cube(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(das(cube));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Das)->Arg(192)->Arg(384)->Unit(benchmark::kMicrosecond);

void BM_Envelope(benchmark::State& state) {
  const Matrix u = das(speckle_cube(192));
  for (auto _ : state) benchmark::DoNotOptimize(log_compress(envelope_image(u)));
}
BENCHMARK(BM_Envelope)->Unit(benchmark::kMicrosecond);

void BM_Fista(benchmark::State& state) {
  const auto cube = speckle_cube(192);
  const Matrix env = envelope_image(das(cube));
  const Psf psf = simulated_psf(cube.geom, PulseModel{});
  for (auto _ : state) benchmark::DoNotOptimize(deconv_target(env, psf));
}
BENCHMARK(BM_Fista)->Unit(benchmark::kMillisecond);

void BM_Despeckle(benchmark::State& state) {
  const auto img = display_threshold(log_compress(envelope_image(das(speckle_cube(192)))));
  for (auto _ : state) benchmark::DoNotOptimize(despeckle_target(img));
}
BENCHMARK(BM_Despeckle)->Unit(benchmark::kMillisecond);

void BM_InferPlanes(benchmark::State& state) {
  SwitchableModel<float> model(Architecture{});
  model.initialize(1);
  model.freeze_codes();
  const auto cube = speckle_cube(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(infer_frame(model, cube, Style::Despeckle));
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.SetLabel("items = depth planes");
}
BENCHMARK(BM_InferPlanes)->Arg(192)->Arg(384)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
