#include "swbf/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include "swbf/error.hpp"

namespace swbf {

namespace {

BModeImage das_image(const ApertureCube& cube) { return log_compress(envelope_image(das(cube))); }

}  // namespace

std::array<BModeImage, 4> classical_style_images(const ApertureCube& cube, const Psf& psf,
                                                 const PipelineSettings& settings) {
  const double dr = settings.dynamic_range;
  const Matrix env = envelope_image(das(cube));
  const BModeImage das_db = display_threshold(log_compress(env), dr);
  const BModeImage deconv_db = display_threshold(deconv_target(env, psf, settings.deconv), dr);
  std::array<BModeImage, 4> out;
  out[index_of(Style::Das)] = das_db;
  out[index_of(Style::Deconvolution)] = deconv_db;
  out[index_of(Style::Despeckle)] = display_threshold(despeckle_target(das_db, settings.despeckle), dr);
  out[index_of(Style::DeconvDespeckle)] = display_threshold(despeckle_target(deconv_db, settings.despeckle), dr);
  return out;
}

BModeImage classical_image(const ApertureCube& cube, Style style, const Psf& psf, const PipelineSettings& settings) {
  const double dr = settings.dynamic_range;
  switch (style) {
    case Style::Das:
      return display_threshold(das_image(cube), dr);
    case Style::Despeckle:
      return display_threshold(despeckle_target(display_threshold(das_image(cube), dr), settings.despeckle), dr);
    case Style::Deconvolution:
      return display_threshold(deconv_target(envelope_image(das(cube)), psf, settings.deconv), dr);
    case Style::DeconvDespeckle: {
      const auto d = display_threshold(deconv_target(envelope_image(das(cube)), psf, settings.deconv), dr);
      return display_threshold(despeckle_target(d, settings.despeckle), dr);
    }
  }
  fail(ErrorKind::InvalidArgument, "unknown style");
}

double frame_scale(const ApertureCube& cube) {
  const auto d = cube.data.data();
  require(!d.empty(), ErrorKind::InvalidInput, "empty aperture cube");
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= static_cast<double>(d.size());
  double var = 0.0;
  for (double v : d) var += (v - mean) * (v - mean);
  return std::sqrt(var / static_cast<double>(d.size()));
}

PreparedSlab prepare_slab(const ApertureCube& cube, std::size_t n, std::size_t context, double frame_std,
                          double dynamic_range) {
  const InputSlab slab = make_input_slab(cube, n, context);
  PreparedSlab out;
  double mean = 0.0;
  for (double v : slab.data) mean += v;
  mean /= static_cast<double>(slab.data.size());
  double var = 0.0;
  for (double v : slab.data) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(slab.data.size()));
  out.mean = mean;
  out.std = sd;
  std::vector<float> values(slab.data.size(), 0.0f);
  if (sd > 0.0) {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<float>((slab.data[i] - mean) / sd);
  }
  out.input = nn::Tensor<float>({slab.channels, slab.lines, slab.context}, std::move(values));
  const double floor = -dynamic_range;
  out.level_db = (sd > 0.0 && frame_std > 0.0) ? std::max(20.0 * std::log10(sd / frame_std), floor) : floor;
  return out;
}

InferenceResult infer_frame(const SwitchableModel<float>& model, const ApertureCube& cube, Style style,
                            double dynamic_range, std::size_t threads) {
  const auto& arch = model.arch();
  const std::size_t L = cube.data.lines();
  const std::size_t N = cube.data.depth();
  require(cube.data.channels() == arch.in_channels && L == arch.lines, ErrorKind::ShapeMismatch,
          "aperture cube does not match the model architecture");
  const auto code = model.code_for(style);
  const double scale = frame_scale(cube);

  InferenceResult res;
  res.raw.db = Matrix::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(L));
  res.raw.reference_max = 1.0;
  res.plane_seconds.assign(N, 0.0);
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(N, 1));
  std::vector<std::size_t> degenerate(threads, 0);

  auto work = [&](std::size_t worker) {
    for (std::size_t n = worker; n < N; n += threads) {
      const auto start = std::chrono::steady_clock::now();
      const auto slab = prepare_slab(cube, n, arch.context, scale, dynamic_range);
      const auto line = model.forward(slab.input, code, &degenerate[worker]);
      for (std::size_t l = 0; l < L; ++l) {
        res.raw.db(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(l)) =
            static_cast<double>(line[l]) + slab.level_db;
      }
      const auto stop = std::chrono::steady_clock::now();
      res.plane_seconds[n] = std::chrono::duration<double>(stop - start).count();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& t : pool) t.join();
  }
  for (auto d : degenerate) res.degenerate += d;
  res.display = display_threshold(res.raw, dynamic_range);
  return res;
}

namespace {

template <typename Pred>
BoolMatrix physical_mask(const ArrayGeometry& geom, Pred inside) {
  const auto N = static_cast<Eigen::Index>(geom.depth_samples);
  const auto L = static_cast<Eigen::Index>(geom.scan_lines);
  BoolMatrix m(N, L);
  for (Eigen::Index n = 0; n < N; ++n) {
    const double z = geom.sample_depth(static_cast<std::size_t>(n));
    for (Eigen::Index l = 0; l < L; ++l) m(n, l) = inside(geom.line_x(static_cast<std::size_t>(l)), z);
  }
  return m;
}

}  // namespace

BoolMatrix disk_mask(const ArrayGeometry& geom, double center_x, double center_z, double radius) {
  return physical_mask(geom, [&](double x, double z) {
    return std::hypot(x - center_x, z - center_z) <= radius;
  });
}

BoolMatrix ring_mask(const ArrayGeometry& geom, double center_x, double center_z, double r_inner, double r_outer) {
  return physical_mask(geom, [&](double x, double z) {
    const double r = std::hypot(x - center_x, z - center_z);
    return r >= r_inner && r <= r_outer;
  });
}

BoolMatrix rect_mask(const ArrayGeometry& geom, double x_min, double x_max, double z_min, double z_max) {
  return physical_mask(geom, [&](double x, double z) { return x >= x_min && x <= x_max && z >= z_min && z <= z_max; });
}

}  // namespace swbf
