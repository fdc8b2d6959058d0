#include "swbf/dataset.hpp"

#include <cmath>
#include <numeric>

#include "swbf/error.hpp"
#include "swbf/rng.hpp"

namespace swbf {

Dataset build_dataset(const std::vector<ApertureCube>& cubes, const Psf& psf, const PipelineSettings& settings,
                      std::uint64_t seed, std::size_t context, double val_fraction) {
  require(!cubes.empty(), ErrorKind::InvalidArgument, "no frames to sample");
  require(val_fraction >= 0.0 && val_fraction < 1.0, ErrorKind::InvalidArgument, "val_fraction must be in [0, 1)");
  Dataset ds;
  ds.channels = cubes.front().data.channels();
  ds.lines = cubes.front().data.lines();
  ds.context = context;

  std::vector<TrainingSample> all;
  for (std::size_t f = 0; f < cubes.size(); ++f) {
    const auto& cube = cubes[f];
    require(cube.data.channels() == ds.channels && cube.data.lines() == ds.lines, ErrorKind::ShapeMismatch,
            "frames must share aperture size and line count");
    const auto images = classical_style_images(cube, psf, settings);
    const double scale = frame_scale(cube);
    for (std::size_t n = 0; n < cube.data.depth(); ++n) {
      const auto slab = prepare_slab(cube, n, context, scale, settings.dynamic_range);
      TrainingSample s;
      s.input = slab.input;
      s.slab_mean = static_cast<float>(slab.mean);
      s.slab_std = static_cast<float>(slab.std);
      s.level_db = static_cast<float>(slab.level_db);
      s.frame = static_cast<std::uint32_t>(f);
      s.depth = static_cast<std::uint32_t>(n);
      for (std::size_t k = 0; k < 4; ++k) {
        const auto row = images[k].db.row(static_cast<Eigen::Index>(n));
        auto& t = s.targets[k];
        t.resize(ds.lines);
        for (std::size_t l = 0; l < ds.lines; ++l) {
          t[l] = static_cast<float>(row(static_cast<Eigen::Index>(l)));
          require(std::isfinite(t[l]), ErrorKind::InvalidInput, "non-finite target value");
        }
      }
      all.push_back(std::move(s));
    }
  }

  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  const auto n_val = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(all.size())));
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_val ? ds.val : ds.train).push_back(std::move(all[order[i]]));
  }
  return ds;
}

}  // namespace swbf
