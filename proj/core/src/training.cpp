#include "swbf/training.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "swbf/error.hpp"
#include "swbf/rng.hpp"

namespace swbf {

namespace {

std::vector<float> residual_target(const TrainingSample& s, Style style) {
  const auto& t = s.targets[index_of(style)];
  std::vector<float> r(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) r[i] = t[i] - s.level_db;
  return r;
}

double sample_mse(const std::vector<float>& out, const TrainingSample& s, Style target) {
  const auto& t = s.targets[index_of(target)];
  double sum = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double r = static_cast<double>(out[i]) + s.level_db - t[i];
    sum += r * r;
  }
  return sum / static_cast<double>(out.size());
}

}  // namespace

double style_mse(const SwitchableModel<float>& model, const std::vector<TrainingSample>& samples, Style code_style,
                 Style target_style) {
  require(!samples.empty(), ErrorKind::InvalidArgument, "no samples to score");
  const auto code = model.generate_code(static_cast<float>(style_code(code_style)));
  double total = 0.0;
  for (const auto& s : samples) total += sample_mse(model.forward(s.input, code), s, target_style);
  return total / static_cast<double>(samples.size());
}

std::array<std::array<double, 4>, 4> cross_style_mse(const SwitchableModel<float>& model,
                                                     const std::vector<TrainingSample>& samples) {
  require(!samples.empty(), ErrorKind::InvalidArgument, "no samples to score");
  std::array<std::array<double, 4>, 4> m{};
  for (Style c : kAllStyles) {
    const auto code = model.generate_code(static_cast<float>(style_code(c)));
    for (const auto& s : samples) {
      const auto out = model.forward(s.input, code);
      for (Style t : kAllStyles) m[index_of(c)][index_of(t)] += sample_mse(out, s, t);
    }
  }
  for (auto& row : m) {
    for (auto& v : row) v /= static_cast<double>(samples.size());
  }
  return m;
}

TrainHistory train(SwitchableModel<float>& model, const Dataset& data, const TrainConfig& config,
                   const EpochCallback& on_epoch) {
  require(!data.train.empty(), ErrorKind::InvalidArgument, "training set is empty");
  require(config.batch >= 1 && config.epochs >= 1, ErrorKind::InvalidArgument, "batch and epochs must be >= 1");
  require(!config.styles.empty(), ErrorKind::InvalidArgument, "no styles to train");

  Rng rng(config.seed);
  nn::AdamState<float> adam;
  TrainHistory hist;
  std::vector<nn::Tensor<float>> grads;
  for (const auto& p : model.parameters()) grads.emplace_back(p.shape());

  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto& val = data.val.empty() ? data.train : data.val;

  double best = std::numeric_limits<double>::infinity();
  auto best_params = model.parameters();
  std::size_t since_best = 0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    rng.shuffle(std::span<std::size_t>(order));
    double train_sum = 0.0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += config.batch) {
      const std::size_t b1 = std::min(order.size(), b0 + config.batch);
      for (auto& g : grads) g.fill(0.0f);
      const float w = 1.0f / static_cast<float>(b1 - b0);
      for (std::size_t i = b0; i < b1; ++i) {
        const auto& s = data.train[order[i]];
        std::vector<Style> styles;
        if (config.sampling == StyleSampling::All) {
          styles = config.styles;
        } else {
          styles.push_back(config.styles[rng.index(config.styles.size())]);
        }
        std::vector<std::vector<float>> targets;
        std::vector<StyleTarget<float>> items;
        for (Style style : styles) targets.push_back(residual_target(s, style));
        for (std::size_t k = 0; k < styles.size(); ++k) {
          items.push_back({static_cast<float>(style_code(styles[k])), targets[k]});
        }
        float loss = 0.0f;
        try {
          for (float l : model.accumulate_gradient(s.input, items, grads, w, &hist.degenerate)) loss += l;
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::NonFiniteLoss) throw;
          std::ostringstream msg;
          msg << "non-finite loss at epoch " << epoch << ", step " << hist.steps << ", frame " << s.frame
              << ", depth " << s.depth;
          fail(ErrorKind::NonFiniteLoss, msg.str());
        }
        train_sum += loss;
      }
      nn::adam_step<float>(model.parameters(), grads, adam, config.adam);
      ++hist.steps;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = train_sum / static_cast<double>(order.size());
    rec.val_loss.fill(std::numeric_limits<double>::quiet_NaN());
    for (Style s : config.styles) {
      if (!std::isnan(rec.val_loss[index_of(s)])) continue;
      rec.val_loss[index_of(s)] = style_mse(model, val, s, s);
      rec.val_total += rec.val_loss[index_of(s)];
    }
    require(std::isfinite(rec.val_total), ErrorKind::NonFiniteLoss,
            "non-finite validation loss at epoch " + std::to_string(epoch));
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    hist.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (rec.val_total < best) {
      best = rec.val_total;
      best_params = model.parameters();
      hist.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      hist.early_stopped = true;
      break;
    }
  }
  model.parameters() = best_params;
  model.freeze_codes();
  return hist;
}

}  // namespace swbf
