#include "swbf/io/weights.hpp"

#include <cmath>
#include <map>

#include "swbf/error.hpp"
#include "swbf/io/archive.hpp"

namespace swbf::io {

namespace {

std::string code_name(Style s, std::string_view field) {
  return "code." + std::string(style_key(s)) + "." + std::string(field);
}

std::vector<std::uint32_t> dims_of(const nn::Tensor<float>& t) {
  return {t.shape().begin(), t.shape().end()};
}

// The slope is stored as f32; recover the short decimal it came from when possible.
double decode_slope(float f) {
  const double rounded = std::round(static_cast<double>(f) * 1e6) / 1e6;
  return static_cast<float>(rounded) == f ? rounded : static_cast<double>(f);
}

}  // namespace

std::string encode_weights(const SwitchableModel<float>& model) {
  const auto& a = model.arch();
  std::vector<NamedTensor> tensors;
  tensors.push_back({"meta.arch",
                     {8},
                     {static_cast<float>(a.in_channels), static_cast<float>(a.lines), static_cast<float>(a.context),
                      static_cast<float>(a.width), static_cast<float>(a.bottleneck), static_cast<float>(a.gen_hidden1),
                      static_cast<float>(a.gen_hidden2), static_cast<float>(a.leaky_slope)}});
  const auto& params = model.parameters();
  const auto& names = model.parameter_names();
  for (std::size_t i = 0; i < params.size(); ++i) {
    tensors.push_back({names[i], dims_of(params[i]), {params[i].data().begin(), params[i].data().end()}});
  }
  for (Style s : kAllStyles) {
    const auto code = model.code_for(s);
    const auto P = static_cast<std::uint32_t>(code.mean.size());
    tensors.push_back({code_name(s, "mean"), {P}, code.mean});
    tensors.push_back({code_name(s, "var"), {P}, code.variance});
  }
  return encode_tensors(kWeightsMagic, kWeightsVersion, tensors);
}

SwitchableModel<float> decode_weights(std::string_view bytes) {
  auto tensors = decode_tensors(bytes, kWeightsMagic, kWeightsVersion);
  std::map<std::string, NamedTensor*> by_name;
  for (auto& t : tensors) {
    if (!by_name.emplace(t.name, &t).second) fail(ErrorKind::CorruptFile, "duplicate tensor " + t.name);
  }
  auto get = [&](const std::string& name) -> NamedTensor& {
    const auto it = by_name.find(name);
    if (it == by_name.end()) fail(ErrorKind::CorruptFile, "missing tensor " + name);
    return *it->second;
  };

  const auto& meta = get("meta.arch");
  if (meta.data.size() != 8) fail(ErrorKind::CorruptFile, "meta.arch must hold 8 values");
  auto count = [&](std::size_t i) {
    const float v = meta.data[i];
    if (!(v >= 1.0f && v <= 16777216.0f) || v != std::floor(v)) fail(ErrorKind::CorruptFile, "bad architecture field");
    return static_cast<std::size_t>(v);
  };
  Architecture arch;
  arch.in_channels = count(0);
  arch.lines = count(1);
  arch.context = count(2);
  arch.width = count(3);
  arch.bottleneck = count(4);
  arch.gen_hidden1 = count(5);
  arch.gen_hidden2 = count(6);
  arch.leaky_slope = decode_slope(meta.data[7]);
  try {
    arch.validate();
  } catch (const Error& e) {
    fail(ErrorKind::CorruptFile, std::string("invalid architecture: ") + e.what());
  }

  SwitchableModel<float> model(arch);
  auto& params = model.parameters();
  const auto& names = model.parameter_names();
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& t = get(names[i]);
    if (t.dims != dims_of(params[i])) fail(ErrorKind::CorruptFile, "shape mismatch for " + names[i]);
    params[i] = nn::Tensor<float>(params[i].shape(), std::move(t.data));
  }
  std::array<AdaInCode<float>, 4> codes;
  for (Style s : kAllStyles) {
    auto& m = get(code_name(s, "mean"));
    auto& v = get(code_name(s, "var"));
    if (m.data.size() != arch.bottleneck || v.data.size() != arch.bottleneck) {
      fail(ErrorKind::CorruptFile, "code length mismatch for " + std::string(style_key(s)));
    }
    codes[index_of(s)] = {std::move(m.data), std::move(v.data)};
  }
  model.set_stored_codes(std::move(codes));
  const std::size_t expected = 1 + params.size() + 8;
  if (tensors.size() != expected) fail(ErrorKind::CorruptFile, "unexpected tensors in weight file");
  return model;
}

void save_weights(const SwitchableModel<float>& model, const std::filesystem::path& path) {
  write_file(path, encode_weights(model));
}

SwitchableModel<float> load_weights(const std::filesystem::path& path) { return decode_weights(read_file(path)); }

}  // namespace swbf::io
