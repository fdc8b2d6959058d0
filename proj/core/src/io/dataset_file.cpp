#include "swbf/io/dataset_file.hpp"

#include <cmath>

#include "swbf/error.hpp"
#include "swbf/io/archive.hpp"

namespace swbf::io {

namespace {

void encode_split(const std::string& split, const Dataset& ds, const std::vector<TrainingSample>& samples,
                  std::vector<NamedTensor>& out) {
  const auto S = static_cast<std::uint32_t>(samples.size());
  const auto J = static_cast<std::uint32_t>(ds.channels);
  const auto L = static_cast<std::uint32_t>(ds.lines);
  const auto K = static_cast<std::uint32_t>(ds.context);
  NamedTensor input{split + ".input", {S, J, L, K}, {}};
  NamedTensor targets{split + ".targets", {S, 4, L}, {}};
  NamedTensor meta{split + ".meta", {S, 5}, {}};
  for (const auto& s : samples) {
    require(s.input.size() == std::size_t{J} * L * K, ErrorKind::ShapeMismatch, "sample input shape mismatch");
    input.data.insert(input.data.end(), s.input.data().begin(), s.input.data().end());
    for (const auto& t : s.targets) {
      require(t.size() == L, ErrorKind::ShapeMismatch, "sample target length mismatch");
      targets.data.insert(targets.data.end(), t.begin(), t.end());
    }
    meta.data.insert(meta.data.end(), {s.slab_mean, s.slab_std, s.level_db, static_cast<float>(s.frame),
                                       static_cast<float>(s.depth)});
  }
  out.push_back(std::move(input));
  out.push_back(std::move(targets));
  out.push_back(std::move(meta));
}

std::vector<TrainingSample> decode_split(const std::vector<NamedTensor>& t, std::size_t first, const Dataset& ds) {
  const auto& input = t[first];
  const auto& targets = t[first + 1];
  const auto& meta = t[first + 2];
  if (input.dims.size() != 4 || targets.dims.size() != 3 || meta.dims.size() != 2) {
    fail(ErrorKind::CorruptFile, "bad dataset tensor ranks");
  }
  const std::size_t S = input.dims[0];
  const std::size_t J = ds.channels, L = ds.lines, K = ds.context;
  if (targets.dims[0] != S || targets.dims[1] != 4 || targets.dims[2] != L || meta.dims[0] != S ||
      meta.dims[1] != 5) {
    fail(ErrorKind::CorruptFile, "inconsistent dataset tensor shapes");
  }
  std::vector<TrainingSample> out(S);
  for (std::size_t i = 0; i < S; ++i) {
    auto& s = out[i];
    const auto* in = input.data.data() + i * J * L * K;
    s.input = nn::Tensor<float>({J, L, K}, std::vector<float>(in, in + J * L * K));
    for (std::size_t k = 0; k < 4; ++k) {
      const auto* tp = targets.data.data() + (i * 4 + k) * L;
      s.targets[k].assign(tp, tp + L);
    }
    const auto* m = meta.data.data() + i * 5;
    s.slab_mean = m[0];
    s.slab_std = m[1];
    s.level_db = m[2];
    s.frame = static_cast<std::uint32_t>(m[3]);
    s.depth = static_cast<std::uint32_t>(m[4]);
  }
  return out;
}

}  // namespace

std::string encode_dataset(const Dataset& ds) {
  std::vector<NamedTensor> tensors;
  encode_split("train", ds, ds.train, tensors);
  encode_split("val", ds, ds.val, tensors);
  return encode_tensors(kDatasetMagic, kDatasetVersion, tensors);
}

Dataset decode_dataset(std::string_view bytes) {
  const auto t = decode_tensors(bytes, kDatasetMagic, kDatasetVersion);
  const char* names[] = {"train.input", "train.targets", "train.meta", "val.input", "val.targets", "val.meta"};
  if (t.size() != 6) fail(ErrorKind::CorruptFile, "dataset file must hold 6 tensors");
  for (std::size_t i = 0; i < 6; ++i) {
    if (t[i].name != names[i]) fail(ErrorKind::CorruptFile, "unexpected tensor " + t[i].name);
  }
  if (t[0].dims.size() != 4 || t[3].dims.size() != 4) fail(ErrorKind::CorruptFile, "bad input tensor rank");
  Dataset ds;
  ds.channels = t[0].dims[1];
  ds.lines = t[0].dims[2];
  ds.context = t[0].dims[3];
  if (t[3].dims[1] != ds.channels || t[3].dims[2] != ds.lines || t[3].dims[3] != ds.context) {
    fail(ErrorKind::CorruptFile, "train and val shapes differ");
  }
  ds.train = decode_split(t, 0, ds);
  ds.val = decode_split(t, 3, ds);
  return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) { write_file(path, encode_dataset(ds)); }

Dataset load_dataset(const std::filesystem::path& path) { return decode_dataset(read_file(path)); }

}  // namespace swbf::io
