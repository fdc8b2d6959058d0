#include "swbf/io/rf_file.hpp"

#include <limits>

#include "swbf/error.hpp"
#include "swbf/io/archive.hpp"

namespace swbf::io {

std::string encode_cube(const RfCube& cube) {
  const auto& d = cube.data;
  constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
  require(d.lines() <= kMax && d.depth() <= kMax && d.channels() <= kMax, ErrorKind::InvalidArgument,
          "cube dimensions exceed u32");
  ByteWriter w;
  w.bytes(kCubeMagic);
  w.u32(kCubeVersion);
  w.u32(static_cast<std::uint32_t>(d.lines()));
  w.u32(static_cast<std::uint32_t>(d.depth()));
  w.u32(static_cast<std::uint32_t>(d.channels()));
  w.f64(cube.geom.sampling_freq);
  w.f64(cube.geom.center_freq);
  w.f64(cube.geom.sound_speed);
  w.f64(cube.geom.pitch);
  for (double v : d.data()) w.f32(static_cast<float>(v));
  w.crc();
  return w.take();
}

RfCube decode_cube(std::string_view bytes) {
  if (bytes.size() < 4 || bytes.substr(0, 4) != kCubeMagic) fail(ErrorKind::CorruptFile, "bad magic, expected URFC");
  ByteReader r(verify_crc(bytes));
  r.bytes(4);
  const auto version = r.u32();
  if (version != kCubeVersion) fail(ErrorKind::CorruptFile, "unsupported cube version " + std::to_string(version));
  const std::size_t L = r.u32();
  const std::size_t N = r.u32();
  const std::size_t E = r.u32();
  RfCube cube;
  cube.geom.scan_lines = L;
  cube.geom.depth_samples = N;
  cube.geom.element_count = E;
  cube.geom.sampling_freq = r.f64();
  cube.geom.center_freq = r.f64();
  cube.geom.sound_speed = r.f64();
  cube.geom.pitch = r.f64();
  if (L == 0 || N == 0 || E == 0 || N > r.remaining() / 4 / L / E || r.remaining() != 4 * L * N * E) {
    fail(ErrorKind::CorruptFile, "payload length does not match L*N*E");
  }
  cube.data = Cube(L, N, E);
  for (auto& v : cube.data.data()) v = static_cast<double>(r.f32());
  cube.geom.aperture_size = std::min(cube.geom.aperture_size, E);
  return cube;
}

void save_cube(const RfCube& cube, const std::filesystem::path& path) { write_file(path, encode_cube(cube)); }

RfCube load_cube(const std::filesystem::path& path) { return decode_cube(read_file(path)); }

std::size_t infer_aperture_size(const RfCube& cube) {
  const auto& d = cube.data;
  std::size_t widest = 0;
  for (std::size_t l = 0; l < d.lines(); ++l) {
    std::size_t first = d.channels(), last = 0;
    for (std::size_t n = 0; n < d.depth(); ++n) {
      const auto row = d.row(l, n);
      for (std::size_t e = 0; e < row.size(); ++e) {
        if (row[e] != 0.0) {
          first = std::min(first, e);
          last = std::max(last, e);
        }
      }
    }
    if (first <= last) widest = std::max(widest, last - first + 1);
  }
  return widest;
}

}  // namespace swbf::io
