#include "swbf/io/archive.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include <zlib.h>

#include "swbf/error.hpp"

namespace swbf::io {

std::uint32_t crc32(std::span<const unsigned char> bytes) noexcept {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  std::size_t off = 0;
  while (off < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - off, std::numeric_limits<uInt>::max()));
    crc = ::crc32(crc, bytes.data() + off, chunk);
    off += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::uint32_t crc32(std::string_view bytes) noexcept {
  return crc32(std::span(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorKind::Io, "read failed: " + path.string());
  return data;
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot create " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

namespace {

template <typename U>
void put_le(std::string& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

template <typename U>
U get_le(std::string_view b) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<unsigned char>(b[i])) << (8 * i);
  return v;
}

}  // namespace

void ByteWriter::u16(std::uint16_t v) { put_le(out_, v); }
void ByteWriter::u32(std::uint32_t v) { put_le(out_, v); }
void ByteWriter::f32(float v) { put_le(out_, std::bit_cast<std::uint32_t>(v)); }
void ByteWriter::f64(double v) { put_le(out_, std::bit_cast<std::uint64_t>(v)); }
void ByteWriter::crc() { u32(crc32(std::string_view(out_))); }

std::string_view ByteReader::bytes(std::size_t n) {
  if (n > remaining()) fail(ErrorKind::CorruptFile, "unexpected end of data");
  const auto out = data_.substr(pos_, n);
  pos_ += n;
  return out;
}

std::uint8_t ByteReader::u8() { return static_cast<std::uint8_t>(bytes(1)[0]); }
std::uint16_t ByteReader::u16() { return get_le<std::uint16_t>(bytes(2)); }
std::uint32_t ByteReader::u32() { return get_le<std::uint32_t>(bytes(4)); }
float ByteReader::f32() { return std::bit_cast<float>(get_le<std::uint32_t>(bytes(4))); }
double ByteReader::f64() { return std::bit_cast<double>(get_le<std::uint64_t>(bytes(8))); }

std::string_view verify_crc(std::string_view file) {
  if (file.size() < 4) fail(ErrorKind::CorruptFile, "file too short for a checksum");
  const auto body = file.substr(0, file.size() - 4);
  const auto stored = get_le<std::uint32_t>(file.substr(file.size() - 4));
  if (stored != crc32(body)) fail(ErrorKind::CorruptFile, "checksum mismatch");
  return body;
}

std::string encode_tensors(std::string_view magic, std::uint32_t version, const std::vector<NamedTensor>& tensors) {
  require(magic.size() == 4, ErrorKind::InvalidArgument, "magic must be 4 bytes");
  ByteWriter w;
  w.bytes(magic);
  w.u32(version);
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    require(t.name.size() <= std::numeric_limits<std::uint16_t>::max(), ErrorKind::InvalidArgument,
            "tensor name too long");
    require(t.dims.size() <= std::numeric_limits<std::uint8_t>::max(), ErrorKind::InvalidArgument,
            "tensor rank too large");
    std::size_t count = 1;
    for (auto d : t.dims) count *= d;
    require(count == t.data.size(), ErrorKind::ShapeMismatch, "tensor " + t.name + " payload does not match dims");
    w.u16(static_cast<std::uint16_t>(t.name.size()));
    w.bytes(t.name);
    w.u8(static_cast<std::uint8_t>(t.dims.size()));
    for (auto d : t.dims) w.u32(d);
    for (float v : t.data) w.f32(v);
  }
  w.crc();
  return w.take();
}

std::vector<NamedTensor> decode_tensors(std::string_view bytes, std::string_view magic, std::uint32_t version) {
  if (bytes.size() < 4 || bytes.substr(0, 4) != magic) {
    fail(ErrorKind::CorruptFile, "bad magic, expected " + std::string(magic));
  }
  ByteReader r(verify_crc(bytes));
  r.bytes(4);
  const auto v = r.u32();
  if (v != version) fail(ErrorKind::CorruptFile, "unsupported format version " + std::to_string(v));
  const auto count = r.u32();
  std::vector<NamedTensor> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    t.name = std::string(r.bytes(r.u16()));
    const auto rank = r.u8();
    std::size_t n = 1;
    for (std::uint8_t k = 0; k < rank; ++k) {
      t.dims.push_back(r.u32());
      if (t.dims.back() != 0 && n > r.remaining() / t.dims.back()) {
        fail(ErrorKind::CorruptFile, "tensor " + t.name + " exceeds the file size");
      }
      n *= t.dims.back();
    }
    if (n > r.remaining() / 4) fail(ErrorKind::CorruptFile, "tensor " + t.name + " exceeds the file size");
    t.data.resize(n);
    for (auto& x : t.data) x = r.f32();
    out.push_back(std::move(t));
  }
  if (r.remaining() != 0) fail(ErrorKind::CorruptFile, "trailing bytes after the last tensor");
  return out;
}

}  // namespace swbf::io
