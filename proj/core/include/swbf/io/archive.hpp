#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace swbf::io {

/// CRC-32 (IEEE 802.3), as used by zip and png.
std::uint32_t crc32(std::span<const unsigned char> bytes) noexcept;
std::uint32_t crc32(std::string_view bytes) noexcept;

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

/// Little-endian writer for the binary formats.
class ByteWriter {
 public:
  void bytes(std::string_view b) { out_.append(b); }
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void f32(float v);
  void f64(double v);
  /// Appends the CRC-32 of everything written so far.
  void crc();
  const std::string& str() const noexcept { return out_; }
  std::string take() noexcept { return std::move(out_); }

 private:
  std::string out_;
};

/// Little-endian reader; every overrun throws CorruptFile.
class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}
  std::string_view bytes(std::size_t n);
  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  float f32();
  double f64();
  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  std::size_t position() const noexcept { return pos_; }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

/// Splits off and checks the trailing CRC-32; returns the covered bytes.
std::string_view verify_crc(std::string_view file);

struct NamedTensor {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> data;

  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

/// magic (4 bytes), version u32, count u32, then per tensor: name length u16 +
/// UTF-8 name, rank u8, dims u32 each, f32 payload; CRC-32 trailer.
std::string encode_tensors(std::string_view magic, std::uint32_t version, const std::vector<NamedTensor>& tensors);

/// Throws CorruptFile on a wrong magic, unsupported version, size mismatch or CRC failure.
std::vector<NamedTensor> decode_tensors(std::string_view bytes, std::string_view magic, std::uint32_t version);

}  // namespace swbf::io
