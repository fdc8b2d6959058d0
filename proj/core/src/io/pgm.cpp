#include "swbf/io/pgm.hpp"

#include <cctype>
#include <string>

#include "swbf/error.hpp"
#include "swbf/io/archive.hpp"

namespace swbf::io {

void save_pgm(const BModeImage& img, const std::filesystem::path& path, double dynamic_range) {
  write_file(path, render_pgm(img, dynamic_range));
}

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::string_view bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
  std::string tok;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) tok.push_back(bytes[pos++]);
  return tok;
}

std::size_t header_number(std::string_view bytes, std::size_t& pos) {
  const auto tok = header_token(bytes, pos);
  if (tok.empty() || tok.size() > 9 || tok.find_first_not_of("0123456789") != std::string::npos) {
    fail(ErrorKind::CorruptFile, "bad PGM header field '" + tok + "'");
  }
  return std::stoul(tok);
}

}  // namespace

BModeImage decode_pgm(std::string_view bytes, double dynamic_range) {
  require(dynamic_range > 0.0, ErrorKind::InvalidArgument, "dynamic range must be positive");
  std::size_t pos = 0;
  if (header_token(bytes, pos) != "P5") fail(ErrorKind::CorruptFile, "not a binary PGM (P5)");
  const auto width = header_number(bytes, pos);
  const auto height = header_number(bytes, pos);
  const auto maxval = header_number(bytes, pos);
  if (maxval != 255) fail(ErrorKind::CorruptFile, "only 8-bit PGM is supported");
  if (pos >= bytes.size()) fail(ErrorKind::CorruptFile, "PGM header is truncated");
  ++pos;  // single whitespace before the raster
  if (width == 0 || height == 0 || bytes.size() - pos != width * height) {
    fail(ErrorKind::CorruptFile, "PGM raster size does not match the header");
  }
  BModeImage img;
  img.db.resize(static_cast<Eigen::Index>(height), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const auto p = static_cast<unsigned char>(bytes[pos + r * width + c]);
      img.db(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = dynamic_range * (p / 255.0) - dynamic_range;
    }
  }
  img.reference_max = 1.0;
  return img;
}

BModeImage load_pgm(const std::filesystem::path& path, double dynamic_range) {
  return decode_pgm(read_file(path), dynamic_range);
}

}  // namespace swbf::io
