#include "swbf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "swbf/error.hpp"

namespace swbf {

void RegionMask::validate(Eigen::Index rows, Eigen::Index cols) const {
  require(target.rows() == rows && target.cols() == cols && background.rows() == rows &&
              background.cols() == cols,
          ErrorKind::ShapeMismatch, "mask shape does not match the image");
  require(target.any(), ErrorKind::EmptyRegion, "target region is empty");
  require(background.any(), ErrorKind::EmptyRegion, "background region is empty");
  require(!(target && background).any(), ErrorKind::InvalidArgument, "target and background overlap");
}

RegionStats region_stats(const Matrix& db, const BoolMatrix& region) {
  require(region.rows() == db.rows() && region.cols() == db.cols(), ErrorKind::ShapeMismatch,
          "region shape does not match the image");
  RegionStats s;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < db.size(); ++i) {
    if (region.data()[i]) {
      sum += db.data()[i];
      ++s.count;
    }
  }
  require(s.count > 0, ErrorKind::EmptyRegion, "region is empty");
  s.mean = sum / static_cast<double>(s.count);
  double ss = 0.0;
  for (Eigen::Index i = 0; i < db.size(); ++i) {
    if (region.data()[i]) ss += (db.data()[i] - s.mean) * (db.data()[i] - s.mean);
  }
  s.std = std::sqrt(ss / static_cast<double>(s.count));
  return s;
}

double cr(const BModeImage& img, const RegionMask& mask) {
  mask.validate(img.db.rows(), img.db.cols());
  return std::abs(region_stats(img.db, mask.target).mean - region_stats(img.db, mask.background).mean);
}

double cnr(const BModeImage& img, const RegionMask& mask) {
  mask.validate(img.db.rows(), img.db.cols());
  const auto t = region_stats(img.db, mask.target);
  const auto b = region_stats(img.db, mask.background);
  const double denom = std::sqrt(t.std * t.std + b.std * b.std);
  require(denom > 0.0, ErrorKind::ZeroVariance, "both regions have zero variance");
  return std::abs(t.mean - b.mean) / denom;
}

double gcnr(const BModeImage& img, const RegionMask& mask, std::size_t bins) {
  mask.validate(img.db.rows(), img.db.cols());
  require(bins >= 1, ErrorKind::InvalidArgument, "bins must be >= 1");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Eigen::Index i = 0; i < img.db.size(); ++i) {
    if (mask.target.data()[i] || mask.background.data()[i]) {
      lo = std::min(lo, img.db.data()[i]);
      hi = std::max(hi, img.db.data()[i]);
    }
  }
  std::vector<double> ht(bins, 0.0);
  std::vector<double> hb(bins, 0.0);
  double nt = 0.0;
  double nb = 0.0;
  const double width = hi - lo;
  for (Eigen::Index i = 0; i < img.db.size(); ++i) {
    const bool in_t = mask.target.data()[i];
    const bool in_b = mask.background.data()[i];
    if (!in_t && !in_b) continue;
    std::size_t bin = 0;
    if (width > 0.0) {
      bin = static_cast<std::size_t>((img.db.data()[i] - lo) / width * static_cast<double>(bins));
      bin = std::min(bin, bins - 1);
    }
    if (in_t) {
      ht[bin] += 1.0;
      nt += 1.0;
    } else {
      hb[bin] += 1.0;
      nb += 1.0;
    }
  }
  double overlap = 0.0;
  for (std::size_t k = 0; k < bins; ++k) overlap += std::min(ht[k] / nt, hb[k] / nb);
  return std::clamp(1.0 - overlap, 0.0, 1.0);
}

double fwhm_lateral(const BModeImage& img, std::size_t row, double level) {
  require(static_cast<Eigen::Index>(row) < img.db.rows(), ErrorKind::InvalidArgument, "row out of range");
  require(level < 0.0, ErrorKind::InvalidArgument, "level must be negative");
  const auto line = img.db.row(static_cast<Eigen::Index>(row));
  const Eigen::Index cols = line.size();
  Eigen::Index peak = 0;
  const double pv = line.maxCoeff(&peak);
  require((line.array() == pv).count() == 1, ErrorKind::NoPeak, "row has no unique maximum");
  const double cut = pv + level;

  // Walk outward until the profile drops below the cut; interpolate the crossing.
  double left = 0.0;
  Eigen::Index i = peak;
  while (i > 0 && line(i - 1) >= cut) --i;
  if (i == 0) {
    left = 0.0;
  } else {
    left = static_cast<double>(i) - (line(i) - cut) / (line(i) - line(i - 1));
  }
  double right = 0.0;
  Eigen::Index j = peak;
  while (j + 1 < cols && line(j + 1) >= cut) ++j;
  if (j + 1 == cols) {
    right = static_cast<double>(cols - 1);
  } else {
    right = static_cast<double>(j) + (line(j) - cut) / (line(j) - line(j + 1));
  }
  return right - left;
}

SpeckleSnr speckle_snr(const BModeImage& img, const BoolMatrix& region) {
  const auto s = region_stats(img.db, region);
  if (s.std == 0.0) return {std::numeric_limits<double>::max(), true};
  require(s.mean != 0.0, ErrorKind::ZeroMean, "region mean is zero");
  return {std::abs(s.mean) / s.std, false};
}

}  // namespace swbf
