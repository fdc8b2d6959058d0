#include "swbf/despeckle.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "swbf/error.hpp"
#include "swbf/linalg.hpp"

namespace swbf {

void DespeckleParams::validate() const {
  require(patch >= 1, ErrorKind::InvalidArgument, "patch must be >= 1");
  require(patch <= 2 * search_radius, ErrorKind::InvalidArgument, "patch must be <= 2 * search_radius");
  require(group_size >= 2, ErrorKind::InvalidArgument, "group_size must be >= 2");
  require(stride >= 1, ErrorKind::InvalidArgument, "stride must be >= 1");
  require(guidance_window % 2 == 1, ErrorKind::InvalidArgument, "guidance_window must be odd");
  require(!noise_sigma || *noise_sigma >= 0.0, ErrorKind::InvalidArgument, "noise_sigma must be >= 0");
  require(!wnnm_c || *wnnm_c >= 0.0, ErrorKind::InvalidArgument, "wnnm_c must be >= 0");
}

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double m = *mid;
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
  return m;
}

Eigen::Index clamp_index(Eigen::Index i, Eigen::Index n) { return std::clamp<Eigen::Index>(i, 0, n - 1); }

}  // namespace

double estimate_noise_sigma(const Matrix& img) {
  const Eigen::Index rows = img.rows();
  const Eigen::Index cols = img.cols();
  std::vector<double> lap;
  lap.reserve(static_cast<std::size_t>(img.size()));
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      lap.push_back(img(clamp_index(r - 1, rows), c) + img(clamp_index(r + 1, rows), c) +
                    img(r, clamp_index(c - 1, cols)) + img(r, clamp_index(c + 1, cols)) - 4.0 * img(r, c));
    }
  }
  const double med = median(lap);
  for (auto& v : lap) v = std::abs(v - med);
  return median(std::move(lap)) / 0.6745;
}

double default_wnnm_c(double sigma, std::size_t group_size) {
  return 2.8 * std::sqrt(2.0) * sigma * sigma * std::sqrt(static_cast<double>(group_size));
}

Matrix guidance_map(const Matrix& img, std::size_t window) {
  require(window % 2 == 1, ErrorKind::InvalidArgument, "guidance window must be odd");
  const auto half = static_cast<Eigen::Index>(window / 2);
  const Eigen::Index rows = img.rows();
  const Eigen::Index cols = img.cols();
  // Separable box filter: columns first, then rows.
  Matrix tmp(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      double s = 0.0;
      for (Eigen::Index k = -half; k <= half; ++k) s += img(r, clamp_index(c + k, cols));
      tmp(r, c) = s;
    }
  }
  Matrix out(rows, cols);
  const double norm = 1.0 / static_cast<double>(window * window);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      double s = 0.0;
      for (Eigen::Index k = -half; k <= half; ++k) s += tmp(clamp_index(r + k, rows), c);
      out(r, c) = s * norm;
    }
  }
  return out;
}

std::vector<PatchPos> match_patches(const Matrix& guide, PatchPos anchor, const DespeckleParams& p) {
  p.validate();
  const auto P = static_cast<Eigen::Index>(p.patch);
  const auto ar = static_cast<Eigen::Index>(anchor.row);
  const auto ac = static_cast<Eigen::Index>(anchor.col);
  require(ar + P <= guide.rows() && ac + P <= guide.cols(), ErrorKind::InvalidArgument,
          "anchor patch must lie inside the image");
  const auto R = static_cast<Eigen::Index>(p.search_radius);
  const Eigen::Index r0 = std::max<Eigen::Index>(0, ar - R);
  const Eigen::Index r1 = std::min(guide.rows() - P, ar + R);
  const Eigen::Index c0 = std::max<Eigen::Index>(0, ac - R);
  const Eigen::Index c1 = std::min(guide.cols() - P, ac + R);

  const auto ref = guide.block(ar, ac, P, P);
  std::vector<std::tuple<double, Eigen::Index, Eigen::Index>> cand;
  cand.reserve(static_cast<std::size_t>((r1 - r0 + 1) * (c1 - c0 + 1)));
  for (Eigen::Index r = r0; r <= r1; ++r) {
    for (Eigen::Index c = c0; c <= c1; ++c) {
      if (r == ar && c == ac) continue;
      const double d = (guide.block(r, c, P, P) - ref).squaredNorm() / static_cast<double>(P * P);
      cand.emplace_back(d, r, c);
    }
  }
  const std::size_t keep = std::min(cand.size(), p.group_size - 1);
  std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(keep), cand.end());

  std::vector<PatchPos> out;
  out.reserve(keep + 1);
  out.push_back(anchor);
  for (std::size_t i = 0; i < keep; ++i) {
    out.push_back({static_cast<std::size_t>(std::get<1>(cand[i])), static_cast<std::size_t>(std::get<2>(cand[i]))});
  }
  return out;
}

Matrix wnnm_shrink(const Matrix& group, double wnnm_c) {
  require(group.allFinite(), ErrorKind::InvalidInput, "patch group contains non-finite values");
  const Eigen::RowVectorXd means = group.colwise().mean();
  const Matrix centered = group.rowwise() - means;
  const Svd svd = jacobi_svd(centered);
  Eigen::VectorXd s = svd.s;
  for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = std::max(s(i) - wnnm_c / (s(i) + 1e-6), 0.0);
  Matrix out = svd.u * s.asDiagonal() * svd.v.transpose();
  out.rowwise() += means;
  return out;
}

namespace {

std::vector<std::size_t> anchor_starts(std::size_t extent, std::size_t patch, std::size_t stride) {
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + patch <= extent; s += stride) starts.push_back(s);
  if (!starts.empty() && starts.back() + patch < extent) starts.push_back(extent - patch);
  return starts;
}

}  // namespace

BModeImage despeckle_target(const BModeImage& img, const DespeckleParams& p) {
  p.validate();
  const Eigen::Index rows = img.db.rows();
  const Eigen::Index cols = img.db.cols();
  const auto P = static_cast<Eigen::Index>(p.patch);
  require(rows >= P && cols >= P, ErrorKind::InvalidArgument, "image is smaller than one patch");
  require(img.db.allFinite(), ErrorKind::InvalidInput, "image contains non-finite values");

  const double sigma = p.noise_sigma ? *p.noise_sigma : estimate_noise_sigma(img.db);
  const double c = p.wnnm_c ? *p.wnnm_c : default_wnnm_c(sigma, p.group_size);
  const auto row_starts = anchor_starts(static_cast<std::size_t>(rows), p.patch, p.stride);
  const auto col_starts = anchor_starts(static_cast<std::size_t>(cols), p.patch, p.stride);

  Matrix estimate = img.db;
  Matrix acc(rows, cols);
  Matrix hits(rows, cols);
  Matrix group(P * P, static_cast<Eigen::Index>(p.group_size));
  for (std::size_t it = 0; it < p.iterations; ++it) {
    const Matrix guide = guidance_map(estimate, p.guidance_window);
    acc.setZero();
    hits.setZero();
    for (std::size_t ar : row_starts) {
      for (std::size_t ac : col_starts) {
        const auto pos = match_patches(guide, {ar, ac}, p);
        group.resize(P * P, static_cast<Eigen::Index>(pos.size()));
        for (std::size_t g = 0; g < pos.size(); ++g) {
          const auto blk = estimate.block(static_cast<Eigen::Index>(pos[g].row),
                                          static_cast<Eigen::Index>(pos[g].col), P, P);
          for (Eigen::Index i = 0; i < P; ++i) {
            for (Eigen::Index j = 0; j < P; ++j) group(i * P + j, static_cast<Eigen::Index>(g)) = blk(i, j);
          }
        }
        const Matrix shrunk = wnnm_shrink(group, c);
        for (std::size_t g = 0; g < pos.size(); ++g) {
          const auto r = static_cast<Eigen::Index>(pos[g].row);
          const auto cc = static_cast<Eigen::Index>(pos[g].col);
          for (Eigen::Index i = 0; i < P; ++i) {
            for (Eigen::Index j = 0; j < P; ++j) {
              acc(r + i, cc + j) += shrunk(i * P + j, static_cast<Eigen::Index>(g));
              hits(r + i, cc + j) += 1.0;
            }
          }
        }
      }
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index cc = 0; cc < cols; ++cc) {
        if (hits(r, cc) > 0.0) estimate(r, cc) = acc(r, cc) / hits(r, cc);
      }
    }
  }
  return {estimate, img.reference_max};
}

}  // namespace swbf
