#include "swbf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace swbf {

Svd jacobi_svd(const Matrix& a, double tol, int max_sweeps) {
  if (a.rows() < a.cols()) {
    Svd t = jacobi_svd(a.transpose(), tol, max_sweeps);
    return {std::move(t.v), std::move(t.s), std::move(t.u)};
  }
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  // Column-major work copy so column rotations touch contiguous memory.
  Eigen::MatrixXd w = a;
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double alpha = w.col(p).squaredNorm();
        const double beta = w.col(q).squaredNorm();
        const double gamma = w.col(p).dot(w.col(q));
        if (gamma == 0.0 || std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Eigen::Index i = 0; i < m; ++i) {
          const double wp = w(i, p);
          const double wq = w(i, q);
          w(i, p) = c * wp - s * wq;
          w(i, q) = s * wp + c * wq;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
          const double vp = v(i, p);
          const double vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Eigen::VectorXd norms(n);
  for (Eigen::Index j = 0; j < n; ++j) norms(j) = w.col(j).norm();
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return norms(i) > norms(j); });

  Svd out{Matrix::Zero(m, n), Eigen::VectorXd(n), Matrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index j = order[static_cast<std::size_t>(k)];
    out.s(k) = norms(j);
    if (norms(j) > 0.0) out.u.col(k) = w.col(j) / norms(j);
    out.v.col(k) = v.col(j);
  }
  return out;
}

}  // namespace swbf
