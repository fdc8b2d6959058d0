#pragma once

#include <Eigen/Core>

#include "swbf/grid.hpp"

namespace swbf {

struct Svd {
  Matrix u;              // m x k, orthonormal columns
  Eigen::VectorXd s;     // k singular values, descending
  Matrix v;              // n x k, orthonormal columns
};

/// Thin SVD by one-sided (Hestenes) Jacobi rotations; k = min(m, n).
Svd jacobi_svd(const Matrix& a, double tol = 1e-15, int max_sweeps = 60);

}  // namespace swbf
