// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <vector>

#include "cookgen/types.hpp"

namespace cookgen {

// Elementwise max(x, 0). Returned as an Eigen expression.
template <typename Derived>
auto relu(const Eigen::MatrixBase<Derived>& x) {
  return x.cwiseMax(typename Derived::Scalar(0));
}

// Integer power by repeated multiplication; exact for power >= 1 and cheaper
// and more predictable than std::pow for the small exponents used here.
inline double ipow(double x, int power) {
  double r = x;
  for (int i = 1; i < power; ++i) r *= x;
  return r;
}

inline Matd elem_pow(const Matd& a, int power) {
  if (power < 1) throw error("elem_pow: power must be >= 1, got " + std::to_string(power));
  return a.unaryExpr([power](double v) { return ipow(v, power); });
}

// Column means with the addends of each column summed in ascending value
// order, so the result is bitwise independent of the row order of the input.
inline Matd row_mean(const Matd& a) {
  if (a.rows() == 0) throw error("row_mean: empty input (0 rows)");
  const Eigen::Index m = a.rows(), n = a.cols();
  Matd out(1, n);
  std::vector<double> col(static_cast<std::size_t>(m));
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) col[static_cast<std::size_t>(i)] = a(i, j);
    std::sort(col.begin(), col.end());
    double s = 0.0;
    for (double v : col) s += v;
    out(0, j) = s / static_cast<double>(m);
  }
  return out;
}

// Row t of the result is the mean of rows 0..t of the input, accumulated in
// row order. Backs teacher-forced losses where every prefix mean is needed.
inline Matd prefix_row_means(const Matd& a) {
  if (a.rows() == 0) throw error("prefix_row_means: empty input (0 rows)");
  Matd out(a.rows(), a.cols());
  RowVecd running = RowVecd::Zero(a.cols());
  for (Eigen::Index t = 0; t < a.rows(); ++t) {
    running += a.row(t);
    out.row(t) = running / static_cast<double>(t + 1);
  }
  return out;
}

}  // namespace cookgen
