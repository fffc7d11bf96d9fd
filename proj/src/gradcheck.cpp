// SPDX-License-Identifier: Apache-2.0
#include "cookgen/gradcheck.hpp"

#include <cmath>

namespace cookgen {

GradCheckResult grad_check(const std::function<double(const std::vector<Matd>&)>& f,
                           std::vector<Matd> point, const std::vector<Matd>& analytic,
                           double h) {
  if (point.size() != analytic.size())
    throw error("grad_check: " + std::to_string(point.size()) + " tensors but " +
                std::to_string(analytic.size()) + " gradients");
  GradCheckResult result;
  for (std::size_t k = 0; k < point.size(); ++k) {
    const Matd& g = analytic[k];
    Matd& x = point[k];
    if (g.rows() != x.rows() || g.cols() != x.cols())
      throw error("grad_check: tensor " + std::to_string(k) + " is " + shape_str(x) +
                  " but its gradient is " + shape_str(g));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double saved = x(i, j);
        x(i, j) = saved + h;
        const double fp = f(point);
        x(i, j) = saved - h;
        const double fm = f(point);
        x(i, j) = saved;
        if (!std::isfinite(fp) || !std::isfinite(fm))
          throw error("grad_check: non-finite loss at tensor " + std::to_string(k) + " (" +
                      std::to_string(i) + "," + std::to_string(j) + ")");
        const double numeric = (fp - fm) / (2.0 * h);
        const double denom = std::max({std::abs(g(i, j)), std::abs(numeric), 1e-8});
        const double rel = std::abs(g(i, j) - numeric) / denom;
        if (rel > result.max_rel_error) {
          result.max_rel_error = rel;
          result.tensor = k;
          result.row = i;
          result.col = j;
          result.analytic = g(i, j);
          result.numeric = numeric;
        }
      }
    }
  }
  return result;
}

}  // namespace cookgen
