// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

#include "cookgen/types.hpp"

namespace cookgen {

struct GradCheckResult {
  double max_rel_error = 0.0;
  // Coordinate where the worst error occurred, for diagnostics.
  std::size_t tensor = 0;
  Eigen::Index row = 0;
  Eigen::Index col = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

// Compares an analytic gradient against central differences of f, coordinate
// by coordinate: numeric = (f(x+h) - f(x-h)) / 2h, relative error measured
// against max(|analytic|, |numeric|, 1e-8). f must be deterministic; a
// non-finite f value aborts the check.
GradCheckResult grad_check(const std::function<double(const std::vector<Matd>&)>& f,
                           std::vector<Matd> point, const std::vector<Matd>& analytic,
                           double h = 1e-5);

}  // namespace cookgen
