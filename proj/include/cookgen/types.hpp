// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <sstream>
#include <stdexcept>
#include <string>

namespace cookgen {

// Dense row-major storage throughout; checkpoints narrow to float on disk.
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Matd = Mat<double>;
using Matf = Mat<float>;
using RowVecd = Eigen::Matrix<double, 1, Eigen::Dynamic, Eigen::RowMajor>;

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string shape_str(Eigen::Index rows, Eigen::Index cols) {
  std::ostringstream os;
  os << rows << "x" << cols;
  return os.str();
}

template <typename Derived>
std::string shape_str(const Eigen::MatrixBase<Derived>& m) {
  return shape_str(m.rows(), m.cols());
}

}  // namespace cookgen
