#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "netsel/errors.hpp"

namespace netsel {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Dense row-major value container for the numeric ops' public surface.
// Internals use Eigen views over the same buffers.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> values;

  Tensor() = default;
  Tensor(std::initializer_list<std::size_t> dims, double fill = 0.0)
      : shape(dims), values(numel_of(shape), fill) {}
  explicit Tensor(std::vector<std::size_t> dims, double fill = 0.0)
      : shape(std::move(dims)), values(numel_of(shape), fill) {}

  static std::size_t numel_of(const std::vector<std::size_t>& dims) {
    std::size_t n = 1;
    for (std::size_t d : dims) n *= d;
    return n;
  }

  std::size_t numel() const { return values.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }

  double& at(std::size_t r, std::size_t c) {
    return values[r * shape.at(1) + c];
  }
  double at(std::size_t r, std::size_t c) const {
    return values[r * shape.at(1) + c];
  }

  bool all_finite() const {
    for (double v : values)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

inline Tensor tensor_from_matrix(const Matrix& m) {
  Tensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      t.values[static_cast<std::size_t>(r * m.cols() + c)] = m(r, c);
  return t;
}

inline Matrix matrix_from_tensor(const Tensor& t) {
  require(t.rank() == 2, ErrorCode::shape_mismatch, "expected rank-2 tensor");
  Matrix m(static_cast<Eigen::Index>(t.dim(0)), static_cast<Eigen::Index>(t.dim(1)));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      m(r, c) = t.values[static_cast<std::size_t>(r * m.cols() + c)];
  return m;
}

}  // namespace netsel
