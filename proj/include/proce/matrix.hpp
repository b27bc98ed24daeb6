#pragma once

#include <cstddef>
#include <vector>

namespace proce {

// Dense row-major matrix of doubles. Deliberately minimal: the networks here
// are small MLPs, so a flat vector with stride arithmetic is all that's
// needed, and it keeps serialization trivial.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  const double* row(std::size_t r) const { return data.data() + r * cols; }
  double* row(std::size_t r) { return data.data() + r * cols; }

  std::size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }
  bool all_finite() const;
};

// y = M x (x has M.cols entries; result has M.rows).
std::vector<double> matvec(const Matrix& m, const std::vector<double>& x);

}  // namespace proce
