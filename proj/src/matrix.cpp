#include "proce/matrix.hpp"

#include <cmath>

#include "proce/error.hpp"

namespace proce {

bool Matrix::all_finite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::vector<double> matvec(const Matrix& m, const std::vector<double>& x) {
  if (x.size() != m.cols) {
    throw ShapeError("matvec: vector length " + std::to_string(x.size()) +
                     " does not match matrix cols " + std::to_string(m.cols));
  }
  std::vector<double> y(m.rows, 0.0);
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double* row = m.row(r);
    double acc = 0.0;
    for (std::size_t c = 0; c < m.cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
  return y;
}

}  // namespace proce
