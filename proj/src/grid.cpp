#include "cennq/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cennq {

CellGrid::CellGrid(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("grid dimensions must be >= 1");
}

CellGrid::CellGrid(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("grid dimensions must be >= 1");
  if (values_.size() != rows * cols)
    throw std::invalid_argument("grid value count does not match rows * cols");
}

double max_abs_diff(const CellGrid& a, const CellGrid& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("max_abs_diff: shape mismatch");
  double worst = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) worst = std::max(worst, std::abs(av[i] - bv[i]));
  return worst;
}

}  // namespace cennq
