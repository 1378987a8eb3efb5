#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cennq {

/// Row-major M x N plane of cell values (states, inputs or outputs).
class CellGrid {
 public:
  CellGrid() = default;
  CellGrid(std::size_t rows, std::size_t cols, double fill = 0.0);
  CellGrid(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t height() const { return rows_; }
  std::size_t width() const { return cols_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  bool same_shape(const CellGrid& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const CellGrid&, const CellGrid&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// Largest elementwise |a - b|; grids must share a shape.
double max_abs_diff(const CellGrid& a, const CellGrid& b);

}  // namespace cennq
