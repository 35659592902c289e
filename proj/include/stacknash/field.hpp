#pragma once

#include <span>
#include <vector>

#include "stacknash/grid.hpp"

namespace stacknash {

/// Scalar function sampled on the grid: (M+1) time rows by (N+1) space nodes.
///
/// Row conventions used across the solvers:
///   - forward states occupy rows 0..M (row 0 = initial data);
///   - backward/adjoint trajectories occupy rows 0..M (row M = terminal data);
///   - control fields occupy rows 0..M-1; the step from level n-1 to n reads
///     controls at row n-1, so row M of a control field is unused and kept 0.
class SpaceTimeField {
 public:
  SpaceTimeField() = default;
  explicit SpaceTimeField(GridPtr grid, double fill = 0.0);

  const Grid& grid() const { return *grid_; }
  GridPtr grid_ptr() const { return grid_; }
  bool empty() const { return grid_ == nullptr; }

  double& operator()(int n, int j) { return values_[idx(n, j)]; }
  double operator()(int n, int j) const { return values_[idx(n, j)]; }

  std::span<double> row(int n) { return {values_.data() + idx(n, 0), cols()}; }
  std::span<const double> row(int n) const {
    return {values_.data() + idx(n, 0), cols()};
  }

  std::size_t rows() const { return grid_ ? grid_->time_steps() + 1 : 0; }
  std::size_t cols() const { return grid_ ? grid_->space_cells() + 1 : 0; }

  std::span<double> data() { return values_; }
  std::span<const double> data() const { return values_; }

  bool all_finite() const;
  double max_abs() const;

  SpaceTimeField& operator+=(const SpaceTimeField& other);
  SpaceTimeField& operator-=(const SpaceTimeField& other);
  SpaceTimeField& operator*=(double c);

 private:
  std::size_t idx(int n, int j) const { return static_cast<std::size_t>(n) * cols() + j; }

  GridPtr grid_;
  std::vector<double> values_;
};

/// L2(Omega) norm of one row under the trapezoidal node weights.
double row_l2_norm(const Grid& grid, std::span<const double> row);

/// Discrete L2(Q) norm: sqrt(dt * sum over all rows of the weighted row norms).
double field_l2_norm(const SpaceTimeField& f);

/// Relative L2(Q) distance ||a-b|| / max(||a||, ||b||, floor).
double relative_change(const SpaceTimeField& a, const SpaceTimeField& b,
                       double floor = 1e-300);

}  // namespace stacknash
