#include "stacknash/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace stacknash {

Grid::Grid(int space_cells, int time_steps, double horizon, Grading grading)
    : n_(space_cells), m_(time_steps), horizon_(horizon) {
  if (space_cells < 4 || time_steps < 4)
    throw std::invalid_argument("grid: need at least 4 cells in space and time");
  if (!(horizon > 0.0))
    throw std::invalid_argument("grid: horizon must be positive");

  nodes_.resize(n_ + 1);
  for (int j = 0; j <= n_; ++j) {
    const double s = static_cast<double>(j) / n_;
    nodes_[j] = (grading == Grading::kGradedLeft) ? s * s : s;
  }
  nodes_.front() = 0.0;
  nodes_.back() = 1.0;

  times_.resize(m_ + 1);
  for (int k = 0; k <= m_; ++k) times_[k] = horizon_ * k / m_;
  times_.back() = horizon_;

  weights_.assign(n_ + 1, 0.0);
  for (int k = 0; k < n_; ++k) {
    const double half = 0.5 * cell_width(k);
    weights_[k] += half;
    weights_[k + 1] += half;
  }
}

double Grid::masked_measure(std::span<const std::uint8_t> mask) const {
  double s = 0.0;
  for (int j = 0; j <= n_; ++j)
    if (mask[j]) s += weights_[j];
  return s;
}

GridPtr build_grid(int space_cells, int time_steps, double horizon, Grading grading) {
  return std::make_shared<const Grid>(space_cells, time_steps, horizon, grading);
}

}  // namespace stacknash
