#pragma once

#include <memory>
#include <span>
#include <vector>

namespace stacknash {

enum class Grading { kUniform, kGradedLeft };

/// Space-time mesh on (0,T)x(0,1). Space nodes may be graded toward x=0 to
/// resolve a degenerate diffusion coefficient; time levels are uniform.
class Grid {
 public:
  Grid(int space_cells, int time_steps, double horizon,
       Grading grading = Grading::kUniform);

  int space_cells() const { return n_; }              // N
  int time_steps() const { return m_; }               // M
  double horizon() const { return horizon_; }         // T
  double dt() const { return horizon_ / m_; }

  double node(int j) const { return nodes_[j]; }
  double time(int n) const { return times_[n]; }
  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> times() const { return times_; }

  /// Width of cell k = (x_k, x_{k+1}), k = 0..N-1.
  double cell_width(int k) const { return nodes_[k + 1] - nodes_[k]; }
  double cell_midpoint(int k) const { return 0.5 * (nodes_[k] + nodes_[k + 1]); }

  /// Trapezoidal (dual-cell) quadrature weight of node j.
  double node_weight(int j) const { return weights_[j]; }
  std::span<const double> node_weights() const { return weights_; }

  /// Sum of node weights over masked nodes; equals 1 for an all-ones mask.
  double masked_measure(std::span<const std::uint8_t> mask) const;

 private:
  int n_, m_;
  double horizon_;
  std::vector<double> nodes_, times_, weights_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr build_grid(int space_cells, int time_steps, double horizon,
                   Grading grading = Grading::kUniform);

}  // namespace stacknash
