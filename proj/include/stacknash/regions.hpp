#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stacknash/grid.hpp"

namespace stacknash {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool valid() const { return lo < hi; }
};

/// Per-node 0/1 mask of a closed subinterval. A node lying exactly on the
/// interval boundary belongs to the region.
std::vector<std::uint8_t> interval_mask(const Grid& grid, const Interval& iv);

/// Control-region geometry: leader region omega, follower regions omega1/2,
/// shared observation region omega_d. Construction enforces
///   omega_i disjoint from omega (i = 1,2)  and  omega_d meets omega,
/// both decided exactly on the node masks.
class ControlLayout {
 public:
  ControlLayout(GridPtr grid, Interval omega, Interval omega1, Interval omega2,
                Interval omega_d);

  const Grid& grid() const { return *grid_; }
  GridPtr grid_ptr() const { return grid_; }

  const Interval& omega() const { return omega_; }
  const Interval& omega1() const { return omega1_; }
  const Interval& omega2() const { return omega2_; }
  const Interval& omega_d() const { return omega_d_; }

  const std::vector<std::uint8_t>& omega_mask() const { return omega_mask_; }
  const std::vector<std::uint8_t>& omega1_mask() const { return omega1_mask_; }
  const std::vector<std::uint8_t>& omega2_mask() const { return omega2_mask_; }
  const std::vector<std::uint8_t>& omega_d_mask() const { return omega_d_mask_; }

  const std::vector<std::uint8_t>& follower_mask(int i) const {
    return i == 1 ? omega1_mask_ : omega2_mask_;
  }

  double omega_measure() const { return grid_->masked_measure(omega_mask_); }
  double follower_measure(int i) const {
    return grid_->masked_measure(follower_mask(i));
  }
  double omega_d_measure() const { return grid_->masked_measure(omega_d_mask_); }

 private:
  GridPtr grid_;
  Interval omega_, omega1_, omega2_, omega_d_;
  std::vector<std::uint8_t> omega_mask_, omega1_mask_, omega2_mask_, omega_d_mask_;
};

}  // namespace stacknash
