#include "stacknash/regions.hpp"

#include <stdexcept>

namespace stacknash {

std::vector<std::uint8_t> interval_mask(const Grid& grid, const Interval& iv) {
  std::vector<std::uint8_t> mask(grid.space_cells() + 1, 0);
  for (int j = 0; j <= grid.space_cells(); ++j) {
    const double x = grid.node(j);
    if (x >= iv.lo && x <= iv.hi) mask[j] = 1;
  }
  return mask;
}

namespace {

bool masks_intersect(const std::vector<std::uint8_t>& a,
                     const std::vector<std::uint8_t>& b) {
  for (std::size_t j = 0; j < a.size(); ++j)
    if (a[j] && b[j]) return true;
  return false;
}

bool mask_empty(const std::vector<std::uint8_t>& a) {
  for (auto v : a)
    if (v) return false;
  return true;
}

}  // namespace

ControlLayout::ControlLayout(GridPtr grid, Interval omega, Interval omega1,
                             Interval omega2, Interval omega_d)
    : grid_(std::move(grid)),
      omega_(omega),
      omega1_(omega1),
      omega2_(omega2),
      omega_d_(omega_d) {
  for (const Interval* iv : {&omega_, &omega1_, &omega2_, &omega_d_})
    if (!iv->valid() || iv->lo < 0.0 || iv->hi > 1.0)
      throw std::invalid_argument("control layout: regions must be subintervals of (0,1)");

  omega_mask_ = interval_mask(*grid_, omega_);
  omega1_mask_ = interval_mask(*grid_, omega1_);
  omega2_mask_ = interval_mask(*grid_, omega2_);
  omega_d_mask_ = interval_mask(*grid_, omega_d_);

  for (const auto* m : {&omega_mask_, &omega1_mask_, &omega2_mask_, &omega_d_mask_})
    if (mask_empty(*m))
      throw std::invalid_argument("control layout: a region contains no grid node");

  if (masks_intersect(omega1_mask_, omega_mask_))
    throw std::invalid_argument(
        "control layout: follower region omega1 must be disjoint from the leader region omega");
  if (masks_intersect(omega2_mask_, omega_mask_))
    throw std::invalid_argument(
        "control layout: follower region omega2 must be disjoint from the leader region omega");
  if (!masks_intersect(omega_d_mask_, omega_mask_))
    throw std::invalid_argument(
        "control layout: observation region omega_d must intersect the leader region omega");
}

}  // namespace stacknash
