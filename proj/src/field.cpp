#include "stacknash/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stacknash {

SpaceTimeField::SpaceTimeField(GridPtr grid, double fill) : grid_(std::move(grid)) {
  values_.assign(rows() * cols(), fill);
}

bool SpaceTimeField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

double SpaceTimeField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

SpaceTimeField& SpaceTimeField::operator+=(const SpaceTimeField& other) {
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

SpaceTimeField& SpaceTimeField::operator-=(const SpaceTimeField& other) {
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

SpaceTimeField& SpaceTimeField::operator*=(double c) {
  for (double& v : values_) v *= c;
  return *this;
}

double row_l2_norm(const Grid& grid, std::span<const double> row) {
  double s = 0.0;
  for (int j = 0; j <= grid.space_cells(); ++j)
    s += grid.node_weight(j) * row[j] * row[j];
  return std::sqrt(s);
}

double field_l2_norm(const SpaceTimeField& f) {
  if (f.empty()) return 0.0;
  const Grid& g = f.grid();
  double s = 0.0;
  for (std::size_t n = 0; n < f.rows(); ++n) {
    const double r = row_l2_norm(g, f.row(static_cast<int>(n)));
    s += g.dt() * r * r;
  }
  return std::sqrt(s);
}

double relative_change(const SpaceTimeField& a, const SpaceTimeField& b, double floor) {
  SpaceTimeField d = a;
  d -= b;
  const double denom = std::max({field_l2_norm(a), field_l2_norm(b), floor});
  return field_l2_norm(d) / denom;
}

}  // namespace stacknash
