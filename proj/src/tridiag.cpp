#include "stacknash/tridiag.hpp"

#include <cmath>
#include <stdexcept>

namespace stacknash {

void TriDiag::apply(std::span<const double> x, std::span<double> y) const {
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    double v = diag[i] * x[i];
    if (i > 0) v += lower[i] * x[i - 1];
    if (i + 1 < n) v += upper[i] * x[i + 1];
    y[i] = v;
  }
}

TriDiag TriDiag::weighted_transpose(std::span<const double> w) const {
  const std::size_t n = size();
  TriDiag t(n);
  t.diag = diag;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    t.upper[i] = lower[i + 1] * w[i + 1] / w[i];
    t.lower[i + 1] = upper[i] * w[i] / w[i + 1];
  }
  return t;
}

TriDiagSolver::TriDiagSolver(const TriDiag& t) {
  const std::size_t n = t.size();
  if (n == 0) throw std::invalid_argument("tridiag solver: empty system");
  c_.resize(n);
  inv_d_.resize(n);
  lower_ = t.lower;

  double pivot = t.diag[0];
  if (pivot == 0.0 || !std::isfinite(pivot))
    throw std::runtime_error("tridiag solver: singular pivot");
  inv_d_[0] = 1.0 / pivot;
  c_[0] = t.upper[0] * inv_d_[0];
  for (std::size_t i = 1; i < n; ++i) {
    pivot = t.diag[i] - t.lower[i] * c_[i - 1];
    if (pivot == 0.0 || !std::isfinite(pivot))
      throw std::runtime_error("tridiag solver: singular pivot");
    inv_d_[i] = 1.0 / pivot;
    c_[i] = (i + 1 < n) ? t.upper[i] * inv_d_[i] : 0.0;
  }
}

void TriDiagSolver::solve(std::span<const double> rhs, std::span<double> x) const {
  const std::size_t n = size();
  x[0] = rhs[0] * inv_d_[0];
  for (std::size_t i = 1; i < n; ++i)
    x[i] = (rhs[i] - lower_[i] * x[i - 1]) * inv_d_[i];
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= c_[i] * x[i + 1];
}

}  // namespace stacknash
