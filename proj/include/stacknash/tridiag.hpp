#pragma once

#include <span>
#include <vector>

namespace stacknash {

/// Tridiagonal operator on the interior nodes 1..N-1 (size N-1). lower[0] and
/// upper[size-1] are never referenced.
struct TriDiag {
  std::vector<double> lower, diag, upper;

  explicit TriDiag(std::size_t size = 0)
      : lower(size, 0.0), diag(size, 0.0), upper(size, 0.0) {}

  std::size_t size() const { return diag.size(); }

  void apply(std::span<const double> x, std::span<double> y) const;

  /// Transpose with respect to the weighted inner product <u,v> = sum w_i u_i v_i:
  /// (T*)_{ij} = T_{ji} w_j / w_i.
  TriDiag weighted_transpose(std::span<const double> w) const;
};

/// Thomas factorization of a tridiagonal matrix; throws on a vanishing pivot.
class TriDiagSolver {
 public:
  explicit TriDiagSolver(const TriDiag& t);
  void solve(std::span<const double> rhs, std::span<double> x) const;
  std::size_t size() const { return c_.size(); }

 private:
  std::vector<double> c_;      // normalized superdiagonal
  std::vector<double> inv_d_;  // reciprocal pivots
  std::vector<double> lower_;
};

}  // namespace stacknash
