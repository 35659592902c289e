#pragma once

#include <functional>
#include <string>
#include <vector>

#include "stacknash/grid.hpp"

namespace stacknash {

/// Degenerate diffusion coefficient a(x) with a(0)=0 and the growth bound
/// x a'(x) <= tau a(x), tau in [0,1). The built-in family is a(x) = x^alpha.
struct DegenerateCoefficient {
  double alpha_exp = 0.5;  // meaningful for the power family only
  std::function<double(double)> a;
  std::function<double(double)> da;
  double tau = 0.5;

  static DegenerateCoefficient power(double alpha);
};

/// Drift weight beta(x) with beta(x)/x bounded and |beta(x)| <= L sqrt(a(x)).
struct DriftWeight {
  std::function<double(double)> beta;
  double bound_L = 0.0;          // filled by beta_bound
  double sup_beta_over_x = 0.0;  // filled by beta_bound

  static DriftWeight identity();  // beta(x) = x
  static DriftWeight zero();
};

struct ValidationClause {
  std::string name;
  bool pass = false;
  double worst = 0.0;  // most violating margin (negative = violation)
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationClause> clauses;
  bool pass() const {
    for (const auto& c : clauses)
      if (!c.pass) return false;
    return true;
  }
};

/// Checks, on the grid nodes: a(0)=0, a>0 on (0,1], x a' <= tau a, and
/// monotonicity of x^2/a(x) across consecutive nodes.
ValidationReport validate_degeneracy(const DegenerateCoefficient& a, const Grid& grid);

/// Squared weighted norm ||u||^2_{L2} + ||sqrt(a) u_x||^2_{L2} by trapezoidal
/// quadrature, with sqrt(a) u_x evaluated at cell midpoints. Requires
/// u(0)=u(1)=0 up to a small tolerance.
double weighted_h1a_sqnorm(const Grid& grid, std::span<const double> u,
                           const DegenerateCoefficient& a);
double weighted_h1a_norm(const Grid& grid, std::span<const double> u,
                         const DegenerateCoefficient& a);

/// Ratio of int a/x^2 z^2 dx to int a (z')^2 dx under shared midpoint
/// quadrature (the singular integrand is never evaluated at x=0).
/// Requires z(0)=0 and z not identically zero.
double hardy_ratio(const Grid& grid, std::span<const double> z,
                   const DegenerateCoefficient& a);

/// L = max over nodes x>0 of |beta(x)|/sqrt(a(x)); also records
/// sup |beta(x)/x|. Both stored into the DriftWeight.
double beta_bound(DriftWeight& beta, const DegenerateCoefficient& a, const Grid& grid);

}  // namespace stacknash
