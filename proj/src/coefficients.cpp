#include "stacknash/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stacknash {

DegenerateCoefficient DegenerateCoefficient::power(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("power coefficient: exponent must lie in (0,1)");
  DegenerateCoefficient c;
  c.alpha_exp = alpha;
  c.a = [alpha](double x) { return std::pow(x, alpha); };
  c.da = [alpha](double x) { return alpha * std::pow(x, alpha - 1.0); };
  c.tau = alpha;  // x a' = alpha a exactly for this family
  return c;
}

DriftWeight DriftWeight::identity() {
  DriftWeight w;
  w.beta = [](double x) { return x; };
  return w;
}

DriftWeight DriftWeight::zero() {
  DriftWeight w;
  w.beta = [](double) { return 0.0; };
  return w;
}

ValidationReport validate_degeneracy(const DegenerateCoefficient& coef, const Grid& grid) {
  ValidationReport report;
  const int n = grid.space_cells();
  // relative slack absorbs pow() rounding when x a' = tau a exactly
  const double slack = 1e-12;

  {
    ValidationClause c{.name = "a(0) = 0"};
    const double a0 = coef.a(0.0);
    c.worst = -std::abs(a0);
    c.pass = std::abs(a0) <= slack;
    report.clauses.push_back(c);
  }
  {
    ValidationClause c{.name = "a > 0 on (0,1]"};
    double worst = 1e300;
    for (int j = 1; j <= n; ++j) worst = std::min(worst, coef.a(grid.node(j)));
    c.worst = worst;
    c.pass = worst > 0.0;
    report.clauses.push_back(c);
  }
  {
    ValidationClause c{.name = "x a'(x) <= tau a(x)"};
    double worst = 1e300;
    for (int j = 1; j <= n; ++j) {
      const double x = grid.node(j);
      const double lhs = x * coef.da(x);
      const double rhs = coef.tau * coef.a(x);
      worst = std::min(worst, rhs - lhs + slack * std::abs(rhs));
    }
    c.worst = worst;
    c.pass = worst >= 0.0 && coef.tau >= 0.0 && coef.tau < 1.0;
    if (!(coef.tau >= 0.0 && coef.tau < 1.0)) c.detail = "tau outside [0,1)";
    report.clauses.push_back(c);
  }
  {
    ValidationClause c{.name = "x^2/a(x) non-decreasing"};
    double worst = 1e300;
    double prev = 0.0;  // limit of x^2/a at x=0 is 0 for the weak case
    for (int j = 1; j <= n; ++j) {
      const double x = grid.node(j);
      const double q = x * x / coef.a(x);
      worst = std::min(worst, q - prev + slack * std::abs(q));
      prev = q;
    }
    c.worst = worst;
    c.pass = worst >= 0.0;
    report.clauses.push_back(c);
  }
  return report;
}

double weighted_h1a_sqnorm(const Grid& grid, std::span<const double> u,
                           const DegenerateCoefficient& coef) {
  const int n = grid.space_cells();
  const double tol = 1e-12 * (1.0 + std::abs(u[0]) + std::abs(u[n]));
  if (std::abs(u[0]) > tol || std::abs(u[n]) > tol)
    throw std::invalid_argument("weighted_h1a_norm: row must vanish at both endpoints");

  double l2 = 0.0;
  for (int j = 0; j <= n; ++j) l2 += grid.node_weight(j) * u[j] * u[j];

  double grad = 0.0;
  for (int k = 0; k < n; ++k) {
    const double h = grid.cell_width(k);
    const double du = (u[k + 1] - u[k]) / h;
    grad += h * coef.a(grid.cell_midpoint(k)) * du * du;
  }
  return l2 + grad;
}

double weighted_h1a_norm(const Grid& grid, std::span<const double> u,
                         const DegenerateCoefficient& coef) {
  return std::sqrt(weighted_h1a_sqnorm(grid, u, coef));
}

double hardy_ratio(const Grid& grid, std::span<const double> z,
                   const DegenerateCoefficient& coef) {
  const int n = grid.space_cells();
  if (std::abs(z[0]) > 1e-14 * (1.0 + std::abs(z[n])))
    throw std::invalid_argument("hardy_ratio: z(0) must vanish");

  // Shared midpoint quadrature on every cell; the singular factor a/x^2 is
  // only ever evaluated at midpoints, never at x=0.
  double lhs = 0.0, rhs = 0.0;
  for (int k = 0; k < n; ++k) {
    const double h = grid.cell_width(k);
    const double xm = grid.cell_midpoint(k);
    const double am = coef.a(xm);
    const double zm = 0.5 * (z[k] + z[k + 1]);
    const double dz = (z[k + 1] - z[k]) / h;
    lhs += h * am / (xm * xm) * zm * zm;
    rhs += h * am * dz * dz;
  }
  if (rhs <= 0.0)
    throw std::invalid_argument("hardy_ratio: z is identically zero");
  return lhs / rhs;
}

double beta_bound(DriftWeight& beta, const DegenerateCoefficient& coef, const Grid& grid) {
  double bound = 0.0, sup_over_x = 0.0;
  for (int j = 1; j <= grid.space_cells(); ++j) {
    const double x = grid.node(j);
    const double b = beta.beta(x);
    bound = std::max(bound, std::abs(b) / std::sqrt(coef.a(x)));
    sup_over_x = std::max(sup_over_x, std::abs(b) / x);
  }
  beta.bound_L = bound;
  beta.sup_beta_over_x = sup_over_x;
  return bound;
}

}  // namespace stacknash
