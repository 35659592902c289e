#include "stacknash/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace stacknash {

Nonlinearity Nonlinearity::zero() {
  Nonlinearity nl;
  auto z = [](double, double) { return 0.0; };
  nl.f = z;
  nl.d1 = z;
  nl.d2 = z;
  nl.d11 = z;
  nl.d12 = z;
  nl.d21 = z;
  nl.d22 = z;
  nl.is_zero = true;
  return nl;
}

Nonlinearity Nonlinearity::tanh_reaction(double c1) {
  Nonlinearity nl;
  nl.f = [c1](double s, double) { return c1 * std::tanh(s); };
  nl.d1 = [c1](double s, double) { const double c = std::cosh(s); return c1 / (c * c); };
  nl.d2 = [](double, double) { return 0.0; };
  nl.d11 = [c1](double s, double) {
    const double t = std::tanh(s);
    return -2.0 * c1 * (1.0 - t * t) * t;
  };
  nl.d12 = [](double, double) { return 0.0; };
  nl.d21 = [](double, double) { return 0.0; };
  nl.d22 = [](double, double) { return 0.0; };
  nl.lipschitz_K = std::abs(c1);
  nl.bound_M1 = std::abs(c1);
  // max |sech^2(s) tanh(s)| = 2/(3 sqrt(3))
  nl.bound_M2 = std::abs(c1) * (1.0 + 2.0 / (3.0 * std::sqrt(3.0)));
  return nl;
}

Nonlinearity Nonlinearity::tanh_sin(double c1, double c2) {
  Nonlinearity nl;
  nl.f = [c1, c2](double s, double p) { return c1 * std::tanh(s) + c2 * std::sin(p); };
  nl.d1 = [c1](double s, double) { const double c = std::cosh(s); return c1 / (c * c); };
  nl.d2 = [c2](double, double p) { return c2 * std::cos(p); };
  nl.d11 = [c1](double s, double) {
    const double t = std::tanh(s);
    return -2.0 * c1 * (1.0 - t * t) * t;
  };
  nl.d12 = [](double, double) { return 0.0; };
  nl.d21 = [](double, double) { return 0.0; };
  nl.d22 = [c2](double, double p) { return -c2 * std::sin(p); };
  nl.lipschitz_K = std::abs(c1) + std::abs(c2);
  nl.bound_M1 = std::abs(c1) + std::abs(c2);
  nl.bound_M2 = std::abs(c1) + std::abs(c2) +
                std::abs(c1) * 2.0 / (3.0 * std::sqrt(3.0)) + std::abs(c2);
  return nl;
}

const std::vector<std::pair<double, double>>& gauss_legendre_01(int order) {
  static std::map<int, std::vector<std::pair<double, double>>> cache;
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;
  if (order < 1 || order > 64)
    throw std::invalid_argument("gauss_legendre_01: order must be in [1,64]");

  // Newton iteration on Legendre polynomials, nodes on [-1,1] then mapped.
  std::vector<std::pair<double, double>> pts(order);
  for (int i = 0; i < order; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it2 = 0; it2 < 100; ++it2) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    pts[i] = {0.5 * (x + 1.0), 0.5 * w};
  }
  std::sort(pts.begin(), pts.end());
  return cache.emplace(order, std::move(pts)).first->second;
}

IntegralMeans integral_means(const Nonlinearity& nl, double s, double p) {
  IntegralMeans m;
  for (const auto& [r, w] : gauss_legendre_01(nl.quadrature_order)) {
    m.f1 += w * nl.d1(r * s, r * p);
    m.f2 += w * nl.d2(r * s, r * p);
  }
  return m;
}

void spatial_derivative_row(const Grid& grid, std::span<const double> row,
                            std::span<double> out) {
  const int n = grid.space_cells();
  out[0] = (row[1] - row[0]) / grid.cell_width(0);
  for (int j = 1; j < n; ++j)
    out[j] = (row[j + 1] - row[j - 1]) / (grid.node(j + 1) - grid.node(j - 1));
  out[n] = (row[n] - row[n - 1]) / grid.cell_width(n - 1);
}

QuotientCoefficients quotient_coefficients(const Nonlinearity& nl,
                                           const SpaceTimeField& z,
                                           const DriftWeight& beta, double cap) {
  if (!(cap > 0.0)) throw std::invalid_argument("quotient clamp cap must be positive");
  const Grid& g = z.grid();
  const int m = g.time_steps();
  const int n = g.space_cells();

  QuotientCoefficients out;
  if (nl.is_zero) {
    out.state = LinearCoefficients{0.0, 0.0, DriftForm::kNonDivergence};
    out.adjoint = LinearCoefficients{0.0, 0.0, DriftForm::kNonDivergence};
    return out;
  }

  SpaceTimeField a1(z.grid_ptr()), a2(z.grid_ptr()), b1(z.grid_ptr()), b2(z.grid_ptr());
  std::vector<double> dz(n + 1);
  long clamped = 0, total = 0;
  for (int lev = 0; lev <= m; ++lev) {
    spatial_derivative_row(g, z.row(lev), dz);
    for (int j = 0; j <= n; ++j) {
      const double s = z(lev, j);
      const double p = dz[j];
      const IntegralMeans im = integral_means(nl, s, p);
      a1(lev, j) = im.f1;
      b1(lev, j) = nl.d1(s, p);
      const double bx = beta.beta(g.node(j));
      double qa, qb;
      if (bx == 0.0) {
        qa = (im.f2 == 0.0) ? 0.0 : std::copysign(cap, im.f2);
        qb = (nl.d2(s, p) == 0.0) ? 0.0 : std::copysign(cap, nl.d2(s, p));
        if (qa != 0.0 || qb != 0.0) ++clamped;
      } else {
        qa = im.f2 / bx;
        qb = nl.d2(s, p) / bx;
        if (std::abs(qa) > cap || std::abs(qb) > cap) ++clamped;
        qa = std::clamp(qa, -cap, cap);
        qb = std::clamp(qb, -cap, cap);
      }
      a2(lev, j) = qa;
      b2(lev, j) = qb;
      ++total;
    }
  }
  out.state = LinearCoefficients{CoeffField(std::move(a1)), CoeffField(std::move(a2)),
                                 DriftForm::kNonDivergence};
  out.adjoint = LinearCoefficients{CoeffField(std::move(b1)), CoeffField(std::move(b2)),
                                   DriftForm::kNonDivergence};
  out.clamped_fraction = static_cast<double>(clamped) / static_cast<double>(total);
  return out;
}

SpaceTimeField picard_semilinear(GridPtr grid, const DegenerateCoefficient& a,
                                 const DriftWeight& beta, const Nonlinearity& nl,
                                 const SourceSpec& src, std::span<const double> y0,
                                 double tol, int max_iter, double cap, PicardLog* log) {
  if (!(tol > 0.0)) throw std::invalid_argument("picard: tolerance must be positive");

  PicardLog local;
  PicardLog& lg = log ? *log : local;
  lg = PicardLog{};

  SpaceTimeField z(grid);
  const SpaceTimeField source = assemble_forward_source(grid, src);
  for (int it = 0; it < max_iter; ++it) {
    const QuotientCoefficients qc = quotient_coefficients(nl, z, beta, cap);
    ParabolicOperator op(grid, a, beta, qc.state);
    SpaceTimeField next = op.forward(source, y0);
    const double res = relative_change(next, z, 1e-300);
    lg.residuals.push_back(res);
    lg.iterations = it + 1;
    z = std::move(next);
    if (res <= tol || nl.is_zero) {
      lg.converged = true;
      return z;
    }
  }
  throw std::runtime_error("picard_semilinear: no convergence after max_iter iterations");
}

ValidationReport validate_assumptions(const Nonlinearity& nl, const ProbeLattice& probe) {
  ValidationReport report;
  const int np = probe.points_per_axis;
  auto node = [&](int i, double mx) { return -mx + 2.0 * mx * i / (np - 1); };

  {
    ValidationClause c{.name = "F(0,0) = 0"};
    c.worst = -std::abs(nl.f(0.0, 0.0));
    c.pass = std::abs(nl.f(0.0, 0.0)) <= 1e-14;
    report.clauses.push_back(c);
  }
  {
    // Lipschitz quotients between horizontally/vertically adjacent samples.
    ValidationClause c{.name = "Lipschitz quotient <= K"};
    const double limit = nl.lipschitz_K * (1.0 + 1e-9) + 1e-14;
    double worst = 1e300;
    for (int i = 0; i < np; ++i)
      for (int k = 0; k < np; ++k) {
        const double s = node(i, probe.s_max), p = node(k, probe.p_max);
        if (i + 1 < np) {
          const double s2 = node(i + 1, probe.s_max);
          const double q = std::abs(nl.f(s2, p) - nl.f(s, p)) / (s2 - s);
          worst = std::min(worst, limit - q);
        }
        if (k + 1 < np) {
          const double p2 = node(k + 1, probe.p_max);
          const double q = std::abs(nl.f(s, p2) - nl.f(s, p)) / (p2 - p);
          worst = std::min(worst, limit - q);
        }
      }
    c.worst = worst;
    c.pass = worst >= 0.0;
    report.clauses.push_back(c);
  }
  {
    ValidationClause c{.name = "derivative bounds <= M2"};
    const double limit = nl.bound_M2 * (1.0 + 1e-9) + 1e-14;
    double worst = 1e300;
    for (int i = 0; i < np; ++i)
      for (int k = 0; k < np; ++k) {
        const double s = node(i, probe.s_max), p = node(k, probe.p_max);
        const double first = std::abs(nl.d1(s, p)) + std::abs(nl.d2(s, p));
        const double second = std::abs(nl.d11(s, p)) + std::abs(nl.d12(s, p)) +
                              std::abs(nl.d21(s, p)) + std::abs(nl.d22(s, p));
        worst = std::min({worst, limit - first, limit - second});
      }
    c.worst = worst;
    c.pass = worst >= 0.0;
    report.clauses.push_back(c);
  }
  {
    ValidationClause c{.name = "F = F1 s + F2 p reconstruction"};
    double worst = 0.0;
    for (int i = 0; i < np; ++i)
      for (int k = 0; k < np; ++k) {
        const double s = node(i, probe.s_max), p = node(k, probe.p_max);
        const IntegralMeans im = integral_means(nl, s, p);
        worst = std::max(worst, std::abs(nl.f(s, p) - im.f1 * s - im.f2 * p));
      }
    c.worst = -worst;
    c.pass = worst <= 1e-9;
    report.clauses.push_back(c);
  }
  return report;
}

}  // namespace stacknash
