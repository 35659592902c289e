#pragma once

// Shared fixtures and independent oracles for the test suites. The oracles
// re-derive the discrete systems from the stencil definitions (flux-form
// diffusion, central drift, weighted transpose) without calling the library's
// stepping code, so they can catch assembly and staggering mistakes.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "stacknash/config.hpp"

namespace snt {

using namespace stacknash;

inline SpaceTimeField make_field(GridPtr grid,
                                 const std::function<double(double, double)>& f) {
  SpaceTimeField out(grid);
  for (int n = 0; n <= grid->time_steps(); ++n)
    for (int j = 0; j <= grid->space_cells(); ++j)
      out(n, j) = f(grid->time(n), grid->node(j));
  return out;
}

inline std::vector<double> make_row(const Grid& g, const std::function<double(double)>& f) {
  std::vector<double> row(g.space_cells() + 1);
  for (int j = 0; j <= g.space_cells(); ++j) row[j] = f(g.node(j));
  return row;
}

inline std::shared_ptr<const ControlLayout> default_layout(GridPtr grid) {
  return std::make_shared<const ControlLayout>(grid, Interval{0.4, 0.7},
                                               Interval{0.05, 0.2}, Interval{0.8, 0.95},
                                               Interval{0.45, 0.65});
}

/// Desk-scale default: T = 1, a = x^(1/2), beta = x, standard regions.
inline GameSetup default_setup(int n, int m, bool linear = true,
                               double c1 = 0.5, double c2 = 0.1) {
  GameSetup s;
  s.grid = build_grid(n, m, 1.0);
  s.diffusion = DegenerateCoefficient::power(0.5);
  s.drift = DriftWeight::identity();
  beta_bound(s.drift, s.diffusion, *s.grid);
  s.layout = default_layout(s.grid);
  s.nl = linear ? Nonlinearity::zero() : Nonlinearity::tanh_sin(c1, c2);
  s.lin_state = LinearCoefficients{0.0, 0.0, DriftForm::kNonDivergence};
  s.lin_adjoint = LinearCoefficients{0.0, 0.0, DriftForm::kNonDivergence};
  return s;
}

inline std::vector<double> sine_initial(const Grid& g, double amp = 1.0) {
  std::vector<double> y0(g.space_cells() + 1, 0.0);
  for (int j = 1; j < g.space_cells(); ++j)
    y0[j] = amp * std::sin(M_PI * g.node(j));
  return y0;
}

// ---------------------------------------------------------------------------
// independent tridiagonal stencil (re-derived, not shared with the library)

struct OracleStencil {
  // interior row j = 1..N-1: lower/diag/upper of the spatial operator A
  std::vector<double> lower, diag, upper;
};

inline OracleStencil oracle_stencil(const Grid& g, const DegenerateCoefficient& a,
                                    const DriftWeight& beta,
                                    const std::function<double(int, int)>& reaction,
                                    const std::function<double(int, int)>& drift,
                                    int level) {
  const int nc = g.space_cells();
  OracleStencil s;
  s.lower.assign(nc - 1, 0.0);
  s.diag.assign(nc - 1, 0.0);
  s.upper.assign(nc - 1, 0.0);
  for (int j = 1; j < nc; ++j) {
    const int i = j - 1;
    const double wj = g.node_weight(j);
    const double fl = a.a(g.cell_midpoint(j - 1)) / g.cell_width(j - 1);
    const double fr = a.a(g.cell_midpoint(j)) / g.cell_width(j);
    s.diag[i] = (fl + fr) / wj + reaction(level, j);
    const double conv =
        beta.beta(g.node(j)) * drift(level, j) / (g.node(j + 1) - g.node(j - 1));
    if (j - 1 >= 1) s.lower[i] = -fl / wj - conv;
    if (j + 1 <= nc - 1) s.upper[i] = -fr / wj + conv;
  }
  return s;
}

// ---------------------------------------------------------------------------
// monolithic sparse oracles (Eigen SparseLU)

struct KktProblem {
  GridPtr grid;
  DegenerateCoefficient a;
  DriftWeight beta;
  std::shared_ptr<const ControlLayout> layout;
  CostConfig cost;
  // constant linearized coefficients
  double a1 = 0.0, a2 = 0.0, b1 = 0.0, b2 = 0.0;
  std::vector<double> y0;
};

struct KktSolution {
  SpaceTimeField y, p1, p2, v1, v2;
};

/// Direct sparse solve of the coupled first-order Nash system for a given
/// leader control (fields y, p1, p2; followers eliminated as -p_i/mu_i).
inline KktSolution nash_kkt_oracle(const KktProblem& prob, const SpaceTimeField& h) {
  const Grid& g = *prob.grid;
  const int nc = g.space_cells();
  const int m = g.time_steps();
  const int in = nc - 1;  // interior nodes per level
  const double dt = g.dt();

  auto creact_a = [&](int, int) { return prob.a1; };
  auto cdrift_a = [&](int, int) { return prob.a2; };
  auto creact_b = [&](int, int) { return prob.b1; };
  auto cdrift_b = [&](int, int) { return prob.b2; };
  const OracleStencil A = oracle_stencil(g, prob.a, prob.beta, creact_a, cdrift_a, 1);
  const OracleStencil B = oracle_stencil(g, prob.a, prob.beta, creact_b, cdrift_b, 1);

  // weighted transpose of B: (B*)_{j,j+1} = B_{j+1,j} w_{j+1}/w_j
  OracleStencil Bt = B;
  for (int i = 0; i + 1 < in; ++i) {
    const double w_i = g.node_weight(i + 1), w_ip = g.node_weight(i + 2);
    Bt.upper[i] = B.lower[i + 1] * w_ip / w_i;
    Bt.lower[i + 1] = B.upper[i] * w_i / w_ip;
  }

  const int ny = m * in;  // Y rows: levels 1..M
  const int np = m * in;  // P rows: slots 0..M-1
  const int total = ny + 2 * np;
  auto yi = [&](int n, int j) { return (n - 1) * in + (j - 1); };            // n=1..M
  auto pi = [&](int i, int k, int j) { return ny + (i - 1) * np + k * in + (j - 1); };

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(total);

  const auto& omask = prob.layout->omega_mask();
  const auto& dmask = prob.layout->omega_d_mask();

  // Y equations
  for (int n = 1; n <= m; ++n)
    for (int j = 1; j < nc; ++j) {
      const int row = yi(n, j);
      const int i = j - 1;
      trip.emplace_back(row, yi(n, j), 1.0 + dt * A.diag[i]);
      if (j - 1 >= 1) trip.emplace_back(row, yi(n, j - 1), dt * A.lower[i]);
      if (j + 1 <= nc - 1) trip.emplace_back(row, yi(n, j + 1), dt * A.upper[i]);
      if (n > 1) trip.emplace_back(row, yi(n - 1, j), -1.0);
      else rhs[row] += prob.y0.empty() ? 0.0 : prob.y0[j];
      for (int f = 1; f <= 2; ++f)
        if (prob.layout->follower_mask(f)[j])
          trip.emplace_back(row, pi(f, n - 1, j), dt / prob.cost.mu(f));
      if (!h.empty() && omask[j]) rhs[row] += dt * h(n - 1, j);
    }

  // P equations (slots k = 0..M-1), step matrix transpose of B at step k+1
  for (int f = 1; f <= 2; ++f)
    for (int k = 0; k < m; ++k)
      for (int j = 1; j < nc; ++j) {
        const int row = pi(f, k, j);
        const int i = j - 1;
        trip.emplace_back(row, pi(f, k, j), 1.0 + dt * Bt.diag[i]);
        if (j - 1 >= 1) trip.emplace_back(row, pi(f, k, j - 1), dt * Bt.lower[i]);
        if (j + 1 <= nc - 1) trip.emplace_back(row, pi(f, k, j + 1), dt * Bt.upper[i]);
        if (k + 1 < m) trip.emplace_back(row, pi(f, k + 1, j), -1.0);
        // terminal p^M = 0 contributes nothing
        if (dmask[j]) {
          trip.emplace_back(row, yi(k + 1, j), -dt * prob.cost.alpha(f));
          const SpaceTimeField& yd = prob.cost.target(f);
          rhs[row] -= dt * prob.cost.alpha(f) * (yd.empty() ? 0.0 : yd(k + 1, j));
        }
      }

  Eigen::SparseMatrix<double> K(total, total);
  K.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(K);
  const Eigen::VectorXd sol = lu.solve(rhs);

  KktSolution out;
  out.y = SpaceTimeField(prob.grid);
  out.p1 = SpaceTimeField(prob.grid);
  out.p2 = SpaceTimeField(prob.grid);
  out.v1 = SpaceTimeField(prob.grid);
  out.v2 = SpaceTimeField(prob.grid);
  for (int j = 1; j < nc; ++j) out.y(0, j) = prob.y0.empty() ? 0.0 : prob.y0[j];
  for (int n = 1; n <= m; ++n)
    for (int j = 1; j < nc; ++j) out.y(n, j) = sol[yi(n, j)];
  for (int k = 0; k < m; ++k)
    for (int j = 1; j < nc; ++j) {
      out.p1(k, j) = sol[pi(1, k, j)];
      out.p2(k, j) = sol[pi(2, k, j)];
      if (prob.layout->omega1_mask()[j]) out.v1(k, j) = -out.p1(k, j) / prob.cost.mu1;
      if (prob.layout->omega2_mask()[j]) out.v2(k, j) = -out.p2(k, j) / prob.cost.mu2;
    }
  return out;
}

/// Direct sparse solve of the full penalized first-order system with the
/// leader eliminated through its characterization h = rho on omega. Returns
/// the leader control field.
inline SpaceTimeField hum_kkt_oracle(const KktProblem& prob, double epsilon) {
  const Grid& g = *prob.grid;
  const int nc = g.space_cells();
  const int m = g.time_steps();
  const int in = nc - 1;
  const double dt = g.dt();

  auto creact_a = [&](int, int) { return prob.a1; };
  auto cdrift_a = [&](int, int) { return prob.a2; };
  auto creact_b = [&](int, int) { return prob.b1; };
  auto cdrift_b = [&](int, int) { return prob.b2; };
  const OracleStencil A = oracle_stencil(g, prob.a, prob.beta, creact_a, cdrift_a, 1);
  const OracleStencil B = oracle_stencil(g, prob.a, prob.beta, creact_b, cdrift_b, 1);
  auto transpose = [&](const OracleStencil& S) {
    OracleStencil T = S;
    for (int i = 0; i + 1 < in; ++i) {
      const double w_i = g.node_weight(i + 1), w_ip = g.node_weight(i + 2);
      T.upper[i] = S.lower[i + 1] * w_ip / w_i;
      T.lower[i + 1] = S.upper[i] * w_i / w_ip;
    }
    return T;
  };
  const OracleStencil At = transpose(A);
  const OracleStencil Bt = transpose(B);

  const int block = m * in;
  const int total = 6 * block;
  auto yi = [&](int n, int j) { return (n - 1) * in + (j - 1); };
  auto pi = [&](int f, int k, int j) { return (f)*block + k * in + (j - 1); };      // f=1,2
  auto ri = [&](int k, int j) { return 3 * block + k * in + (j - 1); };             // rho slots
  auto si = [&](int f, int n, int j) { return (3 + f) * block + (n - 1) * in + (j - 1); };

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(total);
  const auto& omask = prob.layout->omega_mask();
  const auto& dmask = prob.layout->omega_d_mask();

  auto add_step = [&](int row, const OracleStencil& S, auto index, int slot, int j) {
    const int i = j - 1;
    trip.emplace_back(row, index(slot, j), 1.0 + dt * S.diag[i]);
    if (j - 1 >= 1) trip.emplace_back(row, index(slot, j - 1), dt * S.lower[i]);
    if (j + 1 <= nc - 1) trip.emplace_back(row, index(slot, j + 1), dt * S.upper[i]);
  };

  for (int n = 1; n <= m; ++n)
    for (int j = 1; j < nc; ++j) {
      const int row = yi(n, j);
      add_step(row, A, [&](int s, int jj) { return yi(s, jj); }, n, j);
      if (n > 1) trip.emplace_back(row, yi(n - 1, j), -1.0);
      else rhs[row] += prob.y0.empty() ? 0.0 : prob.y0[j];
      for (int f = 1; f <= 2; ++f)
        if (prob.layout->follower_mask(f)[j])
          trip.emplace_back(row, pi(f, n - 1, j), dt / prob.cost.mu(f));
      if (omask[j]) trip.emplace_back(row, ri(n - 1, j), -dt);  // h = rho on omega
    }

  for (int f = 1; f <= 2; ++f)
    for (int k = 0; k < m; ++k)
      for (int j = 1; j < nc; ++j) {
        const int row = pi(f, k, j);
        add_step(row, Bt, [&](int s, int jj) { return pi(f, s, jj); }, k, j);
        if (k + 1 < m) trip.emplace_back(row, pi(f, k + 1, j), -1.0);
        if (dmask[j]) {
          trip.emplace_back(row, yi(k + 1, j), -dt * prob.cost.alpha(f));
          const SpaceTimeField& yd = prob.cost.target(f);
          rhs[row] -= dt * prob.cost.alpha(f) * (yd.empty() ? 0.0 : yd(k + 1, j));
        }
      }

  for (int k = 0; k < m; ++k)
    for (int j = 1; j < nc; ++j) {
      const int row = ri(k, j);
      add_step(row, At, [&](int s, int jj) { return ri(s, jj); }, k, j);
      if (k + 1 < m) trip.emplace_back(row, ri(k + 1, j), -1.0);
      else trip.emplace_back(row, yi(m, j), 1.0 / epsilon);  // rho_M = -(1/eps) y^M
      for (int f = 1; f <= 2; ++f)
        if (dmask[j]) trip.emplace_back(row, si(f, k + 1, j), -dt * prob.cost.alpha(f));
    }

  for (int f = 1; f <= 2; ++f)
    for (int n = 1; n <= m; ++n)
      for (int j = 1; j < nc; ++j) {
        const int row = si(f, n, j);
        add_step(row, B, [&](int s, int jj) { return si(f, s, jj); }, n, j);
        if (n > 1) trip.emplace_back(row, si(f, n - 1, j), -1.0);
        if (prob.layout->follower_mask(f)[j])
          trip.emplace_back(row, ri(n - 1, j), dt / prob.cost.mu(f));
      }

  Eigen::SparseMatrix<double> K(total, total);
  K.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(K);
  const Eigen::VectorXd sol = lu.solve(rhs);

  SpaceTimeField h(prob.grid);
  for (int k = 0; k < m; ++k)
    for (int j = 1; j < nc; ++j)
      if (omask[j]) h(k, j) = sol[ri(k, j)];
  return h;
}

inline double rel_field_err(const SpaceTimeField& a, const SpaceTimeField& b) {
  SpaceTimeField d = a;
  d -= b;
  return field_l2_norm(d) / std::max(field_l2_norm(b), 1e-300);
}

}  // namespace snt
