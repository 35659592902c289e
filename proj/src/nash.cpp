#include "stacknash/nash.hpp"

#include <cmath>
#include <stdexcept>

namespace stacknash {

void CostConfig::validate(const ControlLayout& layout) const {
  if (!(alpha1 >= 0.0 && alpha2 >= 0.0))
    throw std::invalid_argument("cost: tracking weights must be non-negative");
  if (!(mu1 > 0.0 && mu2 > 0.0))
    throw std::invalid_argument("cost: control penalties must be positive");
  const auto& mask = layout.omega_d_mask();
  for (const SpaceTimeField* t : {&y1d, &y2d}) {
    if (t->empty()) continue;
    const Grid& g = t->grid();
    for (int n = 0; n <= g.time_steps(); ++n)
      for (int j = 0; j <= g.space_cells(); ++j)
        if (!mask[j] && (*t)(n, j) != 0.0)
          throw std::invalid_argument("cost: target must be supported on omega_d");
  }
}

double control_inner(const SpaceTimeField& a, const SpaceTimeField& b,
                     const std::vector<std::uint8_t>& mask) {
  const Grid& g = a.grid();
  double s = 0.0;
  for (int k = 0; k < g.time_steps(); ++k) {
    double row = 0.0;
    for (int j = 0; j <= g.space_cells(); ++j)
      if (mask[j]) row += g.node_weight(j) * a(k, j) * b(k, j);
    s += g.dt() * row;
  }
  return s;
}

SpaceTimeField random_control_direction(GridPtr grid, const std::vector<std::uint8_t>& mask,
                                        CounterRng& rng) {
  SpaceTimeField w(grid);
  for (int k = 0; k < grid->time_steps(); ++k)
    for (int j = 1; j < grid->space_cells(); ++j)
      if (mask[j]) w(k, j) = rng.normal();
  const double nrm = control_norm(w, mask);
  if (nrm == 0.0) throw std::runtime_error("random direction: mask has no interior node");
  w *= 1.0 / nrm;
  return w;
}

namespace {

double target_at(const SpaceTimeField& t, int n, int j) {
  return t.empty() ? 0.0 : t(n, j);
}

/// Tracking source for follower i at slot rows: row k = alpha_i (y^{k+1} - y_d^{k+1})
/// restricted to omega_d.
SpaceTimeField tracking_source(const GameSetup& setup, const SpaceTimeField& y,
                               const CostConfig& cost, int i) {
  const Grid& g = *setup.grid;
  const auto& mask = setup.layout->omega_d_mask();
  const SpaceTimeField& yd = cost.target(i);
  SpaceTimeField src(setup.grid);
  for (int k = 0; k < g.time_steps(); ++k)
    for (int j = 0; j <= g.space_cells(); ++j)
      if (mask[j]) src(k, j) = cost.alpha(i) * (y(k + 1, j) - target_at(yd, k + 1, j));
  return src;
}

/// Adjoint-system coefficients at the current state (paper: D-derivative pair).
LinearCoefficients adjoint_pair_at(const GameSetup& setup, const SpaceTimeField& y) {
  if (setup.nl.is_zero) return setup.lin_adjoint;
  return quotient_coefficients(setup.nl, y, setup.drift, setup.clamp_cap).adjoint;
}

// v_i = -p_i / mu_i on the mask, as a division so the stored identity is exact
SpaceTimeField eliminate_control(const SpaceTimeField& p,
                                 const std::vector<std::uint8_t>& mask, double mu) {
  SpaceTimeField v(p.grid_ptr());
  const Grid& g = p.grid();
  for (int k = 0; k < g.time_steps(); ++k)
    for (int j = 0; j <= g.space_cells(); ++j)
      if (mask[j]) v(k, j) = -p(k, j) / mu;
  return v;
}

}  // namespace

SpaceTimeField solve_state(const GameSetup& setup, const SpaceTimeField& leader,
                           const SpaceTimeField& v1, const SpaceTimeField& v2) {
  SourceSpec src;
  src.leader = leader.empty() ? nullptr : &leader;
  src.follower1 = v1.empty() ? nullptr : &v1;
  src.follower2 = v2.empty() ? nullptr : &v2;
  src.layout = setup.layout.get();
  return solve_state_from(setup, src, setup.initial_row());
}

SpaceTimeField solve_state_from(const GameSetup& setup, const SourceSpec& src,
                                std::span<const double> y0) {
  if (setup.nl.is_zero)
    return solve_forward(setup.grid, setup.diffusion, setup.drift, setup.lin_state, src, y0);
  return picard_semilinear(setup.grid, setup.diffusion, setup.drift, setup.nl, src, y0,
                           setup.picard_tol, setup.picard_max, setup.clamp_cap);
}

NashSolution solve_nash(const GameSetup& setup, const SpaceTimeField& leader,
                        const CostConfig& cost, double tol, int max_iter, double relax) {
  cost.validate(*setup.layout);
  const Grid& g = *setup.grid;
  NashSolution sol;
  sol.y = SpaceTimeField(setup.grid);
  sol.p1 = SpaceTimeField(setup.grid);
  sol.p2 = SpaceTimeField(setup.grid);
  sol.v1 = SpaceTimeField(setup.grid);
  sol.v2 = SpaceTimeField(setup.grid);

  const std::vector<double> y0 = setup.initial_row();
  int growth_streak = 0;

  for (int it = 0; it < max_iter; ++it) {
    SourceSpec src;
    src.leader = leader.empty() ? nullptr : &leader;
    src.follower1 = &sol.v1;
    src.follower2 = &sol.v2;
    src.layout = setup.layout.get();
    SpaceTimeField y, p1_new, p2_new;
    try {
      y = solve_state_from(setup, src, y0);
      const LinearCoefficients adj = adjoint_pair_at(setup, y);
      ParabolicOperator op(setup.grid, setup.diffusion, setup.drift, adj);
      std::vector<double> zero_terminal(g.space_cells() + 1, 0.0);
      p1_new = op.backward(tracking_source(setup, y, cost, 1), zero_terminal);
      p2_new = op.backward(tracking_source(setup, y, cost, 2), zero_terminal);
    } catch (const std::runtime_error&) {
      if (it == 0) throw;
      throw std::runtime_error(
          "solve_nash: iterates blew up (non-finite trajectory); the follower "
          "penalties mu_i are too small for the fixed point to contract");
    }

    // under-relaxed adjoint block
    auto blend = [&](SpaceTimeField& acc, const SpaceTimeField& next) {
      for (std::size_t idx = 0; idx < acc.data().size(); ++idx)
        acc.data()[idx] = (1.0 - relax) * acc.data()[idx] + relax * next.data()[idx];
    };
    SpaceTimeField p1_old = sol.p1, p2_old = sol.p2;
    blend(sol.p1, p1_new);
    blend(sol.p2, p2_new);

    sol.v1 = eliminate_control(sol.p1, setup.layout->omega1_mask(), cost.mu1);
    sol.v2 = eliminate_control(sol.p2, setup.layout->omega2_mask(), cost.mu2);

    double num = 0.0, den = 0.0;
    auto accumulate = [&](const SpaceTimeField& now, const SpaceTimeField& before) {
      SpaceTimeField d = now;
      d -= before;
      const double dn = field_l2_norm(d), nn = field_l2_norm(now);
      num += dn * dn;
      den += nn * nn;
    };
    accumulate(sol.p1, p1_old);
    accumulate(sol.p2, p2_old);
    accumulate(y, sol.y);
    sol.y = std::move(y);

    const double res = std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
    sol.residual_history.push_back(res);
    sol.iterations = it + 1;

    if (res <= tol) {
      sol.converged = true;
      return sol;
    }
    if (it > 0 && res > sol.residual_history[it - 1]) {
      if (++growth_streak >= 5)
        throw std::runtime_error(
            "solve_nash: residual grew for 5 consecutive sweeps; "
            "follower penalties mu_i are too small for the fixed point to contract");
    } else {
      growth_streak = 0;
    }
  }
  throw std::runtime_error("solve_nash: no convergence within max_iter sweeps");
}

double eval_cost(const GameSetup& setup, int i, const SpaceTimeField& leader,
                 const SpaceTimeField& v1, const SpaceTimeField& v2,
                 const CostConfig& cost) {
  const Grid& g = *setup.grid;
  const SpaceTimeField y = solve_state(setup, leader, v1, v2);
  const auto& dmask = setup.layout->omega_d_mask();
  const SpaceTimeField& yd = cost.target(i);

  double tracking = 0.0;
  for (int n = 1; n <= g.time_steps(); ++n) {
    double row = 0.0;
    for (int j = 0; j <= g.space_cells(); ++j)
      if (dmask[j]) {
        const double d = y(n, j) - target_at(yd, n, j);
        row += g.node_weight(j) * d * d;
      }
    tracking += g.dt() * row;
  }
  const SpaceTimeField& vi = (i == 1) ? v1 : v2;
  const double penalty = vi.empty() ? 0.0 : control_inner(vi, vi, setup.layout->follower_mask(i));
  return 0.5 * cost.alpha(i) * tracking + 0.5 * cost.mu(i) * penalty;
}

namespace {

SpaceTimeField shifted_control(const SpaceTimeField& v, const SpaceTimeField& w, double s,
                               GridPtr grid) {
  SpaceTimeField out = v.empty() ? SpaceTimeField(grid) : v;
  for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] += s * w.data()[i];
  return out;
}

}  // namespace

DerivativePair stationarity_residual(const GameSetup& setup, const SpaceTimeField& leader,
                                     const SpaceTimeField& v1, const SpaceTimeField& v2,
                                     const CostConfig& cost, const SpaceTimeField& w,
                                     int i, double fd_step) {
  const Grid& g = *setup.grid;
  const auto& imask = setup.layout->follower_mask(i);
  const auto& dmask = setup.layout->omega_d_mask();

  DerivativePair out;

  // (a) sensitivity route: z solves the linearized state system with source w.
  {
    const SpaceTimeField y = solve_state(setup, leader, v1, v2);
    const LinearCoefficients dpair = adjoint_pair_at(setup, y);
    ParabolicOperator op(setup.grid, setup.diffusion, setup.drift, dpair);
    SourceSpec src;
    src.layout = setup.layout.get();
    if (i == 1)
      src.follower1 = &w;
    else
      src.follower2 = &w;
    std::vector<double> zeros(g.space_cells() + 1, 0.0);
    const SpaceTimeField z = op.forward(assemble_forward_source(setup.grid, src), zeros);

    const SpaceTimeField& yd = cost.target(i);
    double tracking = 0.0;
    for (int n = 1; n <= g.time_steps(); ++n) {
      double row = 0.0;
      for (int j = 0; j <= g.space_cells(); ++j)
        if (dmask[j]) row += g.node_weight(j) * (y(n, j) - target_at(yd, n, j)) * z(n, j);
      tracking += g.dt() * row;
    }
    const SpaceTimeField& vi = (i == 1) ? v1 : v2;
    const double ctrl = vi.empty() ? 0.0 : control_inner(vi, w, imask);
    out.sensitivity = cost.alpha(i) * tracking + cost.mu(i) * ctrl;
  }

  // (b) central finite difference of the cost.
  {
    const SpaceTimeField& vi = (i == 1) ? v1 : v2;
    const double scale = vi.empty() ? 1.0 : (1.0 + control_norm(vi, imask));
    const double step = fd_step * scale;
    const SpaceTimeField vp = shifted_control(vi, w, step, setup.grid);
    const SpaceTimeField vm = shifted_control(vi, w, -step, setup.grid);
    const double jp = (i == 1) ? eval_cost(setup, 1, leader, vp, v2, cost)
                               : eval_cost(setup, 2, leader, v1, vp, cost);
    const double jm = (i == 1) ? eval_cost(setup, 1, leader, vm, v2, cost)
                               : eval_cost(setup, 2, leader, v1, vm, cost);
    out.fd = (jp - jm) / (2.0 * step);
  }
  return out;
}

namespace {

/// Exact transpose (in the weighted inner product) of the interior central
/// derivative with Dirichlet ends, applied to a nodal row q.
void central_derivative_adjoint(const Grid& g, std::span<const double> q,
                                std::span<double> out) {
  const int n = g.space_cells();
  out[0] = out[n] = 0.0;
  for (int j = 1; j < n; ++j) {
    double v = 0.0;
    if (j - 1 >= 1)
      v += g.node_weight(j - 1) * q[j - 1] / (g.node(j) - g.node(j - 2));
    if (j + 1 <= n - 1)
      v -= g.node_weight(j + 1) * q[j + 1] / (g.node(j + 2) - g.node(j));
    out[j] = v / g.node_weight(j);
  }
}

}  // namespace

ConvexityProbe convexity_probe(const GameSetup& setup, const SpaceTimeField& leader,
                               const SpaceTimeField& v1, const SpaceTimeField& v2,
                               const CostConfig& cost, const SpaceTimeField& w,
                               int i, double fd_step) {
  const Grid& g = *setup.grid;
  const int m = g.time_steps();
  const int nc = g.space_cells();
  const auto& imask = setup.layout->follower_mask(i);
  const auto& dmask = setup.layout->omega_d_mask();

  const SpaceTimeField y = solve_state(setup, leader, v1, v2);
  const LinearCoefficients dpair = adjoint_pair_at(setup, y);
  ParabolicOperator op(setup.grid, setup.diffusion, setup.drift, dpair);
  std::vector<double> zeros(nc + 1, 0.0);

  // base adjoint p_i
  SpaceTimeField p = op.backward(tracking_source(setup, y, cost, i), zeros);

  // first variation phi of the state
  SourceSpec wsrc;
  wsrc.layout = setup.layout.get();
  if (i == 1)
    wsrc.follower1 = &w;
  else
    wsrc.follower2 = &w;
  const SpaceTimeField phi = op.forward(assemble_forward_source(setup.grid, wsrc), zeros);

  // eta: backward system with the tracking of phi minus the second-derivative
  // coupling of the frozen coefficients.
  SpaceTimeField eta_src(setup.grid);
  std::vector<double> yx(nc + 1), phix(nc + 1), e(nc + 1), ep(nc + 1), div(nc + 1);
  for (int k = 0; k < m; ++k) {
    spatial_derivative_row(g, y.row(k + 1), yx);
    spatial_derivative_row(g, phi.row(k + 1), phix);
    for (int j = 0; j <= nc; ++j) {
      const double s = y(k + 1, j), pgrad = yx[j];
      double active = 1.0;
      if (!setup.nl.is_zero) {
        const double bx = setup.drift.beta(g.node(j));
        active = (bx == 0.0) ? 0.0
                             : (std::abs(setup.nl.d2(s, pgrad) / bx) < setup.clamp_cap ? 1.0 : 0.0);
      }
      const double dc1 = setup.nl.is_zero
                             ? 0.0
                             : setup.nl.d11(s, pgrad) * phi(k + 1, j) +
                                   setup.nl.d12(s, pgrad) * phix[j];
      e[j] = setup.nl.is_zero ? 0.0
                              : active * (setup.nl.d21(s, pgrad) * phi(k + 1, j) +
                                          setup.nl.d22(s, pgrad) * phix[j]);
      ep[j] = e[j] * p(k, j);
      eta_src(k, j) = (dmask[j] ? cost.alpha(i) * phi(k + 1, j) : 0.0) - dc1 * p(k, j);
    }
    central_derivative_adjoint(g, ep, div);
    for (int j = 1; j < nc; ++j) eta_src(k, j) -= div[j];
  }
  const SpaceTimeField eta = op.backward(eta_src, zeros);

  ConvexityProbe out;
  const double wnorm2 = control_inner(w, w, imask);
  const double eta_term = control_inner(eta, w, imask);
  out.structural = cost.mu(i) * wnorm2 + eta_term;
  out.c_estimate = (wnorm2 > 0.0) ? -eta_term / wnorm2 : 0.0;

  const SpaceTimeField& vi = (i == 1) ? v1 : v2;
  const double scale = vi.empty() ? 1.0 : (1.0 + control_norm(vi, imask));
  const double step = fd_step * scale;
  const SpaceTimeField vp = shifted_control(vi, w, step, setup.grid);
  const SpaceTimeField vm = shifted_control(vi, w, -step, setup.grid);
  double jc, jp, jm;
  if (i == 1) {
    jc = eval_cost(setup, 1, leader, vi.empty() ? SpaceTimeField(setup.grid) : vi, v2, cost);
    jp = eval_cost(setup, 1, leader, vp, v2, cost);
    jm = eval_cost(setup, 1, leader, vm, v2, cost);
  } else {
    jc = eval_cost(setup, 2, leader, v1, vi.empty() ? SpaceTimeField(setup.grid) : vi, cost);
    jp = eval_cost(setup, 2, leader, v1, vp, cost);
    jm = eval_cost(setup, 2, leader, v1, vm, cost);
  }
  out.fd = (jp - 2.0 * jc + jm) / (step * step);
  return out;
}

}  // namespace stacknash
