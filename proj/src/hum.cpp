#include "stacknash/hum.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace stacknash {

AdjointPair solve_adjoint_pair(const GameSetup& setup, const CostConfig& cost,
                               std::span<const double> rho_terminal,
                               double block_tol, int block_max) {
  const Grid& g = *setup.grid;
  const int m = g.time_steps();
  const int nc = g.space_cells();
  const auto& dmask = setup.layout->omega_d_mask();

  ParabolicOperator state_op(setup.grid, setup.diffusion, setup.drift, setup.lin_state);
  ParabolicOperator adjoint_op(setup.grid, setup.diffusion, setup.drift, setup.lin_adjoint);

  AdjointPair out;
  SpaceTimeField zero_src(setup.grid);
  out.rho = state_op.backward(zero_src, rho_terminal);
  out.psi1 = SpaceTimeField(setup.grid);
  out.psi2 = SpaceTimeField(setup.grid);
  std::vector<double> zeros(nc + 1, 0.0);

  for (int it = 0; it < block_max; ++it) {
    auto psi_solve = [&](int i) {
      SpaceTimeField src(setup.grid);
      const auto& mask = setup.layout->follower_mask(i);
      for (int n = 1; n <= m; ++n)
        for (int j = 0; j <= nc; ++j)
          if (mask[j]) src(n, j) = -out.rho(n - 1, j) / cost.mu(i);
      return adjoint_op.forward(src, zeros);
    };
    out.psi1 = psi_solve(1);
    out.psi2 = psi_solve(2);

    SpaceTimeField src(setup.grid);
    for (int k = 0; k < m; ++k)
      for (int j = 0; j <= nc; ++j)
        if (dmask[j])
          src(k, j) = cost.alpha1 * out.psi1(k + 1, j) + cost.alpha2 * out.psi2(k + 1, j);
    SpaceTimeField rho_next = state_op.backward(src, rho_terminal);

    const double res = relative_change(rho_next, out.rho, 1e-300);
    out.rho = std::move(rho_next);
    out.iterations = it + 1;
    if (res <= block_tol) {
      out.converged = true;
      return out;
    }
  }
  throw std::runtime_error("adjoint pair: block iteration did not converge");
}

double eval_penalized(const GameSetup& setup, const SpaceTimeField& h,
                      const CostConfig& cost, const HumConfig& cfg,
                      NashSolution* state_out) {
  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("penalty epsilon must be positive");
  NashSolution sol = solve_nash(setup, h, cost, cfg.block_tol, cfg.block_max);
  const Grid& g = *setup.grid;
  const double yT = row_l2_norm(g, sol.y.row(g.time_steps()));
  const double hn2 = h.empty() ? 0.0 : control_inner(h, h, setup.layout->omega_mask());
  if (state_out) *state_out = std::move(sol);
  return 0.5 / cfg.epsilon * yT * yT + 0.5 * hn2;
}

namespace {

SpaceTimeField masked_difference(const SpaceTimeField& h, const SpaceTimeField& rho,
                                 const std::vector<std::uint8_t>& mask) {
  const Grid& g = rho.grid();
  SpaceTimeField out(rho.grid_ptr());
  for (int k = 0; k < g.time_steps(); ++k)
    for (int j = 0; j <= g.space_cells(); ++j)
      if (mask[j]) out(k, j) = (h.empty() ? 0.0 : h(k, j)) - rho(k, j);
  return out;
}

}  // namespace

SpaceTimeField hum_gradient(const GameSetup& setup, const SpaceTimeField& h,
                            const CostConfig& cost, const HumConfig& cfg,
                            NashSolution* state_out, AdjointPair* adjoint_out) {
  const Grid& g = *setup.grid;
  NashSolution sol = solve_nash(setup, h, cost, cfg.block_tol, cfg.block_max);

  std::vector<double> terminal(g.space_cells() + 1, 0.0);
  for (int j = 1; j < g.space_cells(); ++j)
    terminal[j] = -sol.y(g.time_steps(), j) / cfg.epsilon;
  AdjointPair adj = solve_adjoint_pair(setup, cost, terminal, cfg.block_tol, cfg.block_max);

  SpaceTimeField grad = masked_difference(h, adj.rho, setup.layout->omega_mask());
  if (state_out) *state_out = std::move(sol);
  if (adjoint_out) *adjoint_out = std::move(adj);
  return grad;
}

namespace {

/// Hessian application of the quadratic J_eps: Hd = d - rho(d) where rho(d)
/// is the adjoint response to the zero-data state driven by d alone.
SpaceTimeField apply_hessian(const GameSetup& setup, const CostConfig& cost,
                             const HumConfig& cfg, const SpaceTimeField& d) {
  GameSetup zero_data = setup;
  zero_data.y0.assign(setup.grid->space_cells() + 1, 0.0);
  CostConfig zero_cost = cost;
  zero_cost.y1d = SpaceTimeField();
  zero_cost.y2d = SpaceTimeField();
  SpaceTimeField g = hum_gradient(zero_data, d, zero_cost, cfg);
  return g;  // (d - rho_lin(d)) on omega
}

}  // namespace

HumResult minimize_cg(const GameSetup& setup, const CostConfig& cost, const HumConfig& cfg,
                      const SpaceTimeField* h_init) {
  const Grid& g = *setup.grid;
  const auto& omask = setup.layout->omega_mask();

  HumResult result;
  SpaceTimeField h = (h_init && !h_init->empty()) ? *h_init : SpaceTimeField(setup.grid);

  SpaceTimeField grad = hum_gradient(setup, h, cost, cfg);
  SpaceTimeField r = grad;  // residual = -gradient, kept with flipped sign below
  r *= -1.0;
  SpaceTimeField d = r;
  double rr = control_inner(r, r, omask);
  if (cfg.track_cost) result.cost_history.push_back(eval_penalized(setup, h, cost, cfg));

  int it = 0;
  for (; it < cfg.cg_max_iter && std::sqrt(rr) > cfg.cg_tol; ++it) {
    const SpaceTimeField q = apply_hessian(setup, cost, cfg, d);
    const double dq = control_inner(d, q, omask);
    if (!(dq > 0.0)) {
      // quadratic is positive definite; a non-positive curvature signals
      // accumulated round-off -- restart from the exact gradient
      grad = hum_gradient(setup, h, cost, cfg);
      r = grad;
      r *= -1.0;
      d = r;
      rr = control_inner(r, r, omask);
      continue;
    }
    const double alpha = rr / dq;
    for (std::size_t i = 0; i < h.data().size(); ++i) {
      h.data()[i] += alpha * d.data()[i];
    }
    SpaceTimeField r_new = r;
    for (std::size_t i = 0; i < r_new.data().size(); ++i)
      r_new.data()[i] -= alpha * q.data()[i];

    if ((it + 1) % 40 == 0) {
      grad = hum_gradient(setup, h, cost, cfg);
      r_new = grad;
      r_new *= -1.0;
    }

    const double rr_new = control_inner(r_new, r_new, omask);
    double beta = (rr_new - control_inner(r_new, r, omask)) / rr;  // Polak-Ribiere
    if (!(beta > 0.0)) beta = 0.0;                                 // restart
    for (std::size_t i = 0; i < d.data().size(); ++i)
      d.data()[i] = r_new.data()[i] + beta * d.data()[i];
    r = std::move(r_new);
    rr = rr_new;
    if (cfg.track_cost) result.cost_history.push_back(eval_penalized(setup, h, cost, cfg));
  }

  // final exact solve for the reported quantities
  NashSolution state;
  AdjointPair adj;
  SpaceTimeField final_grad = hum_gradient(setup, h, cost, cfg, &state, &adj);
  result.h = std::move(h);
  result.cg_iterations = it;
  result.gradient_norm = control_norm(final_grad, omask);
  result.converged = result.gradient_norm <= cfg.cg_tol;
  result.y_final_norm = row_l2_norm(g, state.y.row(g.time_steps()));
  result.h_norm = control_norm(result.h, omask);
  result.characterization_residual =
      control_norm(final_grad, omask) / (result.h_norm + 1.0);
  return result;
}

SweepTable epsilon_sweep(const GameSetup& setup, const CostConfig& cost, HumConfig cfg) {
  if (cfg.epsilon_list.size() < 3)
    throw std::invalid_argument("epsilon sweep: need at least 3 decreasing values");
  for (std::size_t i = 1; i < cfg.epsilon_list.size(); ++i)
    if (!(cfg.epsilon_list[i] < cfg.epsilon_list[i - 1]))
      throw std::invalid_argument("epsilon sweep: list must be strictly decreasing");

  SweepTable table;
  SpaceTimeField warm;
  std::vector<double> log_eps, log_y;
  for (double eps : cfg.epsilon_list) {
    cfg.epsilon = eps;
    HumResult res = minimize_cg(setup, cost, cfg, warm.empty() ? nullptr : &warm);
    warm = res.h;

    SweepRow row;
    row.epsilon = eps;
    row.yT_norm = res.y_final_norm;
    row.h_norm = res.h_norm;
    row.cg_iters = res.cg_iterations;
    if (res.y_final_norm > 0.0) {
      log_eps.push_back(std::log(eps));
      log_y.push_back(std::log(res.y_final_norm));
    }
    row.slope_running = std::numeric_limits<double>::quiet_NaN();
    if (log_eps.size() >= 2) {
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      const double n = static_cast<double>(log_eps.size());
      for (std::size_t i = 0; i < log_eps.size(); ++i) {
        sx += log_eps[i];
        sy += log_y[i];
        sxx += log_eps[i] * log_eps[i];
        sxy += log_eps[i] * log_y[i];
      }
      row.slope_running = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }
    table.rows.push_back(row);
  }
  table.slope = table.rows.empty() ? 0.0 : table.rows.back().slope_running;
  return table;
}

double h1a_trajectory_norm(const SpaceTimeField& f, const DegenerateCoefficient& a) {
  const Grid& g = f.grid();
  double s = 0.0;
  for (int n = 0; n <= g.time_steps(); ++n)
    s += g.dt() * weighted_h1a_sqnorm(g, f.row(n), a);
  return std::sqrt(s);
}

StackelbergResult semilinear_stackelberg(const GameSetup& setup, const CostConfig& cost,
                                         const HumConfig& cfg) {
  StackelbergResult out;
  SpaceTimeField z(setup.grid);
  SpaceTimeField warm;

  GameSetup frozen = setup;
  frozen.nl = Nonlinearity::zero();

  if (setup.nl.is_zero) {
    // the frozen coefficients cannot change: one linear pass is the fixed point
    frozen.lin_state = setup.lin_state;
    frozen.lin_adjoint = setup.lin_adjoint;
    HumResult res = minimize_cg(frozen, cost, cfg);
    out.h = res.h;
    out.equilibrium = solve_nash(frozen, out.h, cost, cfg.block_tol, cfg.block_max);
    out.log.iterations = 1;
    out.log.converged = res.converged;
    out.log.h_norms.push_back(res.h_norm);
    out.log.yT_norms.push_back(res.y_final_norm);
    out.log.residuals.push_back(0.0);
    return out;
  }

  for (int it = 0; it < cfg.outer_max; ++it) {
    const QuotientCoefficients qc =
        quotient_coefficients(setup.nl, z, setup.drift, setup.clamp_cap);
    frozen.lin_state = qc.state;
    frozen.lin_adjoint = qc.adjoint;

    HumResult res = minimize_cg(frozen, cost, cfg, warm.empty() ? nullptr : &warm);
    warm = res.h;

    NashSolution state;
    eval_penalized(frozen, res.h, cost, cfg, &state);
    SpaceTimeField diff = state.y;
    diff -= z;
    const double resid = h1a_trajectory_norm(diff, setup.diffusion);
    z = state.y;

    out.log.residuals.push_back(resid);
    out.log.h_norms.push_back(res.h_norm);
    out.log.yT_norms.push_back(res.y_final_norm);
    out.log.iterations = it + 1;
    out.h = res.h;

    if (resid <= cfg.outer_tol) {
      out.log.converged = true;
      break;
    }
  }
  // non-convergence is flagged, not thrown: the residual history is the output

  const QuotientCoefficients qc =
      quotient_coefficients(setup.nl, z, setup.drift, setup.clamp_cap);
  frozen.lin_state = qc.state;
  frozen.lin_adjoint = qc.adjoint;
  out.equilibrium = solve_nash(frozen, out.h, cost, cfg.block_tol, cfg.block_max);
  return out;
}

}  // namespace stacknash
