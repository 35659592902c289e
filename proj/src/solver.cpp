#include "stacknash/solver.hpp"

#include <cmath>
#include <stdexcept>

namespace stacknash {

double CoeffField::sup_norm() const {
  if (!field_) return std::abs(constant_);
  return field_->max_abs();
}

namespace {

void require_boundary_zero(std::span<const double> row, const char* who) {
  const double scale = 1.0 + std::abs(row[0]) + std::abs(row[row.size() - 1]);
  if (std::abs(row[0]) > 1e-12 * scale || std::abs(row[row.size() - 1]) > 1e-12 * scale)
    throw std::invalid_argument(std::string(who) + ": data row must vanish at x=0 and x=1");
}

}  // namespace

ParabolicOperator::ParabolicOperator(GridPtr grid, const DegenerateCoefficient& a,
                                     const DriftWeight& beta,
                                     const LinearCoefficients& coeffs)
    : grid_(std::move(grid)) {
  const Grid& g = *grid_;
  const int n_cells = g.space_cells();
  const int m = g.time_steps();
  const std::size_t interior = n_cells - 1;

  interior_weights_.resize(interior);
  for (int j = 1; j < n_cells; ++j) interior_weights_[j - 1] = g.node_weight(j);

  // Flux coefficients a(x_{k+1/2})/h_k per cell; a(x_{1/2}) > 0 keeps the
  // first interior row regular even though a(0) = 0.
  std::vector<double> flux(n_cells);
  for (int k = 0; k < n_cells; ++k)
    flux[k] = a.a(g.cell_midpoint(k)) / g.cell_width(k);

  const bool constant =
      coeffs.reaction.is_constant() && coeffs.drift.is_constant();
  const int n_matrices = constant ? 1 : m;

  a_steps_.reserve(n_matrices);
  for (int step = 1; step <= n_matrices; ++step) {
    const int level = constant ? 1 : step;
    TriDiag A(interior);
    for (int j = 1; j < n_cells; ++j) {
      const std::size_t i = j - 1;
      const double wj = g.node_weight(j);
      const double fl = flux[j - 1];  // toward j-1
      const double fr = flux[j];      // toward j+1
      A.diag[i] = (fl + fr) / wj + coeffs.reaction.at(level, j);
      if (i > 0) A.lower[i] = -fl / wj;
      if (i + 1 < interior) A.upper[i] = -fr / wj;

      const double span2 = g.node(j + 1) - g.node(j - 1);
      const double conv = beta.beta(g.node(j)) * coeffs.drift.at(level, j) / span2;
      if (coeffs.drift_form == DriftForm::kNonDivergence) {
        if (i > 0) A.lower[i] -= conv;
        if (i + 1 < interior) A.upper[i] += conv;
      }
    }
    if (coeffs.drift_form == DriftForm::kDivergence) {
      // -(beta c_d u)_x is the weighted transpose of +beta c_d u_x.
      TriDiag conv(interior);
      for (int j = 1; j < n_cells; ++j) {
        const std::size_t i = j - 1;
        const double span2 = g.node(j + 1) - g.node(j - 1);
        const double c = beta.beta(g.node(j)) * coeffs.drift.at(level, j) / span2;
        if (i > 0) conv.lower[i] = -c;
        if (i + 1 < interior) conv.upper[i] = c;
      }
      const TriDiag convT = conv.weighted_transpose(interior_weights_);
      for (std::size_t i = 0; i < interior; ++i) {
        A.lower[i] += convT.lower[i];
        A.upper[i] += convT.upper[i];
      }
    }
    a_steps_.push_back(std::move(A));
  }

  fwd_.resize(a_steps_.size());
  bwd_.resize(a_steps_.size());
  adj_steps_.resize(a_steps_.size());
}

const TriDiagSolver& ParabolicOperator::forward_solver(int n) const {
  const std::size_t k = (a_steps_.size() == 1) ? 0 : n - 1;
  if (!fwd_[k]) {
    TriDiag step = a_steps_[k];
    const double dt = grid_->dt();
    for (std::size_t i = 0; i < step.size(); ++i) {
      step.diag[i] = 1.0 + dt * step.diag[i];
      step.lower[i] *= dt;
      step.upper[i] *= dt;
    }
    fwd_[k] = std::make_unique<TriDiagSolver>(step);
  }
  return *fwd_[k];
}

const TriDiagSolver& ParabolicOperator::backward_solver(int n) const {
  const std::size_t k = (a_steps_.size() == 1) ? 0 : n - 1;
  if (!bwd_[k]) {
    TriDiag step = a_steps_[k].weighted_transpose(interior_weights_);
    const double dt = grid_->dt();
    for (std::size_t i = 0; i < step.size(); ++i) {
      step.diag[i] = 1.0 + dt * step.diag[i];
      step.lower[i] *= dt;
      step.upper[i] *= dt;
    }
    bwd_[k] = std::make_unique<TriDiagSolver>(step);
  }
  return *bwd_[k];
}

SpaceTimeField ParabolicOperator::forward(const SpaceTimeField& source_levels,
                                          std::span<const double> y0) const {
  const Grid& g = *grid_;
  const int n_cells = g.space_cells();
  const int m = g.time_steps();
  const double dt = g.dt();
  require_boundary_zero(y0, "solve_forward");

  SpaceTimeField y(grid_);
  for (int j = 1; j < n_cells; ++j) y(0, j) = y0[j];

  std::vector<double> rhs(n_cells - 1), sol(n_cells - 1);
  for (int n = 1; n <= m; ++n) {
    for (int j = 1; j < n_cells; ++j)
      rhs[j - 1] = y(n - 1, j) + dt * source_levels(n, j);
    forward_solver(n).solve(rhs, sol);
    for (int j = 1; j < n_cells; ++j) y(n, j) = sol[j - 1];
  }
  if (!y.all_finite())
    throw std::runtime_error("solve_forward: trajectory is not finite (coefficient blow-up?)");
  return y;
}

SpaceTimeField ParabolicOperator::backward(const SpaceTimeField& source_slots,
                                           std::span<const double> pT) const {
  const Grid& g = *grid_;
  const int n_cells = g.space_cells();
  const int m = g.time_steps();
  const double dt = g.dt();
  require_boundary_zero(pT, "solve_backward");

  SpaceTimeField p(grid_);
  for (int j = 1; j < n_cells; ++j) p(m, j) = pT[j];

  std::vector<double> rhs(n_cells - 1), sol(n_cells - 1);
  for (int n = m; n >= 1; --n) {
    for (int j = 1; j < n_cells; ++j)
      rhs[j - 1] = p(n, j) + dt * source_slots(n - 1, j);
    backward_solver(n).solve(rhs, sol);
    for (int j = 1; j < n_cells; ++j) p(n - 1, j) = sol[j - 1];
  }
  if (!p.all_finite())
    throw std::runtime_error("solve_backward: trajectory is not finite (coefficient blow-up?)");
  return p;
}

void ParabolicOperator::apply_step_matrix(int n, std::span<const double> x,
                                          std::span<double> y) const {
  const std::size_t k = (a_steps_.size() == 1) ? 0 : n - 1;
  a_steps_[k].apply(x, y);
}

void ParabolicOperator::apply_step_matrix_adjoint(int n, std::span<const double> x,
                                                  std::span<double> y) const {
  const std::size_t k = (a_steps_.size() == 1) ? 0 : n - 1;
  if (adj_steps_[k].size() == 0)
    adj_steps_[k] = a_steps_[k].weighted_transpose(interior_weights_);
  adj_steps_[k].apply(x, y);
}

SpaceTimeField assemble_forward_source(GridPtr grid, const SourceSpec& src) {
  const Grid& g = *grid;
  SpaceTimeField f(grid);
  const int m = g.time_steps();
  const int n_cells = g.space_cells();

  if ((src.leader || src.follower1 || src.follower2) && !src.layout)
    throw std::invalid_argument("source: controls require a control layout");

  for (int n = 1; n <= m; ++n) {
    for (int j = 0; j <= n_cells; ++j) {
      double v = src.distributed ? (*src.distributed)(n, j) : 0.0;
      if (src.leader && src.layout->omega_mask()[j]) v += (*src.leader)(n - 1, j);
      if (src.follower1 && src.layout->omega1_mask()[j]) v += (*src.follower1)(n - 1, j);
      if (src.follower2 && src.layout->omega2_mask()[j]) v += (*src.follower2)(n - 1, j);
      f(n, j) = v;
    }
  }
  return f;
}

SpaceTimeField solve_forward(GridPtr grid, const DegenerateCoefficient& a,
                             const DriftWeight& beta, const LinearCoefficients& coeffs,
                             const SourceSpec& src, std::span<const double> y0) {
  ParabolicOperator op(grid, a, beta, coeffs);
  return op.forward(assemble_forward_source(grid, src), y0);
}

SpaceTimeField solve_backward(GridPtr grid, const DegenerateCoefficient& a,
                              const DriftWeight& beta, const LinearCoefficients& coeffs,
                              const SpaceTimeField& source_slots,
                              std::span<const double> zT) {
  ParabolicOperator op(grid, a, beta, coeffs);
  return op.backward(source_slots, zT);
}

SpaceTimeField apply_exp_shift(const SpaceTimeField& y, double rate) {
  if (!std::isfinite(rate)) throw std::invalid_argument("exp shift: rate must be finite");
  SpaceTimeField out = y;
  const Grid& g = y.grid();
  for (int n = 0; n <= g.time_steps(); ++n) {
    const double factor = std::exp(-rate * g.time(n));
    for (int j = 0; j <= g.space_cells(); ++j) out(n, j) *= factor;
  }
  return out;
}

double coercivity_shift(const LinearCoefficients& coeffs, double L) {
  const double b = coeffs.drift.sup_norm();
  return coeffs.reaction.sup_norm() + 0.5 * L * L * b * b + 2.0;
}

double duality_pairing_forward(const SpaceTimeField& source_levels,
                               const SpaceTimeField& backward_traj) {
  const Grid& g = source_levels.grid();
  double s = 0.0;
  for (int n = 1; n <= g.time_steps(); ++n) {
    double row = 0.0;
    for (int j = 0; j <= g.space_cells(); ++j)
      row += g.node_weight(j) * source_levels(n, j) * backward_traj(n - 1, j);
    s += g.dt() * row;
  }
  return s;
}

double duality_pairing_backward(const SpaceTimeField& source_slots,
                                const SpaceTimeField& forward_traj) {
  const Grid& g = source_slots.grid();
  double s = 0.0;
  for (int n = 1; n <= g.time_steps(); ++n) {
    double row = 0.0;
    for (int j = 0; j <= g.space_cells(); ++j)
      row += g.node_weight(j) * source_slots(n - 1, j) * forward_traj(n, j);
    s += g.dt() * row;
  }
  return s;
}

}  // namespace stacknash
