#pragma once

#include <memory>

#include "stacknash/nonlinearity.hpp"
#include "stacknash/rng.hpp"

namespace stacknash {

/// Follower cost weights and tracking targets (targets supported on omega_d).
struct CostConfig {
  double alpha1 = 1.0, alpha2 = 1.0;  // tracking weights
  double mu1 = 100.0, mu2 = 100.0;    // control penalties
  SpaceTimeField y1d, y2d;            // targets, rows 1..M are read

  void validate(const ControlLayout& layout) const;
  double alpha(int i) const { return i == 1 ? alpha1 : alpha2; }
  double mu(int i) const { return i == 1 ? mu1 : mu2; }
  const SpaceTimeField& target(int i) const { return i == 1 ? y1d : y2d; }
};

/// Everything that defines the game dynamics. With a zero nonlinearity the
/// state/adjoint systems use the explicit linearized coefficient pairs; with a
/// nonzero one, coefficients are frozen at the current state per sweep.
struct GameSetup {
  GridPtr grid;
  DegenerateCoefficient diffusion;
  DriftWeight drift;
  std::shared_ptr<const ControlLayout> layout;
  Nonlinearity nl = Nonlinearity::zero();
  LinearCoefficients lin_state;    // a1, a2 (used when nl.is_zero)
  LinearCoefficients lin_adjoint;  // b1, b2
  std::vector<double> y0;          // initial state row; empty means zero
  double clamp_cap = 1e3;
  double picard_tol = 1e-12;
  int picard_max = 80;

  std::vector<double> initial_row() const {
    if (!y0.empty()) return y0;
    return std::vector<double>(grid->space_cells() + 1, 0.0);
  }
};

struct NashSolution {
  SpaceTimeField y;       // state, rows 0..M
  SpaceTimeField p1, p2;  // follower adjoints, rows 0..M (row M = 0)
  SpaceTimeField v1, v2;  // controls = -p_i/mu_i on omega_i, slot rows 0..M-1
  std::vector<double> residual_history;
  int iterations = 0;
  bool converged = false;
};

/// Block Gauss-Seidel for the coupled optimality system: state forward with
/// controls -p_i/mu_i, follower adjoints backward with tracking sources,
/// under-relaxation on the adjoint block. Throws when the residual grows for
/// five consecutive sweeps (the follower penalties are too small for the
/// fixed point to contract).
NashSolution solve_nash(const GameSetup& setup, const SpaceTimeField& leader,
                        const CostConfig& cost, double tol, int max_iter,
                        double relax = 0.8);

/// J_i(h; v1, v2) with the state recomputed from the given controls.
double eval_cost(const GameSetup& setup, int i, const SpaceTimeField& leader,
                 const SpaceTimeField& v1, const SpaceTimeField& v2,
                 const CostConfig& cost);

/// State trajectory for given controls (semilinear or linear path).
SpaceTimeField solve_state(const GameSetup& setup, const SpaceTimeField& leader,
                           const SpaceTimeField& v1, const SpaceTimeField& v2);
SpaceTimeField solve_state_from(const GameSetup& setup, const SourceSpec& src,
                                std::span<const double> y0);

struct DerivativePair {
  double sensitivity = 0.0;  // via the linearized state system
  double fd = 0.0;           // central finite difference of the cost
};

/// First Gateaux derivative of J_i at (v1,v2) in direction w (supported on
/// omega_i), computed both through the sensitivity system and by central
/// finite differences of eval_cost.
DerivativePair stationarity_residual(const GameSetup& setup, const SpaceTimeField& leader,
                                     const SpaceTimeField& v1, const SpaceTimeField& v2,
                                     const CostConfig& cost, const SpaceTimeField& w,
                                     int i, double fd_step = 1e-4);

struct ConvexityProbe {
  double structural = 0.0;  // second-order adjoint route
  double fd = 0.0;          // second-order central difference
  double c_estimate = 0.0;  // structural = (mu_i - c_estimate) ||w||^2
};

/// Second directional derivative of J_i at (v1,v2) along w, via the
/// forward/backward sensitivity pair (including the full second-derivative
/// coupling of the nonlinearity) and via a second-order difference quotient.
ConvexityProbe convexity_probe(const GameSetup& setup, const SpaceTimeField& leader,
                               const SpaceTimeField& v1, const SpaceTimeField& v2,
                               const CostConfig& cost, const SpaceTimeField& w,
                               int i, double fd_step = 1e-3);

/// Mask-weighted control inner product over slot rows 0..M-1.
double control_inner(const SpaceTimeField& a, const SpaceTimeField& b,
                     const std::vector<std::uint8_t>& mask);
inline double control_norm(const SpaceTimeField& a, const std::vector<std::uint8_t>& mask) {
  return std::sqrt(control_inner(a, a, mask));
}

/// Gaussian random control field supported on the mask, unit control norm.
SpaceTimeField random_control_direction(GridPtr grid, const std::vector<std::uint8_t>& mask,
                                        CounterRng& rng);

}  // namespace stacknash
