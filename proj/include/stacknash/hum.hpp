#pragma once

#include "stacknash/nash.hpp"

namespace stacknash {

struct HumConfig {
  double epsilon = 1e-2;
  double cg_tol = 1e-8;
  int cg_max_iter = 600;
  double block_tol = 1e-12;
  int block_max = 400;
  std::vector<double> epsilon_list;
  double outer_tol = 1e-8;
  int outer_max = 30;
  bool track_cost = false;  // evaluate J exactly every CG iteration
};

struct HumResult {
  SpaceTimeField h;  // leader control on omega, slot rows 0..M-1
  double y_final_norm = 0.0;
  double h_norm = 0.0;
  double gradient_norm = 0.0;
  double characterization_residual = 0.0;
  int cg_iterations = 0;
  bool converged = false;
  std::vector<double> cost_history;  // filled when track_cost is on
};

/// Coupled adjoint pair of the penalized problem: rho backward (state-pair
/// coefficients, divergence drift via transposition) driven on omega_d by the
/// weighted psi_i, psi_i forward (adjoint-pair coefficients) driven by
/// -rho/mu_i on omega_i. Solved by block iteration.
struct AdjointPair {
  SpaceTimeField rho;
  SpaceTimeField psi1, psi2;
  int iterations = 0;
  bool converged = false;
};
AdjointPair solve_adjoint_pair(const GameSetup& setup, const CostConfig& cost,
                               std::span<const double> rho_terminal,
                               double block_tol, int block_max);

/// J_eps(h) = ||y(T)||^2/(2 eps) + ||h||^2_omega / 2 with the followers
/// eliminated inside the state system.
double eval_penalized(const GameSetup& setup, const SpaceTimeField& h,
                      const CostConfig& cost, const HumConfig& cfg,
                      NashSolution* state_out = nullptr);

/// Exact gradient of the discrete J_eps: g = (h - rho) restricted to omega.
SpaceTimeField hum_gradient(const GameSetup& setup, const SpaceTimeField& h,
                            const CostConfig& cost, const HumConfig& cfg,
                            NashSolution* state_out = nullptr,
                            AdjointPair* adjoint_out = nullptr);

/// Conjugate-gradient minimization of J_eps over controls on omega, exact
/// line search on the quadratic, Polak-Ribiere direction updates with
/// periodic exact-gradient refresh.
HumResult minimize_cg(const GameSetup& setup, const CostConfig& cost, const HumConfig& cfg,
                      const SpaceTimeField* h_init = nullptr);

struct SweepRow {
  double epsilon = 0.0;
  double yT_norm = 0.0;
  double h_norm = 0.0;
  int cg_iters = 0;
  double slope_running = 0.0;  // NaN until two usable rows exist
};

struct SweepTable {
  std::vector<SweepRow> rows;
  double slope = 0.0;  // final log-log fit of ||y(T)|| against epsilon
};

/// Runs minimize_cg per epsilon (decreasing list, warm-started) and fits the
/// decay slope of the terminal norm.
SweepTable epsilon_sweep(const GameSetup& setup, const CostConfig& cost, HumConfig cfg);

struct OuterLog {
  std::vector<double> residuals;  // ||z_{k+1} - z_k|| in L2(0,T;H^1_a)
  std::vector<double> h_norms;
  std::vector<double> yT_norms;
  int iterations = 0;
  bool converged = false;
};

struct StackelbergResult {
  SpaceTimeField h;
  NashSolution equilibrium;
  OuterLog log;
};

/// Outer fixed-point loop for the semilinear problem: freeze the quotient
/// coefficients at the current iterate, run the linear leader minimization
/// (warm-started), advance the iterate to the resulting state.
StackelbergResult semilinear_stackelberg(const GameSetup& setup, const CostConfig& cost,
                                         const HumConfig& cfg);

/// sqrt( sum_n dt ||row_n||^2_{H^1_a} ) of a trajectory.
double h1a_trajectory_norm(const SpaceTimeField& f, const DegenerateCoefficient& a);

}  // namespace stacknash
