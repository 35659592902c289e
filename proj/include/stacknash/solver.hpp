#pragma once

#include <memory>
#include <optional>

#include "stacknash/coefficients.hpp"
#include "stacknash/field.hpp"
#include "stacknash/regions.hpp"
#include "stacknash/tridiag.hpp"

namespace stacknash {

enum class DriftForm { kNonDivergence, kDivergence };

/// Reaction or drift coefficient: either a constant or a full space-time
/// sample. Step assembly reads row n for the step onto level n.
class CoeffField {
 public:
  CoeffField() = default;
  CoeffField(double c) : constant_(c) {}  // NOLINT: implicit by design
  explicit CoeffField(SpaceTimeField f) : field_(std::move(f)) {}

  double at(int n, int j) const {
    return field_ ? (*field_)(n, j) : constant_;
  }
  bool is_constant() const { return !field_.has_value(); }
  double sup_norm() const;

 private:
  double constant_ = 0.0;
  std::optional<SpaceTimeField> field_;
};

/// Coefficients of the linear operator  u -> -(a(x)u_x)_x + c_r u + beta(x) c_d u_x
/// (non-divergence form) or its divergence-drift counterpart.
struct LinearCoefficients {
  CoeffField reaction;  // c_r
  CoeffField drift;     // c_d
  DriftForm drift_form = DriftForm::kNonDivergence;

  /// True when inf c_r > L^2 ||c_d||^2 / 2 (the coercivity margin used by the
  /// energy estimates). `inf_reaction` must be supplied by the caller when the
  /// reaction is a full field.
  static bool coercive(double inf_reaction, double sup_drift, double L) {
    return inf_reaction > 0.5 * L * L * sup_drift * sup_drift;
  }
};

/// Right-hand side of the state equation: leader and follower controls
/// restricted to their regions plus an arbitrary distributed source.
/// Controls are read at the step's left endpoint (row n-1 for the step onto
/// level n); the distributed source at the right endpoint (row n).
struct SourceSpec {
  const SpaceTimeField* leader = nullptr;
  const SpaceTimeField* follower1 = nullptr;
  const SpaceTimeField* follower2 = nullptr;
  const SpaceTimeField* distributed = nullptr;
  const ControlLayout* layout = nullptr;  // required when any control is set
};

/// Implicit-Euler stepping operators for one coefficient set: M tridiagonal
/// matrices I + dt*A_n acting on the interior nodes, n = 1..M. The backward
/// solver steps with the weighted transposes of the same matrices, so the
/// discrete forward/backward pair is adjoint to round-off.
class ParabolicOperator {
 public:
  ParabolicOperator(GridPtr grid, const DegenerateCoefficient& a,
                    const DriftWeight& beta, const LinearCoefficients& coeffs);

  const Grid& grid() const { return *grid_; }
  GridPtr grid_ptr() const { return grid_; }

  /// Marches y^0 = y0 and (I + dt A_n) y^n = y^{n-1} + dt f^n for n = 1..M,
  /// where f^n is row n of `source_levels`.
  SpaceTimeField forward(const SpaceTimeField& source_levels,
                         std::span<const double> y0) const;

  /// Marches p^M = pT and (I + dt A*_{n}) p^{n-1} = p^n + dt g^{n-1} for
  /// n = M..1, where g^k is row k of `source_slots`.
  SpaceTimeField backward(const SpaceTimeField& source_slots,
                          std::span<const double> pT) const;

  /// Applies A_n (interior) -- used by operator-level adjointness checks.
  void apply_step_matrix(int n, std::span<const double> x, std::span<double> y) const;
  void apply_step_matrix_adjoint(int n, std::span<const double> x,
                                 std::span<double> y) const;

 private:
  const TriDiagSolver& forward_solver(int n) const;
  const TriDiagSolver& backward_solver(int n) const;

  GridPtr grid_;
  std::vector<double> interior_weights_;
  std::vector<TriDiag> a_steps_;  // A_n without the identity/dt scaling
  mutable std::vector<std::unique_ptr<TriDiagSolver>> fwd_, bwd_;
  mutable std::vector<TriDiag> adj_steps_;
};

/// Assembles the forward right-hand-side field from a SourceSpec (row n =
/// distributed row n plus control rows n-1 under their masks).
SpaceTimeField assemble_forward_source(GridPtr grid, const SourceSpec& src);

/// Solves the state equation with initial row y0; returns the full trajectory.
SpaceTimeField solve_forward(GridPtr grid, const DegenerateCoefficient& a,
                             const DriftWeight& beta, const LinearCoefficients& coeffs,
                             const SourceSpec& src, std::span<const double> y0);

/// Solves the adjoint equation (divergence-form drift) with terminal row zT;
/// the source field is read at slot rows 0..M-1.
SpaceTimeField solve_backward(GridPtr grid, const DegenerateCoefficient& a,
                              const DriftWeight& beta, const LinearCoefficients& coeffs,
                              const SpaceTimeField& source_slots,
                              std::span<const double> zT);

/// Pointwise multiplication by exp(-r t).
SpaceTimeField apply_exp_shift(const SpaceTimeField& y, double rate);

/// Coercivity shift used by the energy-estimate diagnostics:
/// r = ||c_r||_inf + L^2 ||c_d||^2_inf / 2 + 2.
double coercivity_shift(const LinearCoefficients& coeffs, double L);

/// Duality pairing sum_{n=1..M} dt <f^n, p^{n-1}>_w between a forward source
/// (rows 1..M) and a backward trajectory (rows 0..M-1); equals
/// sum dt <g^{n-1}, y^n>_w for the adjoint pair.
double duality_pairing_forward(const SpaceTimeField& source_levels,
                               const SpaceTimeField& backward_traj);
double duality_pairing_backward(const SpaceTimeField& source_slots,
                                const SpaceTimeField& forward_traj);

}  // namespace stacknash
