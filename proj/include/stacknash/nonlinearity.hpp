#pragma once

#include <functional>
#include <string>
#include <vector>

#include "stacknash/solver.hpp"

namespace stacknash {

/// Semilinear term F(s,p) acting on (y, y_x), with first and second partial
/// derivatives supplied as callables, validated bound constants, and the
/// quadrature order used for the integral means F_1, F_2.
struct Nonlinearity {
  using Fn = std::function<double(double, double)>;

  Fn f;                  // F(s,p), F(0,0) = 0
  Fn d1, d2;             // first partials
  Fn d11, d12, d21, d22; // second partials
  double lipschitz_K = 0.0;
  double bound_M1 = 0.0;
  double bound_M2 = 0.0;
  int quadrature_order = 16;

  bool is_zero = false;  // exact shortcut for the linear regime

  /// F = 0; every derived coefficient vanishes and the solvers reduce to the
  /// linear path bit-for-bit.
  static Nonlinearity zero();
  /// F(s,p) = c1 tanh(s).
  static Nonlinearity tanh_reaction(double c1);
  /// F(s,p) = c1 tanh(s) + c2 sin(p).
  static Nonlinearity tanh_sin(double c1, double c2);
};

/// Integral means F_1(s,p) = int_0^1 D1F(rs, rp) dr and likewise F_2, by
/// Gauss-Legendre quadrature; F = F_1 s + F_2 p up to quadrature error.
struct IntegralMeans {
  double f1 = 0.0;
  double f2 = 0.0;
};
IntegralMeans integral_means(const Nonlinearity& nl, double s, double p);

/// Gauss-Legendre nodes/weights on [0,1] (generated once per order).
const std::vector<std::pair<double, double>>& gauss_legendre_01(int order);

/// Frozen linearized coefficients at a trajectory z:
///   state pair     a1 = F_1(z,z_x),  a2 = clamp(F_2(z,z_x)/beta),
///   adjoint pair   b1 = D1F(z,z_x),  b2 = clamp(D2F(z,z_x)/beta),
/// with the quotient by beta clamped to [-cap, cap].
struct QuotientCoefficients {
  LinearCoefficients state;    // a1, a2
  LinearCoefficients adjoint;  // b1, b2
  double clamped_fraction = 0.0;
};
QuotientCoefficients quotient_coefficients(const Nonlinearity& nl,
                                           const SpaceTimeField& z,
                                           const DriftWeight& beta, double cap);

/// Central difference of a trajectory row in space (one-sided at the ends).
void spatial_derivative_row(const Grid& grid, std::span<const double> row,
                            std::span<double> out);

struct PicardLog {
  std::vector<double> residuals;  // relative L2(Q) update per iteration
  int iterations = 0;
  bool converged = false;
};

/// Solves the semilinear state equation by frozen-coefficient fixed-point
/// iteration: z^{k+1} = forward solve with coefficients at z^k, starting from
/// z^0 = 0. Throws on non-convergence.
SpaceTimeField picard_semilinear(GridPtr grid, const DegenerateCoefficient& a,
                                 const DriftWeight& beta, const Nonlinearity& nl,
                                 const SourceSpec& src, std::span<const double> y0,
                                 double tol, int max_iter, double cap,
                                 PicardLog* log = nullptr);

struct ProbeLattice {
  double s_max = 3.0;
  double p_max = 3.0;
  int points_per_axis = 25;
};

/// Checks F(0,0)=0, sampled Lipschitz quotients against K, derivative bounds
/// against M2, and the reconstruction identity F = F_1 s + F_2 p.
ValidationReport validate_assumptions(const Nonlinearity& nl, const ProbeLattice& probe);

}  // namespace stacknash
