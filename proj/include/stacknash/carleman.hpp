#pragma once

#include <optional>
#include <vector>

#include "stacknash/nash.hpp"

namespace stacknash {

/// Spatial shape sigma(x) = m(x)(1 - m(x)) where m(x) = x + c x(1-x) is a
/// smooth monotone remap of [0,1]; sigma vanishes at the endpoints, is
/// positive inside, and its only critical point sits at the prescribed x*.
struct SigmaFunction {
  double c = 0.0;
  double x_star = 0.5;
  double sup = 0.25;

  double operator()(double x) const {
    const double mx = x + c * x * (1.0 - x);
    return mx * (1.0 - mx);
  }
  double derivative(double x) const {
    const double mx = x + c * x * (1.0 - x);
    return (1.0 + c * (1.0 - 2.0 * x)) * (1.0 - 2.0 * mx);
  }
};

/// Builds sigma with critical point at the midpoint of O0. Requires
/// O0 strictly inside O1 and a remap that stays monotone (|c| < 1).
SigmaFunction build_sigma(const Interval& O0, const Interval& O1);

/// Grid scan of the sigma requirements: endpoint zeros, positivity inside,
/// nonvanishing derivative outside O0, critical point inside O0.
ValidationReport validate_sigma(const SigmaFunction& sigma, const Interval& O0,
                                const Grid& grid);

struct CarlemanParameters {
  double r = 0.0;
  double d = 0.0;
  double lambda = 0.0;
  double interval_lo = 0.0;
  double interval_hi = 0.0;
  bool interval_nonempty = false;
};

/// Admissible range for lambda given (r, d, sigma, a); empty ranges are
/// reported, not resolved.
CarlemanParameters lambda_interval(const SigmaFunction& sigma,
                                   const DegenerateCoefficient& a, double r, double d);

/// r = safety * 4 ln 2 / ||sigma||, d = safety * 5 / (a(1)(2 - tau)), lambda
/// at the midpoint of the admissible interval. Throws if the interval is empty.
CarlemanParameters select_parameters(const SigmaFunction& sigma,
                                     const DegenerateCoefficient& a, double safety);

/// The weight family: Theta(t) = (t(T-t))^-4, delta(x) = lambda(int_0^x y/a dy - d),
/// phi = Theta delta, eta = Theta e^{r sigma}, Psi = e^{r sigma} - e^{2 r ||sigma||},
/// PhiEnv = Theta Psi, plus the time-frozen variants and kappa(t) = e^{s_bar phi_min(t)}.
/// kappa spans magnitudes far outside double range for the default parameters,
/// so the log of kappa is the primitive quantity and a plateau-normalized
/// variant (kappa(t)/kappa(T/2)) is provided for quadratures.
class CarlemanWeights {
 public:
  CarlemanWeights(SigmaFunction sigma, const DegenerateCoefficient& a,
                  CarlemanParameters params, double s_bar, GridPtr grid);

  const SigmaFunction& sigma() const { return sigma_; }
  const CarlemanParameters& params() const { return params_; }
  double s_bar() const { return s_bar_; }
  double horizon() const { return T_; }

  double theta(double t) const;
  double theta_mod(double t) const;  // frozen at T/2 on [0, T/2]
  double delta(double x) const;
  double delta_grid_min() const { return delta_min_; }
  double phi(double t, double x) const { return theta(t) * delta(x); }
  double phi_mod(double t, double x) const { return theta_mod(t) * delta(x); }
  double eta(double t, double x) const;
  double psi(double x) const;
  double phi_env(double t, double x) const { return theta(t) * psi(x); }

  /// phi_min(t) = min over grid nodes of phi_mod(t, x) = theta_mod(t) * min delta.
  double phi_min(double t) const { return theta_mod(t) * delta_min_; }
  double log_kappa(double t) const { return s_bar_ * phi_min(t); }
  double kappa(double t) const { return std::exp(log_kappa(t)); }
  /// kappa(t) / kappa(T/2); equals 1 on [0, T/2].
  double log_kappa_normalized(double t) const {
    return s_bar_ * (phi_min(t) - phi_min(0.5 * T_));
  }
  double kappa_normalized(double t) const { return std::exp(log_kappa_normalized(t)); }

 private:
  SigmaFunction sigma_;
  CarlemanParameters params_;
  double s_bar_;
  double T_;
  GridPtr grid_;
  bool power_family_;
  double alpha_exp_;
  std::vector<double> delta_nodes_;  // cumulative quadrature for custom a
  double delta_min_;
};

struct WeightOrderingReport {
  double margin_phi_le_env = 0.0;      // min of (PhiEnv - phi)/theta
  double margin_fourthirds = 0.0;      // min of (phi - 4/3 PhiEnv)/theta
  double margin_twice = 0.0;           // min of (phi - 2 PhiEnv)/theta
  std::vector<double> checked_times;
  bool pass = false;
};

/// Verifies 4/3 PhiEnv <= phi <= PhiEnv and 2 PhiEnv <= phi at every interior
/// node; both chains share the factor theta(t), so profiles at a few times
/// suffice and the margins are reported theta-free.
WeightOrderingReport check_weight_ordering(const CarlemanWeights& w, const Grid& grid);

/// Quadrature of int (s^3 Theta^3 x^2/a z^2 + s Theta a z_x^2) e^{2 s phi}.
/// Representable only for small s with the default parameter magnitudes; the
/// weight underflows to zero harmlessly near the time endpoints.
double carleman_functional(const SpaceTimeField& z, const CarlemanWeights& w,
                           const DegenerateCoefficient& a, double s);

/// Companion on a strictly interior band: int (s^3 eta^3 z^2 + s eta z_x^2) e^{2 s PhiEnv}.
double carleman_functional_band(const SpaceTimeField& z, const CarlemanWeights& w,
                                double s, const Interval& band);

/// log of int int_{omega_d} kappa_norm^{-2} |target|^2, computed by
/// log-sum-exp; +inf-like values simply come out above any threshold.
double log_admissibility_quadrature(const SpaceTimeField& target,
                                    const CarlemanWeights& w,
                                    const ControlLayout& layout);

struct ObservabilitySample {
  double lhs = 0.0;          // ||rho(0)||^2 + sum int kappa_norm^2 |psi_i|^2
  double lhs_literal = 0.0;  // same with the literal kappa (may underflow to 0)
  double rhs = 0.0;          // int int_omega rho^2
  double ratio = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct ObservabilityStats {
  std::vector<ObservabilitySample> samples;
  double max_ratio = 0.0;
  double median_ratio = 0.0;
  int failures = 0;
};

/// For random mollified terminal data, solves the coupled adjoint pair (rho
/// backward driven by the weighted follower adjoints, psi_i forward driven by
/// -rho/mu_i) and accumulates the empirical constant of the observability
/// ratio. Samples run concurrently; each draws from its own counter stream.
ObservabilityStats observability_experiment(const GameSetup& setup, const CostConfig& cost,
                                            const CarlemanWeights& weights, int n_samples,
                                            std::uint64_t seed, double block_tol = 1e-12,
                                            int block_max = 200);

/// One draw of terminal data: Gaussian nodal samples smoothed by one Jacobi
/// pass and zeroed at the endpoints.
std::vector<double> random_terminal_data(const Grid& grid, CounterRng& rng);

}  // namespace stacknash
