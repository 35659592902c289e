#include "stacknash/carleman.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

namespace stacknash {

SigmaFunction build_sigma(const Interval& O0, const Interval& O1) {
  if (!O0.valid() || !O1.valid())
    throw std::invalid_argument("build_sigma: empty interval");
  if (!(O1.lo < O0.lo && O0.hi < O1.hi))
    throw std::invalid_argument("build_sigma: O0 must be strictly inside O1");
  SigmaFunction s;
  s.x_star = 0.5 * (O0.lo + O0.hi);
  // m(x*) = 1/2 places the unique critical point of m(1-m) at x*.
  s.c = (0.5 - s.x_star) / (s.x_star * (1.0 - s.x_star));
  if (std::abs(s.c) >= 1.0)
    throw std::invalid_argument(
        "build_sigma: critical point not capturable by a monotone remap");
  s.sup = 0.25;
  return s;
}

CarlemanParameters lambda_interval(const SigmaFunction& sigma,
                                   const DegenerateCoefficient& a, double r, double d) {
  CarlemanParameters p;
  p.r = r;
  p.d = d;
  const double a1 = a.a(1.0);
  const double A = a1 * (2.0 - a.tau);
  const double e2 = std::exp(2.0 * r * sigma.sup);
  const double e1 = std::exp(r * sigma.sup);
  p.interval_lo = A * (e2 - 1.0) / (d * A - 1.0);
  p.interval_hi = 4.0 * (e2 - e1) / (3.0 * d);
  p.interval_nonempty = d * A > 1.0 && p.interval_lo <= p.interval_hi;
  p.lambda = 0.5 * (p.interval_lo + p.interval_hi);
  return p;
}

CarlemanParameters select_parameters(const SigmaFunction& sigma,
                                     const DegenerateCoefficient& a, double safety) {
  if (!(safety >= 1.0)) throw std::invalid_argument("select_parameters: safety must be >= 1");
  const double r = safety * 4.0 * std::log(2.0) / sigma.sup;
  const double d = safety * 5.0 / (a.a(1.0) * (2.0 - a.tau));
  CarlemanParameters p = lambda_interval(sigma, a, r, d);
  if (!p.interval_nonempty)
    throw std::runtime_error("select_parameters: admissible lambda interval is empty, [" +
                             std::to_string(p.interval_lo) + ", " +
                             std::to_string(p.interval_hi) + "]");
  return p;
}

CarlemanWeights::CarlemanWeights(SigmaFunction sigma, const DegenerateCoefficient& a,
                                 CarlemanParameters params, double s_bar, GridPtr grid)
    : sigma_(sigma),
      params_(params),
      s_bar_(s_bar),
      T_(grid->horizon()),
      grid_(std::move(grid)),
      power_family_(a.alpha_exp > 0.0 && a.alpha_exp < 1.0),
      alpha_exp_(a.alpha_exp) {
  const Grid& g = *grid_;
  const int n = g.space_cells();

  // Verify the analytic power form actually matches the supplied coefficient;
  // fall back to cumulative quadrature otherwise.
  if (power_family_) {
    for (int j = 1; j <= n && power_family_; ++j) {
      const double x = g.node(j);
      if (std::abs(a.a(x) - std::pow(x, alpha_exp_)) > 1e-12 * (1.0 + std::abs(a.a(x))))
        power_family_ = false;
    }
  }
  if (!power_family_) {
    // midpoint rule on the first cell keeps y/a(y) away from 0/0
    delta_nodes_.assign(n + 1, 0.0);
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
      const double xm = g.cell_midpoint(k);
      acc += g.cell_width(k) * xm / a.a(xm);
      delta_nodes_[k + 1] = acc;
    }
  }

  double dmin = delta(g.node(0));
  for (int j = 1; j <= n; ++j) dmin = std::min(dmin, delta(g.node(j)));
  delta_min_ = dmin;

  // sign requirements of the family
  for (int j = 0; j <= n; ++j) {
    if (!(delta(g.node(j)) < 0.0))
      throw std::runtime_error("carleman weights: delta must be negative on the grid");
    if (!(psi(g.node(j)) < 0.0))
      throw std::runtime_error("carleman weights: Psi must be negative on the grid");
  }
}

ValidationReport validate_sigma(const SigmaFunction& sigma, const Interval& O0,
                                const Grid& grid) {
  ValidationReport rep;
  {
    ValidationClause c{.name = "sigma(0) = sigma(1) = 0"};
    c.worst = -std::max(std::abs(sigma(0.0)), std::abs(sigma(1.0)));
    c.pass = c.worst >= -1e-14;
    rep.clauses.push_back(c);
  }
  {
    ValidationClause c{.name = "sigma > 0 in (0,1)"};
    double worst = 1e300;
    for (int j = 1; j < grid.space_cells(); ++j)
      worst = std::min(worst, sigma(grid.node(j)));
    c.worst = worst;
    c.pass = worst > 0.0;
    rep.clauses.push_back(c);
  }
  {
    ValidationClause c{.name = "sigma_x != 0 outside O0"};
    double worst = 1e300;
    for (int j = 0; j <= grid.space_cells(); ++j) {
      const double x = grid.node(j);
      if (x >= O0.lo && x <= O0.hi) continue;
      worst = std::min(worst, std::abs(sigma.derivative(x)));
    }
    c.worst = worst;
    c.pass = worst > 0.0;
    rep.clauses.push_back(c);
  }
  {
    ValidationClause c{.name = "critical point inside O0"};
    c.pass = sigma.x_star >= O0.lo && sigma.x_star <= O0.hi;
    c.worst = c.pass ? 0.0 : -1.0;
    rep.clauses.push_back(c);
  }
  return rep;
}

double CarlemanWeights::theta(double t) const {
  if (!(t > 0.0 && t < T_))
    throw std::invalid_argument("theta: t must lie strictly inside (0,T)");
  const double u = t * (T_ - t);
  return 1.0 / (u * u * u * u);
}

double CarlemanWeights::theta_mod(double t) const {
  if (t <= 0.5 * T_) return theta(0.5 * T_);
  return theta(t);
}

double CarlemanWeights::delta(double x) const {
  double integral;
  if (power_family_) {
    integral = std::pow(x, 2.0 - alpha_exp_) / (2.0 - alpha_exp_);
  } else {
    // piecewise-linear interpolation of the cumulative table
    const Grid& g = *grid_;
    const int n = g.space_cells();
    int k = 0;
    while (k + 1 < n && g.node(k + 1) < x) ++k;
    const double x0 = g.node(k), x1 = g.node(k + 1);
    const double t = (x1 > x0) ? (x - x0) / (x1 - x0) : 0.0;
    integral = (1.0 - t) * delta_nodes_[k] + t * delta_nodes_[k + 1];
  }
  return params_.lambda * (integral - params_.d);
}

double CarlemanWeights::eta(double t, double x) const {
  return theta(t) * std::exp(params_.r * sigma_(x));
}

double CarlemanWeights::psi(double x) const {
  return std::exp(params_.r * sigma_(x)) - std::exp(2.0 * params_.r * sigma_.sup);
}

WeightOrderingReport check_weight_ordering(const CarlemanWeights& w, const Grid& grid) {
  WeightOrderingReport rep;
  const double T = grid.horizon();
  rep.checked_times = {0.25 * T, 0.5 * T, 0.75 * T};
  double m1 = 1e300, m2 = 1e300, m3 = 1e300;
  for (double t : rep.checked_times) {
    const double th = w.theta(t);
    for (int j = 0; j <= grid.space_cells(); ++j) {
      const double x = grid.node(j);
      const double phi = w.phi(t, x) / th;       // = delta(x)
      const double env = w.phi_env(t, x) / th;   // = Psi(x)
      m1 = std::min(m1, env - phi);
      m2 = std::min(m2, phi - 4.0 / 3.0 * env);
      m3 = std::min(m3, phi - 2.0 * env);
    }
  }
  rep.margin_phi_le_env = m1;
  rep.margin_fourthirds = m2;
  rep.margin_twice = m3;
  rep.pass = m1 >= 0.0 && m2 >= 0.0 && m3 >= 0.0;
  return rep;
}

double carleman_functional(const SpaceTimeField& z, const CarlemanWeights& w,
                           const DegenerateCoefficient& a, double s) {
  const Grid& g = z.grid();
  const int m = g.time_steps();
  const int nc = g.space_cells();
  const double scale = 1e-12 * (1.0 + z.max_abs());
  if (std::abs(z(0, 0)) > scale)
    throw std::invalid_argument("carleman_functional: z must vanish on the boundary");

  double total = 0.0;
  for (int n = 1; n < m; ++n) {
    const double t = g.time(n);
    const double th = w.theta(t);
    const double s3t3 = s * s * s * th * th * th;
    double row = 0.0;
    for (int j = 1; j < nc; ++j) {
      const double x = g.node(j);
      const double weight = std::exp(2.0 * s * w.phi(t, x));
      row += g.node_weight(j) * s3t3 * (x * x / a.a(x)) * z(n, j) * z(n, j) * weight;
    }
    for (int k = 0; k < nc; ++k) {
      const double h = g.cell_width(k);
      const double xm = g.cell_midpoint(k);
      const double dz = (z(n, k + 1) - z(n, k)) / h;
      const double weight = std::exp(2.0 * s * w.phi(t, xm));
      row += h * s * th * a.a(xm) * dz * dz * weight;
    }
    total += g.dt() * row;
  }
  return total;
}

double carleman_functional_band(const SpaceTimeField& z, const CarlemanWeights& w,
                                double s, const Interval& band) {
  const Grid& g = z.grid();
  const int m = g.time_steps();
  const int nc = g.space_cells();
  double total = 0.0;
  for (int n = 1; n < m; ++n) {
    const double t = g.time(n);
    double row = 0.0;
    for (int j = 0; j <= nc; ++j) {
      const double x = g.node(j);
      if (x < band.lo || x > band.hi) continue;
      const double et = w.eta(t, x);
      const double weight = std::exp(2.0 * s * w.phi_env(t, x));
      row += g.node_weight(j) * s * s * s * et * et * et * z(n, j) * z(n, j) * weight;
    }
    for (int k = 0; k < nc; ++k) {
      const double xm = g.cell_midpoint(k);
      if (xm < band.lo || xm > band.hi) continue;
      const double h = g.cell_width(k);
      const double dz = (z(n, k + 1) - z(n, k)) / h;
      const double weight = std::exp(2.0 * s * w.phi_env(t, xm));
      row += h * s * w.eta(t, xm) * dz * dz * weight;
    }
    total += g.dt() * row;
  }
  return total;
}

double log_admissibility_quadrature(const SpaceTimeField& target, const CarlemanWeights& w,
                                    const ControlLayout& layout) {
  if (target.empty()) return -std::numeric_limits<double>::infinity();
  const Grid& g = target.grid();
  const auto& mask = layout.omega_d_mask();

  // log-sum-exp over dt * w_j * kappa_norm^{-2} * y_d^2
  double max_log = -std::numeric_limits<double>::infinity();
  std::vector<double> logs;
  for (int n = 1; n < g.time_steps(); ++n) {
    const double lk = w.log_kappa_normalized(g.time(n));
    for (int j = 0; j <= g.space_cells(); ++j) {
      if (!mask[j] || target(n, j) == 0.0) continue;
      const double lv = -2.0 * lk + std::log(g.dt() * g.node_weight(j)) +
                        2.0 * std::log(std::abs(target(n, j)));
      logs.push_back(lv);
      max_log = std::max(max_log, lv);
    }
  }
  if (logs.empty()) return -std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (double lv : logs) acc += std::exp(lv - max_log);
  return max_log + std::log(acc);
}

std::vector<double> random_terminal_data(const Grid& grid, CounterRng& rng) {
  const int n = grid.space_cells();
  std::vector<double> raw(n + 1), out(n + 1, 0.0);
  for (int j = 0; j <= n; ++j) raw[j] = rng.normal();
  for (int j = 1; j < n; ++j)
    out[j] = 0.25 * (raw[j - 1] + 2.0 * raw[j] + raw[j + 1]);
  out[0] = out[n] = 0.0;
  return out;
}

namespace {

ObservabilitySample run_observability_sample(const GameSetup& setup, const CostConfig& cost,
                                             const CarlemanWeights& weights,
                                             std::uint64_t seed, std::uint64_t stream,
                                             double block_tol, int block_max) {
  const Grid& g = *setup.grid;
  const int m = g.time_steps();
  const int nc = g.space_cells();
  CounterRng rng(seed, stream);
  const std::vector<double> rhoT = random_terminal_data(g, rng);

  ParabolicOperator state_op(setup.grid, setup.diffusion, setup.drift, setup.lin_state);
  ParabolicOperator adj_op(setup.grid, setup.diffusion, setup.drift, setup.lin_adjoint);
  std::vector<double> zeros(nc + 1, 0.0);
  const auto& dmask = setup.layout->omega_d_mask();

  ObservabilitySample sample;
  SpaceTimeField zero_src(setup.grid);
  SpaceTimeField rho = state_op.backward(zero_src, rhoT);
  SpaceTimeField psi1(setup.grid), psi2(setup.grid);

  for (int it = 0; it < block_max; ++it) {
    // psi_i forward with source -(1/mu_i) rho restricted to omega_i
    auto psi_solve = [&](int i) {
      SpaceTimeField src(setup.grid);
      const auto& mask = setup.layout->follower_mask(i);
      for (int n = 1; n <= m; ++n)
        for (int j = 0; j <= nc; ++j)
          if (mask[j]) src(n, j) = -rho(n - 1, j) / cost.mu(i);
      std::vector<double> start(nc + 1, 0.0);
      // source already assembled at level rows; forward() reads rows 1..M
      return adj_op.forward(src, start);
    };
    psi1 = psi_solve(1);
    psi2 = psi_solve(2);

    SpaceTimeField src(setup.grid);
    for (int k = 0; k < m; ++k)
      for (int j = 0; j <= nc; ++j)
        if (dmask[j])
          src(k, j) = cost.alpha1 * psi1(k + 1, j) + cost.alpha2 * psi2(k + 1, j);
    SpaceTimeField rho_next = state_op.backward(src, rhoT);

    const double res = relative_change(rho_next, rho, 1e-300);
    rho = std::move(rho_next);
    sample.iterations = it + 1;
    if (res <= block_tol) {
      sample.converged = true;
      break;
    }
  }

  const double rho0 = row_l2_norm(g, rho.row(0));
  double lhs_norm = rho0 * rho0, lhs_lit = rho0 * rho0;
  for (const SpaceTimeField* psi : {&psi1, &psi2}) {
    for (int n = 1; n < m; ++n) {
      const double t = g.time(n);
      const double rn = row_l2_norm(g, psi->row(n));
      const double kn = weights.kappa_normalized(t);
      const double kl = weights.kappa(t);
      lhs_norm += g.dt() * kn * kn * rn * rn;
      lhs_lit += g.dt() * kl * kl * rn * rn;
    }
  }
  sample.lhs = lhs_norm;
  sample.lhs_literal = lhs_lit;
  sample.rhs = control_inner(rho, rho, setup.layout->omega_mask());
  sample.ratio = (sample.rhs > 0.0)
                     ? sample.lhs / sample.rhs
                     : std::numeric_limits<double>::infinity();
  return sample;
}

}  // namespace

ObservabilityStats observability_experiment(const GameSetup& setup, const CostConfig& cost,
                                            const CarlemanWeights& weights, int n_samples,
                                            std::uint64_t seed, double block_tol,
                                            int block_max) {
  ObservabilityStats stats;
  stats.samples.resize(n_samples);

  std::vector<std::future<ObservabilitySample>> futures;
  futures.reserve(n_samples);
  for (int i = 0; i < n_samples; ++i)
    futures.push_back(std::async(std::launch::async, [&, i] {
      return run_observability_sample(setup, cost, weights, seed,
                                      static_cast<std::uint64_t>(i), block_tol, block_max);
    }));
  for (int i = 0; i < n_samples; ++i) stats.samples[i] = futures[i].get();

  std::vector<double> ratios;
  for (const auto& s : stats.samples) {
    if (!s.converged || !std::isfinite(s.ratio)) {
      ++stats.failures;
      continue;
    }
    ratios.push_back(s.ratio);
  }
  if (!ratios.empty()) {
    std::sort(ratios.begin(), ratios.end());
    stats.max_ratio = ratios.back();
    stats.median_ratio = ratios[ratios.size() / 2];
  }
  return stats;
}

}  // namespace stacknash
