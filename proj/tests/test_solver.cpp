#include "doctest.h"
#include "support.hpp"

using namespace stacknash;

namespace {

LinearCoefficients const_coeffs(double reaction, double drift) {
  return LinearCoefficients{reaction, drift, DriftForm::kNonDivergence};
}

}  // namespace

TEST_CASE("zero data produce the zero trajectory exactly") {
  const GridPtr grid = build_grid(16, 16, 1.0);
  const auto a = DegenerateCoefficient::power(0.5);
  const auto beta = DriftWeight::identity();
  ParabolicOperator op(grid, a, beta, const_coeffs(1.0, 0.3));

  const SpaceTimeField src(grid);
  std::vector<double> zeros(17, 0.0);
  const SpaceTimeField y = op.forward(src, zeros);
  const SpaceTimeField p = op.backward(src, zeros);
  for (double v : y.data()) CHECK(v == 0.0);
  for (double v : p.data()) CHECK(v == 0.0);
}

// Manufactured solution with zero temporal truncation (state linear in t):
// errors isolate the spatial discretization.
static double manufactured_spatial_error(int n, int m) {
  const GridPtr grid = build_grid(n, m, 1.0);
  const auto a = DegenerateCoefficient::power(0.5);
  const auto beta = DriftWeight::zero();
  ParabolicOperator op(grid, a, beta, const_coeffs(1.0, 0.0));

  const auto exact = [](double t, double x) { return t * std::sin(M_PI * x); };
  const auto source = [](double t, double x) {
    const double s = std::sin(M_PI * x), c = std::cos(M_PI * x);
    return s - t * M_PI * (0.5 / std::sqrt(x) * c - M_PI * std::sqrt(x) * s) + t * s;
  };
  SpaceTimeField f(grid);
  for (int lev = 1; lev <= m; ++lev)
    for (int j = 1; j < n; ++j) f(lev, j) = source(grid->time(lev), grid->node(j));

  std::vector<double> y0(n + 1, 0.0);
  const SpaceTimeField y = op.forward(f, y0);

  double err2 = 0.0;
  for (int lev = 1; lev <= m; ++lev) {
    double row = 0.0;
    for (int j = 0; j <= n; ++j) {
      if (grid->node(j) < 0.1) continue;  // order measured away from the degeneracy
      const double d = y(lev, j) - exact(grid->time(lev), grid->node(j));
      row += grid->node_weight(j) * d * d;
    }
    err2 += grid->dt() * row;
  }
  return std::sqrt(err2);
}

// Exponential-in-time manufactured solution isolating the temporal order.
static double manufactured_temporal_error(int n, int m) {
  const GridPtr grid = build_grid(n, m, 1.0);
  const auto a = DegenerateCoefficient::power(0.5);
  const auto beta = DriftWeight::zero();
  ParabolicOperator op(grid, a, beta, const_coeffs(1.0, 0.0));

  const auto exact = [](double t, double x) { return std::exp(-t) * std::sin(M_PI * x); };
  const auto source = [](double t, double x) {
    const double s = std::sin(M_PI * x), c = std::cos(M_PI * x);
    // time derivative and reaction cancel the sin term with a0 = 1
    return -std::exp(-t) * M_PI * (0.5 / std::sqrt(x) * c - M_PI * std::sqrt(x) * s);
  };
  SpaceTimeField f(grid);
  for (int lev = 1; lev <= m; ++lev)
    for (int j = 1; j < n; ++j) f(lev, j) = source(grid->time(lev), grid->node(j));

  const auto y0 = snt::make_row(*grid, [](double x) { return std::sin(M_PI * x); });
  const SpaceTimeField y = op.forward(f, y0);

  double err2 = 0.0;
  for (int lev = 1; lev <= m; ++lev) {
    double row = 0.0;
    for (int j = 0; j <= n; ++j) {
      const double d = y(lev, j) - exact(grid->time(lev), grid->node(j));
      row += grid->node_weight(j) * d * d;
    }
    err2 += grid->dt() * row;
  }
  return std::sqrt(err2);
}

TEST_CASE("manufactured-solution convergence orders") {
  SUBCASE("spatial order >= 1.5 on x >= 0.1") {
    const double e32 = manufactured_spatial_error(32, 16);
    const double e64 = manufactured_spatial_error(64, 16);
    const double e128 = manufactured_spatial_error(128, 16);
    const double order1 = std::log2(e32 / e64);
    const double order2 = std::log2(e64 / e128);
    CHECK(order1 >= 1.5);
    CHECK(order2 >= 1.5);
  }
  SUBCASE("temporal order >= 0.9") {
    const double e32 = manufactured_temporal_error(512, 32);
    const double e64 = manufactured_temporal_error(512, 64);
    const double e128 = manufactured_temporal_error(512, 128);
    CHECK(std::log2(e32 / e64) >= 0.9);
    CHECK(std::log2(e64 / e128) >= 0.9);
  }
}

TEST_CASE("forward/backward duality holds to round-off") {
  const auto a = DegenerateCoefficient::power(0.5);
  auto beta = DriftWeight::identity();

  for (int n : {16, 64, 128}) {
    const GridPtr grid = build_grid(n, n, 1.0);
    beta_bound(beta, a, *grid);
    CounterRng rng(7, n);

    // random coefficient fields with the coercivity margin
    SpaceTimeField reaction(grid), drift(grid);
    for (auto& v : reaction.data()) v = 0.2 + std::abs(rng.normal());
    for (auto& v : drift.data()) v = 0.5 * rng.uniform(-1.0, 1.0);
    REQUIRE(LinearCoefficients::coercive(0.2, 0.5, beta.bound_L));
    LinearCoefficients coeffs{CoeffField(reaction), CoeffField(drift),
                              DriftForm::kNonDivergence};
    ParabolicOperator op(grid, a, beta, coeffs);

    SpaceTimeField f(grid), g(grid);
    for (int lev = 1; lev <= n; ++lev)
      for (int j = 1; j < n; ++j) f(lev, j) = rng.normal();
    for (int k = 0; k < n; ++k)
      for (int j = 1; j < n; ++j) g(k, j) = rng.normal();

    std::vector<double> zeros(n + 1, 0.0);
    const SpaceTimeField y = op.forward(f, zeros);
    const SpaceTimeField p = op.backward(g, zeros);

    const double lhs = duality_pairing_forward(f, p);
    const double rhs = duality_pairing_backward(g, y);
    const double scale = field_l2_norm(y) * field_l2_norm(p);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(scale, 1e-30));

    // per-step operator adjointness
    std::vector<double> u(n - 1), v(n - 1), au(n - 1), atv(n - 1);
    for (auto& x : u) x = rng.normal();
    for (auto& x : v) x = rng.normal();
    op.apply_step_matrix(1, u, au);
    op.apply_step_matrix_adjoint(1, v, atv);
    double s1 = 0.0, s2 = 0.0, nu = 0.0, nv = 0.0;
    for (int j = 1; j < n; ++j) {
      const double w = grid->node_weight(j);
      s1 += w * au[j - 1] * v[j - 1];
      s2 += w * u[j - 1] * atv[j - 1];
      nu += w * u[j - 1] * u[j - 1];
      nv += w * v[j - 1] * v[j - 1];
    }
    CHECK(std::abs(s1 - s2) <= 1e-12 * std::sqrt(nu * nv) * std::max(1.0, std::abs(s1)));
  }
}

TEST_CASE("backward solve is the time-reversed forward solve for constant coefficients") {
  const int n = 32;
  const GridPtr grid = build_grid(n, n, 1.0);
  const auto a = DegenerateCoefficient::power(0.5);
  auto beta = DriftWeight::identity();
  beta_bound(beta, a, *grid);
  CounterRng rng(11);

  SpaceTimeField g(grid);
  for (int k = 0; k < n; ++k)
    for (int j = 1; j < n; ++j) g(k, j) = rng.normal();
  auto pT = snt::make_row(*grid, [](double x) { return std::sin(2 * M_PI * x); });

  ParabolicOperator op(grid, a, beta, const_coeffs(0.7, 0.4));
  const SpaceTimeField p = op.backward(g, pT);

  // forward march with the drift sign flipped and the source read in reverse
  ParabolicOperator op_rev(grid, a, beta, const_coeffs(0.7, -0.4));
  SpaceTimeField f(grid);
  for (int lev = 1; lev <= n; ++lev)
    for (int j = 1; j < n; ++j) f(lev, j) = g(n - lev, j);
  const SpaceTimeField yrev = op_rev.forward(f, pT);

  for (int lev = 0; lev <= n; ++lev)
    for (int j = 0; j <= n; ++j)
      CHECK(p(lev, j) == doctest::Approx(yrev(n - lev, j)).epsilon(1e-11));
}

TEST_CASE("apply_exp_shift examples") {
  const GridPtr grid = build_grid(8, 8, 1.0);
  SpaceTimeField ones(grid, 1.0);

  SUBCASE("rate zero is the identity") {
    const SpaceTimeField out = apply_exp_shift(ones, 0.0);
    for (std::size_t i = 0; i < out.data().size(); ++i)
      CHECK(out.data()[i] == ones.data()[i]);
  }
  SUBCASE("rate ln 2 halves the final row") {
    const SpaceTimeField out = apply_exp_shift(ones, std::log(2.0));
    for (int j = 0; j <= 8; ++j) CHECK(out(8, j) == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("round trip returns the input") {
    SpaceTimeField f(grid);
    CounterRng rng(3);
    for (auto& v : f.data()) v = rng.normal();
    const SpaceTimeField back = apply_exp_shift(apply_exp_shift(f, 1.7), -1.7);
    for (std::size_t i = 0; i < f.data().size(); ++i)
      CHECK(back.data()[i] == doctest::Approx(f.data()[i]).epsilon(1e-14));
  }
}

TEST_CASE("coercivity shift value") {
  // r = ||a0|| + L^2 ||b0||^2 / 2 + 2
  const LinearCoefficients c{3.0, 0.5, DriftForm::kNonDivergence};
  CHECK(coercivity_shift(c, 1.0) == doctest::Approx(3.0 + 0.125 + 2.0).epsilon(1e-15));
}

TEST_CASE("energy estimate constant is stable across random data") {
  const int n = 48;
  const GridPtr grid = build_grid(n, n, 1.0);
  const auto a = DegenerateCoefficient::power(0.5);
  auto beta = DriftWeight::identity();
  beta_bound(beta, a, *grid);
  const auto layout = snt::default_layout(grid);
  ParabolicOperator op(grid, a, beta, const_coeffs(0.6, 0.5));

  double c_fit = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    CounterRng rng(1234, trial);
    SpaceTimeField h(grid), v1(grid), v2(grid);
    for (int k = 0; k < n; ++k)
      for (int j = 1; j < n; ++j) {
        if (layout->omega_mask()[j]) h(k, j) = rng.normal();
        if (layout->omega1_mask()[j]) v1(k, j) = rng.normal();
        if (layout->omega2_mask()[j]) v2(k, j) = rng.normal();
      }
    std::vector<double> y0(n + 1, 0.0);
    for (int j = 1; j < n; ++j)
      y0[j] = rng.normal() * std::sin(M_PI * grid->node(j));

    SourceSpec src;
    src.leader = &h;
    src.follower1 = &v1;
    src.follower2 = &v2;
    src.layout = layout.get();
    const SpaceTimeField y = op.forward(assemble_forward_source(grid, src), y0);

    double lhs = 0.0;
    const double yT = row_l2_norm(*grid, y.row(n));
    lhs += yT * yT;
    for (int lev = 0; lev <= n; ++lev)
      lhs += grid->dt() * weighted_h1a_sqnorm(*grid, y.row(lev), a);

    const double y0n = row_l2_norm(*grid, y0);
    const double rhs = control_inner(v1, v1, layout->omega1_mask()) +
                       control_inner(v2, v2, layout->omega2_mask()) +
                       control_inner(h, h, layout->omega_mask()) + y0n * y0n;
    const double ratio = lhs / rhs;
    CHECK(std::isfinite(ratio));
    if (trial == 0)
      c_fit = ratio;
    else
      CHECK(ratio <= 2.0 * c_fit);
  }
}

TEST_CASE("max norm does not grow under time refinement") {
  const auto a = DegenerateCoefficient::power(0.5);
  auto beta = DriftWeight::identity();
  double prev = 1e300;
  for (int m : {32, 64, 128}) {
    const GridPtr grid = build_grid(64, m, 1.0);
    beta_bound(beta, a, *grid);
    ParabolicOperator op(grid, a, beta, const_coeffs(0.6, 0.5));
    SpaceTimeField f = snt::make_field(
        grid, [](double t, double x) { return std::sin(M_PI * x) * std::exp(-t); });
    for (int j : {0, 64})
      for (int lev = 0; lev <= m; ++lev) f(lev, j) = 0.0;
    const auto y0 = snt::make_row(*grid, [](double x) { return std::sin(M_PI * x); });
    const SpaceTimeField y = op.forward(f, y0);
    const double sup = y.max_abs();
    CHECK(sup <= prev * 1.02);
    prev = sup;
  }
}

TEST_CASE("divergence drift assembly is the transpose of the non-divergence one") {
  const int n = 24;
  const GridPtr grid = build_grid(n, 8, 1.0, Grading::kGradedLeft);
  const auto a = DegenerateCoefficient::power(0.5);
  auto beta = DriftWeight::identity();
  beta_bound(beta, a, *grid);

  ParabolicOperator op_nd(grid, a, beta,
                          LinearCoefficients{0.0, 0.8, DriftForm::kNonDivergence});
  ParabolicOperator op_div(grid, a, beta,
                           LinearCoefficients{0.0, 0.8, DriftForm::kDivergence});

  // <A_nd u, v>_w - <diffusion u, v>_w should equal <u, A_div v>_w - <u, diffusion v>_w;
  // with identical diffusion blocks it suffices that the full operators are adjoint.
  CounterRng rng(5);
  std::vector<double> u(n - 1), v(n - 1), au(n - 1), av(n - 1);
  for (auto& x : u) x = rng.normal();
  for (auto& x : v) x = rng.normal();
  op_nd.apply_step_matrix(1, u, au);
  op_div.apply_step_matrix(1, v, av);
  double s1 = 0.0, s2 = 0.0;
  for (int j = 1; j < n; ++j) {
    const double w = grid->node_weight(j);
    s1 += w * au[j - 1] * v[j - 1];
    s2 += w * u[j - 1] * av[j - 1];
  }
  CHECK(s1 == doctest::Approx(s2).epsilon(1e-12));
}
