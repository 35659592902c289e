#include "doctest.h"
#include "support.hpp"

using namespace stacknash;

namespace {

Nonlinearity linear_reaction(double c) {
  Nonlinearity nl;
  nl.f = [c](double s, double) { return c * s; };
  nl.d1 = [c](double, double) { return c; };
  nl.d2 = [](double, double) { return 0.0; };
  nl.d11 = nl.d12 = nl.d21 = nl.d22 = [](double, double) { return 0.0; };
  nl.lipschitz_K = std::abs(c);
  nl.bound_M2 = std::abs(c);
  return nl;
}

Nonlinearity gradient_reaction(double c) {  // F(s,p) = c p
  Nonlinearity nl;
  nl.f = [c](double, double p) { return c * p; };
  nl.d1 = [](double, double) { return 0.0; };
  nl.d2 = [c](double, double) { return c; };
  nl.d11 = nl.d12 = nl.d21 = nl.d22 = [](double, double) { return 0.0; };
  nl.lipschitz_K = std::abs(c);
  nl.bound_M2 = std::abs(c);
  return nl;
}

}  // namespace

TEST_CASE("integral means: linear, tanh, and reconstruction") {
  SUBCASE("F = c s has F1 = c, F2 = 0") {
    const auto nl = linear_reaction(0.7);
    for (double s : {-2.0, 0.0, 1.3})
      for (double p : {-1.0, 0.5}) {
        const IntegralMeans m = integral_means(nl, s, p);
        CHECK(m.f1 == doctest::Approx(0.7).epsilon(1e-14));
        CHECK(m.f2 == 0.0);
      }
  }
  SUBCASE("F = tanh(s): F1(s,0) = tanh(s)/s") {
    const auto nl = Nonlinearity::tanh_reaction(1.0);
    for (double s : {0.3, 0.7, 2.3}) {
      const IntegralMeans m = integral_means(nl, s, 0.0);
      CHECK(m.f1 == doctest::Approx(std::tanh(s) / s).epsilon(1e-12));
      CHECK(m.f2 == 0.0);
    }
  }
  SUBCASE("reconstruction F = F1 s + F2 p for 100 random points") {
    const auto nl = Nonlinearity::tanh_sin(0.5, 0.1);
    CounterRng rng(42);
    for (int i = 0; i < 100; ++i) {
      const double s = rng.uniform(-3.0, 3.0), p = rng.uniform(-3.0, 3.0);
      const IntegralMeans m = integral_means(nl, s, p);
      CHECK(std::abs(nl.f(s, p) - m.f1 * s - m.f2 * p) <= 1e-10);
    }
  }
}

TEST_CASE("quotient coefficients") {
  const GridPtr grid = build_grid(64, 16, 1.0);
  const auto beta = DriftWeight::identity();

  SUBCASE("zero nonlinearity gives zero constant coefficients") {
    const SpaceTimeField z(grid);
    const auto qc = quotient_coefficients(Nonlinearity::zero(), z, beta, 1e3);
    CHECK(qc.state.reaction.at(3, 5) == 0.0);
    CHECK(qc.state.drift.at(3, 5) == 0.0);
    CHECK(qc.adjoint.reaction.at(1, 1) == 0.0);
    CHECK(qc.clamped_fraction == 0.0);
  }
  SUBCASE("tanh with z = x: a1 = tanh(x)/x, a2 = 0") {
    const auto nl = Nonlinearity::tanh_reaction(1.0);
    const SpaceTimeField z = snt::make_field(grid, [](double, double x) { return x; });
    const auto qc = quotient_coefficients(nl, z, beta, 1e3);
    for (int j = 1; j < 64; j += 7) {
      const double x = grid->node(j);
      CHECK(qc.state.reaction.at(5, j) == doctest::Approx(std::tanh(x) / x).epsilon(1e-10));
      CHECK(qc.state.drift.at(5, j) == 0.0);
    }
  }
  SUBCASE("constant gradient coefficient clamps near the degenerate end") {
    const auto nl = gradient_reaction(1.0);  // D2F = 1, quotient 1/x
    const SpaceTimeField z(grid);
    const auto qc = quotient_coefficients(nl, z, beta, 10.0);
    CHECK(qc.clamped_fraction > 0.0);
    CHECK(qc.adjoint.drift.at(0, 1) == 10.0);  // 1/x > 10 for x < 0.1
    CHECK(qc.adjoint.drift.at(0, 32) == doctest::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("picard fixed point") {
  const int n = 16;
  const GridPtr grid = build_grid(n, n, 1.0);
  const auto a = DegenerateCoefficient::power(0.5);
  auto beta = DriftWeight::identity();
  beta_bound(beta, a, *grid);
  const auto layout = snt::default_layout(grid);

  SpaceTimeField dist = snt::make_field(
      grid, [](double t, double x) { return std::sin(M_PI * x) * (1 + 0.5 * t); });
  SourceSpec src;
  src.distributed = &dist;
  const auto y0 = snt::sine_initial(*grid, 0.5);

  SUBCASE("zero nonlinearity converges in one pass to the linear solution") {
    PicardLog log;
    const SpaceTimeField y =
        picard_semilinear(grid, a, beta, Nonlinearity::zero(), src, y0, 1e-12, 10, 1e3, &log);
    CHECK(log.iterations == 1);
    const LinearCoefficients zero{0.0, 0.0, DriftForm::kNonDivergence};
    const SpaceTimeField ylin = solve_forward(grid, a, beta, zero, src, y0);
    for (std::size_t i = 0; i < y.data().size(); ++i)
      CHECK(y.data()[i] == ylin.data()[i]);  // bitwise: same code path
  }

  SUBCASE("residuals contract for the tanh nonlinearity") {
    PicardLog log;
    picard_semilinear(grid, a, beta, Nonlinearity::tanh_reaction(0.5), src, y0, 1e-12, 50,
                      1e3, &log);
    CHECK(log.converged);
    for (std::size_t k = 2; k + 1 < log.residuals.size(); ++k)
      if (log.residuals[k + 1] > 0.0)
        CHECK(log.residuals[k] / log.residuals[k + 1] >= 2.0);
  }

  SUBCASE("matches a per-step Newton solve of the same discrete system") {
    const auto nl = Nonlinearity::tanh_sin(0.5, 0.1);
    PicardLog log;
    const SpaceTimeField y =
        picard_semilinear(grid, a, beta, nl, src, y0, 1e-13, 80, 1e3, &log);

    // independent oracle: implicit Euler with per-step Newton on
    // u/dt + A_diff u + F(u, Du) = rhs
    const snt::OracleStencil diff = snt::oracle_stencil(
        *grid, a, beta, [](int, int) { return 0.0; }, [](int, int) { return 0.0; }, 1);
    const double dt = grid->dt();
    SpaceTimeField ynewton(grid);
    for (int j = 1; j < n; ++j) ynewton(0, j) = y0[j];
    std::vector<double> u(n - 1), res(n - 1), upd(n - 1);
    for (int lev = 1; lev <= n; ++lev) {
      for (int j = 1; j < n; ++j) u[j - 1] = ynewton(lev - 1, j);
      for (int newton = 0; newton < 60; ++newton) {
        auto du = [&](int j) {  // central derivative with Dirichlet ends
          const double left = (j - 1 >= 1) ? u[j - 2] : 0.0;
          const double right = (j + 1 <= n - 1) ? u[j] : 0.0;
          return (right - left) / (grid->node(j + 1) - grid->node(j - 1));
        };
        TriDiag jac(n - 1);
        double rmax = 0.0;
        for (int j = 1; j < n; ++j) {
          const int i = j - 1;
          double av = diff.diag[i] * u[i];
          if (i > 0) av += diff.lower[i] * u[i - 1];
          if (i + 1 < n - 1) av += diff.upper[i] * u[i + 1];
          const double g = dist(lev, j);
          res[i] = u[i] - ynewton(lev - 1, j) + dt * (av + nl.f(u[i], du(j)) - g);
          rmax = std::max(rmax, std::abs(res[i]));
          const double span2 = grid->node(j + 1) - grid->node(j - 1);
          jac.diag[i] = 1.0 + dt * (diff.diag[i] + nl.d1(u[i], du(j)));
          jac.lower[i] = (i > 0) ? dt * (diff.lower[i] - nl.d2(u[i], du(j)) / span2) : 0.0;
          jac.upper[i] =
              (i + 1 < n - 1) ? dt * (diff.upper[i] + nl.d2(u[i], du(j)) / span2) : 0.0;
        }
        if (rmax < 1e-13) break;
        TriDiagSolver solver(jac);
        solver.solve(res, upd);
        for (int i = 0; i < n - 1; ++i) u[i] -= upd[i];
      }
      for (int j = 1; j < n; ++j) ynewton(lev, j) = u[j - 1];
    }
    CHECK(snt::rel_field_err(y, ynewton) <= 1e-8);
  }

  SUBCASE("fixed point is stable under one more iteration") {
    const auto nl = Nonlinearity::tanh_reaction(0.5);
    const SpaceTimeField y = picard_semilinear(grid, a, beta, nl, src, y0, 1e-11, 50, 1e3);
    const auto qc = quotient_coefficients(nl, y, beta, 1e3);
    const SpaceTimeField once = solve_forward(grid, a, beta, qc.state, src, y0);
    CHECK(relative_change(once, y) <= 1e-10);
  }
}

TEST_CASE("validate_assumptions examples") {
  SUBCASE("default tanh+sin passes with the stated constants") {
    const auto nl = Nonlinearity::tanh_sin(0.5, 0.1);
    CHECK(nl.lipschitz_K <= 0.6 + 1e-12);
    CHECK(nl.bound_M2 <= 1.2);
    CHECK(validate_assumptions(nl, ProbeLattice{}).pass());
  }
  SUBCASE("F = s^2 fails the Lipschitz check") {
    Nonlinearity nl;
    nl.f = [](double s, double) { return s * s; };
    nl.d1 = [](double s, double) { return 2 * s; };
    nl.d2 = [](double, double) { return 0.0; };
    nl.d11 = [](double, double) { return 2.0; };
    nl.d12 = nl.d21 = nl.d22 = [](double, double) { return 0.0; };
    nl.lipschitz_K = 1.0;
    nl.bound_M2 = 10.0;
    CHECK_FALSE(validate_assumptions(nl, ProbeLattice{}).pass());
  }
  SUBCASE("F = s + 1 fails F(0,0) = 0") {
    Nonlinearity nl = linear_reaction(1.0);
    nl.f = [](double s, double) { return s + 1.0; };
    CHECK_FALSE(validate_assumptions(nl, ProbeLattice{}).pass());
  }
}
