#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "stacknash/carleman.hpp"
#include "stacknash/hum.hpp"

namespace stacknash {

struct ConfigError : std::runtime_error {
  explicit ConfigError(std::vector<std::string> diags)
      : std::runtime_error(join(diags)), diagnostics(std::move(diags)) {}
  std::vector<std::string> diagnostics;
  static std::string join(const std::vector<std::string>& d);
};

/// Flat dotted key-value configuration. Unknown keys are rejected with the
/// offending key named; cross-field constraints are checked by the module
/// validators when the scenario is materialized.
struct ScenarioConfig {
  // grid
  int n = 64, m = 64;
  double horizon = 1.0;
  Grading grading = Grading::kUniform;
  // coefficient
  double alpha_exp = 0.5;
  // drift
  std::string drift_family = "linear";  // linear | zero
  // regions
  Interval omega{0.4, 0.7}, omega1{0.05, 0.2}, omega2{0.8, 0.95}, omega_d{0.45, 0.65};
  // cost
  double alpha1 = 1.0, alpha2 = 1.0, mu1 = 100.0, mu2 = 100.0;
  // target
  std::string target_kind = "bump";  // zero | bump
  double target_amplitude = 0.5, target_center = 0.55, target_width = 0.05;
  double target_t_end = 0.45;
  // init
  std::string init_kind = "sine";  // zero | sine | bump
  double init_amplitude = 1.0;
  // nonlinearity
  std::string nl_name = "zero";  // zero | tanh | tanh_sin
  double nl_c1 = 0.5, nl_c2 = 0.1;
  double clamp_cap = 1e3;
  int quadrature_order = 16;
  // carleman
  double carleman_safety = 1.0;
  double s_bar = 5.0;
  // hum
  std::vector<double> epsilon_list{1e-1, 1e-2, 1e-3, 1e-4};
  double epsilon = 1e-3;
  double cg_tol = 1e-8;
  int cg_max_iter = 600;
  double outer_tol = 1e-8;
  int outer_max = 30;
  // nash
  double nash_tol = 1e-10;
  int nash_max_iter = 600;
  double nash_relax = 0.8;
  // observability
  int obs_samples = 20;
  // run
  std::uint64_t seed = 20240901;

  std::string raw_text;  // canonical bytes used for the config hash
};

ScenarioConfig parse_config(const std::string& path);
ScenarioConfig parse_config_text(const std::string& text);

/// Fully materialized scenario: grid, coefficients, regions, game setup,
/// cost, weights input. Construction runs every module validator and throws
/// ConfigError with the violated condition named.
struct Scenario {
  ScenarioConfig cfg;
  GridPtr grid;
  DegenerateCoefficient diffusion;
  DriftWeight drift;
  std::shared_ptr<const ControlLayout> layout;
  GameSetup setup;
  CostConfig cost;
  HumConfig hum;
  Interval O0, O1;  // nested observation core for the weight construction
};

Scenario build_scenario(const ScenarioConfig& cfg);

/// Carleman weights for a scenario at its configured safety and s_bar.
CarlemanWeights scenario_weights(const Scenario& sc);

}  // namespace stacknash
