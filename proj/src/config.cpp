#include "stacknash/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "stacknash/io.hpp"

namespace stacknash {

std::string ConfigError::join(const std::vector<std::string>& d) {
  std::string s = "configuration rejected:";
  for (const auto& line : d) s += "\n  - " + line;
  return s;
}

namespace {

struct KeyValue {
  std::string value;
  bool used = false;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class ConfigReader {
 public:
  ConfigReader(const std::string& text, std::vector<std::string>& diags)
      : diags_(diags) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        diags_.push_back("line " + std::to_string(lineno) + ": expected 'key = value'");
        continue;
      }
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (entries_.count(key))
        diags_.push_back("duplicate key: " + key);
      entries_[key] = KeyValue{value, false};
    }
  }

  double number(const std::string& key, double fallback) {
    auto* kv = find(key);
    if (!kv) return fallback;
    try {
      std::size_t pos = 0;
      const double v = std::stod(kv->value, &pos);
      if (pos != kv->value.size()) throw std::invalid_argument("");
      return v;
    } catch (...) {
      diags_.push_back(key + ": not a number: '" + kv->value + "'");
      return fallback;
    }
  }

  int integer(const std::string& key, int fallback) {
    const double v = number(key, fallback);
    if (v != std::floor(v)) diags_.push_back(key + ": expected an integer");
    return static_cast<int>(v);
  }

  std::uint64_t unsigned64(const std::string& key, std::uint64_t fallback) {
    auto* kv = find(key);
    if (!kv) return fallback;
    try {
      return std::stoull(kv->value);
    } catch (...) {
      diags_.push_back(key + ": not an unsigned integer");
      return fallback;
    }
  }

  std::string word(const std::string& key, const std::string& fallback,
                   const std::vector<std::string>& allowed) {
    auto* kv = find(key);
    if (!kv) return fallback;
    for (const auto& a : allowed)
      if (kv->value == a) return kv->value;
    diags_.push_back(key + ": unknown value '" + kv->value + "'");
    return fallback;
  }

  Interval interval(const std::string& key, Interval fallback) {
    auto* kv = find(key);
    if (!kv) return fallback;
    std::istringstream ss(kv->value);
    Interval iv;
    if (!(ss >> iv.lo >> iv.hi)) {
      diags_.push_back(key + ": expected two numbers 'lo hi'");
      return fallback;
    }
    return iv;
  }

  std::vector<double> number_list(const std::string& key, std::vector<double> fallback) {
    auto* kv = find(key);
    if (!kv) return fallback;
    std::istringstream ss(kv->value);
    std::vector<double> out;
    double v;
    while (ss >> v) out.push_back(v);
    if (out.empty()) {
      diags_.push_back(key + ": expected a list of numbers");
      return fallback;
    }
    return out;
  }

  void finish() {
    for (const auto& [key, kv] : entries_)
      if (!kv.used) diags_.push_back("unknown key: " + key);
  }

 private:
  KeyValue* find(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  std::map<std::string, KeyValue> entries_;
  std::vector<std::string>& diags_;
};

}  // namespace

ScenarioConfig parse_config_text(const std::string& text) {
  std::vector<std::string> diags;
  ConfigReader r(text, diags);
  ScenarioConfig c;
  c.raw_text = text;

  c.n = r.integer("grid.n", c.n);
  c.m = r.integer("grid.m", c.m);
  c.horizon = r.number("grid.horizon", c.horizon);
  c.grading = r.word("grid.grading", "uniform", {"uniform", "graded_left"}) == "uniform"
                  ? Grading::kUniform
                  : Grading::kGradedLeft;

  c.alpha_exp = r.number("coefficient.alpha", c.alpha_exp);
  c.drift_family = r.word("drift.family", c.drift_family, {"linear", "zero"});

  c.omega = r.interval("regions.omega", c.omega);
  c.omega1 = r.interval("regions.omega1", c.omega1);
  c.omega2 = r.interval("regions.omega2", c.omega2);
  c.omega_d = r.interval("regions.omega_d", c.omega_d);

  c.alpha1 = r.number("cost.alpha1", c.alpha1);
  c.alpha2 = r.number("cost.alpha2", c.alpha2);
  c.mu1 = r.number("cost.mu1", c.mu1);
  c.mu2 = r.number("cost.mu2", c.mu2);

  c.target_kind = r.word("target.kind", c.target_kind, {"zero", "bump"});
  c.target_amplitude = r.number("target.amplitude", c.target_amplitude);
  c.target_center = r.number("target.center", c.target_center);
  c.target_width = r.number("target.width", c.target_width);
  c.target_t_end = r.number("target.t_end", c.target_t_end);

  c.init_kind = r.word("init.kind", c.init_kind, {"zero", "sine", "bump"});
  c.init_amplitude = r.number("init.amplitude", c.init_amplitude);

  c.nl_name = r.word("nonlinearity.name", c.nl_name, {"zero", "tanh", "tanh_sin"});
  c.nl_c1 = r.number("nonlinearity.c1", c.nl_c1);
  c.nl_c2 = r.number("nonlinearity.c2", c.nl_c2);
  c.clamp_cap = r.number("nonlinearity.cap", c.clamp_cap);
  c.quadrature_order = r.integer("nonlinearity.quadrature_order", c.quadrature_order);

  c.carleman_safety = r.number("carleman.safety", c.carleman_safety);
  c.s_bar = r.number("carleman.s_bar", c.s_bar);

  c.epsilon_list = r.number_list("hum.epsilon_list", c.epsilon_list);
  c.epsilon = r.number("hum.epsilon", c.epsilon);
  c.cg_tol = r.number("hum.cg_tol", c.cg_tol);
  c.cg_max_iter = r.integer("hum.cg_max_iter", c.cg_max_iter);
  c.outer_tol = r.number("hum.outer_tol", c.outer_tol);
  c.outer_max = r.integer("hum.outer_max", c.outer_max);

  c.nash_tol = r.number("nash.tol", c.nash_tol);
  c.nash_max_iter = r.integer("nash.max_iter", c.nash_max_iter);
  c.nash_relax = r.number("nash.relax", c.nash_relax);

  c.obs_samples = r.integer("observability.samples", c.obs_samples);
  c.seed = r.unsigned64("run.seed", c.seed);

  r.finish();
  if (!diags.empty()) throw ConfigError(std::move(diags));
  return c;
}

ScenarioConfig parse_config(const std::string& path) {
  return parse_config_text(read_file(path));
}

namespace {

SpaceTimeField make_target(const ScenarioConfig& cfg, GridPtr grid,
                           const ControlLayout& layout) {
  SpaceTimeField t(grid);
  if (cfg.target_kind == "zero") return t;
  const Grid& g = *grid;
  const double t_end = cfg.target_t_end * g.horizon();
  for (int n = 0; n <= g.time_steps(); ++n) {
    const double tt = g.time(n);
    if (tt >= t_end) continue;
    const double ramp = std::cos(0.5 * M_PI * tt / t_end);
    for (int j = 0; j <= g.space_cells(); ++j) {
      if (!layout.omega_d_mask()[j]) continue;
      const double dx = (g.node(j) - cfg.target_center) / cfg.target_width;
      t(n, j) = cfg.target_amplitude * std::exp(-dx * dx) * ramp * ramp;
    }
  }
  return t;
}

std::vector<double> make_initial(const ScenarioConfig& cfg, const Grid& g) {
  std::vector<double> y0(g.space_cells() + 1, 0.0);
  if (cfg.init_kind == "zero") return y0;
  for (int j = 1; j < g.space_cells(); ++j) {
    const double x = g.node(j);
    if (cfg.init_kind == "sine") {
      y0[j] = cfg.init_amplitude * std::sin(M_PI * x);
    } else {  // bump
      const double dx = (x - 0.5) / 0.15;
      y0[j] = cfg.init_amplitude * std::exp(-dx * dx);
    }
  }
  return y0;
}

}  // namespace

Scenario build_scenario(const ScenarioConfig& cfg) {
  std::vector<std::string> diags;
  Scenario sc;
  sc.cfg = cfg;

  try {
    sc.grid = build_grid(cfg.n, cfg.m, cfg.horizon, cfg.grading);
  } catch (const std::exception& e) {
    diags.push_back(std::string("grid: ") + e.what());
    throw ConfigError(std::move(diags));
  }

  try {
    sc.diffusion = DegenerateCoefficient::power(cfg.alpha_exp);
  } catch (const std::exception& e) {
    diags.push_back(std::string("coefficient.alpha: ") + e.what() +
                    " (the degeneracy bound needs tau in [0,1))");
  }
  if (diags.empty()) {
    const ValidationReport rep = validate_degeneracy(sc.diffusion, *sc.grid);
    if (!rep.pass()) {
      for (const auto& c : rep.clauses)
        if (!c.pass) diags.push_back("coefficient: failed '" + c.name + "'");
    }
  }

  sc.drift = (cfg.drift_family == "zero") ? DriftWeight::zero() : DriftWeight::identity();
  if (!diags.empty()) throw ConfigError(std::move(diags));
  beta_bound(sc.drift, sc.diffusion, *sc.grid);

  try {
    sc.layout = std::make_shared<const ControlLayout>(sc.grid, cfg.omega, cfg.omega1,
                                                      cfg.omega2, cfg.omega_d);
  } catch (const std::exception& e) {
    diags.push_back(std::string("regions: ") + e.what());
    throw ConfigError(std::move(diags));
  }

  Nonlinearity nl = Nonlinearity::zero();
  if (cfg.nl_name == "tanh") nl = Nonlinearity::tanh_reaction(cfg.nl_c1);
  if (cfg.nl_name == "tanh_sin") nl = Nonlinearity::tanh_sin(cfg.nl_c1, cfg.nl_c2);
  nl.quadrature_order = cfg.quadrature_order;
  if (!nl.is_zero) {
    const ValidationReport rep = validate_assumptions(nl, ProbeLattice{});
    if (!rep.pass()) {
      for (const auto& c : rep.clauses)
        if (!c.pass) diags.push_back("nonlinearity: failed '" + c.name + "'");
    }
  }

  sc.setup.grid = sc.grid;
  sc.setup.diffusion = sc.diffusion;
  sc.setup.drift = sc.drift;
  sc.setup.layout = sc.layout;
  sc.setup.nl = nl;
  sc.setup.lin_state = LinearCoefficients{0.0, 0.0, DriftForm::kNonDivergence};
  sc.setup.lin_adjoint = LinearCoefficients{0.0, 0.0, DriftForm::kNonDivergence};
  sc.setup.y0 = make_initial(cfg, *sc.grid);
  sc.setup.clamp_cap = cfg.clamp_cap;

  sc.cost.alpha1 = cfg.alpha1;
  sc.cost.alpha2 = cfg.alpha2;
  sc.cost.mu1 = cfg.mu1;
  sc.cost.mu2 = cfg.mu2;
  sc.cost.y1d = make_target(cfg, sc.grid, *sc.layout);
  sc.cost.y2d = sc.cost.y1d;
  try {
    sc.cost.validate(*sc.layout);
  } catch (const std::exception& e) {
    diags.push_back(std::string("cost: ") + e.what());
  }

  sc.hum.epsilon = cfg.epsilon;
  sc.hum.cg_tol = cfg.cg_tol;
  sc.hum.cg_max_iter = cfg.cg_max_iter;
  sc.hum.epsilon_list = cfg.epsilon_list;
  sc.hum.outer_tol = cfg.outer_tol;
  sc.hum.outer_max = cfg.outer_max;
  sc.hum.block_tol = std::min(1e-12, cfg.nash_tol);
  sc.hum.block_max = cfg.nash_max_iter;

  // nested observation core inside omega_d intersect omega
  const double lo = std::max(cfg.omega.lo, cfg.omega_d.lo);
  const double hi = std::min(cfg.omega.hi, cfg.omega_d.hi);
  if (!(lo < hi)) {
    diags.push_back("regions: omega and omega_d have empty intersection");
  } else {
    const double len = hi - lo;
    sc.O1 = Interval{lo + 0.125 * len, hi - 0.125 * len};
    sc.O0 = Interval{lo + 0.25 * len, hi - 0.25 * len};
  }

  if (!diags.empty()) throw ConfigError(std::move(diags));
  return sc;
}

CarlemanWeights scenario_weights(const Scenario& sc) {
  const SigmaFunction sigma = build_sigma(sc.O0, sc.O1);
  const CarlemanParameters params =
      select_parameters(sigma, sc.diffusion, sc.cfg.carleman_safety);
  return CarlemanWeights(sigma, sc.diffusion, params, sc.cfg.s_bar, sc.grid);
}

}  // namespace stacknash
