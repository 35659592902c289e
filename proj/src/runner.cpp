#include "stacknash/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "stacknash/io.hpp"

namespace stacknash {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

struct ManifestBuilder {
  json stages = json::object();
  json checks = json::object();
  std::vector<std::string> artifacts;
  std::string error;

  void stage(const std::string& name, double seconds) { stages[name] = seconds; }
  void check(const std::string& name, bool ok) { checks[name] = ok; }
  void artifact(const std::string& path) { artifacts.push_back(path); }

  bool all_checks_pass() const {
    for (const auto& [k, v] : checks.items())
      if (!v.get<bool>()) return false;
    return true;
  }

  void write(const std::string& out_dir, const ScenarioConfig& cfg, bool ok) const {
    json m;
    m["schema"] = "stacknash.manifest.v1";
    m["version"] = kArtifactVersion;
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(fnv1a_hash(cfg.raw_text)));
    m["config_hash"] = hash;
    m["seed"] = cfg.seed;
    m["stages_seconds"] = stages;
    m["checks"] = checks;
    m["artifacts"] = artifacts;
    m["ok"] = ok;
    if (!error.empty()) m["error"] = error;
    std::ofstream out(out_dir + "/manifest.json", std::ios::binary);
    out << m.dump(2) << "\n";
  }
};

class StageTimer {
 public:
  StageTimer(ManifestBuilder& mb, std::string name)
      : mb_(mb), name_(std::move(name)), start_(Clock::now()) {}
  ~StageTimer() {
    const double s = std::chrono::duration<double>(Clock::now() - start_).count();
    mb_.stage(name_, s);
  }

 private:
  ManifestBuilder& mb_;
  std::string name_;
  Clock::time_point start_;
};

json report_to_json(const ValidationReport& rep) {
  json j = json::array();
  for (const auto& c : rep.clauses) {
    json e;
    e["clause"] = c.name;
    e["pass"] = c.pass;
    e["worst_margin"] = c.worst;
    if (!c.detail.empty()) e["detail"] = c.detail;
    j.push_back(e);
  }
  return j;
}

void cmd_validate(const Scenario& sc, const std::string& out, ManifestBuilder& mb) {
  StageTimer timer(mb, "validate");
  json j;
  j["schema"] = "stacknash.validation.v1";

  const ValidationReport deg = validate_degeneracy(sc.diffusion, *sc.grid);
  j["degeneracy"] = report_to_json(deg);
  mb.check("degeneracy", deg.pass());

  DriftWeight drift = sc.drift;
  const double L = beta_bound(drift, sc.diffusion, *sc.grid);
  j["drift"] = {{"bound_L", L}, {"sup_beta_over_x", drift.sup_beta_over_x}};
  mb.check("drift_bounded", std::isfinite(L));

  if (!sc.setup.nl.is_zero) {
    const ValidationReport nlrep = validate_assumptions(sc.setup.nl, ProbeLattice{});
    j["nonlinearity"] = report_to_json(nlrep);
    mb.check("nonlinearity", nlrep.pass());
  }

  const CarlemanWeights weights = scenario_weights(sc);
  const SigmaFunction& sigma = weights.sigma();
  const ValidationReport sig = validate_sigma(sigma, sc.O0, *sc.grid);
  j["sigma"] = report_to_json(sig);
  mb.check("sigma", sig.pass());

  const CarlemanParameters& params = weights.params();
  j["carleman"] = {{"r", params.r},
                   {"d", params.d},
                   {"lambda", params.lambda},
                   {"interval_lo", params.interval_lo},
                   {"interval_hi", params.interval_hi},
                   {"interval_nonempty", params.interval_nonempty}};
  mb.check("lambda_interval_nonempty", params.interval_nonempty);

  const WeightOrderingReport ord = check_weight_ordering(weights, *sc.grid);
  j["weight_ordering"] = {{"margin_phi_le_env", ord.margin_phi_le_env},
                          {"margin_fourthirds", ord.margin_fourthirds},
                          {"margin_twice", ord.margin_twice},
                          {"pass", ord.pass}};
  mb.check("weight_ordering", ord.pass);

  const double log_adm = log_admissibility_quadrature(sc.cost.y1d, weights, *sc.layout);
  const bool admissible = log_adm <= std::log(1e12);
  j["target_admissibility"] = {{"log_quadrature", log_adm}, {"pass", admissible}};
  mb.check("target_admissibility", admissible);

  const std::string path = out + "/validation.json";
  std::ofstream os(path, std::ios::binary);
  os << j.dump(2) << "\n";
  mb.artifact(path);
}

void cmd_solve(const Scenario& sc, const std::string& out, ManifestBuilder& mb) {
  StageTimer timer(mb, "solve");
  const SpaceTimeField none;
  const SpaceTimeField y = solve_state(sc.setup, none, none, none);
  const std::string path = out + "/trajectory.csv";
  write_field_csv(path, "stacknash.trajectory.v1", y);
  mb.artifact(path);
  mb.check("trajectory_finite", y.all_finite());
}

void write_iterations_jsonl(const std::string& path, const std::vector<double>& residuals) {
  std::ofstream os(path, std::ios::binary);
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    json j;
    j["schema"] = "stacknash.iteration.v1";
    j["iter"] = i + 1;
    j["residual"] = residuals[i];
    os << j.dump() << "\n";
  }
}

void cmd_nash(const Scenario& sc, const std::string& out, ManifestBuilder& mb) {
  StageTimer timer(mb, "nash");
  const SpaceTimeField no_leader;
  const NashSolution sol = solve_nash(sc.setup, no_leader, sc.cost, sc.cfg.nash_tol,
                                      sc.cfg.nash_max_iter, sc.cfg.nash_relax);
  mb.check("nash_converged", sol.converged);

  const std::vector<std::pair<std::string, const SpaceTimeField*>> fields = {
      {"y", &sol.y}, {"p1", &sol.p1}, {"p2", &sol.p2}, {"v1", &sol.v1}, {"v2", &sol.v2}};
  for (const auto& [name, f] : fields) {
    const std::string path = out + "/nash_" + name + ".csv";
    write_field_csv(path, "stacknash.trajectory.v1", *f);
    mb.artifact(path);
  }
  const std::string itpath = out + "/nash_iterations.jsonl";
  write_iterations_jsonl(itpath, sol.residual_history);
  mb.artifact(itpath);
}

void require_admissible(const Scenario& sc, ManifestBuilder& mb) {
  const CarlemanWeights weights = scenario_weights(sc);
  const double log_adm = log_admissibility_quadrature(sc.cost.y1d, weights, *sc.layout);
  const bool ok = log_adm <= std::log(1e12);
  mb.check("target_admissibility", ok);
  if (!ok)
    throw std::runtime_error(
        "targets fail the admissibility quadrature (must decay like kappa toward t=T)");
}

json hum_result_json(const HumResult& res, double epsilon) {
  json j;
  j["schema"] = "stacknash.hum_result.v1";
  j["epsilon"] = epsilon;
  j["y_final_norm"] = res.y_final_norm;
  j["h_norm"] = res.h_norm;
  j["gradient_norm"] = res.gradient_norm;
  j["characterization_residual"] = res.characterization_residual;
  j["cg_iterations"] = res.cg_iterations;
  j["converged"] = res.converged;
  return j;
}

void cmd_hum(const Scenario& sc, const std::string& out, ManifestBuilder& mb) {
  require_admissible(sc, mb);
  StageTimer timer(mb, "hum");

  HumResult res;
  if (sc.setup.nl.is_zero) {
    res = minimize_cg(sc.setup, sc.cost, sc.hum);
  } else {
    const StackelbergResult st = semilinear_stackelberg(sc.setup, sc.cost, sc.hum);
    mb.check("outer_converged", st.log.converged);
    const std::string lpath = out + "/outer_iterations.jsonl";
    write_iterations_jsonl(lpath, st.log.residuals);
    mb.artifact(lpath);
    // re-evaluate the linear pipeline quantities at the converged coefficients
    res.h = st.h;
    res.h_norm = control_norm(st.h, sc.layout->omega_mask());
    res.y_final_norm =
        row_l2_norm(*sc.grid, st.equilibrium.y.row(sc.grid->time_steps()));
    res.converged = st.log.converged;
  }
  mb.check("cg_converged", res.converged);

  const std::string hpath = out + "/h_eps.csv";
  write_field_csv(hpath, "stacknash.control.v1", res.h);
  mb.artifact(hpath);
  const std::string jpath = out + "/hum_result.json";
  std::ofstream os(jpath, std::ios::binary);
  os << hum_result_json(res, sc.hum.epsilon).dump(2) << "\n";
  mb.artifact(jpath);
}

void cmd_sweep(const Scenario& sc, const std::string& out, ManifestBuilder& mb) {
  require_admissible(sc, mb);
  StageTimer timer(mb, "sweep");
  const SweepTable table = epsilon_sweep(sc.setup, sc.cost, sc.hum);

  const std::string path = out + "/sweep.csv";
  CsvWriter csv(path, "stacknash.sweep.v1",
                {"epsilon", "yT_norm", "h_norm", "cg_iters", "slope_running"});
  for (const auto& row : table.rows)
    csv.row({row.epsilon, row.yT_norm, row.h_norm, static_cast<double>(row.cg_iters),
             row.slope_running});
  mb.artifact(path);
  mb.check("sweep_complete", table.rows.size() == sc.hum.epsilon_list.size());
}

void cmd_observability(const Scenario& sc, const std::string& out, ManifestBuilder& mb) {
  StageTimer timer(mb, "observability");
  const CarlemanWeights weights = scenario_weights(sc);
  const ObservabilityStats stats = observability_experiment(
      sc.setup, sc.cost, weights, sc.cfg.obs_samples, sc.cfg.seed);

  const std::string jlpath = out + "/observability.jsonl";
  {
    std::ofstream os(jlpath, std::ios::binary);
    for (std::size_t i = 0; i < stats.samples.size(); ++i) {
      const auto& s = stats.samples[i];
      json j;
      j["schema"] = "stacknash.observability_sample.v1";
      j["sample"] = i;
      j["lhs"] = s.lhs;
      j["lhs_literal_kappa"] = s.lhs_literal;
      j["rhs"] = s.rhs;
      j["ratio"] = s.ratio;
      j["iterations"] = s.iterations;
      j["converged"] = s.converged;
      os << j.dump() << "\n";
    }
  }
  mb.artifact(jlpath);

  const std::string cpath = out + "/observability_summary.csv";
  CsvWriter csv(cpath, "stacknash.observability_summary.v1",
                {"samples", "failures", "max_ratio", "median_ratio"});
  csv.row({static_cast<double>(stats.samples.size()), static_cast<double>(stats.failures),
           stats.max_ratio, stats.median_ratio});
  mb.artifact(cpath);
  mb.check("all_samples_converged", stats.failures == 0);
}

}  // namespace

Command command_from_name(const std::string& name) {
  if (name == "solve") return Command::kSolve;
  if (name == "nash") return Command::kNash;
  if (name == "hum") return Command::kHum;
  if (name == "sweep") return Command::kSweep;
  if (name == "observability") return Command::kObservability;
  if (name == "validate") return Command::kValidate;
  throw std::invalid_argument("unknown command: " + name);
}

int run_scenario(const ScenarioConfig& cfg, Command command, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  ManifestBuilder mb;

  Scenario sc;
  try {
    StageTimer timer(mb, "build_scenario");
    sc = build_scenario(cfg);
  } catch (const std::exception& e) {
    mb.error = e.what();
    mb.check("scenario_valid", false);
    mb.write(out_dir, cfg, false);
    return kExitConfig;
  }
  mb.check("scenario_valid", true);

  try {
    switch (command) {
      case Command::kValidate: cmd_validate(sc, out_dir, mb); break;
      case Command::kSolve: cmd_solve(sc, out_dir, mb); break;
      case Command::kNash: cmd_nash(sc, out_dir, mb); break;
      case Command::kHum: cmd_hum(sc, out_dir, mb); break;
      case Command::kSweep: cmd_sweep(sc, out_dir, mb); break;
      case Command::kObservability: cmd_observability(sc, out_dir, mb); break;
    }
  } catch (const std::exception& e) {
    mb.error = e.what();
    mb.write(out_dir, cfg, false);
    return kExitNumerical;
  }

  const bool ok = mb.all_checks_pass();
  mb.write(out_dir, cfg, ok);
  return ok ? kExitOk : kExitNumerical;
}

int run_from_file(const std::string& config_path, Command command,
                  const std::string& out_dir, const std::uint64_t* seed_override) {
  ScenarioConfig cfg;
  try {
    cfg = parse_config(config_path);
  } catch (const std::exception& e) {
    std::filesystem::create_directories(out_dir);
    std::ofstream os(out_dir + "/manifest.json", std::ios::binary);
    json m;
    m["schema"] = "stacknash.manifest.v1";
    m["version"] = kArtifactVersion;
    m["ok"] = false;
    m["error"] = e.what();
    os << m.dump(2) << "\n";
    fprintf(stderr, "%s\n", e.what());
    return kExitConfig;
  }
  if (seed_override) cfg.seed = *seed_override;
  return run_scenario(cfg, command, out_dir);
}

}  // namespace stacknash
