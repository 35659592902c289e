#include <cstdint>
#include <string>

#include "CLI11.hpp"
#include "stacknash/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"stacknash -- hierarchical control experiments for a degenerate parabolic equation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;

  const std::vector<std::string> names = {"solve",       "nash",  "hum",
                                          "sweep",       "observability",
                                          "validate"};
  for (const auto& name : names) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "scenario configuration file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "override run.seed")->each([&](const std::string&) {
      seed_set = true;
    });
  }

  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  return stacknash::run_from_file(config_path, stacknash::command_from_name(command),
                                  out_dir, seed_set ? &seed : nullptr);
}
