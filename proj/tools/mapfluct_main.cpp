#include "mapfluct/experiment.hpp"
#include "mapfluct/numerics.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

int main(int argc, char** argv) {
  using namespace mapfluct;
  CLI::App app{"Markov additive fluctuation experiments"};
  app.require_subcommand(1, 1);
  std::string config, out = "out";
  std::uint64_t seed = 0;
  std::size_t paths = 0;
  int workers = 0;
  for (const auto& kind : experiment_kinds()) {
    auto* sub = app.add_subcommand(kind, "run the " + kind + " experiment");
    sub->add_option("--config", config, "experiment config (JSON)")->required();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--paths", paths, "override the path count");
    sub->add_option("--workers", workers, "worker threads (default 1)");
    sub->add_option("--out", out, "output directory");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  CLI::App* sub = app.get_subcommands().front();
  RunOverrides ov;
  if (sub->count("--seed")) ov.seed = seed;
  if (sub->count("--paths")) ov.paths = paths;
  if (sub->count("--workers")) ov.workers = workers;
  nlohmann::json raw;
  try {
    raw = load_config(config);
  } catch (const SpecError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  const std::string base = std::filesystem::path(config).parent_path().string();
  return run_experiment(sub->get_name(), raw, ov, out, std::cerr, base.empty() ? "." : base);
}
