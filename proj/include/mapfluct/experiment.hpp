#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace mapfluct {

constexpr int kSchemaVersion = 1;
constexpr std::uint64_t kDefaultSeed = 20240917;

enum ExitCode { kExitOk = 0, kExitAssertion = 1, kExitConfig = 2, kExitRuntime = 3 };

const std::vector<std::string>& experiment_kinds();

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<int> workers;
};

// Loads a config file (JSON). Relative spec paths inside it resolve against
// the file's directory.
nlohmann::json load_config(const std::string& path);

// Fills every default for the kind and returns the resolved config that the
// manifest echoes. Throws SpecError on bad input.
nlohmann::json resolve_config(const std::string& kind, const nlohmann::json& raw, const RunOverrides& ov,
                              const std::string& base_dir = ".");

// Runs one experiment, writing manifest.json, CSV tables and summary.json
// into out_dir. Returns the process exit code; messages go to log.
int run_experiment(const std::string& kind, const nlohmann::json& raw, const RunOverrides& ov,
                   const std::string& out_dir, std::ostream& log, const std::string& base_dir = ".");

// %.17g formatting used by every CSV writer
std::string format_number(double v);

}  // namespace mapfluct
