#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

std::string bin() {
  const char* b = std::getenv("MAPFLUCT_BIN");
  REQUIRE_MESSAGE(b != nullptr, "MAPFLUCT_BIN not set");
  return b;
}

int run(const std::string& args) {
  const int st = std::system((bin() + " " + args + " 2>/dev/null").c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("mapfluct_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

const std::string kConfigs = MAPFLUCT_CONFIG_DIR;

}  // namespace

TEST_CASE("resolvent check on the two-phase ladder") {
  const fs::path out = scratch("resolvent");
  CHECK(run("resolvent-check --config " + kConfigs + "/resolvent_check.json --out " + out.string()) == 0);
  const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
  CHECK(summary.contains("max_abs_error_over_se"));
  CHECK(summary.at("pass").get<bool>());
  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(manifest.at("schema_version") == 1);
  CHECK(manifest.at("params").at("paths") == 200000);
  const std::string csv = slurp(out / "resolvent.csv");
  CHECK(csv.rfind("x,phase,formula,monte_carlo,se,abs_error,z\n", 0) == 0);
}

TEST_CASE("malformed rate matrix") {
  const fs::path dir = scratch("bad");
  nlohmann::json ladder = nlohmann::json::parse(slurp(kConfigs + "/ladder_two_phase.json"));
  ladder["Q"] = {{-1.0, 1.1}, {1.0, -1.0}};
  const nlohmann::json cfg = {{"schema_version", 1}, {"ladder", ladder}};
  std::ofstream(dir / "cfg.json") << cfg.dump();
  CHECK(run("resolvent-check --config " + (dir / "cfg.json").string() + " --out " + (dir / "out").string()) == 2);
  const auto summary = nlohmann::json::parse(slurp(dir / "out" / "summary.json"));
  CHECK(summary.dump().find("Q row 0 not conservative") != std::string::npos);
}

TEST_CASE("config errors") {
  const fs::path dir = scratch("cfg");
  std::ofstream(dir / "unknown.json") << R"({"schema_version": 1, "ladder": "x.json", "bogus": 1})";
  CHECK(run("resolvent-check --config " + (dir / "unknown.json").string() + " --out " + (dir / "o1").string()) == 2);
  std::ofstream(dir / "version.json") << R"({"schema_version": 99})";
  CHECK(run("lamperti --config " + (dir / "version.json").string() + " --out " + (dir / "o2").string()) == 2);
  CHECK(run("lamperti --config " + (dir / "missing.json").string() + " --out " + (dir / "o3").string()) == 2);
  CHECK(run("no-such-kind --config x") == 2);
}

TEST_CASE("same config and seed give identical bytes") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const std::string cfg = " --config " + kConfigs + "/overshoot.json --seed 99 --paths 500 --out ";
  REQUIRE(run("overshoot" + cfg + a.string()) == 0);
  REQUIRE(run("overshoot" + cfg + b.string()) == 0);
  for (const auto& e : fs::directory_iterator(a)) {
    const auto name = e.path().filename();
    CHECK_MESSAGE(slurp(a / name) == slurp(b / name), name.string());
  }
  const fs::path c = scratch("det_c");
  REQUIRE(run("overshoot --config " + kConfigs + "/overshoot.json --seed 100 --paths 500 --out " + c.string()) == 0);
  CHECK(slurp(a / "overshoots.csv") != slurp(c / "overshoots.csv"));
}
