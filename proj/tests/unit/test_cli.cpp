#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "vortexlab/config.hpp"
#include "vortexlab/runner.hpp"

namespace fs = std::filesystem;
using namespace vortexlab;

namespace {

struct Run {
  int code = -1;
  std::string out;  // stdout, trimmed
};

fs::path scratch() {
  static fs::path root = [] {
    auto p = fs::temp_directory_path() / ("vortexlab_cli_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

Run run_cli(const std::string& args) {
  std::string cmd = std::string(VORTEXLAB_EXE) + " " + args + " 2>" + (scratch() / "stderr.txt").string();
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe);
  char buf[512];
  while (std::fgets(buf, sizeof buf, pipe)) r.out += buf;
  int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  while (!r.out.empty() && (r.out.back() == '\n' || r.out.back() == '\r')) r.out.pop_back();
  return r;
}

std::string config_file(const std::string& name) { return std::string(VORTEXLAB_CONFIGS) + "/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
  auto p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

nlohmann::json summary(const std::string& dir) { return nlohmann::json::parse(slurp(fs::path(dir) / "summary.json")); }

}  // namespace

TEST_CASE("solve writes a converged, reproducible report") {
  auto a = run_cli("solve --config " + config_file("degree1.yaml") + " --out " + (scratch() / "a").string());
  REQUIRE(a.code == 0);
  auto j = summary(a.out);
  CHECK(j["schema_version"] == runner::kSchemaVersion);
  CHECK(j["passed"] == true);
  CHECK(j["results"]["converged"] == true);
  CHECK(fs::exists(fs::path(a.out) / "field_v0.csv"));
  CHECK(fs::path(a.out).filename().string().rfind("solve-", 0) == 0);

  auto b = run_cli("solve --config " + config_file("degree1.yaml") + " --threads 3 --out " + (scratch() / "b").string());
  REQUIRE(b.code == 0);
  CHECK(fs::path(a.out).filename() == fs::path(b.out).filename());
  for (const auto& entry : fs::directory_iterator(a.out)) {
    auto other = fs::path(b.out) / entry.path().filename();
    REQUIRE(fs::exists(other));
    CHECK(slurp(entry.path()) == slurp(other));
  }

  auto c = run_cli("solve --config " + config_file("degree1.yaml") + " --seed 99 --out " + (scratch() / "a").string());
  REQUIRE(c.code == 0);
  CHECK(c.out != a.out);
}

TEST_CASE("graph and decay subcommands") {
  auto g = run_cli("graph --config " + config_file("figure1.yaml") + " --out " + scratch().string());
  REQUIRE(g.code == 0);
  CHECK(summary(g.out)["results"]["genus"] == 1);

  auto d = run_cli("decay --config " + config_file("degree1.yaml") + " --out " + scratch().string());
  REQUIRE(d.code == 0);
  auto csv = slurp(fs::path(d.out) / "decay.csv");
  CHECK(csv.rfind("r,e_r,log_e_r\n", 0) == 0);
}

TEST_CASE("neck writes one profile per length") {
  auto n = run_cli("neck --config " + config_file("neck_plain.yaml") + " --out " + scratch().string());
  REQUIRE(n.code == 0);
  for (int L : {10, 20, 40}) CHECK(fs::exists(fs::path(n.out) / ("neck_L" + std::to_string(L) + ".csv")));
}

TEST_CASE("exit codes") {
  auto bad = write_config("bad.yaml", "target: {n: 1, k: 1, weights: [[1]], tau: [0.0]}\n");
  CHECK(run_cli("solve --config " + bad.string()).code == 2);
  CHECK(run_cli("solve --config /nonexistent.yaml").code == 2);
  CHECK(run_cli("solve").code == 2);
  CHECK(run_cli("frobnicate --config " + config_file("degree1.yaml")).code == 2);
  CHECK(run_cli("solve --config " + config_file("degree1.yaml") + " --threads 0").code == 2);

  // hard assertion: an impossible homology tolerance
  auto strict = write_config("strict.yaml", slurp(config_file("degree1.yaml")) + "\n");
  {
    std::string text = slurp(strict);
    auto pos = text.find("max_gap: 0.02");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 13, "max_gap: 1.0e-12");
    std::ofstream(strict) << text;
  }
  auto s = run_cli("energy --config " + strict.string() + " --out " + scratch().string());
  CHECK(s.code == 1);
  CHECK(summary(s.out)["passed"] == false);

  // a degree-one vortex carries more than the small-energy threshold
  CHECK(run_cli("annulus --config " + config_file("degree1.yaml") + " --out " + scratch().string()).code == 3);
}

TEST_CASE("VORTEXLAB_OUT picks the output root") {
  auto env_root = scratch() / "env";
  std::string cmd = "VORTEXLAB_OUT=" + env_root.string() + " " + std::string(VORTEXLAB_EXE) + " graph --config " +
                    config_file("figure1.yaml") + " >/dev/null 2>&1";
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(env_root));
}

TEST_CASE("emit_report with no tables writes only the summary") {
  auto c = config::parse_config(config_file("degree1.yaml"));
  runner::Results r;
  r.subcommand = "graph";
  r.summary = R"({"x": 1})";
  auto dir = scratch() / "bare";
  runner::emit_report(r, c, dir.string());
  int files = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    ++files;
    CHECK(e.path().filename() == "summary.json");
  }
  CHECK(files == 1);
  auto j = summary(dir.string());
  CHECK(j["results"]["x"] == 1);
  CHECK(j["failures"].empty());
  CHECK(j["config_hash"].is_string());
}
