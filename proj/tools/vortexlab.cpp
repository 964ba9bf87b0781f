#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "vortexlab/config.hpp"
#include "vortexlab/error.hpp"
#include "vortexlab/runner.hpp"

using namespace vortexlab;

int main(int argc, char** argv) {
  CLI::App app{"vortexlab: gauged vortices on cylinders and their neck families"};
  app.require_subcommand(1);
  std::string config_path, out;
  int threads = 0;
  std::uint64_t seed = 0;
  bool have_seed = false;

  for (const auto& name : runner::subcommands()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config_path, "YAML config file")->required();
    sub->add_option("--out", out, "output root (overrides VORTEXLAB_OUT and the config)");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& s) { seed = s, have_seed = true; }, "64-bit seed");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : runner::config_error;
  }
  const std::string sub = app.get_subcommands().front()->get_name();

  config::RunConfig cfg;
  try {
    cfg = config::parse_config(config_path);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return runner::config_error;
  }
  if (have_seed) {
    cfg.seed = seed;
    cfg.solve.seed = seed;
  }
  if (threads > 0) cfg.threads = threads;
  if (out.empty()) {
    if (const char* env = std::getenv("VORTEXLAB_OUT"); env && *env) out = env;
  }
  if (out.empty()) out = cfg.output;

  auto o = runner::run(cfg, sub, out);
  if (!o.message.empty()) std::cerr << o.message << (o.message.back() == '\n' ? "" : "\n");
  std::cout << o.artifact_dir << "\n";
  return o.exit_code;
}
