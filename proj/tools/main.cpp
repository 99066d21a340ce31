#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cwlab/config.hpp"
#include "cwlab/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Heat kernels and random walks among random conductances on Z"};
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
  bool quiet = false;
  app.add_option("--config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Overrides the environment seed");
  app.add_option("--out", out, "Output directory");
  app.add_option("--threads", threads, "Worker threads for Monte Carlo (falls back to CWLAB_THREADS)")
      ->check(CLI::PositiveNumber);
  app.add_flag("--quiet", quiet, "Suppress progress output");
  CLI11_PARSE(app, argc, argv);

  cwlab::RunConfig cfg;
  try {
    cfg = cwlab::load_config(config_path);
    if (seed) cfg.env.seed = *seed;
    if (out) cfg.out = *out;
    if (threads) {
      cfg.threads = *threads;
    } else if (const char* env = std::getenv("CWLAB_THREADS"); env && *env) {
      try {
        cfg.threads = static_cast<unsigned>(std::stoul(env));
      } catch (const std::exception&) {
        throw cwlab::ConfigError(0, "CWLAB_THREADS", std::string("not a positive integer: ") + env);
      }
    }
    cwlab::validate(cfg);
  } catch (const cwlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  try {
    cwlab::RunOptions opt;
    if (!quiet) opt.log = &std::cerr;
    const auto report = cwlab::run_report(cfg, opt);
    if (!report.pass()) {
      for (const auto& f : report.failures()) std::cerr << "failed " << f << '\n';
      return 1;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
