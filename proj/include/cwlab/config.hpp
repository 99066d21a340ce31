#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cwlab/environment.hpp"

namespace cwlab {

/// Syntax errors carry the 1-based line number; semantic errors carry the
/// dotted key path ("env.kappa", "run.schedule") and line 0.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, std::string key, const std::string& what);
  int line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  int line_;
  std::string key_;
};

enum class Command { env_sample, kernel, walk, verify, all };

std::string_view command_name(Command c);

struct Tolerances {
  double llt = 0.01;                  // relative LLT gap at the largest n, closed-form targets
  double band_margin = 0.10;          // slack on the asymptotic lower Gaussian band
  double ks = 0.02;                   // KS distance to the CLT normal
  double tv = 5e-3;                   // walker ensemble vs exact kernel
  double regularity_variation = 0.5;  // spread of the regularity constant over the last 3 points
  double escape_sigmas = 5.0;
  double cm = 1e-10;        // negative differences allowed, relative to ||h_0||^2
  double cm_agreement = 1e-10;
  double nash = 1e-12;      // negative Nash gap allowed, relative to ||h_0||^2
  double identity = 1e-12;  // Green identity / energy duality, relative
  double mass = 1e-12;      // per step
  double trend_factor = 2.0;
};

struct RunConfig {
  EnvSpec env;
  Command command = Command::verify;
  std::int64_t n_max = 4096;
  std::vector<std::int64_t> schedule;  // resolved; dyadic unless given explicitly
  int dyadic_min = 6;
  std::int64_t x0 = 0;
  std::vector<double> delta = {0.25, 1.0};
  std::int64_t walkers = 1'000'000;
  std::int64_t walk_steps = 100;
  std::uint64_t walk_seed = 1;
  std::vector<std::int64_t> K = {1, 2, 5, 10};
  std::int64_t cm_n = 200;
  std::int64_t cm_k = 12;
  std::int64_t identity_n = 1000;
  std::int64_t nash_n = 500;
  std::int64_t clt_n = 0;  // 0: use n_max
  std::int64_t birkhoff_window = 1'000'000;
  std::filesystem::path out = "cwlab-out";
  unsigned threads = 1;
  Tolerances tol;
};

/// Parses the sectioned `key = value` format:
///
///   # comment
///   [env]
///   kind = periodic
///   cycle = 1, 2
///   [run]
///   command = verify
///   n_max = 4096
///   [tolerance]
///   llt = 0.01
///
/// Unknown sections or keys are rejected. The result is fully validated.
RunConfig parse_config(std::string_view text);

RunConfig load_config(const std::filesystem::path& path);

/// Re-checks the invariants after command-line overrides.
void validate(const RunConfig& config);

std::vector<std::int64_t> default_schedule(std::int64_t n_max, int dyadic_min);

}  // namespace cwlab
