#include <doctest.h>

#include <string>

#include "cwlab/config.hpp"

using namespace cwlab;

namespace {

ConfigError error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("config was accepted: " << text);
  return ConfigError(0, "", "");
}

}  // namespace

TEST_CASE("minimal config") {
  const auto cfg = parse_config(R"(
# minimal
[env]
kind = constant
kappa = 1

[run]
command = kernel
n_max = 100
)");
  CHECK(cfg.command == Command::kernel);
  CHECK(cfg.n_max == 100);
  CHECK(std::get<ConstantKind>(cfg.env.kind).kappa == 1.0);
  CHECK(cfg.schedule == std::vector<std::int64_t>{64});
}

TEST_CASE("full config with every section") {
  const auto cfg = parse_config(R"(
[env]
kind = markov     # two-state chain
states = 0.5, 3
transition = 0.9, 0.1; 0.2, 0.8
seed = 12
[run]
command = all
n_max = 1024
schedule = 16, 64, 1024
x0 = 2
delta = 0.5
walkers = 1000
walk_steps = 20
walk_seed = 3
K = 1, 3
cm_n = 30
cm_k = 4
identity_n = 50
nash_n = 20
clt_n = 256
birkhoff_window = 5000
threads = 2
out = somewhere
dyadic_min = 2
[tolerance]
llt = 0.05
ks = 0.1
)");
  CHECK(cfg.command == Command::all);
  CHECK(cfg.env.seed == 12);
  const auto& m = std::get<MarkovKind>(cfg.env.kind);
  CHECK(m.transition.size() == 2);
  CHECK(m.transition[1][0] == 0.2);
  CHECK(cfg.schedule == std::vector<std::int64_t>{16, 64, 1024});
  CHECK(cfg.x0 == 2);
  CHECK(cfg.K == std::vector<std::int64_t>{1, 3});
  CHECK(cfg.tol.llt == 0.05);
  CHECK(cfg.tol.ks == 0.1);
  CHECK(cfg.tol.tv == 5e-3);
  CHECK(cfg.out == "somewhere");
  CHECK(cfg.threads == 2);
}

TEST_CASE("semantic errors name the key path") {
  CHECK(error_of("[env]\nkind = constant\nkappa = -1\n").key() == "env.kappa");
  CHECK(error_of("[env]\nkind = constant\nkappa = 1\n[run]\nn_max = 100\nschedule = 10, 200\n").key() ==
        "run.schedule");
  CHECK(error_of("[env]\nkind = constant\nkappa = 1\n[run]\ncommand = walk\nwalkers = 0\n").key() == "run.walkers");
  CHECK(error_of("[env]\nkind = constant\nkappa = 1\n[tolerance]\nks = 0\n").key() == "tolerance.ks");
  CHECK(error_of("[env]\nkind = constant\nkappa = 1\n[tolerance]\nllt = -0.1\n").key() == "tolerance.llt");
  CHECK(error_of("[env]\nkind = iid_pareto\n").key() == "env.alpha");
  CHECK(error_of("[env]\nkind = constant\nkappa = 1\n[run]\nx0 = 3\n").key() == "run.x0");
  CHECK(error_of("[env]\nkind = iid_power\nbeta = 0\n").key() == "env.beta");
  CHECK(error_of("[env]\nkind = markov\nstates = 1, 2\ntransition = 1, 0; 0, 1\n").key() == "env.transition");
}

TEST_CASE("syntax errors carry the line number") {
  const auto unknown = error_of("[env]\nkind = constant\nkappa = 1\ncolour = blue\n");
  CHECK(unknown.line() == 4);
  CHECK(unknown.key() == "env.colour");
  CHECK(error_of("[env]\nkind = constant\nkappa = one\n").line() == 3);
  CHECK(error_of("kind = constant\n").line() == 1);
  CHECK(error_of("[env]\nkind constant\n").line() == 2);
  CHECK(error_of("[envy]\n").line() == 1);
  CHECK(error_of("[env\n").line() == 1);
  CHECK(error_of("[env]\nkind = constant\nkind = constant\n").line() == 3);
  // A parameter of another kind is an unknown key.
  CHECK(error_of("[env]\nkind = constant\nkappa = 1\nalpha = 2\n").key() == "env.alpha");
  CHECK(error_of("[env]\nkind = constant\nkappa = 1\n[run]\ncommand = dance\n").key() == "run.command");
}

TEST_CASE("default schedule") {
  CHECK(default_schedule(4096, 6) == std::vector<std::int64_t>{64, 128, 256, 512, 1024, 2048, 4096});
  CHECK(default_schedule(5000, 6).back() == 4096);
  CHECK(default_schedule(10, 6) == std::vector<std::int64_t>{1, 2, 4, 8});
}
