// Acceptance suite: one PASS/FAIL line per criterion. Run with a criterion
// number to execute only that one; exit status is nonzero if any ran and failed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cwlab/heat_kernel.hpp"
#include "cwlab/limits.hpp"
#include "cwlab/run.hpp"
#include "cwlab/text.hpp"
#include "cwlab/walker.hpp"
#include "oracles.hpp"

using namespace cwlab;
using text::number;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    notes.push_back((ok ? "ok   " : "FAIL ") + what);
  }
  void info(const std::string& what) { notes.push_back("     " + what); }
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Six kinds, three seeds each.
std::vector<EnvSpec> env_matrix() {
  std::vector<EnvSpec> out;
  for (std::uint64_t seed : {1, 2, 3}) {
    out.push_back({ConstantKind{1.0}, seed});
    out.push_back({PeriodicKind{{1.0, 2.0}, 0}, seed});
    out.push_back({LognormalKind{0.0, 1.0}, seed});
    out.push_back({ParetoKind{0.5, 1.0}, seed});
    out.push_back({PowerKind{0.5}, seed});
    out.push_back({MarkovKind{{0.5, 3.0}, {{0.9, 0.1}, {0.2, 0.8}}}, seed});
  }
  return out;
}

const std::vector<std::uint64_t> kSeedMatrix{1, 2, 3, 4, 5};

std::string series_text(const std::vector<VerificationRecord>& recs) {
  std::string s;
  for (const auto& r : recs) s += (s.empty() ? "" : " ") + number(r.observed);
  return s;
}

Outcome exact_small_n() {
  Outcome o;
  Stopwatch sw;
  Environment c(EnvSpec{ConstantKind{1.0}, 0});
  const auto run = run_to<double>(c, 0, 2, {});
  const double expected[] = {0.5, 0.25, 3.0 / 16.0};
  for (int n = 0; n <= 2; ++n) {
    const double e = run.energies.energies[static_cast<std::size_t>(n)];
    o.require(std::abs(e - expected[n]) <= 1e-14, "constant(1) energy n=" + std::to_string(n) + " = " + number(e));
  }
  Environment p(EnvSpec{PeriodicKind{{1.0, 2.0}, 0}, 0});
  const auto pr = run_to<double>(p, 0, 2, {2});
  const double occ = occupation(pr.snapshot(2), pr.window, 0);
  o.require(std::abs(occ - 5.0 / 9.0) <= 1e-14, "periodic([1,2]) occupation(0) at n=2 = " + number(occ));
  o.require(sw.seconds() < 1.0, "runtime " + number(sw.seconds()) + " s < 1 s");
  return o;
}

Outcome energy_duality() {
  Outcome o;
  Stopwatch sw;
  double worst = 0.0;
  for (const auto& spec : env_matrix()) {
    Environment env(spec);
    const auto r = energy_duality_check(env, 0, 2000);
    worst = std::max(worst, r.max_rel_error);
    o.require(r.max_rel_error <= 1e-12, describe(spec) + ": max relative defect " + number(r.max_rel_error));
  }
  o.require(sw.seconds() < 60.0, "runtime " + number(sw.seconds()) + " s < 60 s");
  return o;
}

Outcome green_identity() {
  Outcome o;
  for (const auto& spec : env_matrix()) {
    Environment env(spec);
    const auto r = green_identity_check(env, 0, 1000);
    o.require(r.max_rel_error <= 1e-12, describe(spec) + ": max relative defect " + number(r.max_rel_error) +
                                            " at n=" + std::to_string(r.worst_n));
  }
  return o;
}

Outcome complete_monotonicity() {
  Outcome o;
  Stopwatch sw;
  const std::int64_t N = 200, K = 12;
  for (const auto& spec : env_matrix()) {
    Environment env(spec);
    const auto run = run_to<Extended>(env, 0, N, {});
    const auto fd = finite_differences(run.energies, K);
    const auto dd = delta_direct_table(env, 0, N, K);
    const auto v1 = check_complete_monotonicity(fd, 1e-10).violations.size();
    const auto v2 = check_complete_monotonicity(dd, 1e-10).violations.size();
    double disagreement = 0.0;
    for (std::int64_t k = 0; k <= K; ++k) {
      for (std::int64_t n = 0; n + k <= N; ++n) {
        disagreement = std::max(disagreement, static_cast<double>(abs(fd.at(n, k) - dd.at(n, k)) / abs(dd.at(n, k))));
      }
    }
    o.require(v1 == 0 && v2 == 0 && disagreement <= 1e-10,
              describe(spec) + ": violations " + std::to_string(v1) + "/" + std::to_string(v2) +
                  ", max relative disagreement " + number(disagreement));
  }
  o.require(sw.seconds() < 300.0, "runtime " + number(sw.seconds()) + " s < 300 s");
  return o;
}

Outcome nash() {
  Outcome o;
  for (const auto& spec : env_matrix()) {
    Environment env(spec);
    const auto run = run_to<double>(env, 0, 1001, {});
    const double e0 = run.energies.energies[0];
    double worst = 1.0;
    for (std::int64_t n = 0; n <= 500; ++n) worst = std::min(worst, check_nash(run.energies, n) / e0);
    o.require(worst >= -1e-12, describe(spec) + ": min normalised gap " + number(worst));
  }
  return o;
}

Outcome homogeneous_llt() {
  Outcome o;
  Stopwatch sw;
  Environment env(EnvSpec{ConstantKind{1.0}, 0});
  const std::vector<std::int64_t> sched{10000};
  const auto r = verify_llt(env, 0, sched).front();
  const double target = std::sqrt(2.0 / std::numbers::pi);
  const double binom = std::sqrt(2.0 * 10000) * static_cast<double>(oracle::srw_law(20000, 0));
  o.require(std::abs(r.observed - target) <= 1e-3, "sqrt(2n) P0[S_2n=0] at n=1e4 = " + number(r.observed) +
                                                       ", |gap| to sqrt(2/pi) = " + number(std::abs(r.observed - target)));
  o.require(rel(r.observed, binom) < 1e-10, "binomial oracle " + number(binom));
  o.require(sw.seconds() < 60.0, "runtime " + number(sw.seconds()) + " s < 60 s");
  return o;
}

Outcome periodic_llt() {
  Outcome o;
  Environment env(EnvSpec{PeriodicKind{{1.0, 2.0}, 0}, 0});
  const std::vector<std::int64_t> sched{5000};
  const auto run = schedule_run(env, sched);
  const double target = 3.0 / (2.0 * std::sqrt(std::numbers::pi));
  for (std::int64_t x0 : {0, 2}) {
    const auto t = targets(env, x0);
    const auto r = verify_llt(run, env, x0, sched, t).front();
    o.require(std::abs(t.llt_constant - target) < 1e-15, "target at x0=" + std::to_string(x0) + " = " + number(t.llt_constant));
    o.require(rel(r.observed, target) <= 0.01, "x0=" + std::to_string(x0) + ": observed " + number(r.observed) +
                                                   ", relative gap " + number(rel(r.observed, target)));
  }
  return o;
}

Outcome degenerate_branches() {
  Outcome o;
  Stopwatch sw;
  const auto sched = dyadic_schedule(6, 14);
  for (auto seed : kSeedMatrix) {
    Environment env(EnvSpec{ParetoKind{0.5, 1.0}, seed});
    const auto t = targets(env, 0, 1000);
    const auto recs = verify_llt(schedule_run(env, sched), env, 0, sched, t);
    const auto tc = check_trend(observed_series(recs), Trend::decreasing);
    o.require(tc.pass, describe(env.spec()) + " decreasing trend: tail monotone=" + (tc.monotone_tail ? "yes" : "no") +
                           ", last/first=" + number(tc.factor));
    o.info("series " + series_text(recs));
  }
  for (auto seed : kSeedMatrix) {
    Environment env(EnvSpec{PowerKind{0.5}, seed});
    const auto t = targets(env, 0, 1000);
    const auto recs = verify_llt(schedule_run(env, sched), env, 0, sched, t);
    const auto tc = check_trend(observed_series(recs), Trend::increasing);
    o.require(tc.pass, describe(env.spec()) + " increasing trend: tail monotone=" + (tc.monotone_tail ? "yes" : "no") +
                           ", last/first=" + number(tc.factor));
    o.info("series " + series_text(recs));
  }
  o.require(sw.seconds() < 600.0, "runtime " + number(sw.seconds()) + " s < 600 s");
  return o;
}

Outcome sup_bound_vanishing() {
  Outcome o;
  const auto sched = dyadic_schedule(6, 14);
  for (auto seed : kSeedMatrix) {
    Environment env(EnvSpec{ParetoKind{0.5, 1.0}, seed});
    const auto recs = verify_sup_bound(env, sched);
    const auto series = observed_series(recs);
    const double bound = running_max(series).back();
    const auto tc = check_trend(series, Trend::decreasing, 1.0);
    o.require(std::isfinite(bound), describe(env.spec()) + ": running max " + number(bound));
    o.require(tc.monotone_tail, describe(env.spec()) + ": decreasing over the last 4 dyadic points");
    o.info("series " + series_text(recs));
  }
  return o;
}

Outcome escape() {
  Outcome o;
  Environment c(EnvSpec{ConstantKind{1.0}, 0});
  const double exact = escape_probability_exact(c, 2);
  o.require(exact == 0.5, "constant(1) K=2 exact = " + number(exact));
  const auto mc = escape_probability_mc(c, 2, 1'000'000, 2024);
  o.require(std::abs(mc.mc - 0.5) <= 0.0025, "constant(1) K=2 mc = " + number(mc.mc) + " (se " + number(mc.std_error) + ")");
  Environment p(EnvSpec{PeriodicKind{{1.0, 2.0}, 0}, 0});
  const double pe = escape_probability_exact(p, 2);
  o.require(std::abs(pe - 4.0 / 9.0) < 1e-15, "periodic([1,2]) K=2 exact = " + number(pe));
  const auto pm = escape_probability_mc(p, 2, 1'000'000, 2024);
  const double se = std::sqrt(pe * (1 - pe) / 1e6);
  o.require(std::abs(pm.mc - pe) <= 5 * se, "periodic([1,2]) K=2 mc = " + number(pm.mc) + ", 5 se = " + number(5 * se));
  return o;
}

Outcome clt() {
  Outcome o;
  for (const EnvSpec& spec : {EnvSpec{ConstantKind{1.0}, 0}, EnvSpec{PeriodicKind{{1.0, 2.0}, 0}, 0}}) {
    Environment env(spec);
    const auto t = targets(env, 0);
    const auto r = clt_check(env, 10000, CltMode::exact_kernel).front();
    o.require(r.observed < 0.02, describe(spec) + ": sigma^2 = " + number(t.sigma2) + ", KS at n=1e4 = " + number(r.observed));
    const auto ens = simulate(env, 1000, 1'000'000, 77, 1);
    const auto exact = run_to<double>(env, 0, 1000, {1000});
    const double tv = total_variation(empirical_law(ens), kernel_law(exact.snapshot(1000), exact.window));
    o.require(tv < 5e-3, describe(spec) + ": ensemble vs exact kernel TV at n=1e3 = " + number(tv));
  }
  return o;
}

Outcome regularity() {
  Outcome o;
  const auto sched = dyadic_schedule(6, 14);
  std::vector<EnvSpec> stable{{ConstantKind{1.0}, 0}};
  for (std::uint64_t seed : {1, 2, 3}) stable.push_back({LognormalKind{0.0, 1.0}, seed});
  for (const auto& spec : stable) {
    Environment env(spec);
    const auto run = schedule_run(env, sched);
    for (double delta : {0.25, 1.0}) {
      const auto recs = regularity_series(run, env, 0, sched, delta);
      const auto c_hat = running_max(observed_series(recs));
      const auto tail = std::span<const double>(c_hat).last(3);
      const double hi = *std::max_element(tail.begin(), tail.end());
      const double lo = *std::min_element(tail.begin(), tail.end());
      const double variation = (hi - lo) / hi;
      o.require(std::isfinite(hi) && variation < 0.5, describe(spec) + " delta=" + number(delta) + ": C_hat = " +
                                                          number(hi) + ", variation " + number(variation));
    }
  }
  for (auto seed : kSeedMatrix) {
    Environment env(EnvSpec{ParetoKind{0.5, 1.0}, seed});
    const auto run = schedule_run(env, sched);
    const auto recs = regularity_vanishing_series(run, env, 0, sched, 1.0);
    const auto tc = check_trend(observed_series(recs), Trend::decreasing);
    o.require(tc.pass, describe(env.spec()) + " sqrt(2n) modulus decreasing trend: tail monotone=" +
                           (tc.monotone_tail ? "yes" : "no") + ", last/first=" + number(tc.factor));
    o.info("series " + series_text(recs));
  }
  return o;
}

Outcome determinism() {
  Outcome o;
  namespace fs = std::filesystem;
  const auto base = fs::temp_directory_path() / "cwlab-acceptance-determinism";
  fs::remove_all(base);
  auto cfg = parse_config("[env]\nkind = iid_lognormal\nm = 0\ns = 1\nseed = 7\n[run]\ncommand = verify\n");
  std::string csv[2];
  for (int i = 0; i < 2; ++i) {
    cfg.out = base / ("run" + std::to_string(i));
    run(cfg);
    std::ifstream in(cfg.out / "report.csv", std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    csv[i] = s.str();
  }
  o.require(!csv[0].empty() && csv[0] == csv[1],
            "two verify runs give identical report.csv (" + std::to_string(csv[0].size()) + " bytes)");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"exact small-n oracles", exact_small_n},
      {"energy duality ||h_n||^2 = h_2n(x0)", energy_duality},
      {"Green identity", green_identity},
      {"complete monotonicity of the energies", complete_monotonicity},
      {"Nash-type decay", nash},
      {"homogeneous LLT", homogeneous_llt},
      {"periodic LLT", periodic_llt},
      {"degenerate branches of the LLT", degenerate_branches},
      {"vanishing sup bound", sup_bound_vanishing},
      {"escape probability", escape},
      {"CLT and walker agreement", clt},
      {"Holder-type regularity", regularity},
      {"determinism", determinism},
  };
  int only = argc > 1 ? std::atoi(argv[1]) : 0;
  bool all_pass = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (only != 0 && only != id) continue;
    Stopwatch sw;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    all_pass = all_pass && o.pass;
    std::printf("criterion %2d %s: %s (%.2f s)\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first, sw.seconds());
    for (const auto& n : o.notes) std::printf("    %s\n", n.c_str());
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}
