#include "cwlab/run.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "cwlab/text.hpp"

namespace cwlab {
namespace {

namespace fs = std::filesystem;

bool deterministic_kind(const EnvSpec& spec) {
  return std::holds_alternative<ConstantKind>(spec.kind) || std::holds_alternative<PeriodicKind>(spec.kind);
}

void prepare_output(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw std::runtime_error("output directory " + dir.string() + " cannot be created");
  }
  const fs::path probe = dir / ".cwlab-write-probe";
  {
    std::ofstream out(probe);
    if (!out) throw std::runtime_error("output directory " + dir.string() + " is not writable");
  }
  fs::remove(probe, ec);
}

class Runner {
 public:
  Runner(const RunConfig& cfg, const RunOptions& opt) : cfg_(cfg), opt_(opt), env_(cfg.env) {
    report_.env_id = env_.id();
    report_.command = std::string(command_name(cfg.command));
    report_.tolerances = cfg.tol;
  }

  Report execute() {
    prepare_output(cfg_.out);
    note("environment " + env_.id());
    report_.targets = targets(env_, cfg_.x0, cfg_.birkhoff_window);
    const Command c = cfg_.command;
    if (c == Command::env_sample || c == Command::all) env_sample();
    if (c == Command::kernel || c == Command::all) kernel();
    if (c == Command::walk || c == Command::all) walk();
    if (c == Command::verify || c == Command::all) verify();
    finish();
    return std::move(report_);
  }

 private:
  void note(const std::string& line) {
    if (opt_.log) *opt_.log << line << '\n';
  }

  fs::path file(const std::string& name) const { return cfg_.out / name; }

  void add(std::vector<VerificationRecord> recs) {
    for (auto& r : recs) report_.records.push_back(std::move(r));
  }

  void check(std::string id, bool asserted, bool pass, double margin, std::string detail) {
    report_.summary.push_back({std::move(id), asserted, pass, margin, std::move(detail)});
  }

  void trend_check(const std::string& id, const std::vector<VerificationRecord>& recs, Trend dir, bool asserted) {
    const auto series = observed_series(recs);
    const auto tc = check_trend(series, dir, cfg_.tol.trend_factor);
    const double goal = dir == Trend::increasing ? cfg_.tol.trend_factor : 1.0 / cfg_.tol.trend_factor;
    const double margin = dir == Trend::increasing ? tc.factor - goal : goal - tc.factor;
    check(id, asserted, tc.pass, margin,
          std::string(dir == Trend::increasing ? "increasing" : "decreasing") +
              " trend: monotone tail=" + (tc.monotone_tail ? "yes" : "no") + ", last/first=" + text::number(tc.factor));
  }

  void env_sample() {
    note("env-sample");
    write_text(file("env_sample.csv"), env_sample_csv(env_, cfg_.x0 - cfg_.n_max, cfg_.x0 + cfg_.n_max));
  }

  void kernel() {
    note("kernel to n = " + std::to_string(cfg_.n_max));
    const auto run = run_to<double>(env_, cfg_.x0, cfg_.n_max, cfg_.schedule);
    write_text(file("energies.csv"), energies_csv(run.energies));
    std::vector<VerificationRecord> recs;
    double worst = 0.0;
    for (const auto& s : run.snapshots) {
      write_text(file("snapshot_" + std::to_string(s.time) + ".csv"), snapshot_csv(s, run.window));
      const double err = std::abs(mass(s, run.window) - 1.0);
      recs.push_back(make_record(checks::kMassConservation, env_.id(), s.time, err, 0.0, {cfg_.x0, kNaN, 0}));
      worst = std::max(worst, err / (cfg_.tol.mass * static_cast<double>(std::max<std::int64_t>(1, s.time))));
    }
    add(std::move(recs));
    check(checks::kMassConservation, true, worst <= 1.0, 1.0 - worst,
          "max |mass - 1| / (tol n) = " + text::number(worst));
  }

  void walk() {
    note("walk: " + std::to_string(cfg_.walkers) + " walkers, " + std::to_string(cfg_.walk_steps) + " steps");
    const auto ens = simulate(env_, cfg_.walk_steps, cfg_.walkers, cfg_.walk_seed, cfg_.threads);
    write_text(file("occupancy.csv"), occupancy_csv(ens));
    const auto exact = run_to<double>(env_, 0, cfg_.walk_steps, {cfg_.walk_steps});
    const auto tv = total_variation(empirical_law(ens), kernel_law(exact.snapshot(cfg_.walk_steps), exact.window));
    add({make_record(checks::kWalkerAgreement, env_.id(), cfg_.walk_steps, tv, 0.0)});
    check(checks::kWalkerAgreement, true, tv < cfg_.tol.tv, cfg_.tol.tv - tv,
          "total variation to the exact kernel = " + text::number(tv));

    for (auto K : cfg_.K) {
      note("escape K = " + std::to_string(K));
      auto est = escape_probability_mc(env_, K, cfg_.walkers, cfg_.walk_seed, cfg_.threads);
      const double se = std::sqrt(est.exact * (1.0 - est.exact) / static_cast<double>(est.walkers));
      const double allowed = cfg_.tol.escape_sigmas * se + 1e-15;
      const double dev = std::abs(est.mc - est.exact);
      add({make_record(checks::kEscape, env_.id(), K, est.mc, est.exact)});
      check(std::string(checks::kEscape) + "_K" + std::to_string(K), true, dev <= allowed, allowed - dev,
            "|mc - exact| = " + text::number(dev) + ", allowed " + text::number(allowed) +
                ", capped fraction " + text::number(est.capped_fraction));
      report_.escapes.push_back(est);
    }
    write_text(file("escape.json"), escape_json(report_.escapes));
  }

  void identities() {
    const auto x0 = cfg_.x0;
    note("identities");
    const auto green = green_identity_check(env_, x0, cfg_.identity_n);
    add({make_record(checks::kGreenIdentity, env_.id(), green.n_max, green.max_rel_error, 0.0, {x0, kNaN, 0})});
    check(checks::kGreenIdentity, true, green.max_rel_error <= cfg_.tol.identity,
          cfg_.tol.identity - green.max_rel_error,
          "max relative defect " + text::number(green.max_rel_error) + " at n = " + std::to_string(green.worst_n));

    const auto dual = energy_duality_check(env_, x0, cfg_.identity_n);
    add({make_record(checks::kEnergyDuality, env_.id(), dual.n_max, dual.max_rel_error, 0.0, {x0, kNaN, 0})});
    check(checks::kEnergyDuality, true, dual.max_rel_error <= cfg_.tol.identity,
          cfg_.tol.identity - dual.max_rel_error,
          "max relative defect " + text::number(dual.max_rel_error) + " at n = " + std::to_string(dual.worst_n));

    note("difference table N = " + std::to_string(cfg_.cm_n) + ", K = " + std::to_string(cfg_.cm_k));
    const auto wide = run_to<Extended>(env_, x0, cfg_.cm_n, {});
    const auto table = finite_differences(wide.energies, cfg_.cm_k);
    const auto direct = delta_direct_table(env_, x0, cfg_.cm_n, cfg_.cm_k);
    const auto cm = check_complete_monotonicity(table, cfg_.tol.cm);
    const auto cm_direct = check_complete_monotonicity(direct, cfg_.tol.cm);
    Extended lowest = 0;
    Extended disagreement = 0;
    for (std::size_t k = 0; k < table.delta.size(); ++k) {
      for (std::size_t n = 0; n < table.delta[k].size(); ++n) {
        lowest = std::min(lowest, table.delta[k][n] / table.at(0, 0));
        const Extended& d = direct.delta[k][n];
        disagreement = std::max(disagreement, boost::multiprecision::abs(table.delta[k][n] - d) / boost::multiprecision::abs(d));
      }
    }
    add({make_record(checks::kCompleteMonotonicity, env_.id(), cfg_.cm_n, static_cast<double>(lowest), 0.0,
                     {x0, kNaN, 0}),
         make_record(checks::kCmAgreement, env_.id(), cfg_.cm_n, static_cast<double>(disagreement), 0.0,
                     {x0, kNaN, 0})});
    const auto violations = cm.violations.size() + cm_direct.violations.size();
    check(checks::kCompleteMonotonicity, true, violations == 0, static_cast<double>(lowest) + cfg_.tol.cm,
          std::to_string(violations) + " violations; lowest Delta/Delta_0^(0) = " +
              text::number(static_cast<double>(lowest)));
    const auto dis = static_cast<double>(disagreement);
    check(checks::kCmAgreement, true, dis <= cfg_.tol.cm_agreement, cfg_.tol.cm_agreement - dis,
          "max relative disagreement " + text::number(dis));

    note("nash bound to n = " + std::to_string(cfg_.nash_n));
    const auto e = run_to<double>(env_, x0, 2 * cfg_.nash_n + 1, {});
    const double e0 = e.energies.energies.front();
    double worst = std::numeric_limits<double>::infinity();
    std::int64_t worst_n = 0;
    for (std::int64_t n = 0; n <= cfg_.nash_n; ++n) {
      const double g = check_nash(e.energies, n) / e0;
      if (g < worst) {
        worst = g;
        worst_n = n;
      }
    }
    add({make_record(checks::kNash, env_.id(), cfg_.nash_n, worst, 0.0, {x0, kNaN, 0})});
    check(checks::kNash, true, worst >= -cfg_.tol.nash, worst + cfg_.tol.nash,
          "min normalised gap " + text::number(worst) + " at n = " + std::to_string(worst_n));
  }

  void limit_theorems() {
    const auto& t = report_.targets;
    const auto& cls = t.integrability;
    const auto x0 = cfg_.x0;
    const std::span<const std::int64_t> sched(cfg_.schedule);
    const std::int64_t n_last = cfg_.schedule.back();
    note("kernel for the schedule up to n = " + std::to_string(n_last));
    const auto run = schedule_run(env_, sched);

    auto llt = verify_llt(run, env_, x0, sched, t);
    if (!t.degenerate) {
      const auto& last = llt.back();
      const double rel = std::abs(last.gap) / last.target;
      const bool asserted = deterministic_kind(env_.spec());
      check(checks::kLlt, asserted, rel <= cfg_.tol.llt, cfg_.tol.llt - rel,
            "relative gap " + text::number(rel) + " at n = " + std::to_string(last.n) + " (" + t.source + " target" +
                (asserted ? ")" : "; quenched finite-n fluctuation, reported only)"));
    } else if (cls.inv_c_integrable) {
      trend_check(checks::kLlt, llt, Trend::decreasing, true);
    } else if (cls.cbar_integrable) {
      trend_check(checks::kLlt, llt, Trend::increasing, true);
    }
    add(std::move(llt));

    auto bands = verify_gaussian_bounds(run, env_, sched, t);
    for (const auto& r : bands) {
      if (r.n != n_last) continue;
      if (r.theorem == checks::kGaussianLower && !t.degenerate) {
        const double floor = r.target * (1.0 - cfg_.tol.band_margin);
        check(checks::kGaussianLower, true, r.observed >= floor, r.observed - floor,
              "sqrt(n)||h_n||^2 = " + text::number(r.observed) + " against " + text::number(floor));
      } else if (r.theorem == checks::kGaussianUpper && std::isfinite(r.target)) {
        check(checks::kGaussianUpper, false, r.observed <= r.target, r.target - r.observed,
              "position relative to the upper constant: observed/target = " + text::number(r.observed / r.target) +
                  " (reported only)");
      }
    }
    add(std::move(bands));

    if (cls.inv_c_integrable) {
      auto sup = verify_sup_bound(run, env_, sched);
      if (cls.cbar_integrable) {
        const auto rmax = running_max(observed_series(sup));
        check(checks::kSupBound, true, std::isfinite(rmax.back()), kNaN,
              "running max " + text::number(rmax.back()));
      } else {
        trend_check(checks::kSupBound, sup, Trend::decreasing, true);
      }
      add(std::move(sup));

      for (double delta : cfg_.delta) {
        const std::string suffix = "_delta" + text::number(delta);
        auto reg = regularity_series(run, env_, x0, sched, delta);
        const auto rmax = running_max(observed_series(reg));
        const std::size_t k = std::min<std::size_t>(3, rmax.size());
        const auto tail = std::span<const double>(rmax).last(k);
        const double hi = *std::max_element(tail.begin(), tail.end());
        const double lo = *std::min_element(tail.begin(), tail.end());
        const double variation = hi > 0.0 ? (hi - lo) / hi : 0.0;
        const bool ok = std::isfinite(hi) && variation < cfg_.tol.regularity_variation;
        check(std::string(checks::kRegularity) + suffix, true, ok, cfg_.tol.regularity_variation - variation,
              "C_hat = " + text::number(hi) + ", variation over the last " + std::to_string(k) +
                  " points " + text::number(variation));
        add(std::move(reg));
        if (!cls.cbar_integrable) {
          auto van = regularity_vanishing_series(run, env_, x0, sched, delta);
          trend_check(std::string(checks::kRegularityVanishing) + suffix, van, Trend::decreasing, true);
          add(std::move(van));
        }
      }
    }

    const std::int64_t n_clt = cfg_.clt_n > 0 ? cfg_.clt_n : cfg_.n_max;
    note("clt at n = " + std::to_string(n_clt));
    CltOptions opt;
    opt.window = cfg_.birkhoff_window;
    if (!t.degenerate) {
      auto clt = clt_check(env_, n_clt, CltMode::exact_kernel, opt);
      const double ks = clt.front().observed;
      const bool asserted = deterministic_kind(env_.spec());
      check(checks::kClt, asserted, ks < cfg_.tol.ks, cfg_.tol.ks - ks,
            "KS distance " + text::number(ks) + " at n = " + std::to_string(n_clt) +
                (asserted ? "" : " (quenched finite-n fluctuation, reported only)"));
      add(std::move(clt));
    } else {
      for (double eps : opt.eps) {
        auto series = clt_concentration_series(env_, sched, eps);
        trend_check(std::string(checks::kCltConcentration) + "_eps" + text::number(eps), series, Trend::decreasing,
                    false);
        add(std::move(series));
      }
    }
  }

  void verify() {
    identities();
    limit_theorems();
  }

  void finish() {
    write_text(file("report.csv"), report_csv(report_.records));
    for (const auto& [stem, recs] : group_series(report_.records)) {
      write_text(file(stem + ".svg"), series_svg(stem + " / " + report_.env_id, recs));
    }
    write_text(file("report.json"), report_json(report_));
    for (const auto& c : report_.summary) {
      note(std::string(c.pass ? "pass " : "FAIL ") + (c.asserted ? "" : "(reported) ") + c.id + ": " + c.detail);
    }
  }

  const RunConfig& cfg_;
  const RunOptions& opt_;
  Environment env_;
  Report report_;
};

}  // namespace

Report run_report(const RunConfig& config, const RunOptions& options) {
  validate(config);
  return Runner(config, options).execute();
}

int run(const RunConfig& config, const RunOptions& options) {
  return run_report(config, options).pass() ? 0 : 1;
}

}  // namespace cwlab
