#include "cwlab/limits.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cwlab/walker.hpp"

namespace cwlab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_iid(const EnvSpec& spec) {
  return std::holds_alternative<LognormalKind>(spec.kind) ||
         std::holds_alternative<ParetoKind>(spec.kind) || std::holds_alternative<PowerKind>(spec.kind);
}

void require_even(std::int64_t x0) {
  if (x0 % 2 != 0) {
    throw std::invalid_argument("x0 = " + std::to_string(x0) + " must be even (h_2n lives on 2Z)");
  }
}

void require_inv_c_integrable(const Environment& env, const char* what) {
  if (!integrability_class(env.spec()).inv_c_integrable) {
    throw std::domain_error(std::string(what) + " requires 1/c integrable; " + env.id() + " is not");
  }
}

std::int64_t max_of(std::span<const std::int64_t> schedule) {
  if (schedule.empty()) throw std::invalid_argument("empty schedule");
  std::int64_t m = 0;
  for (auto n : schedule) {
    if (n < 1) throw std::invalid_argument("schedule entries must be >= 1");
    m = std::max(m, n);
  }
  return m;
}

}  // namespace

VerificationRecord make_record(std::string theorem, std::string env_id, std::int64_t n,
                               double observed, double target, RecordMeta meta) {
  const double gap = std::isfinite(target) ? observed - target : kNaN;
  return {std::move(theorem), std::move(env_id), n, observed, target, gap, meta};
}

double LimitTargets::ratio_root() const {
  if (std::isinf(mean_inv_c) && std::isinf(mean_cbar)) return kNaN;
  return std::sqrt(mean_inv_c / mean_cbar);
}

LimitTargets targets(const Environment& env, std::int64_t x0, std::int64_t L) {
  if (L < 1) throw std::invalid_argument("targets: window L must be >= 1");
  LimitTargets t;
  t.x0 = x0;
  t.integrability = integrability_class(env.spec());
  t.degenerate = t.integrability.degenerate();
  const EnvMeans closed = analytic_means(env.spec());
  if (is_iid(env.spec())) {
    t.source = "birkhoff";
    t.window = L;
    t.mean_cbar = t.integrability.cbar_integrable ? birkhoff_mean(env, Observable::cbar, L) : kInf;
    t.mean_inv_c = t.integrability.inv_c_integrable ? birkhoff_mean(env, Observable::inv_c, L) : kInf;
  } else {
    t.source = "closed_form";
    t.mean_cbar = closed.cbar;
    t.mean_inv_c = closed.inv_c;
  }
  t.sigma2 = t.degenerate ? 0.0 : 2.0 / (t.mean_cbar * t.mean_inv_c);
  const auto& cls = t.integrability;
  if (!t.degenerate) {
    t.llt_constant = env.cbar(x0) / std::sqrt(std::numbers::pi) * t.ratio_root();
  } else if (cls.inv_c_integrable) {
    t.llt_constant = 0.0;
  } else if (cls.cbar_integrable) {
    t.llt_constant = kInf;
  } else {
    t.llt_constant = kNaN;
  }
  return t;
}

std::vector<std::int64_t> dyadic_schedule(int jmin, int jmax) {
  if (jmin < 0 || jmax < jmin || jmax > 40) throw std::invalid_argument("dyadic_schedule: bad range");
  std::vector<std::int64_t> out;
  for (int j = jmin; j <= jmax; ++j) out.push_back(std::int64_t{1} << j);
  return out;
}

TrendCheck check_trend(std::span<const double> series, Trend direction, double factor, std::size_t tail) {
  TrendCheck tc;
  if (series.size() < 2) return tc;
  const std::size_t start = series.size() > tail ? series.size() - tail : 0;
  tc.monotone_tail = true;
  for (std::size_t i = start + 1; i < series.size(); ++i) {
    const bool ok = direction == Trend::increasing ? series[i] > series[i - 1] : series[i] < series[i - 1];
    tc.monotone_tail = tc.monotone_tail && ok;
  }
  tc.factor = series.back() / series.front();
  bool ratio_ok = true;
  if (factor > 1.0) {
    ratio_ok = direction == Trend::increasing ? tc.factor >= factor : tc.factor <= 1.0 / factor;
  }
  tc.pass = tc.monotone_tail && ratio_ok;
  return tc;
}

std::vector<double> observed_series(std::span<const VerificationRecord> records) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.observed);
  return out;
}

KernelRun schedule_run(const Environment& env, std::span<const std::int64_t> schedule,
                       const KernelLimits& limits) {
  const std::int64_t n_max = max_of(schedule);
  std::vector<std::int64_t> times;
  times.reserve(schedule.size());
  for (auto n : schedule) times.push_back(2 * n);
  return run_to<double>(env, 0, 2 * n_max, times, limits);
}

std::vector<VerificationRecord> verify_llt(const KernelRun& run, const Environment& env, std::int64_t x0,
                                           std::span<const std::int64_t> schedule,
                                           const LimitTargets& t) {
  require_even(x0);
  const double target = std::isinf(t.llt_constant) ? kNaN : t.llt_constant;
  std::vector<VerificationRecord> out;
  for (auto n : schedule) {
    const auto& h = run.snapshot(2 * n);
    const double observed = std::sqrt(2.0 * static_cast<double>(n)) * occupation(h, run.window, x0);
    out.push_back(make_record(checks::kLlt, env.id(), n, observed, target, {x0, kNaN, t.window}));
  }
  return out;
}

std::vector<VerificationRecord> verify_llt(const Environment& env, std::int64_t x0,
                                           std::span<const std::int64_t> schedule) {
  return verify_llt(schedule_run(env, schedule), env, x0, schedule, targets(env, x0));
}

std::vector<VerificationRecord> verify_sup_bound(const KernelRun& run, const Environment& env,
                                                 std::span<const std::int64_t> schedule) {
  require_inv_c_integrable(env, "sup_bound");
  const double target = integrability_class(env.spec()).cbar_integrable ? kNaN : 0.0;
  std::vector<VerificationRecord> out;
  for (auto n : schedule) {
    const auto& h = run.snapshot(2 * n);
    const double r = std::sqrt(2.0 * static_cast<double>(n));
    double best = 0.0;
    for (std::int64_t x = 0; static_cast<double>(x) < r; x += 2) {
      best = std::max({best, h.at(x), h.at(-x)});
    }
    out.push_back(make_record(checks::kSupBound, env.id(), n, r * best, target));
  }
  return out;
}

std::vector<VerificationRecord> verify_sup_bound(const Environment& env,
                                                 std::span<const std::int64_t> schedule) {
  return verify_sup_bound(schedule_run(env, schedule), env, schedule);
}

std::vector<VerificationRecord> verify_gaussian_bounds(const KernelRun& run, const Environment& env,
                                                       std::span<const std::int64_t> schedule,
                                                       const LimitTargets& t) {
  const auto& cls = t.integrability;
  const double ratio = t.ratio_root();
  const double lower = cls.cbar_integrable && std::isfinite(ratio) ? ratio / 13.0 : kNaN;
  const double upper = cls.inv_c_integrable && std::isfinite(ratio) ? ratio / 3.0 : kNaN;
  std::vector<VerificationRecord> out;
  const RecordMeta meta{0, kNaN, t.window};
  for (auto n : schedule) {
    const auto& e = run.energies.energies;
    if (static_cast<std::size_t>(n) >= e.size()) throw std::out_of_range("gaussian bounds: energy missing");
    const double observed = std::sqrt(static_cast<double>(n)) * e[static_cast<std::size_t>(n)];
    if (cls.cbar_integrable) out.push_back(make_record(checks::kGaussianLower, env.id(), n, observed, lower, meta));
    if (cls.inv_c_integrable) out.push_back(make_record(checks::kGaussianUpper, env.id(), n, observed, upper, meta));
  }
  return out;
}

std::vector<VerificationRecord> verify_gaussian_bounds(const Environment& env,
                                                       std::span<const std::int64_t> schedule) {
  return verify_gaussian_bounds(schedule_run(env, schedule), env, schedule, targets(env, 0));
}

double regularity_modulus(const KernelState& h2n, std::int64_t x0, std::int64_t n, double delta) {
  require_even(x0);
  if (!(delta > 0.0)) throw std::invalid_argument("regularity_modulus: delta must be positive");
  const double r = delta * std::sqrt(2.0 * static_cast<double>(n));
  const double center = h2n.at(x0);
  double worst = 0.0;
  for (std::int64_t d = 2; static_cast<double>(d) < r; d += 2) {
    worst = std::max({worst, std::abs(h2n.at(x0 + d) - center), std::abs(h2n.at(x0 - d) - center)});
  }
  return worst;
}

double regularity_modulus(const Environment& env, std::int64_t x0, std::int64_t n, double delta) {
  require_inv_c_integrable(env, "regularity_modulus");
  const auto run = run_to<double>(env, 0, 2 * n, {2 * n});
  return regularity_modulus(run.snapshot(2 * n), x0, n, delta);
}

std::vector<VerificationRecord> regularity_series(const KernelRun& run, const Environment& env,
                                                  std::int64_t x0, std::span<const std::int64_t> schedule,
                                                  double delta) {
  require_inv_c_integrable(env, "regularity");
  std::vector<VerificationRecord> out;
  for (auto n : schedule) {
    const double m = regularity_modulus(run.snapshot(2 * n), x0, n, delta);
    const double observed = m * std::sqrt(static_cast<double>(n)) / std::sqrt(delta);
    out.push_back(make_record(checks::kRegularity, env.id(), n, observed, kNaN, {x0, delta, 0}));
  }
  return out;
}

std::vector<VerificationRecord> regularity_vanishing_series(const KernelRun& run, const Environment& env,
                                                            std::int64_t x0,
                                                            std::span<const std::int64_t> schedule,
                                                            double delta) {
  require_inv_c_integrable(env, "regularity");
  const double target = integrability_class(env.spec()).cbar_integrable ? kNaN : 0.0;
  std::vector<VerificationRecord> out;
  for (auto n : schedule) {
    const double m = regularity_modulus(run.snapshot(2 * n), x0, n, delta);
    const double observed = std::sqrt(2.0 * static_cast<double>(n)) * m;
    out.push_back(make_record(checks::kRegularityVanishing, env.id(), n, observed, target, {x0, delta, 0}));
  }
  return out;
}

std::vector<double> running_max(std::span<const double> series) {
  std::vector<double> out;
  out.reserve(series.size());
  double m = -kInf;
  for (double v : series) {
    m = std::max(m, v);
    out.push_back(m);
  }
  return out;
}

std::vector<VerificationRecord> clt_check(const Environment& env, std::int64_t n, CltMode mode,
                                          const CltOptions& options) {
  if (n < 1) throw std::invalid_argument("clt_check: n must be >= 1");
  std::vector<SiteMass> law;
  if (mode == CltMode::exact_kernel) {
    const auto run = run_to<double>(env, 0, n, {n});
    law = kernel_law(run.snapshot(n), run.window);
  } else {
    law = empirical_law(simulate(env, n, options.walkers, options.seed, options.threads));
  }
  const double scale = std::sqrt(static_cast<double>(n));
  std::vector<VerificationRecord> out;
  const auto cls = integrability_class(env.spec());
  if (!cls.degenerate()) {
    const auto t = targets(env, 0, options.window);
    out.push_back(make_record(checks::kClt, env.id(), n, ks_distance(law, scale, t.sigma2), 0.0,
                              {0, kNaN, t.window}));
  } else {
    for (double eps : options.eps) {
      out.push_back(make_record(checks::kCltConcentration, env.id(), n, tail_mass(law, scale, eps), 0.0,
                                {0, eps, 0}));
    }
  }
  return out;
}

std::vector<VerificationRecord> clt_concentration_series(const Environment& env,
                                                         std::span<const std::int64_t> schedule,
                                                         double eps) {
  const std::int64_t n_max = max_of(schedule);
  const auto run = run_to<double>(env, 0, n_max, schedule);
  std::vector<VerificationRecord> out;
  for (auto n : schedule) {
    const auto law = kernel_law(run.snapshot(n), run.window);
    const double observed = tail_mass(law, std::sqrt(static_cast<double>(n)), eps);
    out.push_back(make_record(checks::kCltConcentration, env.id(), n, observed, 0.0, {0, eps, 0}));
  }
  return out;
}

IdentityCheck green_identity_check(const Environment& env, std::int64_t x0, std::int64_t n_max) {
  if (n_max < 0) throw std::invalid_argument("green_identity_check: n_max must be >= 0");
  using Wide = long double;
  const BasicEnvWindow<Wide> window(env, x0 - n_max - 2, x0 + n_max + 2);
  auto h = init_kernel<Wide>(window, x0);
  IdentityCheck out{n_max, 0, 0.0};
  Wide e = energy(h, window);
  for (std::int64_t n = 0; n <= n_max; ++n) {
    const Wide form = dirichlet(h, window);
    advance(h, window);
    const Wide next = energy(h, window);
    const auto rel = static_cast<double>(std::fabs(form - (e - next)) / form);
    if (rel > out.max_rel_error) out = {n_max, n, rel};
    e = next;
  }
  return out;
}

IdentityCheck energy_duality_check(const Environment& env, std::int64_t x0, std::int64_t n_max) {
  if (n_max < 0) throw std::invalid_argument("energy_duality_check: n_max must be >= 0");
  using Wide = long double;
  const BasicEnvWindow<Wide> window(env, x0 - 2 * n_max - 1, x0 + 2 * n_max + 1);
  auto h = init_kernel<Wide>(window, x0);
  std::vector<Wide> energies;
  energies.reserve(static_cast<std::size_t>(n_max) + 1);
  IdentityCheck out{n_max, 0, 0.0};
  for (std::int64_t t = 0; t <= 2 * n_max; ++t) {
    if (t <= n_max) energies.push_back(energy(h, window));
    if (t % 2 == 0) {
      const Wide back = h.at(x0);
      const auto rel = static_cast<double>(std::fabs(energies[static_cast<std::size_t>(t / 2)] - back) / back);
      if (rel > out.max_rel_error) out = {n_max, t / 2, rel};
    }
    if (t < 2 * n_max) advance(h, window);
  }
  return out;
}

IdentityCheck mass_check(const KernelRun& run) {
  IdentityCheck out;
  for (const auto& s : run.snapshots) {
    out.n_max = std::max(out.n_max, s.time);
    const double err = std::abs(mass(s, run.window) - 1.0);
    if (err > out.max_rel_error) {
      out.max_rel_error = err;
      out.worst_n = s.time;
    }
  }
  return out;
}

}  // namespace cwlab
