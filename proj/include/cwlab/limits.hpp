#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cwlab/environment.hpp"
#include "cwlab/heat_kernel.hpp"

namespace cwlab {

/// Identifiers used in the `theorem` column of reports.
namespace checks {
inline constexpr const char* kLlt = "llt";                        // sqrt(2n) P0[S_2n = x0]
inline constexpr const char* kSupBound = "sup_bound";             // sqrt(2n) max h_2n on the ball
inline constexpr const char* kGaussianLower = "gaussian_lower";   // sqrt(n) ||h_n||^2 vs ratio/13
inline constexpr const char* kGaussianUpper = "gaussian_upper";   // sqrt(n) ||h_n||^2 vs ratio/3
inline constexpr const char* kRegularity = "regularity";          // modulus sqrt(n)/sqrt(delta)
inline constexpr const char* kRegularityVanishing = "regularity_vanishing";  // sqrt(2n) modulus
inline constexpr const char* kClt = "clt";                        // KS distance to N(0, sigma^2)
inline constexpr const char* kCltConcentration = "clt_concentration";  // P[|S_n/sqrt n| > eps]
inline constexpr const char* kGreenIdentity = "green_identity";
inline constexpr const char* kEnergyDuality = "energy_duality";
inline constexpr const char* kCompleteMonotonicity = "complete_monotonicity";
inline constexpr const char* kCmAgreement = "cm_agreement";  // finite differences vs direct evaluation
inline constexpr const char* kNash = "nash_decay";
inline constexpr const char* kMassConservation = "mass_conservation";
inline constexpr const char* kEscape = "escape";
inline constexpr const char* kWalkerAgreement = "walker_agreement";
}  // namespace checks

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct RecordMeta {
  std::int64_t x0 = 0;
  double delta = kNaN;
  std::int64_t window = 0;  // Birkhoff window behind the target, 0 for closed forms
};

struct VerificationRecord {
  std::string theorem;
  std::string env_id;
  std::int64_t n = 0;
  double observed = 0.0;
  double target = kNaN;  // NaN when only divergence or boundedness is claimed
  double gap = kNaN;     // observed - target when target is finite
  RecordMeta meta;
};

VerificationRecord make_record(std::string theorem, std::string env_id, std::int64_t n,
                               double observed, double target, RecordMeta meta = {});

inline constexpr std::int64_t kDefaultBirkhoffWindow = 1'000'000;

struct LimitTargets {
  double mean_cbar = 0.0;
  double mean_inv_c = 0.0;
  double sigma2 = 0.0;        // 2 / (mean_cbar * mean_inv_c), 0 when a mean diverges
  double llt_constant = 0.0;  // cbar(x0)/sqrt(pi) * sqrt(mean_inv_c / mean_cbar); 0, +inf or NaN when degenerate
  bool degenerate = false;
  IntegrabilityClass integrability;
  std::int64_t x0 = 0;
  std::int64_t window = 0;  // 0 when closed forms were used
  std::string source;       // "closed_form" or "birkhoff"

  /// sqrt(mean_inv_c / mean_cbar); 0 or +inf in the degenerate branches.
  double ratio_root() const;
};

/// Closed forms for constant, periodic and markov kinds; Birkhoff window
/// averages of length 2L for the i.i.d. kinds. Divergent means are +inf.
LimitTargets targets(const Environment& env, std::int64_t x0, std::int64_t L = kDefaultBirkhoffWindow);

/// n = 2^j for j = jmin..jmax.
std::vector<std::int64_t> dyadic_schedule(int jmin, int jmax);

enum class Trend { increasing, decreasing };

struct TrendCheck {
  bool monotone_tail = false;  // strictly monotone over the last `tail` points
  double factor = kNaN;        // last / first
  bool pass = false;
};

/// Monotone in `direction` over the last `tail` points, and last/first >=
/// `factor` (increasing) or <= 1/`factor` (decreasing). factor <= 1 disables
/// the ratio requirement.
TrendCheck check_trend(std::span<const double> series, Trend direction, double factor = 2.0,
                       std::size_t tail = 4);

std::vector<double> observed_series(std::span<const VerificationRecord> records);

/// Kernel based at 0 evolved to time 2 max(schedule), with a snapshot at
/// every 2n. Shared by the kernel-based verifiers below.
KernelRun schedule_run(const Environment& env, std::span<const std::int64_t> schedule,
                       const KernelLimits& limits = {});

/// observed = sqrt(2n) P0[S_2n = x0]; target = llt_constant (0 in the
/// vanishing branch, NaN when divergent or undetermined). x0 must be even.
std::vector<VerificationRecord> verify_llt(const KernelRun& run, const Environment& env,
                                           std::int64_t x0, std::span<const std::int64_t> schedule,
                                           const LimitTargets& targets);
std::vector<VerificationRecord> verify_llt(const Environment& env, std::int64_t x0,
                                           std::span<const std::int64_t> schedule);

/// observed = sqrt(2n) max over B(0, sqrt(2n)) cap 2Z of h_2n(x). Requires
/// 1/c integrable; target 0 when cbar is not integrable, NaN otherwise.
std::vector<VerificationRecord> verify_sup_bound(const KernelRun& run, const Environment& env,
                                                 std::span<const std::int64_t> schedule);
std::vector<VerificationRecord> verify_sup_bound(const Environment& env,
                                                 std::span<const std::int64_t> schedule);

/// observed = sqrt(n) ||h_n||^2 against ratio/13 (when cbar is integrable)
/// and ratio/3 (when 1/c is integrable).
std::vector<VerificationRecord> verify_gaussian_bounds(const KernelRun& run, const Environment& env,
                                                       std::span<const std::int64_t> schedule,
                                                       const LimitTargets& targets);
std::vector<VerificationRecord> verify_gaussian_bounds(const Environment& env,
                                                       std::span<const std::int64_t> schedule);

/// max |h_2n(x) - h_2n(x0)| over x in B(x0, delta sqrt(2n)) cap 2Z, where
/// `h2n` is the kernel based at 0 at time 2n.
double regularity_modulus(const KernelState& h2n, std::int64_t x0, std::int64_t n, double delta);
double regularity_modulus(const Environment& env, std::int64_t x0, std::int64_t n, double delta);

/// observed = modulus sqrt(n) / sqrt(delta), the per-n estimate of the
/// regularity constant. Requires 1/c integrable.
std::vector<VerificationRecord> regularity_series(const KernelRun& run, const Environment& env,
                                                  std::int64_t x0, std::span<const std::int64_t> schedule,
                                                  double delta);

/// observed = sqrt(2n) modulus at the given delta (target 0 when cbar is not integrable).
std::vector<VerificationRecord> regularity_vanishing_series(const KernelRun& run, const Environment& env,
                                                            std::int64_t x0,
                                                            std::span<const std::int64_t> schedule,
                                                            double delta = 1.0);

/// Running maximum of the per-n constant estimates, aligned with `records`.
std::vector<double> running_max(std::span<const double> series);

enum class CltMode { exact_kernel, monte_carlo };

struct CltOptions {
  std::int64_t walkers = 1'000'000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::int64_t window = kDefaultBirkhoffWindow;
  std::vector<double> eps = {0.1, 0.5, 1.0};
};

/// Non-degenerate class: one "clt" record with the KS distance of S_n/sqrt(n)
/// to N(0, sigma^2). Degenerate class: one "clt_concentration" record per eps
/// holding P[|S_n/sqrt(n)| > eps].
std::vector<VerificationRecord> clt_check(const Environment& env, std::int64_t n, CltMode mode,
                                          const CltOptions& options = {});

/// Worst relative defect of an exact identity over n = 0..n_max.
struct IdentityCheck {
  std::int64_t n_max = 0;
  std::int64_t worst_n = 0;
  double max_rel_error = 0.0;
};

/// E(h_n, h_n) against ||h_n||^2 - ||h_n+1||^2, evolved in long double on a
/// long double window.
IdentityCheck green_identity_check(const Environment& env, std::int64_t x0, std::int64_t n_max);

/// ||h_n||^2 against h_2n(x0), in long double.
IdentityCheck energy_duality_check(const Environment& env, std::int64_t x0, std::int64_t n_max);

/// |sum_x h_n(x) cbar(x) - 1| over the snapshots of `run`.
IdentityCheck mass_check(const KernelRun& run);

/// P[|S_n/sqrt(n)| > eps] from the exact kernel at every scheduled n.
std::vector<VerificationRecord> clt_concentration_series(const Environment& env,
                                                         std::span<const std::int64_t> schedule,
                                                         double eps);

}  // namespace cwlab
