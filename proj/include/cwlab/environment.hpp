#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace cwlab {

/// Rejection of an environment description. `key()` names the offending
/// parameter (e.g. "kappa", "transition") so config front ends can prefix it.
class EnvSpecError : public std::invalid_argument {
 public:
  EnvSpecError(std::string key, const std::string& what)
      : std::invalid_argument(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

struct ConstantKind {
  double kappa = 1.0;
};

/// c(x,x+1) = cycle[(x + phase) mod |cycle|].
struct PeriodicKind {
  std::vector<double> cycle;
  std::int64_t phase = 0;
};

/// log c ~ Normal(m, s^2), i.i.d. over edges.
struct LognormalKind {
  double m = 0.0;
  double s = 1.0;
};

/// c = xm * U^(-1/alpha), i.e. P[c > t] = (xm/t)^alpha.
struct ParetoKind {
  double alpha = 1.0;
  double xm = 1.0;
};

/// c = U^(1/beta), so c lies in (0, 1) with density beta * t^(beta-1).
struct PowerKind {
  double beta = 1.0;
};

/// Stationary finite-state Markov chain along the edges; the state at edge 0
/// is drawn from the stationary law, the right half runs the chain forward
/// and the left half runs its time reversal.
struct MarkovKind {
  std::vector<double> states;
  std::vector<std::vector<double>> transition;
};

using EnvKind = std::variant<ConstantKind, PeriodicKind, LognormalKind, ParetoKind,
                             PowerKind, MarkovKind>;

struct EnvSpec {
  EnvKind kind = ConstantKind{};
  std::uint64_t seed = 0;
};

/// Throws EnvSpecError when a parameter is non-positive, would produce
/// conductances outside [1e-300, 1e300], or (markov) the matrix is not an
/// irreducible stochastic matrix.
void validate(const EnvSpec& spec);

std::string kind_name(const EnvSpec& spec);

/// Human-readable identifier including parameters and seed.
std::string describe(const EnvSpec& spec);

struct IntegrabilityClass {
  bool cbar_integrable = true;
  bool inv_c_integrable = true;

  bool degenerate() const noexcept { return !(cbar_integrable && inv_c_integrable); }
  bool operator==(const IntegrabilityClass&) const = default;
};

IntegrabilityClass integrability_class(const EnvSpec& spec);

/// Closed-form values of the two spatial means, +inf where they diverge.
struct EnvMeans {
  double cbar = 0.0;
  double inv_c = 0.0;
};

EnvMeans analytic_means(const EnvSpec& spec);

struct Transition {
  double left = 0.5;
  double right = 0.5;
};

enum class Observable { cbar, inv_c };

inline constexpr std::int64_t kMaxEdgeIndex = std::int64_t{1} << 31;

/// A realized conductance sequence (c(x,x+1))_x on the edges of Z.
///
/// Immutable after construction apart from the markov memo, which is filled
/// lazily under a lock. Any (spec, x) pair always yields the same value, so
/// the object can be shared freely between threads.
class Environment {
 public:
  explicit Environment(EnvSpec spec);

  const EnvSpec& spec() const noexcept { return spec_; }
  std::string id() const { return describe(spec_); }

  /// c(x, x+1); throws std::out_of_range when |x| > 2^31.
  double conductance(std::int64_t x) const;
  double cbar(std::int64_t x) const;
  Transition transition(std::int64_t x) const;

  /// c(x,x+1) for x in [first, first + count).
  std::vector<double> conductances(std::int64_t first, std::size_t count) const;

 private:
  struct MarkovMemo;

  EnvSpec spec_;
  std::shared_ptr<MarkovMemo> markov_;
};

Environment build_env(EnvSpec spec);

/// Window average over edges/sites x in [-L, L-1].
double birkhoff_mean(const Environment& env, Observable observable, std::int64_t L);

/// Stationary law of a row-stochastic irreducible matrix.
std::vector<double> stationary_distribution(const std::vector<std::vector<double>>& transition);

}  // namespace cwlab
