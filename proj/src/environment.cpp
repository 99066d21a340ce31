#include "cwlab/environment.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <queue>
#include <shared_mutex>

#include "cwlab/counter_rng.hpp"
#include "cwlab/text.hpp"

namespace cwlab {
namespace {

constexpr double kMinConductance = 1e-300;
constexpr double kMaxConductance = 1e300;
// log10 of the extreme uniform draw 2^-53.
constexpr double kLog10MinUniform = -53.0 * 0.30102999566398120;
// Largest |z| a Box-Muller pair built from open_unit() can produce.
constexpr double kMaxNormal = 8.66;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_conductance(const std::string& key, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw EnvSpecError(key, "must be a positive finite number, got " + text::number(v));
  }
  if (v < kMinConductance || v > kMaxConductance) {
    throw EnvSpecError(key, "outside the supported range [1e-300, 1e300]");
  }
}

void require_positive(const std::string& key, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw EnvSpecError(key, "must be a positive finite number, got " + text::number(v));
  }
}

bool irreducible(const std::vector<std::vector<double>>& p) {
  const std::size_t k = p.size();
  for (std::size_t start = 0; start < k; ++start) {
    std::vector<bool> seen(k, false);
    std::queue<std::size_t> todo;
    todo.push(start);
    seen[start] = true;
    std::size_t count = 1;
    while (!todo.empty()) {
      const std::size_t i = todo.front();
      todo.pop();
      for (std::size_t j = 0; j < k; ++j) {
        if (p[i][j] > 0.0 && !seen[j]) {
          seen[j] = true;
          ++count;
          todo.push(j);
        }
      }
    }
    if (count != k) return false;
  }
  return true;
}

std::size_t sample_row(const std::vector<double>& row, double u) {
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < row.size(); ++j) {
    acc += row[j];
    if (u < acc) return j;
  }
  return row.size() - 1;
}

std::string join(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ' ';
    out += text::number(xs[i]);
  }
  return out;
}

}  // namespace

void validate(const EnvSpec& spec) {
  std::visit(
      Overloaded{
          [](const ConstantKind& k) { require_conductance("kappa", k.kappa); },
          [](const PeriodicKind& k) {
            if (k.cycle.empty()) throw EnvSpecError("cycle", "must not be empty");
            for (double v : k.cycle) require_conductance("cycle", v);
          },
          [](const LognormalKind& k) {
            if (!std::isfinite(k.m)) throw EnvSpecError("m", "must be finite");
            require_positive("s", k.s);
            const double lo = k.m - kMaxNormal * k.s;
            const double hi = k.m + kMaxNormal * k.s;
            if (lo < std::log(kMinConductance) || hi > std::log(kMaxConductance)) {
              throw EnvSpecError("s", "parameters produce conductances outside [1e-300, 1e300]");
            }
          },
          [](const ParetoKind& k) {
            require_positive("alpha", k.alpha);
            require_conductance("xm", k.xm);
            if (std::log10(k.xm) - kLog10MinUniform / k.alpha > 300.0) {
              throw EnvSpecError("alpha", "tail too heavy: conductances would exceed 1e300");
            }
          },
          [](const PowerKind& k) {
            require_positive("beta", k.beta);
            if (kLog10MinUniform / k.beta < -300.0) {
              throw EnvSpecError("beta", "too small: conductances would fall below 1e-300");
            }
          },
          [](const MarkovKind& k) {
            if (k.states.empty()) throw EnvSpecError("states", "must not be empty");
            for (double v : k.states) require_conductance("states", v);
            if (k.transition.size() != k.states.size()) {
              throw EnvSpecError("transition", "must be a square matrix matching states");
            }
            for (const auto& row : k.transition) {
              if (row.size() != k.states.size()) {
                throw EnvSpecError("transition", "must be a square matrix matching states");
              }
              double sum = 0.0;
              for (double v : row) {
                if (!(v >= 0.0) || !std::isfinite(v)) {
                  throw EnvSpecError("transition", "entries must be nonnegative");
                }
                sum += v;
              }
              if (std::abs(sum - 1.0) > 1e-12) {
                throw EnvSpecError("transition", "rows must sum to 1, got " + text::number(sum));
              }
            }
            if (!irreducible(k.transition)) {
              throw EnvSpecError("transition", "chain must be irreducible");
            }
          },
      },
      spec.kind);
}

std::string kind_name(const EnvSpec& spec) {
  return std::visit(Overloaded{
                        [](const ConstantKind&) { return std::string("constant"); },
                        [](const PeriodicKind&) { return std::string("periodic"); },
                        [](const LognormalKind&) { return std::string("iid_lognormal"); },
                        [](const ParetoKind&) { return std::string("iid_pareto"); },
                        [](const PowerKind&) { return std::string("iid_power"); },
                        [](const MarkovKind&) { return std::string("markov"); },
                    },
                    spec.kind);
}

std::string describe(const EnvSpec& spec) {
  using text::number;
  const std::string params = std::visit(
      Overloaded{
          [](const ConstantKind& k) { return "kappa=" + number(k.kappa); },
          [](const PeriodicKind& k) {
            return "cycle=" + join(k.cycle) + ",phase=" + number(k.phase);
          },
          [](const LognormalKind& k) { return "m=" + number(k.m) + ",s=" + number(k.s); },
          [](const ParetoKind& k) {
            return "alpha=" + number(k.alpha) + ",xm=" + number(k.xm);
          },
          [](const PowerKind& k) { return "beta=" + number(k.beta); },
          [](const MarkovKind& k) {
            std::string rows;
            for (std::size_t i = 0; i < k.transition.size(); ++i) {
              if (i) rows += ';';
              rows += join(k.transition[i]);
            }
            return "states=" + join(k.states) + ",transition=" + rows;
          },
      },
      spec.kind);
  return kind_name(spec) + "(" + params + ")/seed=" + std::to_string(spec.seed);
}

IntegrabilityClass integrability_class(const EnvSpec& spec) {
  return std::visit(Overloaded{
                        [](const ParetoKind& k) { return IntegrabilityClass{k.alpha > 1.0, true}; },
                        [](const PowerKind& k) { return IntegrabilityClass{true, k.beta > 1.0}; },
                        [](const auto&) { return IntegrabilityClass{true, true}; },
                    },
                    spec.kind);
}

EnvMeans analytic_means(const EnvSpec& spec) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return std::visit(
      Overloaded{
          [](const ConstantKind& k) { return EnvMeans{2.0 * k.kappa, 1.0 / k.kappa}; },
          [](const PeriodicKind& k) {
            long double c = 0, r = 0;
            for (double v : k.cycle) {
              c += v;
              r += 1.0L / v;
            }
            const auto n = static_cast<long double>(k.cycle.size());
            return EnvMeans{static_cast<double>(2 * c / n), static_cast<double>(r / n)};
          },
          [](const LognormalKind& k) {
            const double half_var = 0.5 * k.s * k.s;
            return EnvMeans{2.0 * std::exp(k.m + half_var), std::exp(-k.m + half_var)};
          },
          [](const ParetoKind& k) {
            const double mean = k.alpha > 1.0 ? k.alpha * k.xm / (k.alpha - 1.0) : inf;
            return EnvMeans{2.0 * mean, k.alpha / ((k.alpha + 1.0) * k.xm)};
          },
          [](const PowerKind& k) {
            const double inv = k.beta > 1.0 ? k.beta / (k.beta - 1.0) : inf;
            return EnvMeans{2.0 * k.beta / (k.beta + 1.0), inv};
          },
          [](const MarkovKind& k) {
            const auto pi = stationary_distribution(k.transition);
            double c = 0, r = 0;
            for (std::size_t i = 0; i < pi.size(); ++i) {
              c += pi[i] * k.states[i];
              r += pi[i] / k.states[i];
            }
            return EnvMeans{2.0 * c, r};
          },
      },
      spec.kind);
}

std::vector<double> stationary_distribution(const std::vector<std::vector<double>>& transition) {
  const auto k = static_cast<Eigen::Index>(transition.size());
  Eigen::MatrixXd a(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      a(i, j) = transition[j][i] - (i == j ? 1.0 : 0.0);
    }
  }
  a.row(k - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
  rhs(k - 1) = 1.0;
  const Eigen::VectorXd pi = a.fullPivLu().solve(rhs);
  return {pi.data(), pi.data() + k};
}

// Markov realizations are inherently sequential: the state at edge x+1 (or
// x-1) depends on the state at x. States are materialized outward from 0 and
// memoized; each extension step uses the counter-based uniform of its edge so
// the result does not depend on query order.
struct Environment::MarkovMemo {
  MarkovKind kind;
  std::uint64_t seed = 0;
  std::vector<double> pi;
  std::vector<std::vector<double>> reversed;
  mutable std::shared_mutex mutex;
  mutable std::vector<std::uint8_t> right;  // states of edges 0, 1, 2, ...
  mutable std::vector<std::uint8_t> left;   // states of edges -1, -2, ...

  MarkovMemo(MarkovKind k, std::uint64_t s) : kind(std::move(k)), seed(s) {
    pi = stationary_distribution(kind.transition);
    const std::size_t n = pi.size();
    reversed.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        reversed[i][j] = pi[j] * kind.transition[j][i] / pi[i];
      }
    }
    right.push_back(static_cast<std::uint8_t>(sample_row(pi, rng::edge_uniform(seed, 0))));
  }

  void extend_locked(std::int64_t x) const {
    if (x >= 0) {
      while (static_cast<std::int64_t>(right.size()) <= x) {
        const auto next = static_cast<std::int64_t>(right.size());
        right.push_back(static_cast<std::uint8_t>(
            sample_row(kind.transition[right.back()], rng::edge_uniform(seed, next))));
      }
    } else {
      const std::int64_t need = -x;  // left[i] is edge -(i+1)
      while (static_cast<std::int64_t>(left.size()) < need) {
        const std::uint8_t from = left.empty() ? right.front() : left.back();
        const auto edge = -static_cast<std::int64_t>(left.size()) - 1;
        left.push_back(
            static_cast<std::uint8_t>(sample_row(reversed[from], rng::edge_uniform(seed, edge))));
      }
    }
  }

  std::uint8_t state_locked(std::int64_t x) const {
    return x >= 0 ? right[static_cast<std::size_t>(x)] : left[static_cast<std::size_t>(-x - 1)];
  }

  bool has(std::int64_t x) const {
    return x >= 0 ? static_cast<std::int64_t>(right.size()) > x
                  : static_cast<std::int64_t>(left.size()) >= -x;
  }

  void fill(std::int64_t first, std::size_t count, double* out) const {
    const std::int64_t last = first + static_cast<std::int64_t>(count) - 1;
    {
      std::shared_lock lock(mutex);
      if (has(first) && has(last)) {
        for (std::size_t i = 0; i < count; ++i) {
          out[i] = kind.states[state_locked(first + static_cast<std::int64_t>(i))];
        }
        return;
      }
    }
    std::unique_lock lock(mutex);
    extend_locked(first);
    extend_locked(last);
    for (std::size_t i = 0; i < count; ++i) {
      out[i] = kind.states[state_locked(first + static_cast<std::int64_t>(i))];
    }
  }
};

Environment::Environment(EnvSpec spec) : spec_(std::move(spec)) {
  validate(spec_);
  if (const auto* m = std::get_if<MarkovKind>(&spec_.kind)) {
    if (m->states.size() > 255) throw EnvSpecError("states", "at most 255 states supported");
    markov_ = std::make_shared<MarkovMemo>(*m, spec_.seed);
  }
}

Environment build_env(EnvSpec spec) { return Environment(std::move(spec)); }

double Environment::conductance(std::int64_t x) const {
  double c = 0.0;
  if (x > kMaxEdgeIndex || x < -kMaxEdgeIndex) {
    throw std::out_of_range("edge index " + std::to_string(x) + " outside [-2^31, 2^31]");
  }
  if (markov_) {
    markov_->fill(x, 1, &c);
    return c;
  }
  const std::uint64_t seed = spec_.seed;
  return std::visit(
      Overloaded{
          [](const ConstantKind& k) { return k.kappa; },
          [x](const PeriodicKind& k) {
            const auto n = static_cast<std::int64_t>(k.cycle.size());
            std::int64_t i = (x + k.phase) % n;
            if (i < 0) i += n;
            return k.cycle[static_cast<std::size_t>(i)];
          },
          [x, seed](const LognormalKind& k) {
            const double u1 = rng::edge_uniform(seed, x, 0);
            const double u2 = rng::edge_uniform(seed, x, 1);
            const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
            return std::exp(k.m + k.s * z);
          },
          [x, seed](const ParetoKind& k) {
            return k.xm * std::pow(rng::edge_uniform(seed, x), -1.0 / k.alpha);
          },
          [x, seed](const PowerKind& k) {
            return std::pow(rng::edge_uniform(seed, x), 1.0 / k.beta);
          },
          [](const MarkovKind&) { return 0.0; },  // handled above
      },
      spec_.kind);
}

std::vector<double> Environment::conductances(std::int64_t first, std::size_t count) const {
  std::vector<double> out(count);
  if (count == 0) return out;
  const std::int64_t last = first + static_cast<std::int64_t>(count) - 1;
  if (first < -kMaxEdgeIndex || last > kMaxEdgeIndex) {
    throw std::out_of_range("edge window outside [-2^31, 2^31]");
  }
  if (markov_) {
    markov_->fill(first, count, out.data());
    return out;
  }
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = conductance(first + static_cast<std::int64_t>(i));
  }
  return out;
}

double Environment::cbar(std::int64_t x) const { return conductance(x - 1) + conductance(x); }

Transition Environment::transition(std::int64_t x) const {
  const double left = conductance(x - 1);
  const double right = conductance(x);
  const double total = left + right;
  return {left / total, right / total};
}

double birkhoff_mean(const Environment& env, Observable observable, std::int64_t L) {
  if (L < 1) throw std::invalid_argument("birkhoff window L must be >= 1");
  // Edges -L-1 .. L-1 cover cbar(x) for x in [-L, L-1].
  const auto c = env.conductances(-L - 1, static_cast<std::size_t>(2 * L + 1));
  long double sum = 0.0L;
  for (std::size_t i = 1; i < c.size(); ++i) {
    sum += observable == Observable::cbar ? static_cast<long double>(c[i - 1]) + c[i]
                                          : 1.0L / c[i];
  }
  return static_cast<double>(sum / (2.0L * static_cast<long double>(L)));
}

}  // namespace cwlab
