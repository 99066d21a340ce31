#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cwlab/environment.hpp"

namespace cwlab {

/// 50 significant digits. The difference table of order 12 sits ~20 orders
/// of magnitude below the energies it is built from, so neither double nor
/// 80-bit long double leave any correct digits there.
using Extended = boost::multiprecision::cpp_bin_float_50;

/// Conductance data precomputed on the sites [lo, hi], with the edge
/// conductances c(x,x+1) for x in [lo-1, hi]. The derived coefficients are
/// formed in `Scalar`, so a wide window keeps c(x,x+1) = cbar(x) p(x,x+1)
/// to that precision rather than to double rounding.
template <class Scalar>
class BasicEnvWindow {
 public:
  using value_type = Scalar;

  BasicEnvWindow() = default;
  BasicEnvWindow(const Environment& env, std::int64_t lo, std::int64_t hi) : lo_(lo), hi_(hi) {
    if (hi < lo) throw std::invalid_argument("EnvWindow: empty site range");
    const auto sites = static_cast<std::size_t>(hi - lo + 1);
    const auto raw = env.conductances(lo - 1, sites + 1);
    edges_.assign(raw.begin(), raw.end());
    cbar_.resize(sites);
    left_.resize(sites);
    right_.resize(sites);
    series_.resize(sites);
    for (std::size_t i = 0; i < sites; ++i) {
      const Scalar& a = edges_[i];
      const Scalar& b = edges_[i + 1];
      const Scalar total = a + b;
      cbar_[i] = total;
      left_[i] = a / total;
      right_[i] = b / total;
      series_[i] = a * (b / total);
    }
  }

  std::int64_t lo() const noexcept { return lo_; }
  std::int64_t hi() const noexcept { return hi_; }
  bool contains(std::int64_t x) const noexcept { return x >= lo_ && x <= hi_; }

  const Scalar& edge(std::int64_t x) const { return edges_[idx(x) + 1]; }
  const Scalar& cbar(std::int64_t x) const { return cbar_[idx(x)]; }
  const Scalar& p_left(std::int64_t x) const { return left_[idx(x)]; }
  const Scalar& p_right(std::int64_t x) const { return right_[idx(x)]; }
  /// Series conductance c(x-1,x) c(x,x+1) / cbar(x).
  const Scalar& series(std::int64_t x) const { return series_[idx(x)]; }

  /// Raw views over [lo, hi], for hot loops that have range-checked already.
  const Scalar* cbar_data() const noexcept { return cbar_.data(); }
  const Scalar* left_data() const noexcept { return left_.data(); }
  const Scalar* right_data() const noexcept { return right_.data(); }
  void require(std::int64_t lo, std::int64_t hi) const {
    if (lo < lo_ || hi > hi_) {
      throw std::out_of_range("sites [" + std::to_string(lo) + ", " + std::to_string(hi) +
                              "] outside the environment window");
    }
  }

 private:
  std::size_t idx(std::int64_t x) const {
    if (!contains(x)) {
      throw std::out_of_range("site " + std::to_string(x) + " outside the environment window");
    }
    return static_cast<std::size_t>(x - lo_);
  }

  std::int64_t lo_ = 0;
  std::int64_t hi_ = -1;
  std::vector<Scalar> edges_;
  std::vector<Scalar> cbar_;
  std::vector<Scalar> left_;
  std::vector<Scalar> right_;
  std::vector<Scalar> series_;
};

using EnvWindow = BasicEnvWindow<double>;
using ExtendedEnvWindow = BasicEnvWindow<Extended>;

/// h_n = P^n h_0 with h_0 = 1{x0} / cbar(x0).
///
/// Only the live parity class is stored: values[i] = h_n(base - time + 2i),
/// i = 0..time. Every other site carries an implicit 0.
template <class Real>
struct BasicKernelState {
  std::int64_t base = 0;
  std::int64_t time = 0;
  std::vector<Real> values;
  // Indices outside [live_first, live_last] hold exact zeros. Maintained by
  // advance(); a state built by hand may leave live_last at npos.
  std::size_t live_first = 0;
  std::size_t live_last = static_cast<std::size_t>(-1);

  void refresh_live() noexcept {
    if (live_last >= values.size()) {
      live_first = 0;
      live_last = values.empty() ? 0 : values.size() - 1;
    }
  }

  std::int64_t offset() const noexcept { return base - time; }
  std::int64_t last_site() const noexcept { return base + time; }

  bool on_support(std::int64_t x) const noexcept {
    return x >= offset() && x <= last_site() && ((x - offset()) % 2 == 0);
  }

  Real at(std::int64_t x) const {
    return on_support(x) ? values[static_cast<std::size_t>((x - offset()) / 2)] : Real(0);
  }
};

using KernelState = BasicKernelState<double>;
using ExtendedKernelState = BasicKernelState<Extended>;

/// A finitely supported function on the dense range [first, first + size).
template <class Real>
struct LatticeFunction {
  std::int64_t first = 0;
  std::vector<Real> values;

  std::int64_t last() const noexcept { return first + static_cast<std::int64_t>(values.size()) - 1; }
  Real at(std::int64_t x) const {
    return (x >= first && x <= last()) ? values[static_cast<std::size_t>(x - first)] : Real(0);
  }
};

template <class Real>
struct BasicEnergySeq {
  std::string env_id;
  std::int64_t base = 0;
  std::vector<Real> energies;  // energies[m] = ||h_m||^2

  std::size_t size() const noexcept { return energies.size(); }
};

using EnergySeq = BasicEnergySeq<double>;
using ExtendedEnergySeq = BasicEnergySeq<Extended>;

/// delta[k][n] = Delta_n^(k), 0 <= k <= K, 0 <= n <= N - k.
struct DifferenceTable {
  std::int64_t max_order = 0;
  std::int64_t last_time = 0;  // N
  std::vector<std::vector<Extended>> delta;

  const Extended& at(std::int64_t n, std::int64_t k) const {
    return delta.at(static_cast<std::size_t>(k)).at(static_cast<std::size_t>(n));
  }
};

struct MonotonicityViolation {
  std::int64_t n = 0;
  std::int64_t k = 0;
  double value = 0.0;
};

struct MonotonicityReport {
  double tolerance = 0.0;
  double scale = 0.0;  // Delta_0^(0)
  std::vector<MonotonicityViolation> violations;
  bool ok() const noexcept { return violations.empty(); }
};

struct KernelLimits {
  std::int64_t max_time = std::int64_t{1} << 22;
};

template <class Real>
struct BasicKernelRun {
  BasicEnvWindow<Real> window;
  BasicEnergySeq<Real> energies;
  std::vector<BasicKernelState<Real>> snapshots;  // in requested order, deduplicated

  const BasicKernelState<Real>& snapshot(std::int64_t time) const {
    for (const auto& s : snapshots) {
      if (s.time == time) return s;
    }
    throw std::out_of_range("no snapshot at time " + std::to_string(time));
  }
};

using KernelRun = BasicKernelRun<double>;
using ExtendedKernelRun = BasicKernelRun<Extended>;

// ---------------------------------------------------------------------------
// Kernel evolution

template <class Real, class W>
BasicKernelState<Real> init_kernel(const BasicEnvWindow<W>& window, std::int64_t x0) {
  BasicKernelState<Real> s;
  s.base = x0;
  s.time = 0;
  s.values.assign(1, Real(1) / Real(window.cbar(x0)));
  return s;
}

inline KernelState init_kernel(const Environment& env, std::int64_t x0) {
  return init_kernel<double>(EnvWindow(env, x0, x0), x0);
}

/// In-place h_{n+1}(y) = p(y,y-1) h_n(y-1) + p(y,y+1) h_n(y+1).
template <class Real, class W>
void advance(BasicKernelState<Real>& s, const BasicEnvWindow<W>& window) {
  const std::int64_t first = s.offset() - 1;
  window.require(first, s.last_site() + 1);
  const W* pl = window.left_data() + (first - window.lo());
  const W* pr = window.right_data() + (first - window.lo());
  auto& v = s.values;
  s.refresh_live();
  v.emplace_back(0);
  // Sites whose two neighbours are both zero stay zero, so only the live
  // range plus one site on each side needs updating.
  const std::size_t hi = s.live_last + 1;
  const std::size_t lo = s.live_first;
  for (std::size_t j = hi; j > lo; --j) {
    v[j] = Real(pl[2 * j]) * v[j - 1] + Real(pr[2 * j]) * v[j];
  }
  v[lo] = lo == 0 ? Real(pr[0]) * v[0] : Real(pl[2 * lo]) * v[lo - 1] + Real(pr[2 * lo]) * v[lo];
  std::size_t nz_first = lo;
  std::size_t nz_last = hi;
  while (nz_first < nz_last && v[nz_first] == 0) ++nz_first;
  while (nz_last > nz_first && v[nz_last] == 0) --nz_last;
  s.live_first = nz_first;
  s.live_last = nz_last;
  ++s.time;
}

template <class Real, class W>
BasicKernelState<Real> step(BasicKernelState<Real> s, const BasicEnvWindow<W>& window) {
  advance(s, window);
  return s;
}

inline KernelState step(const KernelState& s, const Environment& env) {
  const EnvWindow window(env, s.offset() - 1, s.last_site() + 1);
  return step(s, window);
}

/// P_{x0}[S_n = x] = h_n(x) cbar(x).
template <class Real, class W>
Real occupation(const BasicKernelState<Real>& s, const BasicEnvWindow<W>& window, std::int64_t x) {
  return s.on_support(x) ? s.at(x) * Real(window.cbar(x)) : Real(0);
}

/// ||h_n||^2 = sum_x h_n(x)^2 cbar(x).
template <class Real, class W>
Real energy(const BasicKernelState<Real>& s, const BasicEnvWindow<W>& window) {
  window.require(s.offset(), s.last_site());
  const W* cb = window.cbar_data() + (s.offset() - window.lo());
  Real sum(0);
  if (s.values.empty()) return sum;
  const std::size_t hi = s.live_last < s.values.size() ? s.live_last : s.values.size() - 1;
  const std::size_t lo = s.live_last < s.values.size() ? s.live_first : 0;
  for (std::size_t i = lo; i <= hi; ++i) {
    sum += s.values[i] * s.values[i] * Real(cb[2 * i]);
  }
  return sum;
}

/// Occupation mass sum_x h_n(x) cbar(x); 1 for a heat kernel.
template <class Real, class W>
Real mass(const BasicKernelState<Real>& s, const BasicEnvWindow<W>& window) {
  Real sum(0);
  const std::int64_t first = s.offset();
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    sum += s.values[i] * Real(window.cbar(first + 2 * static_cast<std::int64_t>(i)));
  }
  return sum;
}

/// E(f,f) = sum_x (f(x-1) - f(x+1))^2 c(x-1,x) c(x,x+1) / cbar(x), specialised
/// to a function living on one parity class.
template <class Real, class W>
Real dirichlet(const BasicKernelState<Real>& s, const BasicEnvWindow<W>& window) {
  const auto& v = s.values;
  const std::size_t m = v.size();
  const std::int64_t first = s.offset() - 1;
  Real sum(0);
  for (std::size_t j = 0; j <= m; ++j) {
    const Real a = j == 0 ? Real(0) : v[j - 1];
    const Real b = j == m ? Real(0) : v[j];
    const Real d = a - b;
    sum += d * d * Real(window.series(first + 2 * static_cast<std::int64_t>(j)));
  }
  return sum;
}

template <class Real>
LatticeFunction<Real> to_lattice(const BasicKernelState<Real>& s) {
  LatticeFunction<Real> f;
  f.first = s.offset();
  f.values.assign(static_cast<std::size_t>(2 * s.time + 1), Real(0));
  for (std::size_t i = 0; i < s.values.size(); ++i) f.values[2 * i] = s.values[i];
  return f;
}

/// General form of E(f,g) for dense finitely supported f and g.
template <class Real, class W>
Real dirichlet(const BasicEnvWindow<W>& window, const LatticeFunction<Real>& f, const LatticeFunction<Real>& g) {
  const std::int64_t lo = std::min(f.first, g.first) - 1;
  const std::int64_t hi = std::max(f.last(), g.last()) + 1;
  Real sum(0);
  for (std::int64_t x = lo; x <= hi; ++x) {
    const Real df = f.at(x - 1) - f.at(x + 1);
    const Real dg = g.at(x - 1) - g.at(x + 1);
    if (df == 0 || dg == 0) continue;
    sum += df * dg * Real(window.series(x));
  }
  return sum;
}

template <class Real, class W>
Real dirichlet(const BasicEnvWindow<W>& window, const LatticeFunction<Real>& f) {
  return dirichlet(window, f, f);
}

/// (f, g) = sum_x f(x) g(x) cbar(x).
template <class Real, class W>
Real inner(const BasicEnvWindow<W>& window, const LatticeFunction<Real>& f, const LatticeFunction<Real>& g) {
  const std::int64_t lo = std::max(f.first, g.first);
  const std::int64_t hi = std::min(f.last(), g.last());
  Real sum(0);
  for (std::int64_t x = lo; x <= hi; ++x) sum += f.at(x) * g.at(x) * Real(window.cbar(x));
  return sum;
}

/// Pf(x) = f(x-1) p(x,x-1) + f(x+1) p(x,x+1).
template <class Real, class W>
LatticeFunction<Real> apply_transition(const BasicEnvWindow<W>& window, const LatticeFunction<Real>& f) {
  LatticeFunction<Real> out;
  out.first = f.first - 1;
  out.values.assign(f.values.size() + 2, Real(0));
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    const std::int64_t x = out.first + static_cast<std::int64_t>(i);
    out.values[i] = f.at(x - 1) * Real(window.p_left(x)) + f.at(x + 1) * Real(window.p_right(x));
  }
  return out;
}

/// (I - P^2) f.
template <class Real, class W>
LatticeFunction<Real> apply_laplacian2(const BasicEnvWindow<W>& window, const LatticeFunction<Real>& f) {
  auto out = apply_transition(window, apply_transition(window, f));
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    const std::int64_t x = out.first + static_cast<std::int64_t>(i);
    out.values[i] = f.at(x) - out.values[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Batch driver

/// Evolves the kernel based at x0 up to time N, recording every energy and a
/// copy of the state at each requested time. Throws std::length_error when N
/// exceeds the configured cap.
template <class Real>
BasicKernelRun<Real> run_to(const Environment& env, std::int64_t x0, std::int64_t N,
                            std::span<const std::int64_t> snapshot_times,
                            const KernelLimits& limits = {}) {
  if (N < 0) throw std::invalid_argument("run_to: N must be >= 0");
  if (N > limits.max_time) {
    throw std::length_error("run_to: N = " + std::to_string(N) + " exceeds the kernel cap " +
                            std::to_string(limits.max_time));
  }
  BasicKernelRun<Real> run;
  run.window = BasicEnvWindow<Real>(env, x0 - N - 1, x0 + N + 1);
  run.energies.env_id = env.id();
  run.energies.base = x0;
  run.energies.energies.reserve(static_cast<std::size_t>(N) + 1);

  auto wanted = [&](std::int64_t t) {
    for (auto s : snapshot_times) {
      if (s == t) return true;
    }
    return false;
  };

  auto state = init_kernel<Real>(run.window, x0);
  for (std::int64_t n = 0;; ++n) {
    run.energies.energies.push_back(energy(state, run.window));
    if (wanted(n)) run.snapshots.push_back(state);
    if (n == N) break;
    advance(state, run.window);
  }
  return run;
}

template <class Real>
BasicKernelRun<Real> run_to(const Environment& env, std::int64_t x0, std::int64_t N,
                            std::initializer_list<std::int64_t> snapshot_times,
                            const KernelLimits& limits = {}) {
  return run_to<Real>(env, x0, N, std::span<const std::int64_t>(snapshot_times.begin(), snapshot_times.size()),
                      limits);
}

// ---------------------------------------------------------------------------
// Complete monotonicity and the Nash-type decay bound

template <class Real>
BasicEnergySeq<Extended> widen(const BasicEnergySeq<Real>& e) {
  BasicEnergySeq<Extended> out{e.env_id, e.base, {}};
  out.energies.reserve(e.energies.size());
  for (const auto& v : e.energies) out.energies.emplace_back(v);
  return out;
}

DifferenceTable finite_differences(const ExtendedEnergySeq& e, std::int64_t K);

inline DifferenceTable finite_differences(const EnergySeq& e, std::int64_t K) {
  return finite_differences(widen(e), K);
}

/// Delta_n^(k) = (h_n, (I - P^2)^k h_n), evaluated directly from the operator.
Extended delta_direct(const Environment& env, std::int64_t x0, std::int64_t n, std::int64_t k);

/// The same quantity for every (n, k) with n + k <= N and k <= K, sharing one
/// kernel evolution. Shape matches finite_differences(.., K) on N+1 energies.
DifferenceTable delta_direct_table(const Environment& env, std::int64_t x0, std::int64_t N,
                                   std::int64_t K);

/// Lists every entry with Delta_n^(k) < -tol * Delta_0^(0).
MonotonicityReport check_complete_monotonicity(const DifferenceTable& table, double tol);

/// n^n / (n+1)^(n+1), with 0^0 = 1.
double nash_coefficient(std::int64_t n);

/// rhs - lhs of ||h_2n||^2 - ||h_2n+1||^2 <= n^n/(n+1)^(n+1) ||h_n||^2.
template <class Real>
double check_nash(const BasicEnergySeq<Real>& e, std::int64_t n) {
  if (n < 0 || static_cast<std::size_t>(2 * n + 1) >= e.energies.size()) {
    throw std::out_of_range("check_nash: need energies up to time 2n+1");
  }
  const auto& v = e.energies;
  const auto i = static_cast<std::size_t>(n);
  const Real rhs = Real(nash_coefficient(n)) * v[i];
  const Real lhs = v[2 * i] - v[2 * i + 1];
  return static_cast<double>(rhs - lhs);
}

}  // namespace cwlab
