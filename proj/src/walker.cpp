#include "cwlab/walker.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "cwlab/counter_rng.hpp"

namespace cwlab {
namespace {

// Runs body(first, last, slot) over contiguous index chunks, one per thread.
template <class Body>
void parallel_chunks(std::int64_t total, unsigned threads, Body&& body) {
  threads = std::max(1U, threads);
  const auto t = static_cast<std::int64_t>(threads);
  if (threads == 1 || total < t) {
    body(std::int64_t{0}, total, 0U);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned slot = 0; slot < threads; ++slot) {
    const std::int64_t first = total * slot / t;
    const std::int64_t last = total * (slot + 1) / t;
    pool.emplace_back([&body, first, last, slot] { body(first, last, slot); });
  }
}

}  // namespace

WalkEnsemble simulate(const Environment& env, std::int64_t n_steps, std::int64_t n_walkers,
                      std::uint64_t master_seed, unsigned threads) {
  if (n_steps < 1 || n_walkers < 1) {
    throw std::invalid_argument("simulate: n_steps and n_walkers must be >= 1");
  }
  const EnvWindow window(env, -n_steps, n_steps);
  const double* right = window.right_data() + n_steps;  // right[x] = p(x, x+1)
  const auto width = static_cast<std::size_t>(2 * n_steps + 1);
  std::vector<std::vector<std::int64_t>> partial(std::max(1U, threads),
                                                 std::vector<std::int64_t>(width, 0));

  parallel_chunks(n_walkers, threads, [&](std::int64_t first, std::int64_t last, unsigned slot) {
    auto& counts = partial[slot];
    for (std::int64_t w = first; w < last; ++w) {
      auto rng = rng::SplitMix64::for_stream(master_seed, static_cast<std::uint64_t>(w));
      std::int64_t x = 0;
      for (std::int64_t s = 0; s < n_steps; ++s) x += rng.uniform() < right[x] ? 1 : -1;
      ++counts[static_cast<std::size_t>(x + n_steps)];
    }
  });

  WalkEnsemble ens{env.id(), n_steps, n_walkers, master_seed, std::vector<std::int64_t>(width, 0)};
  for (const auto& counts : partial) {
    for (std::size_t i = 0; i < width; ++i) ens.counts[i] += counts[i];
  }
  return ens;
}

double escape_probability_exact(const Environment& env, std::int64_t K) {
  if (K < 1) throw std::invalid_argument("escape_probability_exact: K must be >= 1");
  const auto c = env.conductances(-K, static_cast<std::size_t>(2 * K));  // edges -K .. K-1
  double left = 0.0;
  double right = 0.0;
  for (std::int64_t i = 0; i < K; ++i) left += 1.0 / c[static_cast<std::size_t>(i)];
  for (std::int64_t i = K; i < 2 * K; ++i) right += 1.0 / c[static_cast<std::size_t>(i)];
  return (1.0 / left + 1.0 / right) / env.cbar(0);
}

std::int64_t escape_step_cap(std::int64_t K) { return 1'000'000 * K * K; }

EscapeEstimate escape_probability_mc(const Environment& env, std::int64_t K, std::int64_t n_walkers,
                                     std::uint64_t master_seed, unsigned threads) {
  if (K < 1 || n_walkers < 1) {
    throw std::invalid_argument("escape_probability_mc: K and n_walkers must be >= 1");
  }
  const EnvWindow window(env, -K, K);
  const double* right = window.right_data() + K;
  const std::int64_t cap = escape_step_cap(K);
  struct Tally {
    std::int64_t escaped = 0;
    std::int64_t capped = 0;
  };
  std::vector<Tally> partial(std::max(1U, threads));

  parallel_chunks(n_walkers, threads, [&](std::int64_t first, std::int64_t last, unsigned slot) {
    auto& tally = partial[slot];
    for (std::int64_t w = first; w < last; ++w) {
      auto rng = rng::SplitMix64::for_stream(master_seed, static_cast<std::uint64_t>(w));
      std::int64_t x = rng.uniform() < right[0] ? 1 : -1;
      std::int64_t steps = 1;
      while (x != 0 && x != K && x != -K && steps < cap) {
        x += rng.uniform() < right[x] ? 1 : -1;
        ++steps;
      }
      if (x == K || x == -K) {
        ++tally.escaped;
      } else if (x != 0) {
        ++tally.capped;
      }
    }
  });

  EscapeEstimate est;
  est.K = K;
  est.walkers = n_walkers;
  est.exact = escape_probability_exact(env, K);
  std::int64_t escaped = 0;
  for (const auto& t : partial) {
    escaped += t.escaped;
    est.capped += t.capped;
  }
  const auto n = static_cast<double>(n_walkers);
  est.mc = static_cast<double>(escaped) / n;
  est.std_error = std::sqrt(est.mc * (1.0 - est.mc) / n);
  est.capped_fraction = static_cast<double>(est.capped) / n;
  return est;
}

std::vector<SiteMass> empirical_law(const WalkEnsemble& ens) {
  std::vector<SiteMass> law;
  for (std::int64_t x = -ens.n_steps; x <= ens.n_steps; ++x) {
    if (const auto c = ens.count(x); c > 0) law.push_back({x, ens.frequency(x)});
  }
  return law;
}

std::vector<SiteMass> kernel_law(const KernelState& state, const EnvWindow& window) {
  std::vector<SiteMass> law;
  law.reserve(state.values.size());
  for (std::size_t i = 0; i < state.values.size(); ++i) {
    const std::int64_t x = state.offset() + 2 * static_cast<std::int64_t>(i);
    const double m = state.values[i] * window.cbar(x);
    if (m > 0.0) law.push_back({x, m});
  }
  return law;
}

double ks_distance(std::span<const SiteMass> law, double scale, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("ks_distance: sigma2 must be positive");
  const double denom = std::sqrt(2.0 * sigma2) * scale;
  double before = 0.0;
  double worst = 0.0;
  for (const auto& [x, m] : law) {
    const double phi = 0.5 * std::erfc(-static_cast<double>(x) / denom);
    const double after = before + m;
    worst = std::max({worst, std::abs(before - phi), std::abs(after - phi)});
    before = after;
  }
  return worst;
}

double ks_distance(const WalkEnsemble& ens, double sigma2) {
  const auto law = empirical_law(ens);
  return ks_distance(law, std::sqrt(static_cast<double>(ens.n_steps)), sigma2);
}

double total_variation(std::span<const SiteMass> a, std::span<const SiteMass> b) {
  double sum = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].x < b[j].x)) {
      sum += std::abs(a[i++].mass);
    } else if (i == a.size() || b[j].x < a[i].x) {
      sum += std::abs(b[j++].mass);
    } else {
      sum += std::abs(a[i++].mass - b[j++].mass);
    }
  }
  return 0.5 * sum;
}

double tail_mass(std::span<const SiteMass> law, double scale, double eps) {
  double sum = 0.0;
  for (const auto& [x, m] : law) {
    if (std::abs(static_cast<double>(x)) / scale > eps) sum += m;
  }
  return sum;
}

}  // namespace cwlab
