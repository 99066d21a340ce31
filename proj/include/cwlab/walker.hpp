#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cwlab/environment.hpp"
#include "cwlab/heat_kernel.hpp"

namespace cwlab {

/// Positions of independent walkers after n_steps, all started at 0.
struct WalkEnsemble {
  std::string env_id;
  std::int64_t n_steps = 0;
  std::int64_t n_walkers = 0;
  std::uint64_t master_seed = 0;
  std::vector<std::int64_t> counts;  // counts[x + n_steps] for x in [-n_steps, n_steps]

  std::int64_t count(std::int64_t x) const {
    if (x < -n_steps || x > n_steps) return 0;
    return counts[static_cast<std::size_t>(x + n_steps)];
  }
  double frequency(std::int64_t x) const {
    return static_cast<double>(count(x)) / static_cast<double>(n_walkers);
  }
};

/// Walker i is driven by the stream SplitMix64::for_stream(master_seed, i),
/// so the ensemble does not depend on `threads`.
WalkEnsemble simulate(const Environment& env, std::int64_t n_steps, std::int64_t n_walkers,
                      std::uint64_t master_seed, unsigned threads = 1);

/// Effective conductance between 0 and {-K, K}, divided by cbar(0).
double escape_probability_exact(const Environment& env, std::int64_t K);

struct EscapeEstimate {
  std::int64_t K = 0;
  double exact = 0.0;
  double mc = 0.0;
  double std_error = 0.0;
  double capped_fraction = 0.0;
  std::int64_t walkers = 0;
  std::int64_t capped = 0;
};

/// Trials exceeding this many steps are counted as returned and flagged.
std::int64_t escape_step_cap(std::int64_t K);

EscapeEstimate escape_probability_mc(const Environment& env, std::int64_t K, std::int64_t n_walkers,
                                     std::uint64_t master_seed, unsigned threads = 1);

struct SiteMass {
  std::int64_t x = 0;
  double mass = 0.0;
};

/// Sorted by site; zero-mass sites omitted.
std::vector<SiteMass> empirical_law(const WalkEnsemble& ens);
std::vector<SiteMass> kernel_law(const KernelState& state, const EnvWindow& window);

/// sup_z |F(z) - Phi(z / sigma)| for the law of x / scale, evaluated on both
/// sides of every jump.
double ks_distance(std::span<const SiteMass> law, double scale, double sigma2);
double ks_distance(const WalkEnsemble& ens, double sigma2);

double total_variation(std::span<const SiteMass> a, std::span<const SiteMass> b);

/// P[|x / scale| > eps].
double tail_mass(std::span<const SiteMass> law, double scale, double eps);

}  // namespace cwlab
