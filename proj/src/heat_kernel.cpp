#include "cwlab/heat_kernel.hpp"

namespace cwlab {

DifferenceTable finite_differences(const ExtendedEnergySeq& e, std::int64_t K) {
  const auto len = static_cast<std::int64_t>(e.energies.size());
  if (len == 0) throw std::invalid_argument("finite_differences: empty energy sequence");
  if (K < 0 || K > len - 1) {
    throw std::invalid_argument("finite_differences: order K must lie in [0, length-1]");
  }
  DifferenceTable t;
  t.max_order = K;
  t.last_time = len - 1;
  t.delta.reserve(static_cast<std::size_t>(K) + 1);
  t.delta.push_back(e.energies);
  for (std::int64_t k = 1; k <= K; ++k) {
    const auto& prev = t.delta.back();
    std::vector<Extended> row(prev.size() - 1);
    for (std::size_t n = 0; n < row.size(); ++n) row[n] = prev[n] - prev[n + 1];
    t.delta.push_back(std::move(row));
  }
  return t;
}

namespace {

// Delta_n^(k) from u_l = (I - P^2)^l h_n: ||u_l||^2 when k = 2l, E(u_l, u_l)
// when k = 2l + 1. Both are sums of nonnegative terms, so the only
// cancellation left is inside the l applications of I - P^2.
class DirectDeltas {
 public:
  DirectDeltas(const ExtendedEnvWindow& window, const ExtendedKernelState& h)
      : window_(window), powers_{to_lattice(h)} {}

  Extended operator()(std::int64_t k) {
    const auto l = static_cast<std::size_t>(k / 2);
    while (powers_.size() <= l) powers_.push_back(apply_laplacian2(window_, powers_.back()));
    const auto& u = powers_[l];
    return k % 2 == 0 ? inner(window_, u, u) : dirichlet(window_, u);
  }

 private:
  const ExtendedEnvWindow& window_;
  std::vector<LatticeFunction<Extended>> powers_;
};

}  // namespace

Extended delta_direct(const Environment& env, std::int64_t x0, std::int64_t n, std::int64_t k) {
  if (n < 0 || k < 0) throw std::invalid_argument("delta_direct: n and k must be >= 0");
  const std::int64_t radius = n + k + 4;
  const ExtendedEnvWindow window(env, x0 - radius, x0 + radius);
  auto h = init_kernel<Extended>(window, x0);
  for (std::int64_t t = 0; t < n; ++t) advance(h, window);
  return DirectDeltas(window, h)(k);
}

DifferenceTable delta_direct_table(const Environment& env, std::int64_t x0, std::int64_t N,
                                   std::int64_t K) {
  if (N < 0 || K < 0 || K > N) throw std::invalid_argument("delta_direct_table: need 0 <= K <= N");
  const std::int64_t radius = N + K + 4;
  const ExtendedEnvWindow window(env, x0 - radius, x0 + radius);
  DifferenceTable t;
  t.max_order = K;
  t.last_time = N;
  t.delta.resize(static_cast<std::size_t>(K) + 1);
  for (std::int64_t k = 0; k <= K; ++k) t.delta[static_cast<std::size_t>(k)].resize(static_cast<std::size_t>(N - k + 1));

  auto h = init_kernel<Extended>(window, x0);
  for (std::int64_t n = 0; n <= N; ++n) {
    DirectDeltas deltas(window, h);
    for (std::int64_t k = 0; k <= std::min(K, N - n); ++k) {
      t.delta[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)] = deltas(k);
    }
    if (n < N) advance(h, window);
  }
  return t;
}

MonotonicityReport check_complete_monotonicity(const DifferenceTable& table, double tol) {
  MonotonicityReport report;
  report.tolerance = tol;
  report.scale = table.delta.empty() || table.delta[0].empty() ? 0.0 : static_cast<double>(table.at(0, 0));
  const Extended floor = -Extended(tol) * Extended(report.scale);
  for (std::size_t k = 0; k < table.delta.size(); ++k) {
    const auto& row = table.delta[k];
    for (std::size_t n = 0; n < row.size(); ++n) {
      if (row[n] < floor) {
        report.violations.push_back(
            {static_cast<std::int64_t>(n), static_cast<std::int64_t>(k), static_cast<double>(row[n])});
      }
    }
  }
  return report;
}

double nash_coefficient(std::int64_t n) {
  if (n < 0) throw std::invalid_argument("nash_coefficient: n must be >= 0");
  if (n == 0) return 1.0;
  const auto nn = static_cast<double>(n);
  return std::exp(nn * std::log1p(-1.0 / (nn + 1.0))) / (nn + 1.0);
}

}  // namespace cwlab
