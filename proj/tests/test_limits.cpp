#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cwlab/limits.hpp"
#include "oracles.hpp"

using namespace cwlab;

TEST_CASE("closed-form targets") {
  Environment c(EnvSpec{ConstantKind{1.0}, 0});
  const auto tc = targets(c, 0);
  CHECK(tc.source == "closed_form");
  CHECK(tc.sigma2 == doctest::Approx(1.0));
  CHECK(tc.llt_constant == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-15));

  Environment p(EnvSpec{PeriodicKind{{1.0, 2.0}, 0}, 0});
  const auto tp = targets(p, 0);
  CHECK(tp.sigma2 == doctest::Approx(8.0 / 9.0).epsilon(1e-15));
  CHECK(tp.llt_constant == doctest::Approx(1.5 / std::sqrt(std::numbers::pi)).epsilon(1e-15));
  CHECK(targets(p, 2).llt_constant == doctest::Approx(tp.llt_constant).epsilon(1e-15));

  Environment pareto(EnvSpec{ParetoKind{0.5, 1}, 1});
  const auto tz = targets(pareto, 0, 1000);
  CHECK(tz.degenerate);
  CHECK(tz.llt_constant == 0.0);
  CHECK(std::isinf(tz.mean_cbar));
  Environment power(EnvSpec{PowerKind{0.5}, 1});
  CHECK(std::isinf(targets(power, 0, 1000).llt_constant));

  Environment logn(EnvSpec{LognormalKind{0, 1}, 1});
  const auto tl = targets(logn, 0, 1000);
  CHECK(tl.source == "birkhoff");
  CHECK(tl.window == 1000);
}

TEST_CASE("dyadic schedules and trend checks") {
  CHECK(dyadic_schedule(2, 4) == std::vector<std::int64_t>{4, 8, 16});
  const std::vector<double> up{1, 1.5, 2, 3, 4};
  CHECK(check_trend(up, Trend::increasing).pass);
  CHECK_FALSE(check_trend(up, Trend::decreasing).pass);
  const std::vector<double> up_small{1, 1.1, 1.2, 1.3, 1.4};
  const auto tc = check_trend(up_small, Trend::increasing);
  CHECK(tc.monotone_tail);
  CHECK_FALSE(tc.pass);
  CHECK(check_trend(up_small, Trend::increasing, 1.0).pass);
  const std::vector<double> wobble{10, 1, 0.5, 0.6, 0.4, 0.3};
  CHECK_FALSE(check_trend(wobble, Trend::decreasing).pass);
  const std::vector<double> down_tail{10, 12, 0.6, 0.5, 0.4, 0.3};
  CHECK(check_trend(down_tail, Trend::decreasing).pass);
  CHECK(running_max(wobble) == std::vector<double>{10, 10, 10, 10, 10, 10});
}

TEST_CASE("homogeneous LLT, sup bound and Gaussian bands") {
  Environment env(EnvSpec{ConstantKind{1.0}, 0});
  const auto sched = dyadic_schedule(4, 10);
  const auto llt = verify_llt(env, 0, sched);
  for (const auto& r : llt) {
    const double exact = std::sqrt(2.0 * static_cast<double>(r.n)) * static_cast<double>(oracle::srw_law(2 * r.n, 0));
    CHECK(r.observed == doctest::Approx(exact).epsilon(1e-12));
    CHECK(r.gap == doctest::Approx(r.observed - r.target));
  }
  const auto sup = verify_sup_bound(env, sched);
  for (const auto& r : sup) CHECK(r.observed < 1.0);
  const auto bands = verify_gaussian_bounds(env, sched);
  for (const auto& r : bands) {
    if (r.theorem == checks::kGaussianLower) CHECK(r.observed > r.target);
  }
  // n = 1: the ball of radius sqrt(2) around 0 meets 2Z only at 0.
  const std::vector<std::int64_t> one{1};
  const auto s1 = verify_sup_bound(env, one);
  CHECK(s1[0].observed == doctest::Approx(std::sqrt(2.0) * 0.25).epsilon(1e-15));
}

TEST_CASE("regularity modulus against the binomial profile") {
  Environment env(EnvSpec{ConstantKind{1.0}, 0});
  const std::int64_t n = 1000;
  const double m = regularity_modulus(env, 0, n, 1.0);
  const double r = std::sqrt(2.0 * n);
  long double best = 0;
  const long double center = oracle::srw_law(2 * n, 0) / 2;
  for (std::int64_t x = -static_cast<std::int64_t>(r); x <= r; ++x) {
    if (x % 2 != 0 || std::abs(static_cast<double>(x)) >= r) continue;
    best = std::max(best, std::fabs(oracle::srw_law(2 * n, x) / 2 - center));
  }
  CHECK(m == doctest::Approx(static_cast<double>(best)).epsilon(1e-10));
  CHECK(regularity_modulus(env, 0, n, 0.01) == 0.0);
  CHECK_THROWS_AS(regularity_modulus(env, 1, n, 1.0), std::invalid_argument);
  Environment power(EnvSpec{PowerKind{0.5}, 0});
  CHECK_THROWS_AS(regularity_modulus(power, 0, 10, 1.0), std::domain_error);
}

TEST_CASE("CLT records for both classes") {
  Environment env(EnvSpec{ConstantKind{1.0}, 0});
  const auto clt = clt_check(env, 2000, CltMode::exact_kernel);
  REQUIRE(clt.size() == 1);
  CHECK(clt[0].theorem == checks::kClt);
  CHECK(clt[0].observed < 0.02);
  CltOptions opt;
  opt.walkers = 100000;
  const auto mc = clt_check(env, 400, CltMode::monte_carlo, opt);
  CHECK(mc[0].observed < 0.05);

  Environment pareto(EnvSpec{ParetoKind{0.5, 1}, 1});
  CltOptions small;
  small.window = 1000;
  const auto conc = clt_check(pareto, 256, CltMode::exact_kernel, small);
  REQUIRE(conc.size() == 3);
  for (const auto& r : conc) {
    CHECK(r.theorem == checks::kCltConcentration);
    CHECK(r.observed >= 0.0);
    CHECK(r.observed <= 1.0);
  }
}

TEST_CASE("identity checks") {
  for (const EnvSpec& spec : {EnvSpec{ConstantKind{1.0}, 0}, EnvSpec{PowerKind{0.5}, 1}}) {
    Environment env(spec);
    CHECK(green_identity_check(env, 0, 300).max_rel_error < 1e-13);
    CHECK(energy_duality_check(env, 0, 300).max_rel_error < 1e-13);
  }
}

TEST_CASE("records carry gaps only for finite targets") {
  const auto a = make_record("x", "e", 1, 2.0, 1.5);
  CHECK(a.gap == 0.5);
  const auto b = make_record("x", "e", 1, 2.0, kNaN);
  CHECK(std::isnan(b.gap));
}
