#include <doctest.h>

#include <cmath>
#include <thread>

#include "cwlab/counter_rng.hpp"
#include "cwlab/environment.hpp"

using namespace cwlab;

TEST_CASE("constant and periodic conductances") {
  Environment c(EnvSpec{ConstantKind{2.5}, 0});
  CHECK(c.conductance(-7) == 2.5);
  CHECK(c.cbar(3) == 5.0);
  CHECK(c.transition(0).left == 0.5);

  Environment p(EnvSpec{PeriodicKind{{1.0, 2.0}, 0}, 0});
  CHECK(p.conductance(0) == 1.0);
  CHECK(p.conductance(1) == 2.0);
  CHECK(p.conductance(-1) == 2.0);
  CHECK(p.conductance(-2) == 1.0);
  CHECK(p.cbar(0) == 3.0);
  CHECK(p.cbar(2) == 3.0);
  CHECK(p.transition(0).right == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  Environment shifted(EnvSpec{PeriodicKind{{1.0, 2.0, 5.0}, 1}, 0});
  CHECK(shifted.conductance(0) == 2.0);
  CHECK(shifted.conductance(-1) == 1.0);
  CHECK(shifted.conductance(1) == 5.0);
}

TEST_CASE("i.i.d. kinds reproduce the documented transforms of the edge uniforms") {
  const std::uint64_t seed = 11;
  for (std::int64_t x : {-5, 0, 9}) {
    const double u = rng::edge_uniform(seed, x);
    Environment pareto(EnvSpec{ParetoKind{1.5, 2.0}, seed});
    CHECK(pareto.conductance(x) == doctest::Approx(2.0 * std::pow(u, -1.0 / 1.5)).epsilon(1e-15));
    Environment power(EnvSpec{PowerKind{3.0}, seed});
    CHECK(power.conductance(x) == doctest::Approx(std::pow(u, 1.0 / 3.0)).epsilon(1e-15));
    Environment logn(EnvSpec{LognormalKind{0.5, 1.5}, seed});
    const double u2 = rng::edge_uniform(seed, x, 1);
    const double z = std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * M_PI * u2);
    CHECK(logn.conductance(x) == doctest::Approx(std::exp(0.5 + 1.5 * z)).epsilon(1e-14));
  }
}

TEST_CASE("conductances do not depend on the order of queries") {
  for (const EnvSpec& spec :
       {EnvSpec{LognormalKind{0, 1}, 3}, EnvSpec{MarkovKind{{0.5, 3.0, 1.0}, {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}}}, 3}}) {
    Environment a(spec);
    Environment b(spec);
    const auto bulk = a.conductances(-50, 101);
    for (std::int64_t x = 50; x >= -50; --x) CHECK(b.conductance(x) == bulk[static_cast<std::size_t>(x + 50)]);
    Environment c(spec);
    CHECK(c.conductance(40) == bulk[90]);
    CHECK(c.conductances(-50, 101) == bulk);
  }
}

TEST_CASE("markov environment is safe to share between threads") {
  const EnvSpec spec{MarkovKind{{1.0, 4.0}, {{0.7, 0.3}, {0.4, 0.6}}}, 5};
  Environment reference(spec);
  const auto expected = reference.conductances(-2000, 4001);
  Environment shared(spec);
  std::vector<std::vector<double>> got(4);
  {
    std::vector<std::jthread> pool;
    for (int t = 0; t < 4; ++t) {
      pool.emplace_back([&, t] {
        const std::int64_t sign = t % 2 == 0 ? 1 : -1;
        for (std::int64_t i = 0; i <= 2000; ++i) got[t].push_back(shared.conductance(sign * i));
      });
    }
  }
  for (int t = 0; t < 4; ++t) {
    const std::int64_t sign = t % 2 == 0 ? 1 : -1;
    for (std::int64_t i = 0; i <= 2000; ++i) {
      CHECK(got[t][static_cast<std::size_t>(i)] == expected[static_cast<std::size_t>(sign * i + 2000)]);
    }
  }
}

TEST_CASE("markov environment only visits its state values and follows the stationary law") {
  const std::vector<double> states{0.5, 3.0};
  const EnvSpec spec{MarkovKind{states, {{0.9, 0.1}, {0.2, 0.8}}}, 2};
  Environment env(spec);
  const auto c = env.conductances(-100000, 200000);
  double ones = 0;
  for (double v : c) {
    CHECK((v == 0.5 || v == 3.0));
    ones += v == 0.5;
  }
  // stationary law of [[0.9,0.1],[0.2,0.8]] is (2/3, 1/3)
  CHECK(ones / static_cast<double>(c.size()) == doctest::Approx(2.0 / 3.0).epsilon(0.02));
  const auto pi = stationary_distribution({{0.9, 0.1}, {0.2, 0.8}});
  CHECK(pi[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(pi[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("validation names the offending parameter") {
  auto key_of = [](const EnvSpec& s) {
    try {
      validate(s);
    } catch (const EnvSpecError& e) {
      return e.key();
    }
    return std::string();
  };
  CHECK(key_of({ConstantKind{-1.0}, 0}) == "kappa");
  CHECK(key_of({ConstantKind{0.0}, 0}) == "kappa");
  CHECK(key_of({PeriodicKind{{}, 0}, 0}) == "cycle");
  CHECK(key_of({PeriodicKind{{1.0, -2.0}, 0}, 0}) == "cycle");
  CHECK(key_of({LognormalKind{0, 0}, 0}) == "s");
  CHECK(key_of({LognormalKind{0, 100}, 0}) == "s");
  CHECK(key_of({ParetoKind{-1, 1}, 0}) == "alpha");
  CHECK(key_of({ParetoKind{0.01, 1}, 0}) == "alpha");
  CHECK(key_of({PowerKind{0.0}, 0}) == "beta");
  CHECK(key_of({MarkovKind{{1.0, 2.0}, {{1.0, 0.0}, {0.0, 1.0}}}, 0}) == "transition");
  CHECK(key_of({MarkovKind{{1.0, 2.0}, {{0.5, 0.6}, {0.5, 0.5}}}, 0}) == "transition");
  CHECK(key_of({MarkovKind{{1.0, 2.0}, {{1.0}}}, 0}) == "transition");
  CHECK(key_of({ConstantKind{1.0}, 0}).empty());
  CHECK_THROWS_AS(Environment(EnvSpec{ConstantKind{-1.0}, 0}), EnvSpecError);
}

TEST_CASE("edge indices are bounded") {
  Environment env(EnvSpec{ConstantKind{1.0}, 0});
  CHECK_NOTHROW(env.conductance(kMaxEdgeIndex));
  CHECK_THROWS_AS(env.conductance(kMaxEdgeIndex + 1), std::out_of_range);
  CHECK_THROWS_AS(env.conductance(-kMaxEdgeIndex - 1), std::out_of_range);
}

TEST_CASE("integrability classes and closed-form means") {
  CHECK_FALSE(integrability_class({ParetoKind{0.5, 1}, 0}).cbar_integrable);
  CHECK(integrability_class({ParetoKind{0.5, 1}, 0}).inv_c_integrable);
  CHECK(integrability_class({ParetoKind{1.5, 1}, 0}).cbar_integrable);
  CHECK_FALSE(integrability_class({PowerKind{0.5}, 0}).inv_c_integrable);
  CHECK(integrability_class({PowerKind{2.0}, 0}).inv_c_integrable);
  CHECK_FALSE(integrability_class({LognormalKind{0, 1}, 0}).degenerate());

  const auto periodic = analytic_means({PeriodicKind{{1.0, 2.0}, 0}, 0});
  CHECK(periodic.cbar == doctest::Approx(3.0));
  CHECK(periodic.inv_c == doctest::Approx(0.75));
  const auto power = analytic_means({PowerKind{2.0}, 0});
  CHECK(power.cbar == doctest::Approx(4.0 / 3.0));
  CHECK(power.inv_c == doctest::Approx(2.0));
  CHECK(std::isinf(analytic_means({ParetoKind{0.5, 1}, 0}).cbar));
  const auto markov = analytic_means({MarkovKind{{0.5, 3.0}, {{0.9, 0.1}, {0.2, 0.8}}}, 0});
  CHECK(markov.cbar == doctest::Approx(2.0 * (2.0 / 3.0 * 0.5 + 1.0 / 3.0 * 3.0)));
  CHECK(markov.inv_c == doctest::Approx(2.0 / 3.0 * 2.0 + 1.0 / 3.0 / 3.0));
}

TEST_CASE("Birkhoff averages approach the closed-form means") {
  for (const EnvSpec& spec : {EnvSpec{LognormalKind{0, 1}, 1}, EnvSpec{PowerKind{2.0}, 1}, EnvSpec{ParetoKind{3.0, 1}, 1}}) {
    Environment env(spec);
    const auto means = analytic_means(spec);
    CHECK(birkhoff_mean(env, Observable::cbar, 1'000'000) == doctest::Approx(means.cbar).epsilon(0.01));
    CHECK(birkhoff_mean(env, Observable::inv_c, 1'000'000) == doctest::Approx(means.inv_c).epsilon(0.01));
  }
  Environment periodic(EnvSpec{PeriodicKind{{1.0, 2.0}, 0}, 0});
  CHECK(birkhoff_mean(periodic, Observable::cbar, 10) == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("describe is stable and includes parameters and seed") {
  CHECK(describe({ConstantKind{1.0}, 3}) == "constant(kappa=1)/seed=3");
  CHECK(describe({PeriodicKind{{1.0, 2.0}, 0}, 1}) == "periodic(cycle=1 2,phase=0)/seed=1");
  CHECK(kind_name({ParetoKind{0.5, 1.0}, 0}) == "iid_pareto");
}
