#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fsd/filters.hpp"
#include "fsd/rng.hpp"

using namespace fsd;

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  return out;
}

}  // namespace

TEST_CASE("filter values at pinned points") {
  CHECK(filter_eval(FilterSpec::gradient_flow(), 10.0, 0.0) == 10.0);
  CHECK(filter_eval(FilterSpec::ridge(), 10.0, 0.1) ==
        doctest::Approx(5.0).epsilon(1e-15));
  CHECK(filter_eval(FilterSpec::pcr(0.5), 10.0, 0.04) == 0.0);
  CHECK(filter_eval(FilterSpec::pcr(0.5), 10.0, 0.05) ==
        doctest::Approx(20.0).epsilon(1e-15));
}

TEST_CASE("residual values at pinned points") {
  CHECK(residual_eval(FilterSpec::gradient_flow(), 5.0, 0.0) == 1.0);
  CHECK(residual_eval(FilterSpec::ridge(), 10.0, 0.1) ==
        doctest::Approx(0.5).epsilon(1e-15));
  // (1 - 0.1*1)^3 = 0.729
  CHECK(residual_eval(FilterSpec::gradient_descent(0.1), 3.0, 1.0) ==
        doctest::Approx(0.729).epsilon(1e-14));
}

TEST_CASE("argument validation") {
  CHECK_THROWS_AS(filter_eval(FilterSpec::gradient_descent(0.05), 2.5, 0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(FilterSpec::gradient_descent(0.2), std::invalid_argument);
  CHECK_THROWS_AS(FilterSpec::gradient_descent(0.125), std::invalid_argument);
  CHECK_THROWS_AS(FilterSpec::pcr(1.0), std::invalid_argument);
  CHECK_THROWS_AS(filter_eval(FilterSpec::ridge(), 0.5, 0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(filter_eval(FilterSpec::ridge(), 1.0, -0.1),
                  std::invalid_argument);
}

TEST_CASE("filter name parsing") {
  CHECK(FilterSpec::parse("gf").family == FilterFamily::gradient_flow);
  CHECK(FilterSpec::parse("ridge").family == FilterFamily::ridge);
  const auto gd = FilterSpec::parse("gd:0.05");
  CHECK(gd.family == FilterFamily::gradient_descent);
  CHECK(gd.eta == doctest::Approx(0.05));
  const auto pc = FilterSpec::parse("pcr:0.25");
  CHECK(pc.family == FilterFamily::pcr);
  CHECK(pc.pcr_b == doctest::Approx(0.25));
  CHECK_THROWS_AS(FilterSpec::parse("lasso"), std::invalid_argument);
  CHECK_THROWS_AS(FilterSpec::parse("gd:abc"), std::invalid_argument);
}

TEST_CASE("sandwich bracket holds on [0, 8]") {
  SUBCASE("ridge is the envelope itself") {
    for (double t : {1.0, 10.0, 1000.0}) {
      const auto rep = sandwich_check(FilterSpec::ridge(), t, linspace(0, 8, 1001));
      CHECK(rep.max_violation == 0.0);
    }
  }
  SUBCASE("gradient flow at the origin") {
    const auto rep = sandwich_check(FilterSpec::gradient_flow(), 1.0, {0.0});
    CHECK(rep.max_violation == 0.0);
  }
  SUBCASE("gradient descent on a dense grid") {
    const auto rep = sandwich_check(FilterSpec::gradient_descent(0.05), 20.0,
                                    linspace(0, 8, 10000));
    CHECK(rep.max_violation <= 1e-12);
  }
  SUBCASE("pcr upper envelope is tight at the threshold") {
    for (double t : {1.0, 10.0, 200.0}) {
      const auto rep =
          sandwich_check(FilterSpec::pcr(0.5), t, linspace(0, 8, 4001));
      CHECK(rep.max_violation <= 1e-12);
    }
  }
}

TEST_CASE("psi + x phi = 1 on random grids") {
  CounterRng rng(CounterRng::derive_key(7, 0, 0));
  const std::vector<FilterSpec> specs = {
      FilterSpec::gradient_flow(), FilterSpec::ridge(),
      FilterSpec::gradient_descent(0.05), FilterSpec::pcr(0.5)};
  for (const auto& spec : specs) {
    for (int rep = 0; rep < 200; ++rep) {
      const double t = 1.0 + std::floor(rng.next_uniform() * 100.0);
      const double x = 8.0 * rng.next_uniform();
      const double phi = filter_eval(spec, t, x);
      const double psi = residual_eval(spec, t, x);
      CHECK(std::abs(psi + x * phi - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("gradient flow residual dominated by ridge residual") {
  // exp(-tx) <= 1/(1+xt) for x, t >= 0.
  CounterRng rng(CounterRng::derive_key(8, 0, 0));
  for (int rep = 0; rep < 2000; ++rep) {
    const double t = 1.0 + 1000.0 * rng.next_uniform();
    const double x = 8.0 * rng.next_uniform();
    CHECK(std::exp(-t * x) <= 1.0 / (1.0 + x * t) + 1e-15);
  }
}

TEST_CASE("gd residual equals the repeated-multiplication oracle") {
  CounterRng rng(CounterRng::derive_key(9, 0, 0));
  for (int rep = 0; rep < 100; ++rep) {
    const double eta = 0.001 + 0.12 * rng.next_uniform();
    const long t = 1 + static_cast<long>(rng.next_u64() % 64);
    const double x = 8.0 * rng.next_uniform();
    double oracle = 1.0;
    for (long i = 0; i < t; ++i) oracle *= (1.0 - eta * x);
    const double got = residual_eval(FilterSpec::gradient_descent(eta),
                                     static_cast<double>(t), x);
    CHECK(got == doctest::Approx(oracle).epsilon(1e-13));
  }
}

TEST_CASE("pcr residual is a nonincreasing 0/1 indicator") {
  const auto spec = FilterSpec::pcr(0.5);
  double prev = 1.0;
  for (double x : linspace(0, 1, 2001)) {
    const double psi = residual_eval(spec, 10.0, x);
    CHECK((psi == 0.0 || psi == 1.0));
    CHECK(psi <= prev);
    prev = psi;
  }
}

TEST_CASE("gradient flow small-argument evaluation is stable") {
  // Near x = 0 the direct quotient cancels; the series branch must agree
  // with the limit t and stay monotone.
  const double t = 1000.0;
  const auto gf = FilterSpec::gradient_flow();
  CHECK(filter_eval(gf, t, 0.0) == t);
  double prev = filter_eval(gf, t, 0.0);
  for (double x : {1e-12, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2}) {
    const double phi = filter_eval(gf, t, x);
    CHECK(phi <= prev * (1.0 + 1e-12));
    CHECK(phi > 0.0);
    prev = phi;
  }
}
