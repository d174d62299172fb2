#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "fsd/experiments.hpp"
#include "fsd/rng.hpp"

using namespace fsd;

TEST_CASE("sweep_rates") {
  const auto sp = make_plateau_spectrum(2, 1.0, 0.01, 12);
  const auto problem = make_problem(sp, make_aligned_signal(sp, 2, 1.0), 1.0);
  SUBCASE("singleton grid") {
    const auto sweep =
        sweep_rates(problem, FilterSpec::ridge(), 0.5, 200, 0.05, {7.0});
    CHECK(sweep.argmin_t == 7.0);
    CHECK(sweep.min_rate == sweep.rates[0].total);
  }
  SUBCASE("argmin is a true grid minimum and ties go to smaller t") {
    const auto grid = log_grid(2.0, 40.0, 64);
    const auto sweep =
        sweep_rates(problem, FilterSpec::gradient_flow(), 0.5, 200, 0.05, grid);
    for (const auto& r : sweep.rates) CHECK(sweep.min_rate <= r.total);
    for (int i = 0; i < sweep.argmin_index; ++i)
      CHECK(sweep.rates[i].total > sweep.min_rate);
  }
}

TEST_CASE("plateau scenario snr identity") {
  CounterRng rng(CounterRng::derive_key(61, 0, 0));
  for (int rep = 0; rep < 100; ++rep) {
    PlateauScenario sc;
    sc.k = 1 + static_cast<int>(rng.next_u64() % 16);
    sc.p = sc.k + 10 + static_cast<int>(rng.next_u64() % 2000);
    sc.sigma = 0.2 + 0.8 * rng.next_uniform();
    sc.eps = sc.sigma * (0.001 + 0.5 * rng.next_uniform());
    sc.alpha_star = 0.1 + 2.0 * rng.next_uniform();
    sc.noise_std = 0.2 + 2.0 * rng.next_uniform();
    sc.n = 50 + static_cast<long>(rng.next_u64() % 5000);
    const double a = sc.snr();
    const double b = sc.snr_closed_form();
    CHECK(std::abs(a - b) <= 1e-12 * std::max(a, b));
  }
}

TEST_CASE("1 + log R <= 2 sqrt(R) - 1 on [1, 1e6]") {
  for (int i = 0; i <= 600; ++i) {
    const double r = std::pow(10.0, i / 100.0);
    CHECK(1.0 + std::log(r) <= 2.0 * std::sqrt(r) - 1.0 + 1e-12);
  }
}

TEST_CASE("plateau saturation matches the closed forms") {
  // 4 < snr <= b sigma / eps by construction.
  PlateauScenario sc;
  sc.k = 4;
  sc.sigma = 1.0;
  sc.eps = 0.005;
  sc.p = 160004;
  sc.alpha_star = 1.0;
  sc.noise_std = 1.0;
  sc.n = 400;
  const double b = 0.5;
  REQUIRE(sc.snr() > 4.0);
  REQUIRE(sc.snr() <= b * sc.sigma / sc.eps);

  const auto report = plateau_saturation(sc, b, 0.05, 512);
  CHECK(report.hypothesis_met);
  CHECK(report.min_ridge ==
        doctest::Approx(report.closed_ridge).epsilon(0.01));
  CHECK(report.min_gf == doctest::Approx(report.closed_gf).epsilon(0.01));
  CHECK(report.verdict_gf_leq_ridge);
}

TEST_CASE("closed forms coincide in the R -> 1 limit") {
  const double r = 1.0;
  CHECK(2.0 * std::sqrt(r) - 1.0 == 1.0 + std::log(r));
}

TEST_CASE("ridge/gf minimum ratio grows with the snr") {
  PlateauScenario sc;
  sc.k = 4;
  sc.sigma = 1.0;
  sc.eps = 0.005;
  sc.p = 160004;
  sc.noise_std = 1.0;
  sc.n = 400;
  sc.alpha_star = 0.05;
  double prev_ratio = 0.0;
  for (int doubling = 0; doubling < 5; ++doubling) {
    const auto report = plateau_saturation(sc, 0.5, 0.05, 512);
    const double ratio = report.min_ridge / report.min_gf;
    CHECK(ratio >= prev_ratio);
    prev_ratio = ratio;
    sc.alpha_star *= 2.0;
  }
}

TEST_CASE("sobolev theoretical slopes hit their targets") {
  const std::vector<long> grid{1 << 10, 1 << 11, 1 << 12, 1 << 13,
                               1 << 14, 1 << 15, 1 << 16};
  SUBCASE("alpha=2 s=1 ridge: -2/3") {
    const auto study =
        sobolev_study(2.0, 1.0, grid, 0.5, std::nullopt, FilterSpec::ridge());
    CHECK(study.theory.target_exponent == doctest::Approx(-2.0 / 3.0));
    CHECK(std::abs(study.theory.fitted_slope - study.theory.target_exponent) <=
          0.05);
  }
  SUBCASE("alpha=2 s=4 ridge saturates at s_eff=2: -4/5") {
    const auto study =
        sobolev_study(2.0, 4.0, grid, 0.5, std::nullopt, FilterSpec::ridge());
    CHECK(study.s_effective == 2.0);
    CHECK(study.theory.target_exponent == doctest::Approx(-0.8));
    CHECK(std::abs(study.theory.fitted_slope - study.theory.target_exponent) <=
          0.05);
  }
  SUBCASE("alpha=2 s=4 gradient flow: -8/9") {
    const auto study = sobolev_study(2.0, 4.0, grid, 0.5, std::nullopt,
                                     FilterSpec::gradient_flow());
    CHECK(study.s_effective == 4.0);
    CHECK(study.theory.target_exponent == doctest::Approx(-8.0 / 9.0));
    CHECK(std::abs(study.theory.fitted_slope - study.theory.target_exponent) <=
          0.05);
  }
  SUBCASE("non-geometric grids are rejected") {
    CHECK_THROWS_AS(sobolev_study(2.0, 1.0, {1024, 2048, 3000, 8192}, 0.5,
                                  std::nullopt, FilterSpec::ridge()),
                    std::invalid_argument);
    CHECK_THROWS_AS(sobolev_study(2.0, 1.0, {1024, 2048, 4096}, 0.5,
                                  std::nullopt, FilterSpec::ridge()),
                    std::invalid_argument);
  }
}

TEST_CASE("partial order verdicts") {
  CounterRng rng(CounterRng::derive_key(62, 0, 0));
  for (int rep = 0; rep < 50; ++rep) {
    const int p = 3 + static_cast<int>(rng.next_u64() % 20);
    std::vector<double> ev(p);
    ev[0] = 1.0;
    for (int j = 1; j < p; ++j) ev[j] = ev[j - 1] * (0.2 + 0.8 * rng.next_uniform());
    auto sp = make_explicit_spectrum(std::move(ev));
    std::vector<double> coef(p);
    for (auto& c : coef) c = 2.0 * rng.next_uniform() - 1.0;
    const auto problem =
        make_problem(sp, make_explicit_signal(sp, std::move(coef)), 1.0);
    const double t = 1.0 + std::floor(40.0 * rng.next_uniform());

    const auto gf_vs_ridge =
        partial_order_verdict(problem, FilterSpec::gradient_flow(),
                              FilterSpec::ridge(), t, 0.5, 100, 0.05);
    CHECK(gf_vs_ridge.a_leq_b);

    const auto self = partial_order_verdict(problem, FilterSpec::ridge(),
                                            FilterSpec::ridge(), t, 0.5, 100, 0.05);
    CHECK(self.bias_ratio == 1.0);
    CHECK(self.a_leq_b);

    const auto pcr_vs_ridge =
        partial_order_verdict(problem, FilterSpec::pcr(0.5),
                              FilterSpec::ridge(), t, 0.5, 100, 0.05);
    CHECK(pcr_vs_ridge.a_leq_b);

    // Transitivity of the induced order on a filter triple.
    const std::vector<FilterSpec> trio{FilterSpec::pcr(0.5),
                                       FilterSpec::gradient_flow(),
                                       FilterSpec::ridge()};
    for (std::size_t a = 0; a < trio.size(); ++a)
      for (std::size_t c = 0; c < trio.size(); ++c)
        for (std::size_t m = 0; m < trio.size(); ++m) {
          const bool ab = partial_order_verdict(problem, trio[a], trio[m], t,
                                                0.5, 100, 0.05)
                              .a_leq_b;
          const bool bc = partial_order_verdict(problem, trio[m], trio[c], t,
                                                0.5, 100, 0.05)
                              .a_leq_b;
          if (ab && bc)
            CHECK(partial_order_verdict(problem, trio[a], trio[c], t, 0.5, 100,
                                        0.05)
                      .a_leq_b);
        }
  }
}

TEST_CASE("single index regimes") {
  // d=4, levels=2, shell cardinalities 1|4|10, spectrum 1 | 1/4 | 1/16.
  const long n = 1000;
  SUBCASE("threshold above the support shell: no learning") {
    // b/t in (1/4, 1): k* = 1 < 6.
    const auto report =
        single_index_barrier(4, 2, 2, 1.0, 1.0, n, 0.5, 0.05, {1.0});
    REQUIRE(report.points.size() == 1);
    CHECK(report.points[0].k_star == 1);
    CHECK(report.points[0].regime == LearningRegime::no_learning);
    CHECK(std::abs(report.points[0].align_tail - report.signal_norm) <= 1e-15);
    CHECK(report.support_lo == 6);
    CHECK(report.support_hi == 15);
  }
  SUBCASE("threshold below the support shell: learning at k* = 15") {
    const double t = 0.5 / 0.03;  // b/t = 0.03 < 1/16
    const auto report =
        single_index_barrier(4, 2, 2, 1.0, 1.0, n, 0.5, 0.05, {t});
    CHECK(report.points[0].k_star == 15);
    CHECK(report.points[0].regime == LearningRegime::learning);
    CHECK(report.points[0].var_head ==
          doctest::Approx(std::sqrt(15.0 / n)).epsilon(1e-12));
    CHECK(report.points[0].align_tail == 0.0);
  }
  SUBCASE("zero magnitude keeps the alignment term at zero everywhere") {
    const auto report = single_index_barrier(4, 2, 2, 0.0, 1.0, n, 0.5, 0.05,
                                             {1.0, 4.0, 30.0});
    for (const auto& pt : report.points) CHECK(pt.align_tail == 0.0);
  }
  SUBCASE("classification agrees with a brute-force shell check") {
    const auto spectrum = make_multiplateau_spectrum(4, 2);
    const auto grid = log_grid(1.0, 60.0, 40);
    const auto report =
        single_index_barrier(4, 2, 2, 1.0, 1.0, n, 0.5, 0.05, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto ed = estimation_dimension(spectrum, grid[i], 0.5);
      LearningRegime expected;
      if (ed.k_star < 6)
        expected = LearningRegime::no_learning;
      else if (ed.k_star >= 15)
        expected = LearningRegime::learning;
      else
        expected = LearningRegime::partial;
      CHECK(report.points[i].regime == expected);
    }
  }
  SUBCASE("exponent above the shell count is rejected") {
    CHECK_THROWS_AS(single_index_barrier(4, 2, 3, 1.0, 1.0, n, 0.5, 0.05, {1.0}),
                    std::invalid_argument);
  }
}

TEST_CASE("omega frequency") {
  SUBCASE("zero spectrum is degenerate and always holds") {
    const auto sp = make_explicit_spectrum({0.0, 0.0, 0.0});
    const auto problem = make_problem(sp, make_zero_signal(sp), 0.0);
    const auto report = omega_frequency(problem, 4.0, 0.1, 1, 50, 5);
    CHECK(report.frequency == 1.0);
  }
  SUBCASE("well-sampled power spectrum concentrates") {
    const auto sp = make_power_spectrum(2.0, 20);
    const auto problem = make_problem(sp, make_zero_signal(sp), 0.0);
    const double t = 4.0;
    const double box = 0.1;
    const long n =
        static_cast<long>(std::ceil(100.0 * effective_rank(sp, t) / (box * box)));
    const auto report = omega_frequency(problem, t, box, n, 60, 17);
    CHECK(report.frequency >= 0.95);
    CHECK(report.conditional_violations == 0);
  }
}

TEST_CASE("bound matching smoke run") {
  const auto sp = make_plateau_spectrum(4, 1.0, 0.01, 104);
  const auto problem = make_problem(sp, make_aligned_signal(sp, 4, 1.0), 1.0);
  const auto report = bound_matching_study(problem, FilterSpec::ridge(), 20.0,
                                           0.5, 0.1, {200, 400, 800}, 16, 3, 1.0);
  REQUIRE(report.points.size() == 3);
  CHECK(report.ratio_min <= report.ratio_median);
  CHECK(report.ratio_median <= report.ratio_max);
  for (const auto& pt : report.points) {
    CHECK(pt.ratio > 0.0);
    CHECK(pt.matching_ok);
  }
}
