#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fsd/linalg.hpp"
#include "fsd/rng.hpp"
#include "fsd/simulate.hpp"
#include "fsd/spectra.hpp"

using namespace fsd;

namespace {

RegressionProblem small_problem(CounterRng& rng, int n_max = 24) {
  const int p = 2 + static_cast<int>(rng.next_u64() % n_max);
  std::vector<double> ev(p);
  ev[0] = 1.0;
  for (int j = 1; j < p; ++j) ev[j] = ev[j - 1] * (0.1 + 0.9 * rng.next_uniform());
  auto sp = make_explicit_spectrum(std::move(ev));
  std::vector<double> coef(p);
  for (auto& c : coef) c = 2.0 * rng.next_uniform() - 1.0;
  auto sig = make_explicit_signal(sp, std::move(coef));
  return make_problem(std::move(sp), std::move(sig), 0.5 + rng.next_uniform());
}

}  // namespace

TEST_CASE("rng streams are deterministic and separated") {
  CounterRng a(CounterRng::derive_key(42, 3, 0));
  CounterRng b(CounterRng::derive_key(42, 3, 0));
  CounterRng c(CounterRng::derive_key(42, 3, 1));
  bool any_diff = false;
  for (int i = 0; i < 64; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    if (x != c.next_u64()) any_diff = true;
  }
  CHECK(any_diff);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.next_uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("draw_batch basics") {
  SUBCASE("null problem gives a zero response") {
    const auto sp = make_power_spectrum(2.0, 5);
    const auto problem = make_problem(sp, make_zero_signal(sp), 0.0);
    const auto batch = draw_batch(problem, 32, 7);
    CHECK(batch.response.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("same seed reproduces the batch bit for bit") {
    CounterRng rng(CounterRng::derive_key(90, 0, 0));
    const auto problem = small_problem(rng);
    const auto b1 = draw_batch(problem, 50, 1234);
    const auto b2 = draw_batch(problem, 50, 1234);
    CHECK(b1.design == b2.design);
    CHECK(b1.response == b2.response);
    const auto b3 = draw_batch(problem, 50, 1235);
    CHECK(b1.design != b3.design);
  }
  SUBCASE("unit-variance column concentrates (fixed seed 42)") {
    const auto sp = make_explicit_spectrum({1.0});
    const auto problem = make_problem(sp, make_zero_signal(sp), 0.0);
    const long n = 100000;
    const auto batch = draw_batch(problem, n, 42);
    const double mean = batch.design.col(0).mean();
    const double var =
        (batch.design.col(0).array() - mean).square().sum() / (n - 1);
    CHECK(std::abs(var - 1.0) <= 0.02);
  }
  SUBCASE("rademacher design has unit entries") {
    const auto sp = make_explicit_spectrum({1.0, 0.25});
    const auto problem = make_problem(sp, make_zero_signal(sp), 0.0);
    const auto batch = draw_batch(problem, 20, 5, DesignDistribution::rademacher);
    for (long i = 0; i < 20; ++i) {
      CHECK(std::abs(std::abs(batch.design(i, 0)) - 1.0) <= 1e-15);
      CHECK(std::abs(std::abs(batch.design(i, 1)) - 0.5) <= 1e-15);
    }
  }
}

TEST_CASE("fit is linear in the response") {
  CounterRng rng(CounterRng::derive_key(91, 0, 0));
  for (const auto& filter :
       {FilterSpec::ridge(), FilterSpec::gradient_flow(), FilterSpec::pcr(0.5)}) {
    const auto problem = small_problem(rng);
    auto batch = draw_batch(problem, 30, 11);
    const double t = 1.0 + std::floor(20.0 * rng.next_uniform());
    CounterRng noise(CounterRng::derive_key(91, 1, 0));
    Eigen::VectorXd y1(30), y2(30);
    for (int i = 0; i < 30; ++i) {
      y1(i) = noise.next_gaussian();
      y2(i) = noise.next_gaussian();
    }
    const double c = 2.0 * rng.next_uniform() - 1.0;

    auto fit_on = [&](const Eigen::VectorXd& y) {
      SampleBatch b = batch;
      b.response = y;
      return fit_spectral(b, filter, t).beta_hat;
    };
    const Eigen::VectorXd sum_fit = fit_on(y1 + y2);
    const Eigen::VectorXd fit_sum = fit_on(y1) + fit_on(y2);
    CHECK((sum_fit - fit_sum).norm() <= 1e-10);
    const Eigen::VectorXd scaled = fit_on(c * y1);
    CHECK((scaled - c * fit_on(y1)).norm() <= 1e-10);
  }
}

TEST_CASE("zero response fits to zero") {
  const auto sp = make_power_spectrum(2.0, 6);
  const auto problem = make_problem(sp, make_zero_signal(sp), 0.0);
  const auto batch = draw_batch(problem, 12, 3);
  const auto fit = fit_spectral(batch, FilterSpec::gradient_flow(), 8.0);
  CHECK(fit.beta_hat.norm() <= 1e-14);
}

TEST_CASE("ridge fit matches the normal-equation solve") {
  CounterRng rng(CounterRng::derive_key(92, 0, 0));
  for (int rep = 0; rep < 40; ++rep) {
    const auto problem = small_problem(rng);
    const long n = 4 + static_cast<long>(rng.next_u64() % 60);
    const auto batch = draw_batch(problem, n, 1000 + rep);
    const double t = 1.0 + 30.0 * rng.next_uniform();
    const auto fit = fit_spectral(batch, FilterSpec::ridge(), t);

    const int p = problem.dim();
    const Eigen::MatrixXd gram = linalg::gram_primal(batch.design);
    const Eigen::MatrixXd lhs =
        gram + Eigen::MatrixXd::Identity(p, p) / t;
    const Eigen::VectorXd rhs =
        batch.design.transpose() * batch.response / static_cast<double>(n);
    const Eigen::VectorXd oracle = lhs.ldlt().solve(rhs);
    CHECK((fit.beta_hat - oracle).norm() <= 1e-10);

    // Normal equations residual.
    CHECK((lhs * fit.beta_hat - rhs).norm() <= 1e-10);
  }
}

TEST_CASE("gd spectral fit matches explicit iterations") {
  CounterRng rng(CounterRng::derive_key(93, 0, 0));
  for (int rep = 0; rep < 30; ++rep) {
    const auto problem = small_problem(rng);
    const long n = 4 + static_cast<long>(rng.next_u64() % 60);
    const auto batch = draw_batch(problem, n, 2000 + rep);
    const double eta = 0.01 + 0.11 * rng.next_uniform();
    const long steps = 1 + static_cast<long>(rng.next_u64() % 64);

    const auto fit = fit_spectral(batch, FilterSpec::gradient_descent(eta),
                                  static_cast<double>(steps));

    // beta_{k+1} = beta_k + (eta/N) X^T (y - X beta_k), beta_1 = 0,
    // applied `steps` times.
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(problem.dim());
    for (long k = 0; k < steps; ++k)
      beta += (eta / static_cast<double>(n)) * batch.design.transpose() *
              (batch.response - batch.design * beta);
    CHECK((fit.beta_hat - beta).norm() <= 1e-8);
  }
}

TEST_CASE("primal and dual routes agree") {
  CounterRng rng(CounterRng::derive_key(94, 0, 0));
  for (const auto& filter :
       {FilterSpec::ridge(), FilterSpec::gradient_flow(),
        FilterSpec::gradient_descent(0.05), FilterSpec::pcr(0.5)}) {
    for (int rep = 0; rep < 10; ++rep) {
      const auto problem = small_problem(rng);
      const long n = 4 + static_cast<long>(rng.next_u64() % 60);
      if (n == problem.dim()) continue;
      const auto batch = draw_batch(problem, n, 3000 + rep);
      const double t = 1.0 + std::floor(30.0 * rng.next_uniform());
      const auto primal = fit_spectral_route(batch, filter, t, FitRoute::primal);
      const auto dual = fit_spectral_route(batch, filter, t, FitRoute::dual);
      CHECK((primal.beta_hat - dual.beta_hat).norm() <= 1e-8);
      const auto chosen = fit_spectral(batch, filter, t);
      CHECK(chosen.route ==
            (problem.dim() <= n ? FitRoute::primal : FitRoute::dual));
    }
  }
}

TEST_CASE("pcr fit lies in the top eigenspace and the residual projector is idempotent") {
  CounterRng rng(CounterRng::derive_key(95, 0, 0));
  for (int rep = 0; rep < 20; ++rep) {
    const auto problem = small_problem(rng);
    const long n = problem.dim() + 4 + static_cast<long>(rng.next_u64() % 40);
    const auto batch = draw_batch(problem, n, 4000 + rep);
    const double t = 1.0 + 30.0 * rng.next_uniform();
    const double b = 0.5;
    const auto fit = fit_spectral(batch, FilterSpec::pcr(b), t);

    const Eigen::MatrixXd gram = linalg::gram_primal(batch.design);
    const auto eig = linalg::sym_eig(gram);
    // Components of beta_hat along eigenvectors below the threshold vanish.
    for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
      if (eig.values(i) < b / t) {
        CHECK(std::abs(eig.vectors.col(i).dot(fit.beta_hat)) <= 1e-10);
      }
    }
    // psi_t(S) is a projector: applying it twice equals applying it once.
    Eigen::VectorXd ind(eig.values.size());
    for (Eigen::Index i = 0; i < eig.values.size(); ++i)
      ind(i) = residual_eval(FilterSpec::pcr(b), t, std::max(eig.values(i), 0.0));
    const Eigen::MatrixXd proj =
        eig.vectors * ind.asDiagonal() * eig.vectors.transpose();
    CHECK((proj * proj - proj).norm() <= 1e-10);
  }
}

TEST_CASE("excess risk values") {
  const auto sp = make_explicit_spectrum({1.0, 0.25});
  const auto problem = make_problem(sp, make_explicit_signal(sp, {0.3, -0.7}), 1.0);
  SpectralFit fit;
  fit.beta_hat = Eigen::VectorXd(2);

  SUBCASE("perfect fit") {
    fit.beta_hat << 0.3, -0.7;
    const auto risk = excess_risk(fit, problem, 1);
    CHECK(risk.excess_risk == 0.0);
  }
  SUBCASE("null estimator pays the predictor norm squared") {
    fit.beta_hat << 0.0, 0.0;
    const auto risk = excess_risk(fit, problem, 1);
    const double pn = predictor_norm(problem.spectrum, problem.signal);
    CHECK(risk.excess_risk == doctest::Approx(pn * pn).epsilon(1e-14));
  }
  SUBCASE("hand-computed split") {
    // differences [1, 2]: risk = 1*1 + 0.25*4 = 2, split 1 + 1 at k* = 1.
    fit.beta_hat << 1.3, 1.3;
    const auto risk = excess_risk(fit, problem, 1);
    CHECK(risk.excess_risk == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(risk.risk_head == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(risk.risk_tail == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(risk.excess_risk == risk.risk_head + risk.risk_tail);
  }
}

TEST_CASE("monte carlo summary") {
  const auto sp = make_plateau_spectrum(2, 1.0, 0.05, 8);
  const auto problem = make_problem(sp, make_aligned_signal(sp, 2, 1.0), 0.7);

  SUBCASE("single trial median is that trial's risk") {
    const auto s = run_monte_carlo(problem, FilterSpec::ridge(), 5.0, 0.5, 0.1,
                                   40, 1, 99);
    CHECK(s.median == s.per_trial[0].excess_risk);
    CHECK(s.q10 == s.median);
    CHECK(s.q90 == s.median);
  }
  SUBCASE("null problem risks are all zero") {
    const auto null_problem = make_problem(sp, make_zero_signal(sp), 0.0);
    const auto s = run_monte_carlo(null_problem, FilterSpec::gradient_flow(),
                                   5.0, 0.5, 0.1, 20, 8, 123);
    CHECK(s.median == 0.0);
    CHECK(s.q90 == 0.0);
  }
  SUBCASE("summary is independent of the parallelism degree") {
    MonteCarloOptions serial;
    serial.parallelism = 1;
    MonteCarloOptions threaded;
    threaded.parallelism = 8;
    const auto s1 = run_monte_carlo(problem, FilterSpec::ridge(), 5.0, 0.5,
                                    0.1, 30, 16, 7, serial);
    const auto s2 = run_monte_carlo(problem, FilterSpec::ridge(), 5.0, 0.5,
                                    0.1, 30, 16, 7, threaded);
    CHECK(s1.median == s2.median);
    CHECK(s1.q10 == s2.q10);
    CHECK(s1.q90 == s2.q90);
    CHECK(s1.omega_frequency == s2.omega_frequency);
    for (int i = 0; i < 16; ++i) {
      CHECK(s1.per_trial[i].excess_risk == s2.per_trial[i].excess_risk);
      CHECK(s1.per_trial[i].omega_holds == s2.per_trial[i].omega_holds);
    }
  }
  SUBCASE("head and tail risks sum to the total") {
    const auto s = run_monte_carlo(problem, FilterSpec::ridge(), 5.0, 0.5, 0.1,
                                   30, 8, 21);
    for (const auto& tr : s.per_trial)
      CHECK(tr.excess_risk == tr.risk_head + tr.risk_tail);
  }
}

TEST_CASE("nearest-rank quantiles") {
  const std::vector<double> v{1, 2, 3, 4, 5};
  CHECK(nearest_rank_quantile(v, 0.5) == 3);
  CHECK(nearest_rank_quantile(v, 0.1) == 1);
  CHECK(nearest_rank_quantile(v, 0.9) == 5);
  CHECK(nearest_rank_quantile(v, 1.0) == 5);
  CHECK_THROWS_AS(nearest_rank_quantile({}, 0.5), std::invalid_argument);
}
