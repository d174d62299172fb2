#include "fsd/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "fsd/linalg.hpp"
#include "fsd/rng.hpp"

namespace fsd {

DesignDistribution parse_distribution(const std::string& text) {
  if (text == "gaussian") return DesignDistribution::gaussian;
  if (text == "rademacher") return DesignDistribution::rademacher;
  throw std::invalid_argument("distribution: expected gaussian | rademacher");
}

std::string distribution_name(DesignDistribution d) {
  return d == DesignDistribution::gaussian ? "gaussian" : "rademacher";
}

SampleBatch draw_batch(const RegressionProblem& problem, long n,
                       std::uint64_t seed, DesignDistribution distribution) {
  if (n < 1) throw std::invalid_argument("draw_batch: N must be >= 1");
  const int p = problem.dim();
  SampleBatch batch;
  batch.seed = seed;
  batch.distribution = distribution;
  batch.design.resize(n, p);

  std::vector<double> root(p);
  for (int j = 0; j < p; ++j) root[j] = std::sqrt(problem.spectrum.eigenvalues[j]);

  // stream 0 = design, stream 1 = noise
  CounterRng design_rng(CounterRng::derive_key(seed, 0, 0));
  if (distribution == DesignDistribution::gaussian) {
    for (long i = 0; i < n; ++i)
      for (int j = 0; j < p; ++j)
        batch.design(i, j) = root[j] * design_rng.next_gaussian();
  } else {
    for (long i = 0; i < n; ++i)
      for (int j = 0; j < p; ++j)
        batch.design(i, j) = root[j] * design_rng.next_rademacher();
  }

  Eigen::Map<const Eigen::VectorXd> beta(problem.signal.coefficients.data(), p);
  batch.response = batch.design * beta;
  if (problem.noise_std > 0.0) {
    CounterRng noise_rng(CounterRng::derive_key(seed, 0, 1));
    for (long i = 0; i < n; ++i)
      batch.response(i) += problem.noise_std * noise_rng.next_gaussian();
  }
  return batch;
}

namespace {

Eigen::VectorXd apply_filter(const FilterSpec& filter, double t,
                             const Eigen::VectorXd& eigenvalues) {
  Eigen::VectorXd out(eigenvalues.size());
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i)
    out(i) = filter_eval(filter, t, std::max(eigenvalues(i), 0.0));
  return out;
}

}  // namespace

SpectralFit fit_spectral_route(const SampleBatch& batch, const FilterSpec& filter,
                               double t, FitRoute route) {
  validate_tuning(filter, t);
  const long n = batch.design.rows();
  SpectralFit fit;
  fit.filter = filter;
  fit.t = t;
  fit.route = route;
  if (route == FitRoute::primal) {
    const Eigen::MatrixXd gram = linalg::gram_primal(batch.design);
    const auto eig = linalg::sym_eig(gram);
    const Eigen::VectorXd phi = apply_filter(filter, t, eig.values);
    const Eigen::VectorXd g =
        batch.design.transpose() * batch.response / static_cast<double>(n);
    fit.beta_hat =
        eig.vectors * (phi.asDiagonal() * (eig.vectors.transpose() * g));
  } else {
    const Eigen::MatrixXd gram = linalg::gram_dual(batch.design);
    const auto eig = linalg::sym_eig(gram);
    const Eigen::VectorXd phi = apply_filter(filter, t, eig.values);
    const Eigen::VectorXd w =
        phi.asDiagonal() * (eig.vectors.transpose() * batch.response);
    fit.beta_hat =
        batch.design.transpose() * (eig.vectors * w) / static_cast<double>(n);
  }
  return fit;
}

SpectralFit fit_spectral(const SampleBatch& batch, const FilterSpec& filter,
                         double t) {
  const FitRoute route = batch.design.cols() <= batch.design.rows()
                             ? FitRoute::primal
                             : FitRoute::dual;
  return fit_spectral_route(batch, filter, t, route);
}

RiskSplit excess_risk(const SpectralFit& fit, const RegressionProblem& problem,
                      int k_star) {
  const int p = problem.dim();
  if (fit.beta_hat.size() != p)
    throw std::invalid_argument("excess_risk: dimension mismatch");
  if (k_star < 0 || k_star > p)
    throw std::invalid_argument("excess_risk: k_star out of range");
  RiskSplit out;
  for (int j = 0; j < p; ++j) {
    const double d = fit.beta_hat(j) - problem.signal.coefficients[j];
    const double term = problem.spectrum.eigenvalues[j] * d * d;
    if (j < k_star)
      out.risk_head += term;
    else
      out.risk_tail += term;
  }
  out.excess_risk = out.risk_head + out.risk_tail;
  return out;
}

std::uint64_t trial_seed(std::uint64_t master_seed, int trial_id) {
  return CounterRng::derive_key(master_seed, static_cast<std::uint64_t>(trial_id), 0);
}

double nearest_rank_quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty())
    throw std::invalid_argument("nearest_rank_quantile: empty sample");
  if (!(q > 0.0 && q <= 1.0))
    throw std::invalid_argument("nearest_rank_quantile: q must be in (0, 1]");
  const std::size_t n = sorted.size();
  std::size_t rank = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(n)));
  rank = std::min(std::max<std::size_t>(rank, 1), n);
  return sorted[rank - 1];
}

MonteCarloSummary run_monte_carlo(const RegressionProblem& problem,
                                  const FilterSpec& filter, double t, double b,
                                  double box, long n, int trials,
                                  std::uint64_t master_seed,
                                  const MonteCarloOptions& options) {
  if (trials < 1) throw std::invalid_argument("run_monte_carlo: trials must be >= 1");
  const auto ed = estimation_dimension(problem.spectrum, t, b);

  MonteCarloSummary summary;
  summary.k_star = ed.k_star;
  summary.omega_evaluated = options.compute_omega;
  summary.per_trial.assign(trials, {});

  auto run_trial = [&](int trial) {
    const std::uint64_t seed = trial_seed(master_seed, trial);
    const SampleBatch batch = draw_batch(problem, n, seed, options.distribution);
    const SpectralFit fit = fit_spectral(batch, filter, t);
    const RiskSplit risk = excess_risk(fit, problem, ed.k_star);
    TrialResult& result = summary.per_trial[trial];
    result.trial_id = trial;
    result.excess_risk = risk.excess_risk;
    result.risk_head = risk.risk_head;
    result.risk_tail = risk.risk_tail;
    if (options.compute_omega) {
      const Eigen::MatrixXd sample_cov = linalg::gram_primal(batch.design);
      const auto om = omega_statistic(sample_cov, problem.spectrum, t, box);
      result.omega_evaluated = true;
      result.omega_holds = om.holds;
    }
  };

  const int workers = std::max(1, std::min(options.parallelism, trials));
  if (workers == 1) {
    for (int i = 0; i < trials; ++i) run_trial(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int i = next.fetch_add(1); i < trials; i = next.fetch_add(1))
          run_trial(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  std::vector<double> risks(trials);
  int held = 0;
  for (int i = 0; i < trials; ++i) {
    risks[i] = summary.per_trial[i].excess_risk;
    if (summary.per_trial[i].omega_holds) ++held;
  }
  std::sort(risks.begin(), risks.end());
  summary.median = nearest_rank_quantile(risks, 0.5);
  summary.q10 = nearest_rank_quantile(risks, 0.1);
  summary.q90 = nearest_rank_quantile(risks, 0.9);
  summary.omega_frequency =
      options.compute_omega ? static_cast<double>(held) / trials : 0.0;
  return summary;
}

}  // namespace fsd
