#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "fsd/filters.hpp"
#include "fsd/rates.hpp"
#include "fsd/spectra.hpp"

namespace fsd {

enum class DesignDistribution { gaussian, rademacher };

DesignDistribution parse_distribution(const std::string& text);
std::string distribution_name(DesignDistribution d);

/// One synthetic draw y = X beta* + xi with independent coordinates of
/// variance sigma_j. The noise is always Gaussian; only the design law is
/// pluggable.
struct SampleBatch {
  Eigen::MatrixXd design;    // N x p
  Eigen::VectorXd response;  // N
  std::uint64_t seed = 0;
  DesignDistribution distribution = DesignDistribution::gaussian;
};

SampleBatch draw_batch(const RegressionProblem& problem, long n,
                       std::uint64_t seed,
                       DesignDistribution distribution = DesignDistribution::gaussian);

enum class FitRoute { primal, dual };

struct SpectralFit {
  Eigen::VectorXd beta_hat;
  FilterSpec filter;
  double t = 1.0;
  FitRoute route = FitRoute::primal;
};

/// Exact spectral-calculus fit: eigendecompose the smaller Gram matrix
/// (p x p when p <= N, else N x N), apply the filter to its eigenvalues and
/// reconstruct. Eigenvalues are clamped at zero before filtering to absorb
/// eigensolver roundoff.
SpectralFit fit_spectral(const SampleBatch& batch, const FilterSpec& filter,
                         double t);

/// Same fit through a forced route (the two expressions of the estimator).
SpectralFit fit_spectral_route(const SampleBatch& batch, const FilterSpec& filter,
                               double t, FitRoute route);

struct RiskSplit {
  double excess_risk = 0.0;  // sum_j sigma_j (beta_hat_j - beta*_j)^2
  double risk_head = 0.0;    // coordinates 1..k*
  double risk_tail = 0.0;    // coordinates k*+1..p
};

RiskSplit excess_risk(const SpectralFit& fit, const RegressionProblem& problem,
                      int k_star);

struct TrialResult {
  int trial_id = 0;
  double excess_risk = 0.0;
  double risk_head = 0.0;
  double risk_tail = 0.0;
  bool omega_evaluated = false;
  bool omega_holds = false;
};

struct MonteCarloOptions {
  int parallelism = 1;
  /// Evaluating the deviation statistic on the dual route requires the full
  /// p x p sample covariance; skip it for large-p studies.
  bool compute_omega = true;
  DesignDistribution distribution = DesignDistribution::gaussian;
};

struct MonteCarloSummary {
  double median = 0.0;
  double q10 = 0.0;
  double q90 = 0.0;
  double omega_frequency = 0.0;
  bool omega_evaluated = false;
  int k_star = 1;
  std::vector<TrialResult> per_trial;  // ordered by trial id
};

/// Seeded replications; trial i draws from keys derived from
/// (master_seed, i), so summaries are identical for any parallelism degree.
/// Quantiles are nearest-rank.
MonteCarloSummary run_monte_carlo(const RegressionProblem& problem,
                                  const FilterSpec& filter, double t, double b,
                                  double box, long n, int trials,
                                  std::uint64_t master_seed,
                                  const MonteCarloOptions& options = {});

/// Per-trial seed of the splittable scheme (exposed for reproducibility
/// checks).
std::uint64_t trial_seed(std::uint64_t master_seed, int trial_id);

/// Nearest-rank quantile of a sorted sample (q in (0, 1]).
double nearest_rank_quantile(const std::vector<double>& sorted, double q);

}  // namespace fsd
