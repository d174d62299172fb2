#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "fsd/filters.hpp"
#include "fsd/spectra.hpp"

namespace fsd {

/// Default deviation budget: min(0.1, 1/log(e t)). Always < 1/9.
double default_box(double t);

/// Head dimension k* = min{k in [p] : sigma_{k+1} <= b/t}, with the
/// convention sigma_{p+1} = 0 so k* is always defined.
struct EstimationDimension {
  int k_star = 1;
  double threshold = 0.0;  // b / t
  double b = 0.5;
  /// True when sigma_{k*} <= b/t (possible only for k* = 1): the head carries
  /// no eigenvalue above the threshold and head-side bounds are vacuous.
  bool degenerate = false;
};

EstimationDimension estimation_dimension(const SpectrumModel& spectrum,
                                         double t, double b);

/// Tr(Sigma (Sigma + 1/t I)^{-1}).
double effective_rank(const SpectrumModel& spectrum, double t);

struct EffectiveRankBracket {
  double lower = 0.0;
  double upper = 0.0;
};

/// b k*/(1+b) + t Tr(Sigma_tail)/(1+b) <= effective rank <= k* + t Tr(Sigma_tail).
EffectiveRankBracket effective_rank_bracket(const SpectrumModel& spectrum,
                                            double t, double b);

/// Ridge-specific head dimension min{k : sigma_{k+1} N <= b (Tr(Sigma_{k+1:p}) + N/t)};
/// reported for reference only.
int ridge_dimension_reference(const SpectrumModel& spectrum, double t, double b,
                              long n);

/// The four-term deterministic rate plus the slack term.
struct RateBreakdown {
  double bias_head = 0.0;   // ||Sigma_head^{1/2} psi_t(Sigma) beta_head||
  double var_head = 0.0;    // noise_std sqrt(k*/N)
  double align_tail = 0.0;  // ||Sigma_tail^{1/2} beta_tail||
  double var_tail = 0.0;    // noise_std t sqrt(Tr(Sigma_tail^2)/N)
  double slack = 0.0;       // (box/t) ||Sigma_head^{-1/2} beta_head||
  double total = 0.0;       // sum of the first four terms
  int k_star = 1;
  double threshold = 0.0;
};

RateBreakdown rate_breakdown(const RegressionProblem& problem,
                             const FilterSpec& filter, double t, double b,
                             long n, double box);

/// slack <= c2 * total.
bool matching_condition(const RegressionProblem& problem,
                        const FilterSpec& filter, double t, double b, long n,
                        double box, double c2);

struct OmegaStatistic {
  double value = 0.0;  // ||Sigma_t^{-1/2} (S - Sigma) Sigma_t^{-1/2}||_op
  double box = 0.0;
  bool holds = false;
};

/// Relative deviation of a sample covariance from the population one in the
/// (Sigma + 1/t I) metric.
OmegaStatistic omega_statistic(const Eigen::MatrixXd& sample_covariance,
                               const SpectrumModel& spectrum, double t,
                               double box);

/// Fast path for a diagonal sample covariance.
OmegaStatistic omega_statistic_diag(const std::vector<double>& sample_diag,
                                    const SpectrumModel& spectrum, double t,
                                    double box);

/// Margin between the pcr threshold b/t and the deviation-inflated spectral
/// edges around the k*-th gap; <= 0 means the pcr guarantee does not apply.
double pcr_theta(const SpectrumModel& spectrum, double t, double b, double box);

struct NormBoundsReport {
  double whole_head = 0.0;      // ||Sigma^{1/2} Sigma_t^{-1/2}||, bound 1
  double tail_contraction = 0.0;  // ||Sigma_tail^{1/2} Sigma_t^{-1/2}||, bound sqrt(b/(1+b))
  double head_expansion = 0.0;  // ||Sigma_head^{-1/2} Sigma_t^{1/2}||, bound sqrt((1+b)/b)
  double head_floor = 0.0;      // sigma_{k*}, bound >= b/t
  double threshold = 0.0;
  int k_star = 1;
  std::vector<std::string> violations;  // empty for valid nondegenerate inputs
};

NormBoundsReport deterministic_norm_bounds(const SpectrumModel& spectrum,
                                           double t, double b);

}  // namespace fsd
