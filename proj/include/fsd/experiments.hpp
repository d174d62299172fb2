#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fsd/filters.hpp"
#include "fsd/rates.hpp"
#include "fsd/simulate.hpp"
#include "fsd/spectra.hpp"

namespace fsd {

/// Log-spaced grid with both endpoints included.
std::vector<double> log_grid(double lo, double hi, int points);

struct SweepResult {
  std::vector<double> t_grid;
  std::vector<RateBreakdown> rates;
  int argmin_index = 0;
  double argmin_t = 0.0;
  double min_rate = 0.0;  // rates[argmin].total
};

/// Rate per grid point; argmin by total, ties broken toward smaller t.
SweepResult sweep_rates(const RegressionProblem& problem, const FilterSpec& filter,
                        double b, long n, double box,
                        const std::vector<double>& t_grid);

/// Plateau covariance with a head-aligned constant-magnitude signal.
struct PlateauScenario {
  int k = 1;
  double sigma = 1.0;
  double eps = 0.01;
  int p = 2;
  double alpha_star = 1.0;
  double noise_std = 1.0;
  long n = 100;

  RegressionProblem problem() const;
  /// (||Sigma^{1/2} beta*|| / noise_std) * sigma sqrt(N) / sqrt(Tr(Sigma_tail^2)).
  double snr() const;
  /// Same quantity in closed form: (alpha*/noise) sigma^{3/2} sqrt(kN/(p-k)) / eps.
  double snr_closed_form() const;
  /// Tuning window 1/sigma < t <= b/eps (lower endpoint open).
  double interval_lo(double b) const;
  double interval_hi(double b) const;
};

struct PlateauSaturationReport {
  double snr = 0.0;
  bool hypothesis_met = false;  // 4 < snr <= b sigma / eps
  double min_ridge = 0.0;
  double min_gf = 0.0;
  double argmin_t_ridge = 0.0;
  double argmin_t_gf = 0.0;
  double closed_ridge = 0.0;
  double closed_gf = 0.0;
  bool verdict_gf_leq_ridge = false;
};

/// Grid-minimized rates over the tuning window against their closed forms
/// sigma_xi sqrt(k/N) + (sigma_xi/sigma) eps sqrt((p-k)/N) * (2 sqrt(R) - 1)
/// for ridge and * (1 + log R) for gradient flow.
PlateauSaturationReport plateau_saturation(const PlateauScenario& scenario,
                                           double b, double box,
                                           int grid_points = 512);

struct ExponentFit {
  std::vector<double> n_grid;
  std::vector<double> values;  // squared rates or median risks, one per N
  double fitted_slope = 0.0;   // least squares on log(value) vs log(N)
  bool slope_valid = false;    // a fit needs >= 4 grid points
  double target_exponent = 0.0;
};

struct SobolevStudy {
  double alpha = 2.0;
  double s = 1.0;
  double s_effective = 1.0;  // s for exp-type filters, min(s, 2) for ridge
  ExponentFit theory;
  std::optional<ExponentFit> monte_carlo;
};

struct SobolevOptions {
  double delta = 0.01;          // source-boundary offset of the signal
  double noise_std = 1.0;
  int mc_trials = 0;            // 0 disables the sampled study
  std::uint64_t master_seed = 0;
  int parallelism = 1;
  long mc_dim_cap = 8192;       // ambient-dimension cap for sampled runs
  long mc_n_cap = 4096;         // largest N carried into the sampled study
};

/// Rate exponents on the power-decay source family: per N the tuning is
/// t = N^{alpha/(1 + s_eff alpha)} and the squared total rate is fitted
/// against log N. Requires a geometric N grid with at least 4 points.
SobolevStudy sobolev_study(double alpha, double s,
                           const std::vector<long>& n_grid, double b,
                           std::optional<double> box, const FilterSpec& filter,
                           const SobolevOptions& options = {});

struct PartialOrderVerdict {
  bool a_leq_b = false;
  double bias_a = 0.0;
  double bias_b = 0.0;
  double bias_ratio = 1.0;  // bias_a / bias_b, 1 when both vanish
};

/// Same-t comparison: every rate term except the head bias coincides, so the
/// order reduces to comparing head biases.
PartialOrderVerdict partial_order_verdict(const RegressionProblem& problem,
                                          const FilterSpec& filter_a,
                                          const FilterSpec& filter_b, double t,
                                          double b, long n, double box);

enum class LearningRegime { no_learning, partial, learning };
std::string regime_name(LearningRegime r);

struct SingleIndexPoint {
  double t = 1.0;
  int k_star = 1;
  LearningRegime regime = LearningRegime::no_learning;
  double align_tail = 0.0;
  double var_head = 0.0;
};

struct SingleIndexReport {
  double signal_norm = 0.0;  // ||Sigma^{1/2} beta*||
  long support_lo = 0;       // first supported coordinate (1-based)
  long support_hi = 0;       // last supported coordinate
  std::vector<SingleIndexPoint> points;
};

/// Shell-supported signal on the multi-plateau spectrum: below the support
/// shell no learning occurs (the alignment term carries the whole signal);
/// once k* covers the shell, the head variance pays for its cardinality.
SingleIndexReport single_index_barrier(int d, int levels, int info_exponent,
                                       double magnitude, double noise_std,
                                       long n, double b, double box,
                                       const std::vector<double>& t_grid);

struct OmegaTrialDiag {
  int trial_id = 0;
  double value = 0.0;
  bool holds = false;
  double sample_op_norm = 0.0;      // largest eigenvalue of the sample covariance
  double change_norm_sq = 0.0;      // ||Sigma_t^{1/2} S_t^{-1/2}||^2
  bool lemma_sample_norm_ok = true; // sample_op_norm <= 4 (sigma_1 + 1/t) when holds
  bool lemma_change_norm_ok = true; // change_norm_sq <= 2 when holds
};

struct OmegaFrequencyReport {
  double frequency = 0.0;
  int conditional_violations = 0;  // failures of the two bounds on held trials
  std::vector<OmegaTrialDiag> trials;
};

/// Fraction of seeded draws on which the deviation statistic stays within
/// the budget, with the two conditional operator-norm diagnostics.
OmegaFrequencyReport omega_frequency(const RegressionProblem& problem, double t,
                                     double box, long n, int trials,
                                     std::uint64_t master_seed,
                                     DesignDistribution distribution =
                                         DesignDistribution::gaussian);

struct BoundMatchingPoint {
  long n = 0;
  double median_risk = 0.0;
  double rate_total = 0.0;
  double ratio = 0.0;  // median_risk / rate_total^2
  bool sample_complexity_ok = false;  // box^2 N >= effective rank
  bool matching_ok = false;
};

struct BoundMatchingReport {
  std::vector<BoundMatchingPoint> points;
  double ratio_min = 0.0;
  double ratio_max = 0.0;
  double ratio_median = 0.0;
  int k_star = 1;
  bool all_preconditions_ok = false;
};

/// Stability of median excess risk / squared rate across an N grid.
BoundMatchingReport bound_matching_study(const RegressionProblem& problem,
                                         const FilterSpec& filter, double t,
                                         double b, double box,
                                         const std::vector<long>& n_grid,
                                         int trials, std::uint64_t master_seed,
                                         double c2, int parallelism = 1);

}  // namespace fsd
