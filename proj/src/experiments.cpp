#include "fsd/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fsd/linalg.hpp"

namespace fsd {

std::vector<double> log_grid(double lo, double hi, int points) {
  if (!(lo > 0.0 && hi >= lo))
    throw std::invalid_argument("log_grid: need 0 < lo <= hi");
  if (points < 1) throw std::invalid_argument("log_grid: need >= 1 points");
  std::vector<double> out(points);
  if (points == 1) {
    out[0] = lo;
    return out;
  }
  const double step = (std::log(hi) - std::log(lo)) / (points - 1);
  for (int i = 0; i < points; ++i) out[i] = std::exp(std::log(lo) + step * i);
  out.front() = lo;
  out.back() = hi;
  return out;
}

SweepResult sweep_rates(const RegressionProblem& problem, const FilterSpec& filter,
                        double b, long n, double box,
                        const std::vector<double>& t_grid) {
  if (t_grid.empty()) throw std::invalid_argument("sweep_rates: empty grid");
  SweepResult out;
  out.t_grid = t_grid;
  out.rates.reserve(t_grid.size());
  for (double t : t_grid)
    out.rates.push_back(rate_breakdown(problem, filter, t, b, n, box));
  out.argmin_index = 0;
  for (std::size_t i = 1; i < out.rates.size(); ++i)
    if (out.rates[i].total < out.rates[out.argmin_index].total)
      out.argmin_index = static_cast<int>(i);
  out.argmin_t = out.t_grid[out.argmin_index];
  out.min_rate = out.rates[out.argmin_index].total;
  return out;
}

RegressionProblem PlateauScenario::problem() const {
  auto spectrum = make_plateau_spectrum(k, sigma, eps, p);
  auto signal = make_aligned_signal(spectrum, k, alpha_star);
  return make_problem(std::move(spectrum), std::move(signal), noise_std);
}

double PlateauScenario::snr() const {
  const auto prob = problem();
  const double tail_sq = (p - k) * eps * eps;
  return predictor_norm(prob.spectrum, prob.signal) / noise_std * sigma *
         std::sqrt(static_cast<double>(n)) / std::sqrt(tail_sq);
}

double PlateauScenario::snr_closed_form() const {
  return alpha_star / noise_std * std::pow(sigma, 1.5) / eps *
         std::sqrt(static_cast<double>(k) * n / (p - k));
}

double PlateauScenario::interval_lo(double b) const {
  (void)b;
  // open endpoint t^{-1} < sigma, entered with a relative margin
  return std::max(1.0, (1.0 / sigma) * (1.0 + 1e-9));
}

double PlateauScenario::interval_hi(double b) const { return b / eps; }

PlateauSaturationReport plateau_saturation(const PlateauScenario& scenario,
                                           double b, double box,
                                           int grid_points) {
  if (grid_points < 2)
    throw std::invalid_argument("plateau_saturation: need >= 2 grid points");
  const auto prob = scenario.problem();
  const double lo = scenario.interval_lo(b);
  const double hi = scenario.interval_hi(b);
  if (!(hi >= lo))
    throw std::invalid_argument(
        "plateau_saturation: empty tuning window (b/eps < 1/sigma)");
  const auto grid = log_grid(lo, hi, grid_points);

  PlateauSaturationReport report;
  report.snr = scenario.snr();
  report.hypothesis_met =
      report.snr > 4.0 && report.snr <= b * scenario.sigma / scenario.eps;

  const auto ridge = sweep_rates(prob, FilterSpec::ridge(), b, scenario.n, box, grid);
  const auto gf = sweep_rates(prob, FilterSpec::gradient_flow(), b, scenario.n, box, grid);
  report.min_ridge = ridge.min_rate;
  report.min_gf = gf.min_rate;
  report.argmin_t_ridge = ridge.argmin_t;
  report.argmin_t_gf = gf.argmin_t;

  const double base = scenario.noise_std / scenario.sigma * scenario.eps *
                      std::sqrt((scenario.p - scenario.k) /
                                static_cast<double>(scenario.n));
  const double head = scenario.noise_std *
                      std::sqrt(scenario.k / static_cast<double>(scenario.n));
  const double r = report.snr;
  report.closed_ridge = head + base * (2.0 * std::sqrt(r) - 1.0);
  report.closed_gf = head + base * (1.0 + std::log(r));
  report.verdict_gf_leq_ridge = report.min_gf <= report.min_ridge;
  return report;
}

namespace {

double fit_slope(const std::vector<double>& n_grid,
                 const std::vector<double>& values) {
  const std::size_t m = n_grid.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = std::log(n_grid[i]);
    const double y = std::log(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

void check_geometric(const std::vector<long>& n_grid) {
  if (n_grid.size() < 4)
    throw std::invalid_argument("exponent fit needs a grid of >= 4 points");
  const double ratio = static_cast<double>(n_grid[1]) / n_grid[0];
  for (std::size_t i = 1; i + 1 < n_grid.size(); ++i) {
    const double r = static_cast<double>(n_grid[i + 1]) / n_grid[i];
    if (std::abs(std::log(r) - std::log(ratio)) > 1e-9)
      throw std::invalid_argument("exponent fit requires a geometric N grid");
  }
  if (!(ratio > 1.0))
    throw std::invalid_argument("exponent fit requires an increasing N grid");
}

}  // namespace

SobolevStudy sobolev_study(double alpha, double s,
                           const std::vector<long>& n_grid, double b,
                           std::optional<double> box, const FilterSpec& filter,
                           const SobolevOptions& options) {
  if (!(alpha > 1.0)) throw std::invalid_argument("sobolev_study: alpha must be > 1");
  if (!(s >= 1.0)) throw std::invalid_argument("sobolev_study: s must be >= 1");
  check_geometric(n_grid);

  SobolevStudy study;
  study.alpha = alpha;
  study.s = s;
  study.s_effective =
      filter.family == FilterFamily::ridge ? std::min(s, 2.0) : s;
  const double t_exponent = alpha / (1.0 + study.s_effective * alpha);

  study.theory.n_grid.assign(n_grid.begin(), n_grid.end());
  study.theory.target_exponent =
      -alpha * study.s_effective / (1.0 + study.s_effective * alpha);
  for (long n : n_grid) {
    const double t = std::pow(static_cast<double>(n), t_exponent);
    const long p = std::max(32 * n, 4096L);
    const auto spectrum = make_power_spectrum(alpha, static_cast<int>(p));
    const auto signal = make_sobolev_signal(spectrum, s, options.delta);
    const auto problem = make_problem(spectrum, signal, options.noise_std);
    const double used_box = box.value_or(default_box(t));
    const auto rate = rate_breakdown(problem, filter, t, b, n, used_box);
    study.theory.values.push_back(rate.total * rate.total);
  }
  study.theory.fitted_slope = fit_slope(study.theory.n_grid, study.theory.values);
  study.theory.slope_valid = true;

  if (options.mc_trials > 0) {
    ExponentFit mc;
    mc.target_exponent = study.theory.target_exponent;
    for (long n : n_grid) {
      if (n > options.mc_n_cap) continue;
      const double t = std::pow(static_cast<double>(n), t_exponent);
      const long p = std::min(std::max(32 * n, 4096L), options.mc_dim_cap);
      const auto spectrum = make_power_spectrum(alpha, static_cast<int>(p));
      const auto signal = make_sobolev_signal(spectrum, s, options.delta);
      const auto problem = make_problem(spectrum, signal, options.noise_std);
      const double used_box = box.value_or(default_box(t));
      MonteCarloOptions mc_options;
      mc_options.parallelism = options.parallelism;
      mc_options.compute_omega = false;
      const auto summary =
          run_monte_carlo(problem, filter, t, b, used_box, n,
                          options.mc_trials, options.master_seed, mc_options);
      mc.n_grid.push_back(static_cast<double>(n));
      mc.values.push_back(summary.median);
    }
    if (mc.n_grid.size() >= 4) {
      mc.fitted_slope = fit_slope(mc.n_grid, mc.values);
      mc.slope_valid = true;
    }
    if (!mc.n_grid.empty()) study.monte_carlo = std::move(mc);
  }
  return study;
}

PartialOrderVerdict partial_order_verdict(const RegressionProblem& problem,
                                          const FilterSpec& filter_a,
                                          const FilterSpec& filter_b, double t,
                                          double b, long n, double box) {
  const auto rate_a = rate_breakdown(problem, filter_a, t, b, n, box);
  const auto rate_b = rate_breakdown(problem, filter_b, t, b, n, box);
  PartialOrderVerdict out;
  out.bias_a = rate_a.bias_head;
  out.bias_b = rate_b.bias_head;
  out.a_leq_b = out.bias_a <= out.bias_b;
  if (out.bias_a == out.bias_b)
    out.bias_ratio = 1.0;
  else if (out.bias_b == 0.0)
    out.bias_ratio = std::numeric_limits<double>::infinity();
  else
    out.bias_ratio = out.bias_a / out.bias_b;
  return out;
}

std::string regime_name(LearningRegime r) {
  switch (r) {
    case LearningRegime::no_learning: return "no_learning";
    case LearningRegime::partial: return "partial";
    case LearningRegime::learning: return "learning";
  }
  return "partial";
}

SingleIndexReport single_index_barrier(int d, int levels, int info_exponent,
                                       double magnitude, double noise_std,
                                       long n, double b, double box,
                                       const std::vector<double>& t_grid) {
  if (info_exponent < 1 || info_exponent > levels)
    throw std::invalid_argument(
        "single_index_barrier: information exponent out of range");
  if (t_grid.empty())
    throw std::invalid_argument("single_index_barrier: empty t grid");
  const auto spectrum = make_multiplateau_spectrum(d, levels);
  const auto signal = make_shell_signal(spectrum, info_exponent, magnitude);
  const auto problem = make_problem(spectrum, signal, noise_std);

  SingleIndexReport report;
  report.signal_norm = predictor_norm(problem.spectrum, problem.signal);
  report.support_lo = problem.spectrum.shell_bounds[info_exponent - 1] + 1;
  report.support_hi = problem.spectrum.shell_bounds[info_exponent];

  for (double t : t_grid) {
    const auto rate =
        rate_breakdown(problem, FilterSpec::gradient_flow(), t, b, n, box);
    SingleIndexPoint point;
    point.t = t;
    point.k_star = rate.k_star;
    point.align_tail = rate.align_tail;
    point.var_head = rate.var_head;
    if (rate.k_star < report.support_lo)
      point.regime = LearningRegime::no_learning;
    else if (rate.k_star >= report.support_hi)
      point.regime = LearningRegime::learning;
    else
      point.regime = LearningRegime::partial;
    report.points.push_back(point);
  }
  return report;
}

OmegaFrequencyReport omega_frequency(const RegressionProblem& problem, double t,
                                     double box, long n, int trials,
                                     std::uint64_t master_seed,
                                     DesignDistribution distribution) {
  if (trials < 1)
    throw std::invalid_argument("omega_frequency: trials must be >= 1");
  OmegaFrequencyReport report;
  report.trials.reserve(trials);
  const int p = problem.dim();
  const double inv_t = 1.0 / t;
  const double sigma_1 = p > 0 ? problem.spectrum.eigenvalues[0] : 0.0;

  int held = 0;
  for (int trial = 0; trial < trials; ++trial) {
    const auto batch =
        draw_batch(problem, n, trial_seed(master_seed, trial), distribution);
    const Eigen::MatrixXd sample = linalg::gram_primal(batch.design);
    OmegaTrialDiag diag;
    diag.trial_id = trial;
    const auto om = omega_statistic(sample, problem.spectrum, t, box);
    diag.value = om.value;
    diag.holds = om.holds;

    const auto eig = linalg::sym_eig(sample);
    diag.sample_op_norm = std::max(eig.values(p - 1), 0.0);
    // ||Sigma_t^{1/2} S_t^{-1/2}||^2 = ||Sigma_t^{1/2} S_t^{-1} Sigma_t^{1/2}||.
    Eigen::VectorXd inv_shift(p);
    for (int j = 0; j < p; ++j)
      inv_shift(j) = 1.0 / (std::max(eig.values(j), 0.0) + inv_t);
    Eigen::VectorXd scale(p);
    for (int j = 0; j < p; ++j)
      scale(j) = std::sqrt(problem.spectrum.eigenvalues[j] + inv_t);
    const Eigen::MatrixXd m = scale.asDiagonal() * eig.vectors *
                              inv_shift.asDiagonal() *
                              eig.vectors.transpose() * scale.asDiagonal();
    diag.change_norm_sq = linalg::sym_op_norm(m);

    if (diag.holds) {
      ++held;
      diag.lemma_sample_norm_ok =
          diag.sample_op_norm <= 4.0 * (sigma_1 + inv_t) * (1.0 + 1e-12);
      diag.lemma_change_norm_ok = diag.change_norm_sq <= 2.0 * (1.0 + 1e-12);
      if (!diag.lemma_sample_norm_ok || !diag.lemma_change_norm_ok)
        ++report.conditional_violations;
    }
    report.trials.push_back(diag);
  }
  report.frequency = static_cast<double>(held) / trials;
  return report;
}

BoundMatchingReport bound_matching_study(const RegressionProblem& problem,
                                         const FilterSpec& filter, double t,
                                         double b, double box,
                                         const std::vector<long>& n_grid,
                                         int trials, std::uint64_t master_seed,
                                         double c2, int parallelism) {
  if (n_grid.empty())
    throw std::invalid_argument("bound_matching_study: empty N grid");
  BoundMatchingReport report;
  report.all_preconditions_ok = true;
  const double eff_rank = effective_rank(problem.spectrum, t);
  report.k_star = estimation_dimension(problem.spectrum, t, b).k_star;

  std::vector<double> ratios;
  for (long n : n_grid) {
    BoundMatchingPoint point;
    point.n = n;
    const auto rate = rate_breakdown(problem, filter, t, b, n, box);
    point.rate_total = rate.total;
    point.sample_complexity_ok = box * box * static_cast<double>(n) >= eff_rank;
    point.matching_ok = matching_condition(problem, filter, t, b, n, box, c2);
    report.all_preconditions_ok &=
        point.sample_complexity_ok && point.matching_ok;

    MonteCarloOptions options;
    options.parallelism = parallelism;
    options.compute_omega = false;
    const auto summary = run_monte_carlo(problem, filter, t, b, box, n, trials,
                                         master_seed, options);
    point.median_risk = summary.median;
    if (rate.total > 0.0)
      point.ratio = point.median_risk / (rate.total * rate.total);
    ratios.push_back(point.ratio);
    report.points.push_back(point);
  }
  std::vector<double> sorted = ratios;
  std::sort(sorted.begin(), sorted.end());
  report.ratio_min = sorted.front();
  report.ratio_max = sorted.back();
  report.ratio_median = nearest_rank_quantile(sorted, 0.5);
  return report;
}

}  // namespace fsd
