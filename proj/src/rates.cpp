#include "fsd/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fsd/linalg.hpp"

namespace fsd {

double default_box(double t) {
  return std::min(0.1, 1.0 / (1.0 + std::log(t)));
}

namespace {

void check_t(double t) {
  if (!(t >= 1.0) || !std::isfinite(t))
    throw std::invalid_argument("tuning parameter t must satisfy t >= 1");
}

void check_b(double b) {
  if (!(b > 0.0 && b < 1.0))
    throw std::invalid_argument("threshold parameter b must lie in (0, 1)");
}

void check_box(double box) {
  if (!(box > 0.0 && box < 1.0 / 9.0))
    throw std::invalid_argument("deviation budget box must lie in (0, 1/9)");
}

double tail_trace(const SpectrumModel& spectrum, int k_star) {
  double sum = 0.0;
  for (int j = k_star; j < spectrum.dim(); ++j) sum += spectrum.eigenvalues[j];
  return sum;
}

double tail_trace_sq(const SpectrumModel& spectrum, int k_star) {
  double sum = 0.0;
  for (int j = k_star; j < spectrum.dim(); ++j)
    sum += spectrum.eigenvalues[j] * spectrum.eigenvalues[j];
  return sum;
}

}  // namespace

EstimationDimension estimation_dimension(const SpectrumModel& spectrum,
                                         double t, double b) {
  check_t(t);
  check_b(b);
  if (spectrum.dim() == 0)
    throw std::invalid_argument("estimation_dimension: empty spectrum");
  const double threshold = b / t;
  const int p = spectrum.dim();
  int k_star = p;  // sigma_{p+1} = 0 always clears the threshold
  for (int k = 1; k < p; ++k) {
    if (spectrum.eigenvalues[k] <= threshold) {
      k_star = k;
      break;
    }
  }
  EstimationDimension out;
  out.k_star = k_star;
  out.threshold = threshold;
  out.b = b;
  out.degenerate = spectrum.eigenvalues[k_star - 1] <= threshold;
  return out;
}

double effective_rank(const SpectrumModel& spectrum, double t) {
  check_t(t);
  const double inv_t = 1.0 / t;
  double sum = 0.0;
  for (double s : spectrum.eigenvalues) sum += s / (s + inv_t);
  return sum;
}

EffectiveRankBracket effective_rank_bracket(const SpectrumModel& spectrum,
                                            double t, double b) {
  const auto ed = estimation_dimension(spectrum, t, b);
  const double tail = tail_trace(spectrum, ed.k_star);
  EffectiveRankBracket out;
  out.lower = (b * ed.k_star + t * tail) / (1.0 + b);
  out.upper = ed.k_star + t * tail;
  return out;
}

int ridge_dimension_reference(const SpectrumModel& spectrum, double t, double b,
                              long n) {
  check_t(t);
  check_b(b);
  const int p = spectrum.dim();
  double tail = 0.0;
  for (double s : spectrum.eigenvalues) tail += s;
  for (int k = 1; k <= p; ++k) {
    tail -= spectrum.eigenvalues[k - 1];
    const double next = (k < p) ? spectrum.eigenvalues[k] : 0.0;
    if (next * static_cast<double>(n) <=
        b * (tail + static_cast<double>(n) / t))
      return k;
  }
  return p;
}

RateBreakdown rate_breakdown(const RegressionProblem& problem,
                             const FilterSpec& filter, double t, double b,
                             long n, double box) {
  check_box(box);
  if (n < 1) throw std::invalid_argument("rate_breakdown: N must be >= 1");
  validate_tuning(filter, t);
  const auto& sigma = problem.spectrum.eigenvalues;
  const auto& beta = problem.signal.coefficients;
  const auto ed = estimation_dimension(problem.spectrum, t, b);

  RateBreakdown out;
  out.k_star = ed.k_star;
  out.threshold = ed.threshold;

  double bias_sq = 0.0, slack_sq = 0.0, align_sq = 0.0;
  for (int j = 0; j < ed.k_star; ++j) {
    const double psi = residual_eval(filter, t, sigma[j]);
    bias_sq += sigma[j] * psi * psi * beta[j] * beta[j];
    if (beta[j] != 0.0) {
      if (sigma[j] == 0.0)
        throw std::invalid_argument(
            "rate_breakdown: nonzero head coefficient on a zero eigenvalue "
            "makes the slack term infinite");
      slack_sq += beta[j] * beta[j] / sigma[j];
    }
  }
  for (int j = ed.k_star; j < problem.dim(); ++j)
    align_sq += sigma[j] * beta[j] * beta[j];

  out.bias_head = std::sqrt(bias_sq);
  out.var_head =
      problem.noise_std * std::sqrt(static_cast<double>(ed.k_star) / n);
  out.align_tail = std::sqrt(align_sq);
  out.var_tail = problem.noise_std * t *
                 std::sqrt(tail_trace_sq(problem.spectrum, ed.k_star) / n);
  out.slack = (box / t) * std::sqrt(slack_sq);
  out.total = out.bias_head + out.var_head + out.align_tail + out.var_tail;
  return out;
}

bool matching_condition(const RegressionProblem& problem,
                        const FilterSpec& filter, double t, double b, long n,
                        double box, double c2) {
  if (!(c2 > 0.0)) throw std::invalid_argument("matching_condition: c2 must be > 0");
  const auto rate = rate_breakdown(problem, filter, t, b, n, box);
  return rate.slack <= c2 * rate.total;
}

OmegaStatistic omega_statistic(const Eigen::MatrixXd& sample_covariance,
                               const SpectrumModel& spectrum, double t,
                               double box) {
  check_t(t);
  check_box(box);
  const int p = spectrum.dim();
  if (sample_covariance.rows() != p || sample_covariance.cols() != p)
    throw std::invalid_argument("omega_statistic: dimension mismatch");
  Eigen::VectorXd scale(p);
  const double inv_t = 1.0 / t;
  for (int j = 0; j < p; ++j)
    scale(j) = 1.0 / std::sqrt(spectrum.eigenvalues[j] + inv_t);
  Eigen::MatrixXd m = sample_covariance;
  for (int j = 0; j < p; ++j) m(j, j) -= spectrum.eigenvalues[j];
  m = scale.asDiagonal() * m * scale.asDiagonal();
  OmegaStatistic out;
  out.value = linalg::sym_op_norm(m);
  out.box = box;
  out.holds = out.value <= box;
  return out;
}

OmegaStatistic omega_statistic_diag(const std::vector<double>& sample_diag,
                                    const SpectrumModel& spectrum, double t,
                                    double box) {
  check_t(t);
  check_box(box);
  const int p = spectrum.dim();
  if (static_cast<int>(sample_diag.size()) != p)
    throw std::invalid_argument("omega_statistic: dimension mismatch");
  const double inv_t = 1.0 / t;
  double value = 0.0;
  for (int j = 0; j < p; ++j) {
    const double d = std::abs(sample_diag[j] - spectrum.eigenvalues[j]) /
                     (spectrum.eigenvalues[j] + inv_t);
    value = std::max(value, d);
  }
  OmegaStatistic out;
  out.value = value;
  out.box = box;
  out.holds = value <= box;
  return out;
}

double pcr_theta(const SpectrumModel& spectrum, double t, double b,
                 double box) {
  check_t(t);
  check_b(b);
  if (!(box >= 0.0 && box < 1.0 / 9.0))
    throw std::invalid_argument("pcr_theta: box must lie in [0, 1/9)");
  const auto ed = estimation_dimension(spectrum, t, b);
  const double inv_t = 1.0 / t;
  const double s_k = spectrum.eigenvalues[ed.k_star - 1];
  const double s_next =
      (ed.k_star < spectrum.dim()) ? spectrum.eigenvalues[ed.k_star] : 0.0;
  const double below = ed.threshold - (s_next + box * (s_next + inv_t));
  const double above = (s_k - box * (s_k + inv_t)) - ed.threshold;
  return std::min(below, above);
}

NormBoundsReport deterministic_norm_bounds(const SpectrumModel& spectrum,
                                           double t, double b) {
  const auto ed = estimation_dimension(spectrum, t, b);
  const double inv_t = 1.0 / t;
  NormBoundsReport out;
  out.k_star = ed.k_star;
  out.threshold = ed.threshold;

  double whole = 0.0;
  for (double s : spectrum.eigenvalues)
    whole = std::max(whole, std::sqrt(s / (s + inv_t)));
  out.whole_head = whole;
  if (whole > 1.0 + 1e-12)
    out.violations.push_back("||Sigma^{1/2} Sigma_t^{-1/2}|| exceeds 1");

  double tail = 0.0;
  for (int j = ed.k_star; j < spectrum.dim(); ++j) {
    const double s = spectrum.eigenvalues[j];
    tail = std::max(tail, std::sqrt(s / (s + inv_t)));
  }
  out.tail_contraction = tail;
  if (tail > std::sqrt(b / (1.0 + b)) * (1.0 + 1e-12))
    out.violations.push_back(
        "||Sigma_tail^{1/2} Sigma_t^{-1/2}|| exceeds sqrt(b/(1+b))");

  double head = 0.0;
  for (int j = 0; j < ed.k_star; ++j) {
    const double s = spectrum.eigenvalues[j];
    head = std::max(head, s > 0.0 ? std::sqrt((s + inv_t) / s)
                                  : std::numeric_limits<double>::infinity());
  }
  out.head_expansion = head;
  if (head > std::sqrt((1.0 + b) / b) * (1.0 + 1e-12))
    out.violations.push_back(
        "||Sigma_head^{-1/2} Sigma_t^{1/2}|| exceeds sqrt((1+b)/b)");

  out.head_floor = spectrum.eigenvalues[ed.k_star - 1];
  if (out.head_floor < ed.threshold * (1.0 - 1e-12))
    out.violations.push_back("sigma_{k*} falls below the threshold b/t");
  return out;
}

}  // namespace fsd
