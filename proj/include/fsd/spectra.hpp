#pragma once

#include <optional>
#include <string>
#include <vector>

namespace fsd {

enum class SpectrumFamily { explicit_values, power, plateau, multiplateau };

/// Eigenvalues of the population covariance in its own eigenbasis (taken as
/// the standard basis). Sorted nonincreasing, all nonnegative, largest <= 1.
struct SpectrumModel {
  std::vector<double> eigenvalues;
  SpectrumFamily family = SpectrumFamily::explicit_values;

  // family parameters (meaningful subset depends on `family`)
  double power_alpha = 0.0;
  int plateau_head = 0;
  double plateau_sigma = 0.0;
  double plateau_eps = 0.0;
  int lattice_dim = 0;   // d
  int shell_count = 0;   // L
  /// Cumulative shell boundaries M_0..M_L (multiplateau only); shell l spans
  /// indices (M_{l-1}, M_l] in 1-based terms.
  std::vector<long> shell_bounds;

  int dim() const { return static_cast<int>(eigenvalues.size()); }
  std::string family_name() const;
};

/// Signal coefficients in the eigenbasis of the paired spectrum.
struct SignalModel {
  std::vector<double> coefficients;
  int dim() const { return static_cast<int>(coefficients.size()); }
};

struct RegressionProblem {
  SpectrumModel spectrum;
  SignalModel signal;
  double noise_std = 0.0;

  int dim() const { return spectrum.dim(); }
};

/// Validates sortedness, nonnegativity and the operator-norm cap; throws
/// std::invalid_argument on violation.
SpectrumModel make_explicit_spectrum(std::vector<double> eigenvalues);

/// sigma_j = j^{-alpha}; requires alpha > 1 (slower decay is rejected).
SpectrumModel make_power_spectrum(double alpha, int p);

/// First k eigenvalues equal sigma, the remaining p-k equal eps; requires
/// 0 < eps < sigma <= 1 and 1 <= k < p.
SpectrumModel make_plateau_spectrum(int k, double sigma, double eps, int p);

/// sigma_j = d^{-l} on shell l, where shell l holds C(d+l-1, l) coordinates
/// and shells 0..L are cumulative at M_l = sum_{r<=l} C(d+r-1, r); p = M_L.
SpectrumModel make_multiplateau_spectrum(int d, int levels,
                                         long max_dim = 1L << 22);

/// Source-condition signal for a power spectrum: coefficients
/// j^{-alpha(s-1)/2 - 1/2 - delta}; requires s >= 1 and delta > 0.
SignalModel make_sobolev_signal(const SpectrumModel& spectrum, double s,
                                double delta = 0.01);

/// Constant-magnitude coefficients on one shell of a multiplateau spectrum,
/// zero elsewhere; shell is 1-based in [1, L].
SignalModel make_shell_signal(const SpectrumModel& spectrum, int shell,
                              double magnitude);

/// Constant-magnitude coefficients on the first `head` coordinates, zero
/// elsewhere.
SignalModel make_aligned_signal(const SpectrumModel& spectrum, int head,
                                double magnitude);

SignalModel make_zero_signal(const SpectrumModel& spectrum);
SignalModel make_explicit_signal(const SpectrumModel& spectrum,
                                 std::vector<double> coefficients);

RegressionProblem make_problem(SpectrumModel spectrum, SignalModel signal,
                               double noise_std);

/// ||Sigma^{1/2} beta||_2.
double predictor_norm(const SpectrumModel& spectrum, const SignalModel& signal);

}  // namespace fsd
