#pragma once

#include <string>
#include <vector>

namespace fsd {

enum class FilterFamily { gradient_flow, ridge, gradient_descent, pcr };

/// A filter family phi_t with residual psi_t(x) = 1 - x phi_t(x) and its
/// certified bracketing constants c1/(x+1/t) <= phi_t(x) <= C1/(x+1/t).
struct FilterSpec {
  FilterFamily family = FilterFamily::ridge;
  double eta = 0.0;          // gradient descent step size, 0 < eta < 1/8
  double pcr_b = 0.5;        // pcr threshold parameter, 0 < b < 1

  double c1() const;
  double C1() const;
  /// PCR certifies only the upper bracket (c1 = 0).
  bool lower_certified() const { return family != FilterFamily::pcr; }
  /// Gradient descent is defined at integer steps only.
  bool integer_t_only() const { return family == FilterFamily::gradient_descent; }

  std::string name() const;

  static FilterSpec gradient_flow();
  static FilterSpec ridge();
  static FilterSpec gradient_descent(double eta);
  static FilterSpec pcr(double b);
  /// Accepts "gf" | "ridge" | "gd:<eta>" | "pcr:<b>".
  static FilterSpec parse(const std::string& text);
};

/// Throws unless t >= 1 (and t integral for gradient descent).
void validate_tuning(const FilterSpec& spec, double t);

/// phi_t(x) for x >= 0; total by the limiting values phi_t(0) = t (gradient
/// flow), eta*t (gradient descent), 0 (pcr).
double filter_eval(const FilterSpec& spec, double t, double x);

/// psi_t(x) = 1 - x phi_t(x) for x >= 0.
double residual_eval(const FilterSpec& spec, double t, double x);

struct SandwichReport {
  double max_violation = 0.0;
  double worst_x = 0.0;
};

/// Largest violation of the c1/C1 bracket over a grid in [0, 8].
SandwichReport sandwich_check(const FilterSpec& spec, double t,
                              const std::vector<double>& grid);

}  // namespace fsd
