#include "fsd/filters.hpp"

#include <cmath>
#include <stdexcept>

namespace fsd {
namespace {

void validate_spec(const FilterSpec& spec) {
  if (spec.family == FilterFamily::gradient_descent &&
      !(spec.eta > 0.0 && spec.eta < 0.125))
    throw std::invalid_argument("gd step size must satisfy 0 < eta < 1/8");
  if (spec.family == FilterFamily::pcr && !(spec.pcr_b > 0.0 && spec.pcr_b < 1.0))
    throw std::invalid_argument("pcr threshold must satisfy 0 < b < 1");
}

// (1 - e^{-u})/u, series below 1e-4 to avoid cancellation.
double one_minus_exp_over(double u) {
  if (std::abs(u) < 1e-4)
    return 1.0 - u / 2.0 + u * u / 6.0 - u * u * u / 24.0;
  return -std::expm1(-u) / u;
}

// r^n by squaring for integer n >= 0; r may be negative.
double ipow(double r, long n) {
  double acc = 1.0, base = r;
  while (n > 0) {
    if (n & 1) acc *= base;
    base *= base;
    n >>= 1;
  }
  return acc;
}

}  // namespace

double FilterSpec::c1() const {
  switch (family) {
    case FilterFamily::gradient_flow: return 1.0;
    case FilterFamily::ridge: return 1.0;
    case FilterFamily::gradient_descent: return eta / 2.0;
    case FilterFamily::pcr: return 0.0;
  }
  return 0.0;
}

double FilterSpec::C1() const {
  switch (family) {
    case FilterFamily::gradient_flow: return 2.0;
    case FilterFamily::ridge: return 1.0;
    case FilterFamily::gradient_descent: return 2.0;
    case FilterFamily::pcr: return (pcr_b + 1.0) / pcr_b;
  }
  return 1.0;
}

std::string FilterSpec::name() const {
  switch (family) {
    case FilterFamily::gradient_flow: return "gf";
    case FilterFamily::ridge: return "ridge";
    case FilterFamily::gradient_descent: return "gd:" + std::to_string(eta);
    case FilterFamily::pcr: return "pcr:" + std::to_string(pcr_b);
  }
  return "ridge";
}

FilterSpec FilterSpec::gradient_flow() {
  FilterSpec s;
  s.family = FilterFamily::gradient_flow;
  return s;
}

FilterSpec FilterSpec::ridge() {
  FilterSpec s;
  s.family = FilterFamily::ridge;
  return s;
}

FilterSpec FilterSpec::gradient_descent(double eta) {
  FilterSpec s;
  s.family = FilterFamily::gradient_descent;
  s.eta = eta;
  validate_spec(s);
  return s;
}

FilterSpec FilterSpec::pcr(double b) {
  FilterSpec s;
  s.family = FilterFamily::pcr;
  s.pcr_b = b;
  validate_spec(s);
  return s;
}

FilterSpec FilterSpec::parse(const std::string& text) {
  if (text == "gf") return gradient_flow();
  if (text == "ridge") return ridge();
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const std::string head = text.substr(0, colon);
    const std::string arg = text.substr(colon + 1);
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(arg, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("filter: bad numeric parameter in \"" + text + "\"");
    }
    if (used != arg.size())
      throw std::invalid_argument("filter: bad numeric parameter in \"" + text + "\"");
    if (head == "gd") return gradient_descent(value);
    if (head == "pcr") return pcr(value);
  }
  throw std::invalid_argument("filter: unknown name \"" + text +
                              "\" (expected gf | ridge | gd:eta | pcr:b)");
}

void validate_tuning(const FilterSpec& spec, double t) {
  if (!(t >= 1.0) || !std::isfinite(t))
    throw std::invalid_argument("tuning parameter t must satisfy t >= 1");
  if (spec.integer_t_only() && t != std::floor(t))
    throw std::invalid_argument("gd filter requires an integer step count t");
}

double filter_eval(const FilterSpec& spec, double t, double x) {
  validate_spec(spec);
  validate_tuning(spec, t);
  if (!(x >= 0.0)) throw std::invalid_argument("filter_eval: x must be >= 0");
  switch (spec.family) {
    case FilterFamily::gradient_flow:
      return t * one_minus_exp_over(t * x);
    case FilterFamily::ridge:
      return 1.0 / (x + 1.0 / t);
    case FilterFamily::gradient_descent: {
      if (x == 0.0) return spec.eta * t;
      const double u = spec.eta * x;
      if (u < 0.5) {
        // 1 - (1-u)^t via expm1 to keep precision when t*u is small.
        return -std::expm1(t * std::log1p(-u)) / x;
      }
      return (1.0 - ipow(1.0 - u, static_cast<long>(t))) / x;
    }
    case FilterFamily::pcr:
      return (x >= spec.pcr_b / t) ? 1.0 / x : 0.0;
  }
  return 0.0;
}

double residual_eval(const FilterSpec& spec, double t, double x) {
  validate_spec(spec);
  validate_tuning(spec, t);
  if (!(x >= 0.0)) throw std::invalid_argument("residual_eval: x must be >= 0");
  switch (spec.family) {
    case FilterFamily::gradient_flow:
      return std::exp(-t * x);
    case FilterFamily::ridge:
      return 1.0 / (x * t + 1.0);
    case FilterFamily::gradient_descent:
      return ipow(1.0 - spec.eta * x, static_cast<long>(t));
    case FilterFamily::pcr:
      return (x < spec.pcr_b / t) ? 1.0 : 0.0;
  }
  return 0.0;
}

SandwichReport sandwich_check(const FilterSpec& spec, double t,
                              const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("sandwich_check: empty grid");
  SandwichReport report;
  for (double x : grid) {
    if (x < 0.0 || x > 8.0)
      throw std::invalid_argument("sandwich_check: grid point outside [0, 8]");
    const double phi = filter_eval(spec, t, x);
    const double envelope = 1.0 / (x + 1.0 / t);
    double violation = phi - spec.C1() * envelope;
    if (spec.lower_certified())
      violation = std::max(violation, spec.c1() * envelope - phi);
    if (violation > report.max_violation) {
      report.max_violation = violation;
      report.worst_x = x;
    }
  }
  report.max_violation = std::max(report.max_violation, 0.0);
  return report;
}

}  // namespace fsd
