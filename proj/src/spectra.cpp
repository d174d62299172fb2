#include "fsd/spectra.hpp"

#include <cmath>
#include <stdexcept>

namespace fsd {
namespace {

void validate_spectrum(const std::vector<double>& ev) {
  for (std::size_t j = 0; j < ev.size(); ++j) {
    if (!(ev[j] >= 0.0))
      throw std::invalid_argument("spectrum: eigenvalues must be nonnegative");
    if (j > 0 && ev[j] > ev[j - 1])
      throw std::invalid_argument("spectrum: eigenvalues must be nonincreasing");
  }
  if (!ev.empty() && ev.front() > 1.0)
    throw std::invalid_argument("spectrum: operator norm must be <= 1");
}

}  // namespace

std::string SpectrumModel::family_name() const {
  switch (family) {
    case SpectrumFamily::explicit_values: return "explicit";
    case SpectrumFamily::power: return "power";
    case SpectrumFamily::plateau: return "plateau";
    case SpectrumFamily::multiplateau: return "multiplateau";
  }
  return "explicit";
}

SpectrumModel make_explicit_spectrum(std::vector<double> eigenvalues) {
  validate_spectrum(eigenvalues);
  SpectrumModel m;
  m.eigenvalues = std::move(eigenvalues);
  m.family = SpectrumFamily::explicit_values;
  return m;
}

SpectrumModel make_power_spectrum(double alpha, int p) {
  if (!(alpha > 1.0))
    throw std::invalid_argument("power spectrum: alpha must be > 1");
  if (p < 1) throw std::invalid_argument("power spectrum: p must be >= 1");
  SpectrumModel m;
  m.eigenvalues.resize(p);
  for (int j = 1; j <= p; ++j)
    m.eigenvalues[j - 1] = std::pow(static_cast<double>(j), -alpha);
  m.family = SpectrumFamily::power;
  m.power_alpha = alpha;
  return m;
}

SpectrumModel make_plateau_spectrum(int k, double sigma, double eps, int p) {
  if (!(eps > 0.0 && eps < sigma))
    throw std::invalid_argument("plateau spectrum: need 0 < eps < sigma");
  if (!(sigma <= 1.0))
    throw std::invalid_argument("plateau spectrum: sigma must be <= 1");
  if (!(k >= 1 && k < p))
    throw std::invalid_argument("plateau spectrum: need 1 <= k < p");
  SpectrumModel m;
  m.eigenvalues.assign(p, eps);
  for (int j = 0; j < k; ++j) m.eigenvalues[j] = sigma;
  m.family = SpectrumFamily::plateau;
  m.plateau_head = k;
  m.plateau_sigma = sigma;
  m.plateau_eps = eps;
  return m;
}

SpectrumModel make_multiplateau_spectrum(int d, int levels, long max_dim) {
  if (d < 2) throw std::invalid_argument("multiplateau spectrum: d must be >= 2");
  if (levels < 1)
    throw std::invalid_argument("multiplateau spectrum: levels must be >= 1");
  // M_l = M_{l-1} + C(d+l-1, l), accumulated with the multiplicative
  // recurrence C(d+l-1, l) = C(d+l-2, l-1) * (d+l-1) / l.
  std::vector<long> bounds;
  long shell = 1;  // C(d-1, 0)
  long cum = 1;    // M_0
  bounds.push_back(cum);
  for (int l = 1; l <= levels; ++l) {
    shell = shell * (d + l - 1) / l;
    cum += shell;
    bounds.push_back(cum);
    if (cum > max_dim)
      throw std::invalid_argument(
          "multiplateau spectrum: dimension exceeds configured maximum");
  }
  SpectrumModel m;
  m.eigenvalues.reserve(cum);
  double value = 1.0;
  long start = 0;
  for (int l = 0; l <= levels; ++l) {
    const long end = bounds[l];
    for (long j = start; j < end; ++j) m.eigenvalues.push_back(value);
    start = end;
    value /= d;
  }
  m.family = SpectrumFamily::multiplateau;
  m.lattice_dim = d;
  m.shell_count = levels;
  m.shell_bounds = std::move(bounds);
  return m;
}

SignalModel make_sobolev_signal(const SpectrumModel& spectrum, double s,
                                double delta) {
  if (spectrum.family != SpectrumFamily::power)
    throw std::invalid_argument("sobolev signal: requires a power spectrum");
  if (!(s >= 1.0)) throw std::invalid_argument("sobolev signal: s must be >= 1");
  if (!(delta > 0.0))
    throw std::invalid_argument("sobolev signal: delta must be > 0");
  const double expo = spectrum.power_alpha * (s - 1.0) / 2.0 + 0.5 + delta;
  SignalModel sig;
  sig.coefficients.resize(spectrum.dim());
  for (int j = 1; j <= spectrum.dim(); ++j)
    sig.coefficients[j - 1] = std::pow(static_cast<double>(j), -expo);
  return sig;
}

SignalModel make_shell_signal(const SpectrumModel& spectrum, int shell,
                              double magnitude) {
  if (spectrum.family != SpectrumFamily::multiplateau)
    throw std::invalid_argument("shell signal: requires a multiplateau spectrum");
  if (shell < 1 || shell > spectrum.shell_count)
    throw std::invalid_argument("shell signal: shell index out of range");
  SignalModel sig;
  sig.coefficients.assign(spectrum.dim(), 0.0);
  const long lo = spectrum.shell_bounds[shell - 1];  // exclusive
  const long hi = spectrum.shell_bounds[shell];      // inclusive
  for (long j = lo; j < hi; ++j) sig.coefficients[j] = magnitude;
  return sig;
}

SignalModel make_aligned_signal(const SpectrumModel& spectrum, int head,
                                double magnitude) {
  if (head < 0 || head > spectrum.dim())
    throw std::invalid_argument("aligned signal: head count out of range");
  SignalModel sig;
  sig.coefficients.assign(spectrum.dim(), 0.0);
  for (int j = 0; j < head; ++j) sig.coefficients[j] = magnitude;
  return sig;
}

SignalModel make_zero_signal(const SpectrumModel& spectrum) {
  SignalModel sig;
  sig.coefficients.assign(spectrum.dim(), 0.0);
  return sig;
}

SignalModel make_explicit_signal(const SpectrumModel& spectrum,
                                 std::vector<double> coefficients) {
  if (static_cast<int>(coefficients.size()) != spectrum.dim())
    throw std::invalid_argument("signal: length must match spectrum dimension");
  SignalModel sig;
  sig.coefficients = std::move(coefficients);
  return sig;
}

RegressionProblem make_problem(SpectrumModel spectrum, SignalModel signal,
                               double noise_std) {
  if (signal.dim() != spectrum.dim())
    throw std::invalid_argument("problem: spectrum/signal dimension mismatch");
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std))
    throw std::invalid_argument("problem: noise_std must be finite and >= 0");
  return RegressionProblem{std::move(spectrum), std::move(signal), noise_std};
}

double predictor_norm(const SpectrumModel& spectrum, const SignalModel& signal) {
  if (signal.dim() != spectrum.dim())
    throw std::invalid_argument("predictor_norm: dimension mismatch");
  double sum = 0.0;
  for (int j = 0; j < spectrum.dim(); ++j)
    sum += spectrum.eigenvalues[j] * signal.coefficients[j] * signal.coefficients[j];
  return std::sqrt(sum);
}

}  // namespace fsd
