#pragma once

#include <json.hpp>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsd/spectra.hpp"

namespace fsd {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SpectrumConfig {
  std::string family;  // power | plateau | multiplateau | explicit
  double alpha = 2.0;
  int p = 0;
  int k = 1;
  double sigma = 1.0;
  double eps = 0.01;
  int d = 2;
  int levels = 1;
  std::vector<double> eigenvalues;

  bool operator==(const SpectrumConfig&) const = default;
};

struct SignalConfig {
  std::string kind = "zero";  // zero | sobolev | shell | aligned | explicit
  double s = 1.0;
  double delta = 0.01;
  int shell = 1;
  int head = 0;
  double magnitude = 1.0;
  std::vector<double> coefficients;

  bool operator==(const SignalConfig&) const = default;
};

struct ProblemConfig {
  SpectrumConfig spectrum;
  SignalConfig signal;
  double noise_std = 0.0;

  bool operator==(const ProblemConfig&) const = default;
};

struct GridConfig {
  double lo = 1.0;
  double hi = 1.0;
  int points = 512;

  bool operator==(const GridConfig&) const = default;
};

struct SobolevConfig {
  double alpha = 2.0;
  double s = 1.0;
  double delta = 0.01;
  double noise_std = 1.0;
  int mc_trials = 0;
  long mc_n_cap = 4096;
  long mc_dim_cap = 8192;

  bool operator==(const SobolevConfig&) const = default;
};

struct SingleIndexConfig {
  int d = 2;
  int levels = 1;
  int ie = 1;
  double magnitude = 1.0;
  double noise_std = 1.0;

  bool operator==(const SingleIndexConfig&) const = default;
};

struct ScenarioConfig {
  int k = 1;
  double sigma = 1.0;
  double eps = 0.01;
  int p = 2;
  double alpha_star = 1.0;
  double noise_std = 1.0;

  bool operator==(const ScenarioConfig&) const = default;
};

struct CompareConfig {
  std::string filter_a;
  std::string filter_b;

  bool operator==(const CompareConfig&) const = default;
};

/// The validated configuration of one run; optional members are present only
/// when the config sets them, scalar members carry their documented defaults.
struct ExperimentConfig {
  std::optional<ProblemConfig> problem;
  std::optional<std::string> filter;
  std::optional<double> t;
  std::optional<std::vector<double>> t_grid;
  std::optional<GridConfig> t_window;
  double b = 0.5;
  std::optional<double> box;  // absent -> min(0.1, 1/log(e t))
  std::optional<long> n;
  std::optional<std::vector<long>> n_grid;
  int trials = 100;
  std::uint64_t master_seed = 0;
  int parallelism = 1;
  double c2 = 1.0;
  std::string distribution = "gaussian";
  bool compute_omega = true;
  int grid_points = 512;
  std::optional<SobolevConfig> sobolev;
  std::optional<SingleIndexConfig> single_index;
  std::optional<ScenarioConfig> scenario;
  std::optional<CompareConfig> compare;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Strict parse: unknown keys are rejected by name, every value validated.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig parse_config_json(const nlohmann::json& doc);

/// Canonical JSON echo; parse_config(serialize_config(c).dump()) == c.
nlohmann::json serialize_config(const ExperimentConfig& config);

RegressionProblem build_problem(const ProblemConfig& config);

/// Flat problem document: {"eigenvalues": [...], "coefficients": [...],
/// "noise_std": x, "family": {...}}. The CLI accepts this shape wherever a
/// problem is expected, and it is what the library writes.
nlohmann::json problem_to_document(const RegressionProblem& problem);
RegressionProblem problem_from_document(const nlohmann::json& doc);

struct RunReport {
  nlohmann::json report;                       // version, config echo, results, timings
  std::map<std::string, std::string> csv_files;  // name -> contents
  int exit_code = 0;  // 0 ok, 2 hypothesis/applicability flag raised
};

/// Dispatches one CLI subcommand; throws ConfigError when the config lacks a
/// field the subcommand needs.
RunReport run_command(const std::string& subcommand,
                      const ExperimentConfig& config);

const std::vector<std::string>& known_subcommands();

}  // namespace fsd
