#include "fsd/config.hpp"

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>

#include "fsd/experiments.hpp"
#include "fsd/filters.hpp"
#include "fsd/linalg.hpp"
#include "fsd/rates.hpp"
#include "fsd/simulate.hpp"

namespace fsd {

using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

void check_keys(const json& obj, const std::string& ctx,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) {
        known = true;
        break;
      }
    if (!known)
      throw ConfigError("unknown key \"" + item.key() + "\" in " + ctx);
  }
}

const json& need(const json& obj, const std::string& ctx, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end())
    throw ConfigError(std::string("missing key \"") + key + "\" in " + ctx);
  return *it;
}

double as_number(const json& j, const std::string& where) {
  if (!j.is_number())
    throw ConfigError("expected a number at " + where);
  return j.get<double>();
}

long as_integer(const json& j, const std::string& where) {
  if (!j.is_number_integer())
    throw ConfigError("expected an integer at " + where);
  return j.get<long>();
}

std::string as_string(const json& j, const std::string& where) {
  if (!j.is_string())
    throw ConfigError("expected a string at " + where);
  return j.get<std::string>();
}

bool as_bool(const json& j, const std::string& where) {
  if (!j.is_boolean())
    throw ConfigError("expected a boolean at " + where);
  return j.get<bool>();
}

std::vector<double> as_number_list(const json& j, const std::string& where) {
  if (!j.is_array())
    throw ConfigError("expected an array at " + where);
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(as_number(v, where + "[]"));
  return out;
}

std::vector<long> as_integer_list(const json& j, const std::string& where) {
  if (!j.is_array())
    throw ConfigError("expected an array at " + where);
  std::vector<long> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(as_integer(v, where + "[]"));
  return out;
}

SpectrumConfig parse_spectrum(const json& j) {
  if (!j.is_object()) throw ConfigError("\"spectrum\" must be an object");
  SpectrumConfig out;
  out.family = as_string(need(j, "spectrum", "family"), "spectrum.family");
  if (out.family == "power") {
    check_keys(j, "spectrum", {"family", "alpha", "p"});
    out.alpha = as_number(need(j, "spectrum", "alpha"), "spectrum.alpha");
    out.p = static_cast<int>(as_integer(need(j, "spectrum", "p"), "spectrum.p"));
  } else if (out.family == "plateau") {
    check_keys(j, "spectrum", {"family", "k", "sigma", "eps", "p"});
    out.k = static_cast<int>(as_integer(need(j, "spectrum", "k"), "spectrum.k"));
    out.sigma = as_number(need(j, "spectrum", "sigma"), "spectrum.sigma");
    out.eps = as_number(need(j, "spectrum", "eps"), "spectrum.eps");
    out.p = static_cast<int>(as_integer(need(j, "spectrum", "p"), "spectrum.p"));
  } else if (out.family == "multiplateau") {
    check_keys(j, "spectrum", {"family", "d", "levels"});
    out.d = static_cast<int>(as_integer(need(j, "spectrum", "d"), "spectrum.d"));
    out.levels = static_cast<int>(
        as_integer(need(j, "spectrum", "levels"), "spectrum.levels"));
  } else if (out.family == "explicit") {
    check_keys(j, "spectrum", {"family", "eigenvalues"});
    out.eigenvalues = as_number_list(need(j, "spectrum", "eigenvalues"),
                                     "spectrum.eigenvalues");
  } else {
    throw ConfigError("spectrum.family must be one of power | plateau | "
                      "multiplateau | explicit");
  }
  return out;
}

SignalConfig parse_signal(const json& j) {
  if (!j.is_object()) throw ConfigError("\"signal\" must be an object");
  SignalConfig out;
  out.kind = as_string(need(j, "signal", "kind"), "signal.kind");
  if (out.kind == "zero") {
    check_keys(j, "signal", {"kind"});
  } else if (out.kind == "sobolev") {
    check_keys(j, "signal", {"kind", "s", "delta"});
    out.s = as_number(need(j, "signal", "s"), "signal.s");
    if (j.contains("delta")) out.delta = as_number(j["delta"], "signal.delta");
  } else if (out.kind == "shell") {
    check_keys(j, "signal", {"kind", "shell", "magnitude"});
    out.shell = static_cast<int>(
        as_integer(need(j, "signal", "shell"), "signal.shell"));
    out.magnitude =
        as_number(need(j, "signal", "magnitude"), "signal.magnitude");
  } else if (out.kind == "aligned") {
    check_keys(j, "signal", {"kind", "head", "magnitude"});
    out.head =
        static_cast<int>(as_integer(need(j, "signal", "head"), "signal.head"));
    out.magnitude =
        as_number(need(j, "signal", "magnitude"), "signal.magnitude");
  } else if (out.kind == "explicit") {
    check_keys(j, "signal", {"kind", "coefficients"});
    out.coefficients = as_number_list(need(j, "signal", "coefficients"),
                                      "signal.coefficients");
  } else {
    throw ConfigError(
        "signal.kind must be one of zero | sobolev | shell | aligned | explicit");
  }
  return out;
}

ProblemConfig parse_problem(const json& j) {
  if (!j.is_object()) throw ConfigError("\"problem\" must be an object");
  if (j.contains("eigenvalues")) {
    // Flat serialized document; the explicit lists carry the run, the family
    // descriptor is validated against them and not echoed separately.
    check_keys(j, "problem",
               {"eigenvalues", "coefficients", "noise_std", "family"});
    ProblemConfig out;
    out.spectrum.family = "explicit";
    out.spectrum.eigenvalues =
        as_number_list(j["eigenvalues"], "problem.eigenvalues");
    if (j.contains("coefficients")) {
      out.signal.kind = "explicit";
      out.signal.coefficients =
          as_number_list(j["coefficients"], "problem.coefficients");
    }
    if (j.contains("noise_std"))
      out.noise_std = as_number(j["noise_std"], "problem.noise_std");
    if (j.contains("family")) {
      const auto rebuilt = problem_from_document(j);  // validates the tag
      (void)rebuilt;
    }
    if (out.signal.kind == "zero") out.signal.coefficients.clear();
    return out;
  }
  check_keys(j, "problem", {"spectrum", "signal", "noise_std"});
  ProblemConfig out;
  out.spectrum = parse_spectrum(need(j, "problem", "spectrum"));
  if (j.contains("signal")) out.signal = parse_signal(j["signal"]);
  if (j.contains("noise_std"))
    out.noise_std = as_number(j["noise_std"], "problem.noise_std");
  return out;
}

GridConfig parse_grid(const json& j, const std::string& ctx) {
  if (!j.is_object()) throw ConfigError("\"" + ctx + "\" must be an object");
  check_keys(j, ctx, {"lo", "hi", "points"});
  GridConfig out;
  out.lo = as_number(need(j, ctx, "lo"), ctx + ".lo");
  out.hi = as_number(need(j, ctx, "hi"), ctx + ".hi");
  if (j.contains("points"))
    out.points = static_cast<int>(as_integer(j["points"], ctx + ".points"));
  if (!(out.lo >= 1.0 && out.hi >= out.lo))
    throw ConfigError(ctx + ": need 1 <= lo <= hi");
  if (out.points < 1) throw ConfigError(ctx + ".points must be >= 1");
  return out;
}

json spectrum_to_json(const SpectrumConfig& c) {
  json j;
  j["family"] = c.family;
  if (c.family == "power") {
    j["alpha"] = c.alpha;
    j["p"] = c.p;
  } else if (c.family == "plateau") {
    j["k"] = c.k;
    j["sigma"] = c.sigma;
    j["eps"] = c.eps;
    j["p"] = c.p;
  } else if (c.family == "multiplateau") {
    j["d"] = c.d;
    j["levels"] = c.levels;
  } else {
    j["eigenvalues"] = c.eigenvalues;
  }
  return j;
}

json signal_to_json(const SignalConfig& c) {
  json j;
  j["kind"] = c.kind;
  if (c.kind == "sobolev") {
    j["s"] = c.s;
    j["delta"] = c.delta;
  } else if (c.kind == "shell") {
    j["shell"] = c.shell;
    j["magnitude"] = c.magnitude;
  } else if (c.kind == "aligned") {
    j["head"] = c.head;
    j["magnitude"] = c.magnitude;
  } else if (c.kind == "explicit") {
    j["coefficients"] = c.coefficients;
  }
  return j;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ExperimentConfig parse_config_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  check_keys(doc, "config",
             {"problem", "filter", "t", "t_grid", "t_window", "b", "box", "N",
              "N_grid", "trials", "master_seed", "parallelism", "c2",
              "distribution", "compute_omega", "grid_points", "sobolev",
              "single_index", "scenario", "compare"});
  ExperimentConfig out;
  if (doc.contains("problem")) out.problem = parse_problem(doc["problem"]);
  if (doc.contains("filter")) {
    out.filter = as_string(doc["filter"], "filter");
    FilterSpec::parse(*out.filter);  // validates name and parameter ranges
  }
  if (doc.contains("t")) {
    out.t = as_number(doc["t"], "t");
    if (!(*out.t >= 1.0)) throw ConfigError("t must satisfy t >= 1");
  }
  if (doc.contains("t_grid")) {
    out.t_grid = as_number_list(doc["t_grid"], "t_grid");
    for (double t : *out.t_grid)
      if (!(t >= 1.0)) throw ConfigError("t_grid entries must satisfy t >= 1");
    if (out.t_grid->empty()) throw ConfigError("t_grid must be nonempty");
  }
  if (doc.contains("t_window"))
    out.t_window = parse_grid(doc["t_window"], "t_window");
  if (doc.contains("b")) {
    out.b = as_number(doc["b"], "b");
    if (!(out.b > 0.0 && out.b < 1.0)) throw ConfigError("b must lie in (0, 1)");
  }
  if (doc.contains("box")) {
    out.box = as_number(doc["box"], "box");
    if (!(*out.box > 0.0 && *out.box < 1.0 / 9.0))
      throw ConfigError("box must lie in (0, 1/9)");
  }
  if (doc.contains("N")) {
    out.n = as_integer(doc["N"], "N");
    if (*out.n < 1) throw ConfigError("N must be >= 1");
  }
  if (doc.contains("N_grid")) {
    out.n_grid = as_integer_list(doc["N_grid"], "N_grid");
    if (out.n_grid->empty()) throw ConfigError("N_grid must be nonempty");
    for (long n : *out.n_grid)
      if (n < 1) throw ConfigError("N_grid entries must be >= 1");
  }
  if (doc.contains("trials")) {
    out.trials = static_cast<int>(as_integer(doc["trials"], "trials"));
    if (out.trials < 1) throw ConfigError("trials must be >= 1");
  }
  if (doc.contains("master_seed")) {
    if (!doc["master_seed"].is_number_unsigned() &&
        !doc["master_seed"].is_number_integer())
      throw ConfigError("expected an integer at master_seed");
    out.master_seed = doc["master_seed"].get<std::uint64_t>();
  }
  if (doc.contains("parallelism")) {
    out.parallelism =
        static_cast<int>(as_integer(doc["parallelism"], "parallelism"));
    if (out.parallelism < 1) throw ConfigError("parallelism must be >= 1");
  }
  if (doc.contains("c2")) {
    out.c2 = as_number(doc["c2"], "c2");
    if (!(out.c2 > 0.0)) throw ConfigError("c2 must be > 0");
  }
  if (doc.contains("distribution")) {
    out.distribution = as_string(doc["distribution"], "distribution");
    parse_distribution(out.distribution);
  }
  if (doc.contains("compute_omega"))
    out.compute_omega = as_bool(doc["compute_omega"], "compute_omega");
  if (doc.contains("grid_points")) {
    out.grid_points =
        static_cast<int>(as_integer(doc["grid_points"], "grid_points"));
    if (out.grid_points < 2) throw ConfigError("grid_points must be >= 2");
  }
  if (doc.contains("sobolev")) {
    const json& j = doc["sobolev"];
    if (!j.is_object()) throw ConfigError("\"sobolev\" must be an object");
    check_keys(j, "sobolev",
               {"alpha", "s", "delta", "noise_std", "mc_trials", "mc_n_cap",
                "mc_dim_cap"});
    SobolevConfig sc;
    sc.alpha = as_number(need(j, "sobolev", "alpha"), "sobolev.alpha");
    sc.s = as_number(need(j, "sobolev", "s"), "sobolev.s");
    if (j.contains("delta")) sc.delta = as_number(j["delta"], "sobolev.delta");
    if (j.contains("noise_std"))
      sc.noise_std = as_number(j["noise_std"], "sobolev.noise_std");
    if (j.contains("mc_trials"))
      sc.mc_trials =
          static_cast<int>(as_integer(j["mc_trials"], "sobolev.mc_trials"));
    if (j.contains("mc_n_cap"))
      sc.mc_n_cap = as_integer(j["mc_n_cap"], "sobolev.mc_n_cap");
    if (j.contains("mc_dim_cap"))
      sc.mc_dim_cap = as_integer(j["mc_dim_cap"], "sobolev.mc_dim_cap");
    if (!(sc.alpha > 1.0)) throw ConfigError("sobolev.alpha must be > 1");
    if (!(sc.s >= 1.0)) throw ConfigError("sobolev.s must be >= 1");
    out.sobolev = sc;
  }
  if (doc.contains("single_index")) {
    const json& j = doc["single_index"];
    if (!j.is_object()) throw ConfigError("\"single_index\" must be an object");
    check_keys(j, "single_index", {"d", "levels", "ie", "magnitude", "noise_std"});
    SingleIndexConfig sc;
    sc.d = static_cast<int>(as_integer(need(j, "single_index", "d"), "single_index.d"));
    sc.levels = static_cast<int>(
        as_integer(need(j, "single_index", "levels"), "single_index.levels"));
    sc.ie = static_cast<int>(as_integer(need(j, "single_index", "ie"), "single_index.ie"));
    if (j.contains("magnitude"))
      sc.magnitude = as_number(j["magnitude"], "single_index.magnitude");
    if (j.contains("noise_std"))
      sc.noise_std = as_number(j["noise_std"], "single_index.noise_std");
    if (sc.ie < 1 || sc.ie > sc.levels)
      throw ConfigError("single_index.ie must lie in [1, levels]");
    out.single_index = sc;
  }
  if (doc.contains("scenario")) {
    const json& j = doc["scenario"];
    if (!j.is_object()) throw ConfigError("\"scenario\" must be an object");
    check_keys(j, "scenario", {"k", "sigma", "eps", "p", "alpha_star", "noise_std"});
    ScenarioConfig sc;
    sc.k = static_cast<int>(as_integer(need(j, "scenario", "k"), "scenario.k"));
    sc.sigma = as_number(need(j, "scenario", "sigma"), "scenario.sigma");
    sc.eps = as_number(need(j, "scenario", "eps"), "scenario.eps");
    sc.p = static_cast<int>(as_integer(need(j, "scenario", "p"), "scenario.p"));
    sc.alpha_star =
        as_number(need(j, "scenario", "alpha_star"), "scenario.alpha_star");
    if (j.contains("noise_std"))
      sc.noise_std = as_number(j["noise_std"], "scenario.noise_std");
    if (!(sc.noise_std > 0.0))
      throw ConfigError("scenario.noise_std must be > 0");
    out.scenario = sc;
  }
  if (doc.contains("compare")) {
    const json& j = doc["compare"];
    if (!j.is_object()) throw ConfigError("\"compare\" must be an object");
    check_keys(j, "compare", {"filter_a", "filter_b"});
    CompareConfig cc;
    cc.filter_a = as_string(need(j, "compare", "filter_a"), "compare.filter_a");
    cc.filter_b = as_string(need(j, "compare", "filter_b"), "compare.filter_b");
    FilterSpec::parse(cc.filter_a);
    FilterSpec::parse(cc.filter_b);
    out.compare = cc;
  }
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config_json(doc);
}

json serialize_config(const ExperimentConfig& c) {
  json j;
  if (c.problem) {
    json p;
    p["spectrum"] = spectrum_to_json(c.problem->spectrum);
    p["signal"] = signal_to_json(c.problem->signal);
    p["noise_std"] = c.problem->noise_std;
    j["problem"] = p;
  }
  if (c.filter) j["filter"] = *c.filter;
  if (c.t) j["t"] = *c.t;
  if (c.t_grid) j["t_grid"] = *c.t_grid;
  if (c.t_window)
    j["t_window"] = {{"lo", c.t_window->lo},
                     {"hi", c.t_window->hi},
                     {"points", c.t_window->points}};
  j["b"] = c.b;
  if (c.box) j["box"] = *c.box;
  if (c.n) j["N"] = *c.n;
  if (c.n_grid) j["N_grid"] = *c.n_grid;
  j["trials"] = c.trials;
  j["master_seed"] = c.master_seed;
  j["parallelism"] = c.parallelism;
  j["c2"] = c.c2;
  j["distribution"] = c.distribution;
  j["compute_omega"] = c.compute_omega;
  j["grid_points"] = c.grid_points;
  if (c.sobolev)
    j["sobolev"] = {{"alpha", c.sobolev->alpha},
                    {"s", c.sobolev->s},
                    {"delta", c.sobolev->delta},
                    {"noise_std", c.sobolev->noise_std},
                    {"mc_trials", c.sobolev->mc_trials},
                    {"mc_n_cap", c.sobolev->mc_n_cap},
                    {"mc_dim_cap", c.sobolev->mc_dim_cap}};
  if (c.single_index)
    j["single_index"] = {{"d", c.single_index->d},
                         {"levels", c.single_index->levels},
                         {"ie", c.single_index->ie},
                         {"magnitude", c.single_index->magnitude},
                         {"noise_std", c.single_index->noise_std}};
  if (c.scenario)
    j["scenario"] = {{"k", c.scenario->k},
                     {"sigma", c.scenario->sigma},
                     {"eps", c.scenario->eps},
                     {"p", c.scenario->p},
                     {"alpha_star", c.scenario->alpha_star},
                     {"noise_std", c.scenario->noise_std}};
  if (c.compare)
    j["compare"] = {{"filter_a", c.compare->filter_a},
                    {"filter_b", c.compare->filter_b}};
  return j;
}

json problem_to_document(const RegressionProblem& problem) {
  json doc;
  doc["eigenvalues"] = problem.spectrum.eigenvalues;
  doc["coefficients"] = problem.signal.coefficients;
  doc["noise_std"] = problem.noise_std;
  json family;
  family["name"] = problem.spectrum.family_name();
  switch (problem.spectrum.family) {
    case SpectrumFamily::power:
      family["alpha"] = problem.spectrum.power_alpha;
      break;
    case SpectrumFamily::plateau:
      family["k"] = problem.spectrum.plateau_head;
      family["sigma"] = problem.spectrum.plateau_sigma;
      family["eps"] = problem.spectrum.plateau_eps;
      break;
    case SpectrumFamily::multiplateau:
      family["d"] = problem.spectrum.lattice_dim;
      family["levels"] = problem.spectrum.shell_count;
      family["shell_bounds"] = problem.spectrum.shell_bounds;
      break;
    case SpectrumFamily::explicit_values:
      break;
  }
  doc["family"] = family;
  return doc;
}

RegressionProblem problem_from_document(const json& doc) {
  if (!doc.is_object()) throw ConfigError("problem document must be an object");
  check_keys(doc, "problem document",
             {"eigenvalues", "coefficients", "noise_std", "family"});
  const auto eigenvalues = as_number_list(
      need(doc, "problem document", "eigenvalues"), "eigenvalues");

  SpectrumModel spectrum;
  if (doc.contains("family") &&
      as_string(need(doc["family"], "family", "name"), "family.name") !=
          "explicit") {
    const json& fam = doc["family"];
    const std::string name = fam["name"].get<std::string>();
    const int p = static_cast<int>(eigenvalues.size());
    if (name == "power") {
      check_keys(fam, "family", {"name", "alpha"});
      spectrum = make_power_spectrum(
          as_number(need(fam, "family", "alpha"), "family.alpha"), p);
    } else if (name == "plateau") {
      check_keys(fam, "family", {"name", "k", "sigma", "eps"});
      spectrum = make_plateau_spectrum(
          static_cast<int>(as_integer(need(fam, "family", "k"), "family.k")),
          as_number(need(fam, "family", "sigma"), "family.sigma"),
          as_number(need(fam, "family", "eps"), "family.eps"), p);
    } else if (name == "multiplateau") {
      check_keys(fam, "family", {"name", "d", "levels", "shell_bounds"});
      spectrum = make_multiplateau_spectrum(
          static_cast<int>(as_integer(need(fam, "family", "d"), "family.d")),
          static_cast<int>(
              as_integer(need(fam, "family", "levels"), "family.levels")));
    } else {
      throw ConfigError("family.name must be one of power | plateau | "
                        "multiplateau | explicit");
    }
    if (spectrum.eigenvalues != eigenvalues)
      throw ConfigError(
          "problem document: eigenvalues disagree with the family descriptor");
  } else {
    spectrum = make_explicit_spectrum(eigenvalues);
  }

  SignalModel signal = doc.contains("coefficients")
                           ? make_explicit_signal(
                                 spectrum, as_number_list(doc["coefficients"],
                                                          "coefficients"))
                           : make_zero_signal(spectrum);
  const double noise_std =
      doc.contains("noise_std") ? as_number(doc["noise_std"], "noise_std") : 0.0;
  return make_problem(std::move(spectrum), std::move(signal), noise_std);
}

RegressionProblem build_problem(const ProblemConfig& config) {
  SpectrumModel spectrum;
  const auto& sc = config.spectrum;
  if (sc.family == "power")
    spectrum = make_power_spectrum(sc.alpha, sc.p);
  else if (sc.family == "plateau")
    spectrum = make_plateau_spectrum(sc.k, sc.sigma, sc.eps, sc.p);
  else if (sc.family == "multiplateau")
    spectrum = make_multiplateau_spectrum(sc.d, sc.levels);
  else
    spectrum = make_explicit_spectrum(sc.eigenvalues);

  SignalModel signal;
  const auto& gc = config.signal;
  if (gc.kind == "zero")
    signal = make_zero_signal(spectrum);
  else if (gc.kind == "sobolev")
    signal = make_sobolev_signal(spectrum, gc.s, gc.delta);
  else if (gc.kind == "shell")
    signal = make_shell_signal(spectrum, gc.shell, gc.magnitude);
  else if (gc.kind == "aligned")
    signal = make_aligned_signal(spectrum, gc.head, gc.magnitude);
  else
    signal = make_explicit_signal(spectrum, gc.coefficients);

  return make_problem(std::move(spectrum), std::move(signal), config.noise_std);
}

namespace {

RegressionProblem need_problem(const ExperimentConfig& c) {
  if (!c.problem) throw ConfigError("this subcommand requires \"problem\"");
  return build_problem(*c.problem);
}

FilterSpec need_filter(const ExperimentConfig& c) {
  if (!c.filter) throw ConfigError("this subcommand requires \"filter\"");
  return FilterSpec::parse(*c.filter);
}

double need_t(const ExperimentConfig& c) {
  if (!c.t) throw ConfigError("this subcommand requires \"t\"");
  return *c.t;
}

long need_n(const ExperimentConfig& c) {
  if (!c.n) throw ConfigError("this subcommand requires \"N\"");
  return *c.n;
}

std::vector<long> need_n_grid(const ExperimentConfig& c) {
  if (c.n_grid) return *c.n_grid;
  if (c.n) return {*c.n};
  throw ConfigError("this subcommand requires \"N_grid\" (or \"N\")");
}

std::vector<double> need_t_grid(const ExperimentConfig& c) {
  if (c.t_grid) return *c.t_grid;
  if (c.t_window)
    return log_grid(c.t_window->lo, c.t_window->hi, c.t_window->points);
  if (c.t) return {*c.t};
  throw ConfigError(
      "this subcommand requires \"t_grid\", \"t_window\" or \"t\"");
}

json rate_to_json(const RateBreakdown& r) {
  return json{{"bias_head", r.bias_head}, {"var_head", r.var_head},
              {"align_tail", r.align_tail}, {"var_tail", r.var_tail},
              {"slack", r.slack},          {"total", r.total}};
}

void add_precondition(json& report, const std::string& name, bool held,
                      const std::string& detail) {
  report["preconditions"].push_back(
      json{{"name", name}, {"held", held}, {"detail", detail}});
}

class CsvBuilder {
 public:
  explicit CsvBuilder(std::string header) { rows_ = std::move(header) + "\n"; }
  template <typename... Ts>
  void row(const Ts&... fields) {
    bool first = true;
    ((rows_ += (first ? "" : ","), rows_ += field_text(fields), first = false),
     ...);
    rows_ += "\n";
  }
  std::string str() const { return rows_; }

 private:
  static std::string field_text(double v) { return format_double(v); }
  static std::string field_text(int v) { return std::to_string(v); }
  static std::string field_text(long v) { return std::to_string(v); }
  static std::string field_text(bool v) { return v ? "1" : "0"; }
  static std::string field_text(const std::string& v) { return v; }
  static std::string field_text(const char* v) { return v; }
  std::string rows_;
};

}  // namespace

const std::vector<std::string>& known_subcommands() {
  static const std::vector<std::string> subs{
      "kstar", "rate",    "theta",        "fit",   "mc",   "sobolev",
      "plateau", "compare", "single-index", "omega", "match"};
  return subs;
}

RunReport run_command(const std::string& subcommand,
                      const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  RunReport run;
  json& report = run.report;
  report["version"] = kVersion;
  report["subcommand"] = subcommand;
  report["config"] = serialize_config(config);
  report["preconditions"] = json::array();
  json results;

  if (subcommand == "kstar") {
    const auto problem = need_problem(config);
    const double t = need_t(config);
    const auto ed = estimation_dimension(problem.spectrum, t, config.b);
    const auto bracket = effective_rank_bracket(problem.spectrum, t, config.b);
    results["k_star"] = ed.k_star;
    results["threshold"] = ed.threshold;
    results["degenerate"] = ed.degenerate;
    results["effective_rank"] = effective_rank(problem.spectrum, t);
    results["bracket"] = {{"lower", bracket.lower}, {"upper", bracket.upper}};
    if (config.n)
      results["k_ridge_reference"] =
          ridge_dimension_reference(problem.spectrum, t, config.b, *config.n);
    add_precondition(report, "nondegenerate_head", !ed.degenerate,
                     "sigma_{k*} > b/t");
    if (ed.degenerate) run.exit_code = 2;
  } else if (subcommand == "rate") {
    const auto problem = need_problem(config);
    const auto filter = need_filter(config);
    const double t = need_t(config);
    const long n = need_n(config);
    const double box = config.box.value_or(default_box(t));
    const auto rate = rate_breakdown(problem, filter, t, config.b, n, box);
    const bool matching =
        matching_condition(problem, filter, t, config.b, n, box, config.c2);
    results["k_star"] = rate.k_star;
    results["threshold"] = rate.threshold;
    results["box"] = box;
    results["terms"] = rate_to_json(rate);
    results["matching_condition"] = matching;
    add_precondition(report, "matching_condition", matching,
                     "slack <= c2 * total");
    if (!matching) run.exit_code = 2;
  } else if (subcommand == "theta") {
    const auto problem = need_problem(config);
    const double t = need_t(config);
    const double box = config.box.value_or(default_box(t));
    const auto ed = estimation_dimension(problem.spectrum, t, config.b);
    const double theta = pcr_theta(problem.spectrum, t, config.b, box);
    results["theta"] = theta;
    results["k_star"] = ed.k_star;
    results["threshold"] = ed.threshold;
    results["box"] = box;
    results["applicable"] = theta > 0.0;
    add_precondition(report, "pcr_spectral_gap", theta > 0.0,
                     "theta > 0 requires a wide k*-th spectral gap");
    if (theta <= 0.0) run.exit_code = 2;
  } else if (subcommand == "fit") {
    const auto problem = need_problem(config);
    const auto filter = need_filter(config);
    const double t = need_t(config);
    const long n = need_n(config);
    const double box = config.box.value_or(default_box(t));
    const auto batch = draw_batch(problem, n, config.master_seed,
                                  parse_distribution(config.distribution));
    const auto fit = fit_spectral(batch, filter, t);
    const auto ed = estimation_dimension(problem.spectrum, t, config.b);
    const auto risk = excess_risk(fit, problem, ed.k_star);
    results["route"] = fit.route == FitRoute::primal ? "primal" : "dual";
    results["k_star"] = ed.k_star;
    results["excess_risk"] = risk.excess_risk;
    results["risk_head"] = risk.risk_head;
    results["risk_tail"] = risk.risk_tail;
    if (config.compute_omega) {
      const auto om = omega_statistic(linalg::gram_primal(batch.design),
                                      problem.spectrum, t, box);
      results["omega"] = {
          {"value", om.value}, {"box", om.box}, {"holds", om.holds}};
    }
  } else if (subcommand == "mc") {
    const auto problem = need_problem(config);
    const auto filter = need_filter(config);
    const double t = need_t(config);
    const long n = need_n(config);
    const double box = config.box.value_or(default_box(t));
    MonteCarloOptions options;
    options.parallelism = config.parallelism;
    options.compute_omega = config.compute_omega;
    options.distribution = parse_distribution(config.distribution);
    const auto summary = run_monte_carlo(problem, filter, t, config.b, box, n,
                                         config.trials, config.master_seed,
                                         options);
    results["median"] = summary.median;
    results["q10"] = summary.q10;
    results["q90"] = summary.q90;
    results["omega_frequency"] = summary.omega_frequency;
    results["omega_evaluated"] = summary.omega_evaluated;
    results["k_star"] = summary.k_star;
    results["trials"] = config.trials;
    results["box"] = box;
    CsvBuilder csv("trial_id,excess_risk,risk_head,risk_tail,omega_holds");
    for (const auto& tr : summary.per_trial)
      csv.row(tr.trial_id, tr.excess_risk, tr.risk_head, tr.risk_tail,
              tr.omega_holds);
    run.csv_files["mc_trials.csv"] = csv.str();
  } else if (subcommand == "sobolev") {
    if (!config.sobolev)
      throw ConfigError("this subcommand requires \"sobolev\"");
    const auto filter = need_filter(config);
    const auto n_grid = need_n_grid(config);
    SobolevOptions options;
    options.delta = config.sobolev->delta;
    options.noise_std = config.sobolev->noise_std;
    options.mc_trials = config.sobolev->mc_trials;
    options.master_seed = config.master_seed;
    options.parallelism = config.parallelism;
    options.mc_n_cap = config.sobolev->mc_n_cap;
    options.mc_dim_cap = config.sobolev->mc_dim_cap;
    const auto study = sobolev_study(config.sobolev->alpha, config.sobolev->s,
                                     n_grid, config.b, config.box, filter,
                                     options);
    results["alpha"] = study.alpha;
    results["s"] = study.s;
    results["s_effective"] = study.s_effective;
    results["target_exponent"] = study.theory.target_exponent;
    results["theory_slope"] = study.theory.fitted_slope;
    results["theory_values"] = study.theory.values;
    if (study.monte_carlo) {
      if (study.monte_carlo->slope_valid)
        results["mc_slope"] = study.monte_carlo->fitted_slope;
      results["mc_values"] = study.monte_carlo->values;
    }
    CsvBuilder csv("N,theory_rate_sq,mc_median_risk");
    for (std::size_t i = 0; i < study.theory.n_grid.size(); ++i) {
      std::string mc = "";
      if (study.monte_carlo)
        for (std::size_t k = 0; k < study.monte_carlo->n_grid.size(); ++k)
          if (study.monte_carlo->n_grid[k] == study.theory.n_grid[i])
            mc = format_double(study.monte_carlo->values[k]);
      csv.row(static_cast<long>(study.theory.n_grid[i]),
              study.theory.values[i], mc);
    }
    run.csv_files["sobolev.csv"] = csv.str();
  } else if (subcommand == "plateau") {
    if (!config.scenario)
      throw ConfigError("this subcommand requires \"scenario\"");
    PlateauScenario scenario;
    scenario.k = config.scenario->k;
    scenario.sigma = config.scenario->sigma;
    scenario.eps = config.scenario->eps;
    scenario.p = config.scenario->p;
    scenario.alpha_star = config.scenario->alpha_star;
    scenario.noise_std = config.scenario->noise_std;
    scenario.n = need_n(config);
    const double box = config.box.value_or(
        default_box(scenario.interval_hi(config.b)));
    const auto rep =
        plateau_saturation(scenario, config.b, box, config.grid_points);
    results["snr"] = rep.snr;
    results["hypothesis_met"] = rep.hypothesis_met;
    results["min_ridge"] = rep.min_ridge;
    results["min_gf"] = rep.min_gf;
    results["closed_ridge"] = rep.closed_ridge;
    results["closed_gf"] = rep.closed_gf;
    results["argmin_t_ridge"] = rep.argmin_t_ridge;
    results["argmin_t_gf"] = rep.argmin_t_gf;
    results["verdict_gf_leq_ridge"] = rep.verdict_gf_leq_ridge;
    add_precondition(report, "snr_window", rep.hypothesis_met,
                     "4 < snr <= b sigma / eps");
    if (!rep.hypothesis_met) run.exit_code = 2;
    const auto grid = log_grid(scenario.interval_lo(config.b),
                               scenario.interval_hi(config.b),
                               config.grid_points);
    const auto problem = scenario.problem();
    const auto ridge_sweep = sweep_rates(problem, FilterSpec::ridge(), config.b,
                                         scenario.n, box, grid);
    const auto gf_sweep = sweep_rates(problem, FilterSpec::gradient_flow(),
                                      config.b, scenario.n, box, grid);
    CsvBuilder csv("t,ridge_total,gf_total");
    for (std::size_t i = 0; i < grid.size(); ++i)
      csv.row(grid[i], ridge_sweep.rates[i].total, gf_sweep.rates[i].total);
    run.csv_files["plateau.csv"] = csv.str();
  } else if (subcommand == "compare") {
    if (!config.compare)
      throw ConfigError("this subcommand requires \"compare\"");
    const auto problem = need_problem(config);
    const double t = need_t(config);
    const long n = need_n(config);
    const double box = config.box.value_or(default_box(t));
    const auto verdict = partial_order_verdict(
        problem, FilterSpec::parse(config.compare->filter_a),
        FilterSpec::parse(config.compare->filter_b), t, config.b, n, box);
    results["filter_a"] = config.compare->filter_a;
    results["filter_b"] = config.compare->filter_b;
    results["a_leq_b"] = verdict.a_leq_b;
    results["bias_a"] = verdict.bias_a;
    results["bias_b"] = verdict.bias_b;
    results["bias_ratio"] = verdict.bias_ratio;
  } else if (subcommand == "single-index") {
    if (!config.single_index)
      throw ConfigError("this subcommand requires \"single_index\"");
    const long n = need_n(config);
    const auto grid = need_t_grid(config);
    const double box =
        config.box.value_or(default_box(grid.empty() ? 1.0 : grid.back()));
    const auto& sc = *config.single_index;
    const auto rep = single_index_barrier(sc.d, sc.levels, sc.ie, sc.magnitude,
                                          sc.noise_std, n, config.b, box, grid);
    results["signal_norm"] = rep.signal_norm;
    results["support_lo"] = rep.support_lo;
    results["support_hi"] = rep.support_hi;
    results["points"] = json::array();
    CsvBuilder csv("t,k_star,regime,align_tail,var_head");
    for (const auto& pt : rep.points) {
      results["points"].push_back(json{{"t", pt.t},
                                       {"k_star", pt.k_star},
                                       {"regime", regime_name(pt.regime)},
                                       {"align_tail", pt.align_tail},
                                       {"var_head", pt.var_head}});
      csv.row(pt.t, pt.k_star, regime_name(pt.regime), pt.align_tail,
              pt.var_head);
    }
    run.csv_files["single_index.csv"] = csv.str();
  } else if (subcommand == "omega") {
    const auto problem = need_problem(config);
    const double t = need_t(config);
    const long n = need_n(config);
    const double box = config.box.value_or(default_box(t));
    const auto rep =
        omega_frequency(problem, t, box, n, config.trials, config.master_seed,
                        parse_distribution(config.distribution));
    results["frequency"] = rep.frequency;
    results["conditional_violations"] = rep.conditional_violations;
    results["trials"] = config.trials;
    results["box"] = box;
    results["effective_rank"] = effective_rank(problem.spectrum, t);
    const bool complexity =
        box * box * static_cast<double>(n) >=
        effective_rank(problem.spectrum, t);
    add_precondition(report, "sample_complexity", complexity,
                     "box^2 N >= effective rank");
    CsvBuilder csv("trial_id,value,holds,sample_op_norm,change_norm_sq");
    for (const auto& d : rep.trials)
      csv.row(d.trial_id, d.value, d.holds, d.sample_op_norm, d.change_norm_sq);
    run.csv_files["omega_trials.csv"] = csv.str();
  } else if (subcommand == "match") {
    const auto problem = need_problem(config);
    const auto filter = need_filter(config);
    const double t = need_t(config);
    const auto n_grid = need_n_grid(config);
    const double box = config.box.value_or(default_box(t));
    const auto rep = bound_matching_study(problem, filter, t, config.b, box,
                                          n_grid, config.trials,
                                          config.master_seed, config.c2,
                                          config.parallelism);
    results["ratio_min"] = rep.ratio_min;
    results["ratio_max"] = rep.ratio_max;
    results["ratio_median"] = rep.ratio_median;
    results["ratio_band"] =
        rep.ratio_min > 0.0 ? rep.ratio_max / rep.ratio_min : 0.0;
    results["k_star"] = rep.k_star;
    results["all_preconditions_ok"] = rep.all_preconditions_ok;
    results["points"] = json::array();
    CsvBuilder csv("N,median_risk,rate_total,ratio,sample_complexity_ok,matching_ok");
    for (const auto& pt : rep.points) {
      results["points"].push_back(
          json{{"N", pt.n},
               {"median_risk", pt.median_risk},
               {"rate_total", pt.rate_total},
               {"ratio", pt.ratio},
               {"sample_complexity_ok", pt.sample_complexity_ok},
               {"matching_ok", pt.matching_ok}});
      csv.row(pt.n, pt.median_risk, pt.rate_total, pt.ratio,
              pt.sample_complexity_ok, pt.matching_ok);
    }
    run.csv_files["match.csv"] = csv.str();
    add_precondition(report, "sample_complexity_and_matching",
                     rep.all_preconditions_ok,
                     "box^2 N >= effective rank and slack <= c2 * total at "
                     "every N");
    if (!rep.all_preconditions_ok) run.exit_code = 2;
  } else {
    throw ConfigError("unknown subcommand \"" + subcommand + "\"");
  }

  report["results"] = results;
  const auto stop = std::chrono::steady_clock::now();
  report["timings"] = {
      {"wall_seconds",
       std::chrono::duration<double>(stop - start).count()}};
  return run;
}

}  // namespace fsd
