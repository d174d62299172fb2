#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "fsd/experiments.hpp"
#include "fsd/simulate.hpp"

namespace py = pybind11;
using namespace fsd;

namespace {

RateBreakdown rate_breakdown_py(const RegressionProblem& problem,
                                const std::string& filter, double t, double b,
                                long n, std::optional<double> box) {
  return rate_breakdown(problem, FilterSpec::parse(filter), t, b, n,
                        box.value_or(default_box(t)));
}

}  // namespace

PYBIND11_MODULE(fsdpy, m) {
  m.doc() = "Spectral regularization estimators, their excess-risk rate "
            "predictions, and seeded Monte Carlo studies.";

  py::class_<SpectrumModel>(m, "SpectrumModel")
      .def_readonly("eigenvalues", &SpectrumModel::eigenvalues)
      .def_readonly("shell_bounds", &SpectrumModel::shell_bounds)
      .def_property_readonly("family", &SpectrumModel::family_name)
      .def("dim", &SpectrumModel::dim);

  py::class_<SignalModel>(m, "SignalModel")
      .def_readonly("coefficients", &SignalModel::coefficients)
      .def("dim", &SignalModel::dim);

  py::class_<RegressionProblem>(m, "RegressionProblem")
      .def(py::init<SpectrumModel, SignalModel, double>(), py::arg("spectrum"),
           py::arg("signal"), py::arg("noise_std"))
      .def_readonly("spectrum", &RegressionProblem::spectrum)
      .def_readonly("signal", &RegressionProblem::signal)
      .def_readonly("noise_std", &RegressionProblem::noise_std);

  m.def("make_power_spectrum", &make_power_spectrum, py::arg("alpha"),
        py::arg("p"));
  m.def("make_plateau_spectrum", &make_plateau_spectrum, py::arg("k"),
        py::arg("sigma"), py::arg("eps"), py::arg("p"));
  m.def("make_multiplateau_spectrum", &make_multiplateau_spectrum,
        py::arg("d"), py::arg("levels"), py::arg("max_dim") = (1L << 22));
  m.def("make_explicit_spectrum", &make_explicit_spectrum,
        py::arg("eigenvalues"));
  m.def("make_sobolev_signal", &make_sobolev_signal, py::arg("spectrum"),
        py::arg("s"), py::arg("delta") = 0.01);
  m.def("make_shell_signal", &make_shell_signal, py::arg("spectrum"),
        py::arg("shell"), py::arg("magnitude"));
  m.def("make_aligned_signal", &make_aligned_signal, py::arg("spectrum"),
        py::arg("head"), py::arg("magnitude"));
  m.def("make_zero_signal", &make_zero_signal, py::arg("spectrum"));
  m.def("make_explicit_signal", &make_explicit_signal, py::arg("spectrum"),
        py::arg("coefficients"));
  m.def("predictor_norm", &predictor_norm, py::arg("spectrum"),
        py::arg("signal"));

  m.def(
      "filter_eval",
      [](const std::string& filter, double t, double x) {
        return filter_eval(FilterSpec::parse(filter), t, x);
      },
      py::arg("filter"), py::arg("t"), py::arg("x"));
  m.def(
      "residual_eval",
      [](const std::string& filter, double t, double x) {
        return residual_eval(FilterSpec::parse(filter), t, x);
      },
      py::arg("filter"), py::arg("t"), py::arg("x"));

  py::class_<EstimationDimension>(m, "EstimationDimension")
      .def_readonly("k_star", &EstimationDimension::k_star)
      .def_readonly("threshold", &EstimationDimension::threshold)
      .def_readonly("degenerate", &EstimationDimension::degenerate);

  m.def(
      "estimation_dimension",
      [](const SpectrumModel& sp, double t, double b) {
        return estimation_dimension(sp, t, b);
      },
      py::arg("spectrum"), py::arg("t"), py::arg("b") = 0.5);
  m.def("effective_rank", &effective_rank, py::arg("spectrum"), py::arg("t"));
  m.def("default_box", &default_box, py::arg("t"));
  m.def(
      "pcr_theta",
      [](const SpectrumModel& sp, double t, double b, double box) {
        return pcr_theta(sp, t, b, box);
      },
      py::arg("spectrum"), py::arg("t"), py::arg("b"), py::arg("box"));

  py::class_<RateBreakdown>(m, "RateBreakdown")
      .def_readonly("bias_head", &RateBreakdown::bias_head)
      .def_readonly("var_head", &RateBreakdown::var_head)
      .def_readonly("align_tail", &RateBreakdown::align_tail)
      .def_readonly("var_tail", &RateBreakdown::var_tail)
      .def_readonly("slack", &RateBreakdown::slack)
      .def_readonly("total", &RateBreakdown::total)
      .def_readonly("k_star", &RateBreakdown::k_star);

  m.def("rate_breakdown", &rate_breakdown_py, py::arg("problem"),
        py::arg("filter"), py::arg("t"), py::arg("b") = 0.5, py::arg("N") = 100,
        py::arg("box") = py::none());

  py::class_<TrialResult>(m, "TrialResult")
      .def_readonly("trial_id", &TrialResult::trial_id)
      .def_readonly("excess_risk", &TrialResult::excess_risk)
      .def_readonly("risk_head", &TrialResult::risk_head)
      .def_readonly("risk_tail", &TrialResult::risk_tail)
      .def_readonly("omega_holds", &TrialResult::omega_holds);

  py::class_<MonteCarloSummary>(m, "MonteCarloSummary")
      .def_readonly("median", &MonteCarloSummary::median)
      .def_readonly("q10", &MonteCarloSummary::q10)
      .def_readonly("q90", &MonteCarloSummary::q90)
      .def_readonly("omega_frequency", &MonteCarloSummary::omega_frequency)
      .def_readonly("k_star", &MonteCarloSummary::k_star)
      .def_readonly("per_trial", &MonteCarloSummary::per_trial);

  m.def(
      "run_monte_carlo",
      [](const RegressionProblem& problem, const std::string& filter, double t,
         double b, std::optional<double> box, long n, int trials,
         std::uint64_t master_seed, int parallelism, bool compute_omega) {
        MonteCarloOptions options;
        options.parallelism = parallelism;
        options.compute_omega = compute_omega;
        return run_monte_carlo(problem, FilterSpec::parse(filter), t, b,
                               box.value_or(default_box(t)), n, trials,
                               master_seed, options);
      },
      py::arg("problem"), py::arg("filter"), py::arg("t"), py::arg("b") = 0.5,
      py::arg("box") = py::none(), py::arg("N") = 100, py::arg("trials") = 100,
      py::arg("master_seed") = 0, py::arg("parallelism") = 1,
      py::arg("compute_omega") = true);

  py::class_<PlateauScenario>(m, "PlateauScenario")
      .def(py::init([](int k, double sigma, double eps, int p, double alpha_star,
                       double noise_std, long n) {
             PlateauScenario sc;
             sc.k = k;
             sc.sigma = sigma;
             sc.eps = eps;
             sc.p = p;
             sc.alpha_star = alpha_star;
             sc.noise_std = noise_std;
             sc.n = n;
             return sc;
           }),
           py::arg("k"), py::arg("sigma"), py::arg("eps"), py::arg("p"),
           py::arg("alpha_star"), py::arg("noise_std"), py::arg("N"))
      .def("snr", &PlateauScenario::snr)
      .def("problem", &PlateauScenario::problem);

  py::class_<PlateauSaturationReport>(m, "PlateauSaturationReport")
      .def_readonly("snr", &PlateauSaturationReport::snr)
      .def_readonly("hypothesis_met", &PlateauSaturationReport::hypothesis_met)
      .def_readonly("min_ridge", &PlateauSaturationReport::min_ridge)
      .def_readonly("min_gf", &PlateauSaturationReport::min_gf)
      .def_readonly("closed_ridge", &PlateauSaturationReport::closed_ridge)
      .def_readonly("closed_gf", &PlateauSaturationReport::closed_gf)
      .def_readonly("verdict_gf_leq_ridge",
                    &PlateauSaturationReport::verdict_gf_leq_ridge);

  m.def("plateau_saturation", &plateau_saturation, py::arg("scenario"),
        py::arg("b") = 0.5, py::arg("box") = 0.05, py::arg("grid_points") = 512);

  py::class_<ExponentFit>(m, "ExponentFit")
      .def_readonly("n_grid", &ExponentFit::n_grid)
      .def_readonly("values", &ExponentFit::values)
      .def_readonly("fitted_slope", &ExponentFit::fitted_slope)
      .def_readonly("slope_valid", &ExponentFit::slope_valid)
      .def_readonly("target_exponent", &ExponentFit::target_exponent);

  py::class_<SobolevStudy>(m, "SobolevStudy")
      .def_readonly("alpha", &SobolevStudy::alpha)
      .def_readonly("s", &SobolevStudy::s)
      .def_readonly("s_effective", &SobolevStudy::s_effective)
      .def_readonly("theory", &SobolevStudy::theory)
      .def_readonly("monte_carlo", &SobolevStudy::monte_carlo);

  m.def(
      "sobolev_study",
      [](double alpha, double s, const std::vector<long>& n_grid, double b,
         std::optional<double> box, const std::string& filter, int mc_trials,
         std::uint64_t master_seed) {
        SobolevOptions options;
        options.mc_trials = mc_trials;
        options.master_seed = master_seed;
        return sobolev_study(alpha, s, n_grid, b, box, FilterSpec::parse(filter),
                             options);
      },
      py::arg("alpha"), py::arg("s"), py::arg("N_grid"), py::arg("b") = 0.5,
      py::arg("box") = py::none(), py::arg("filter") = "ridge",
      py::arg("mc_trials") = 0, py::arg("master_seed") = 0);

  py::class_<PartialOrderVerdict>(m, "PartialOrderVerdict")
      .def_readonly("a_leq_b", &PartialOrderVerdict::a_leq_b)
      .def_readonly("bias_a", &PartialOrderVerdict::bias_a)
      .def_readonly("bias_b", &PartialOrderVerdict::bias_b)
      .def_readonly("bias_ratio", &PartialOrderVerdict::bias_ratio);

  m.def(
      "partial_order_verdict",
      [](const RegressionProblem& problem, const std::string& filter_a,
         const std::string& filter_b, double t, double b, long n,
         std::optional<double> box) {
        return partial_order_verdict(problem, FilterSpec::parse(filter_a),
                                     FilterSpec::parse(filter_b), t, b, n,
                                     box.value_or(default_box(t)));
      },
      py::arg("problem"), py::arg("filter_a"), py::arg("filter_b"),
      py::arg("t"), py::arg("b") = 0.5, py::arg("N") = 100,
      py::arg("box") = py::none());
}
