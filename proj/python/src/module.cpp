#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "jumpconv/cli.hpp"
#include "jumpconv/config.hpp"
#include "jumpconv/errors.hpp"
#include "jumpconv/verify.hpp"

namespace py = pybind11;
using namespace jumpconv;

namespace {

py::dict report_dict(const InequalityReport& r) {
  py::dict d;
  d["scenario_id"] = r.scenario_id;
  d["mode"] = r.mode;
  d["p"] = r.p;
  d["q"] = r.q;
  d["q_prime"] = r.q_prime;
  d["n_paths"] = r.n_paths;
  d["lhs_mean"] = r.lhs_mean;
  d["lhs_stderr"] = r.lhs_stderr;
  d["rhs_mean"] = r.rhs_mean;
  d["rhs_stderr"] = r.rhs_stderr;
  d["ratio_hat"] = r.ratio_hat;
  d["ratio_ci_lo"] = r.ratio_ci_lo;
  d["ratio_ci_hi"] = r.ratio_ci_hi;
  d["ratio_median_of_means"] = r.ratio_median_of_means;
  return d;
}

ExperimentConfig experiment(const ConvolutionScenario& scn, double q_prime, std::size_t n_paths,
                            std::uint64_t seed, std::optional<double> t_eval, std::optional<double> lambda,
                            unsigned jobs) {
  ExperimentConfig cfg{scn};
  cfg.q_prime = q_prime;
  cfg.n_paths = n_paths;
  cfg.base_seed = seed;
  cfg.t_eval = t_eval;
  cfg.lambda_threshold = lambda;
  cfg.jobs = jobs;
  cfg.validate();
  return cfg;
}

// Returns (times, values) with values of shape (n, d).
py::tuple path_arrays(const CadlagPath& path) {
  const auto& ts = path.times();
  const auto& vs = path.values();
  py::array_t<double> values({ts.size(), path.dim()});
  auto v = values.mutable_unchecked<2>();
  for (std::size_t i = 0; i < ts.size(); ++i)
    for (std::size_t j = 0; j < path.dim(); ++j) v(i, j) = vs[i][static_cast<Eigen::Index>(j)];
  return py::make_tuple(py::array_t<double>(ts.size(), ts.data()), values);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stochastic convolutions driven by marked Poisson random measures";

  auto domain_error = py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<HypothesisError>(m, "HypothesisError", domain_error.ptr());
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<MarkSpace>(m, "MarkSpace")
      .def(py::init<std::vector<double>>(), py::arg("weights"))
      .def(py::init<std::vector<std::string>, std::vector<double>>(), py::arg("names"), py::arg("weights"))
      .def_property_readonly("names", &MarkSpace::names)
      .def_property_readonly("weights", &MarkSpace::weights)
      .def_property_readonly("total_rate", &MarkSpace::total_rate)
      .def("__len__", &MarkSpace::size);

  py::class_<SmoothSpace>(m, "SmoothSpace")
      .def(py::init<std::size_t, double, double, double>(), py::arg("d"), py::arg("r"), py::arg("q"), py::arg("p"))
      .def_property_readonly("d", &SmoothSpace::dim)
      .def_property_readonly("r", &SmoothSpace::r)
      .def_property_readonly("q", &SmoothSpace::q)
      .def_property_readonly("p", &SmoothSpace::p)
      .def("norm", [](const SmoothSpace& sp, const Point& x) { return norm(sp, x); }, py::arg("x"));

  py::class_<Generator>(m, "Generator")
      .def_static("identity", &Generator::identity, py::arg("d"))
      .def_static("diagonal", &Generator::diagonal, py::arg("rates"))
      .def_static("dirichlet_laplacian", &Generator::dirichlet_laplacian, py::arg("d"), py::arg("scale") = 1.0)
      .def_static("dense", &Generator::dense, py::arg("matrix"))
      .def_property_readonly("kind", &Generator::kind_name)
      .def_property_readonly("matrix", &Generator::matrix)
      .def("propagator", &Generator::propagator, py::arg("t"))
      .def("apply", &Generator::apply, py::arg("t"), py::arg("x"));

  py::class_<FieldIntegrand>(m, "FieldIntegrand")
      .def_static("constant", &FieldIntegrand::constant, py::arg("per_mark"))
      .def_static("polynomial", &FieldIntegrand::polynomial, py::arg("coefficients"))
      .def_property_readonly("dim", &FieldIntegrand::dim)
      .def_property_readonly("n_marks", &FieldIntegrand::n_marks)
      .def("__call__", &FieldIntegrand::operator(), py::arg("t"), py::arg("mark"))
      .def("scaled", &FieldIntegrand::scaled, py::arg("c"));

  py::class_<PoissonPath>(m, "PoissonPath")
      .def_property_readonly("horizon", &PoissonPath::horizon)
      .def_property_readonly("seed", &PoissonPath::seed)
      .def_property_readonly("times", [](const PoissonPath& p) {
        std::vector<double> ts;
        for (const auto& e : p.events()) ts.push_back(e.time);
        return ts;
      })
      .def_property_readonly("marks", [](const PoissonPath& p) {
        std::vector<std::size_t> ks;
        for (const auto& e : p.events()) ks.push_back(e.mark);
        return ks;
      })
      .def("__len__", &PoissonPath::size)
      .def("to_csv", [](const PoissonPath& p) {
        std::ostringstream os;
        write_path_csv(os, p);
        return os.str();
      });

  m.def("sample_path", py::overload_cast<const MarkSpace&, double, std::uint64_t>(&sample_path), py::arg("marks"),
        py::arg("horizon"), py::arg("seed"));

  py::class_<ConvolutionScenario>(m, "ConvolutionScenario")
      .def(py::init([](std::string id, MarkSpace ms, SmoothSpace sp, Generator gen, FieldIntegrand xi, double horizon) {
             return ConvolutionScenario(std::move(id), std::move(ms), std::move(sp), std::move(gen), std::move(xi),
                                        horizon);
           }),
           py::arg("id"), py::arg("marks"), py::arg("space"), py::arg("generator"), py::arg("integrand"),
           py::arg("horizon") = 1.0)
      .def_property_readonly("id", &ConvolutionScenario::id)
      .def_property_readonly("marks", &ConvolutionScenario::marks)
      .def_property_readonly("space", &ConvolutionScenario::space)
      .def_property_readonly("horizon", &ConvolutionScenario::horizon)
      .def_property_readonly("integrability", &ConvolutionScenario::integrability)
      .def("with_integrand", &ConvolutionScenario::with_integrand, py::arg("integrand"), py::arg("id") = "");

  m.def(
      "load_scenario",
      [](const std::string& text, const std::string& source) { return parse_config(text, source).scenario(); },
      py::arg("yaml"), py::arg("source") = "<string>", "Builds the scenario described by a YAML config text.");

  m.def(
      "convolve_at", [](const ConvolutionScenario& scn, const PoissonPath& path, double t) {
        return convolve_at(scn, path, t);
      },
      py::arg("scenario"), py::arg("path"), py::arg("t"));
  m.def(
      "convolution_path",
      [](const ConvolutionScenario& scn, const PoissonPath& path) { return path_arrays(convolution_path(scn, path)); },
      py::arg("scenario"), py::arg("path"), "Returns (times, values) on the sample grid and jump times.");
  m.def(
      "strong_solution_residual",
      [](const ConvolutionScenario& scn, const PoissonPath& path) { return strong_solution_residual(scn, path); },
      py::arg("scenario"), py::arg("path"));

  m.def(
      "inequality_report",
      [](const ConvolutionScenario& scn, const std::string& mode, double q_prime, std::size_t n_paths,
         std::uint64_t seed, std::optional<double> t_eval, unsigned jobs) {
        const ExperimentConfig cfg = experiment(scn, q_prime, n_paths, seed, t_eval, {}, jobs);
        InequalityReport r;
        {
          py::gil_scoped_release release;
          r = inequality_report(cfg, parse_mode(mode));
        }
        return report_dict(r);
      },
      py::arg("scenario"), py::arg("mode"), py::arg("q_prime"), py::arg("n_paths") = 1000, py::arg("seed") = 0,
      py::arg("t_eval") = py::none(), py::arg("jobs") = 1);

  m.def(
      "stopped_report",
      [](const ConvolutionScenario& scn, double lambda, std::size_t n_paths, std::uint64_t seed, unsigned jobs) {
        const ExperimentConfig cfg = experiment(scn, scn.space().q(), n_paths, seed, {}, lambda, jobs);
        StoppedReport r;
        {
          py::gil_scoped_release release;
          r = stopped_report(cfg);
        }
        py::dict d = report_dict(r.report);
        d["n_stopped"] = r.n_stopped;
        d["pre_tau_bounded"] = r.pre_tau_bounded;
        d["truncation_bounded"] = r.truncation_bounded;
        d["left_limit_consistent"] = r.left_limit_consistent;
        return d;
      },
      py::arg("scenario"), py::arg("lambda_"), py::arg("n_paths") = 1000, py::arg("seed") = 0, py::arg("jobs") = 1);

  m.def(
      "ito_isometry_report",
      [](const ConvolutionScenario& scn, std::size_t n_paths, std::uint64_t seed, unsigned jobs) {
        const ExperimentConfig cfg = experiment(scn, scn.space().p(), n_paths, seed, {}, {}, jobs);
        IsometryReport r;
        {
          py::gil_scoped_release release;
          r = ito_isometry_report(cfg);
        }
        py::dict d = report_dict(r.report);
        d["hilbert"] = r.hilbert;
        d["z_score"] = r.z_score;
        d["equality_holds"] = r.equality_holds;
        return d;
      },
      py::arg("scenario"), py::arg("n_paths") = 1000, py::arg("seed") = 0, py::arg("jobs") = 1);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the jumpconv command line; returns (exit_code, stdout, stderr).");
}
