// Python bindings of the fraccm core.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "fraccm/bounds.hpp"
#include "fraccm/errors.hpp"
#include "fraccm/hierarchy.hpp"
#include "fraccm/lattice.hpp"
#include "fraccm/scenario.hpp"
#include "fraccm/specfun.hpp"

namespace py = pybind11;
using namespace fraccm;

namespace {

py::dict entry_to_dict(const ChainEntry& e) {
  py::dict d;
  d["n"] = e.n;
  d["t"] = e.t;
  d["max_norm"] = e.max_norm;
  d["min_value"] = e.min_value;
  d["probe_value"] = e.probe_value;
  d["refinement_change"] = e.refinement_change;
  d["symmetry_defect"] = e.symmetry_defect;
  return d;
}

ChainConfig chain_from(const std::string& config_text, const std::optional<std::vector<double>>& times) {
  ChainConfig chain = parse_config(config_text).chain;
  if (times) {
    chain.times = *times;
    chain.validate();
  }
  return chain;
}

RunOptions run_options(const std::optional<std::filesystem::path>& out_dir,
                       const std::optional<std::vector<double>>& times, const std::string& check) {
  RunOptions options;
  options.out_dir = out_dir;
  options.times = times;
  options.check = check;
  return options;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fractional contact-model correlation solver (C++ core)";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<OverflowError>(m, "OverflowError", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
  py::register_exception<MismatchError>(m, "MismatchError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  // ConfigError carries a violation list; surface it as the message.
  static py::exception<ConfigError> config_error(m, "ConfigError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      std::string text;
      for (const auto& v : e.violations()) text += (text.empty() ? "" : "\n") + v;
      py::set_error(config_error, text.c_str());
    }
  });

  m.def("gamma", py::vectorize([](double x) { return fraccm::gamma(x); }), py::arg("x"));
  m.def("rgamma", py::vectorize([](double x) { return rgamma(x); }), py::arg("x"));
  m.def(
      "mittag_leffler",
      [](double alpha, py::array_t<double> z, std::optional<double> beta) -> py::object {
        const Alpha a(alpha);
        if (beta) {
          const double b = *beta;
          return py::vectorize([a, b](double x) { return mittag_leffler_two(a, b, x); })(z);
        }
        return py::vectorize([a](double x) { return mittag_leffler(a, x); })(z);
      },
      py::arg("alpha"), py::arg("z"), py::arg("beta") = py::none(),
      "E_alpha(z), or E_{alpha,beta}(z) when beta is given. Elementwise over z.");
  m.def(
      "wright",
      [](double alpha, py::array_t<double> z) -> py::object {
        const Alpha a(alpha);
        return py::vectorize([a](double x) { return wright(a, x); })(z);
      },
      py::arg("alpha"), py::arg("z"), "Wright density Phi_alpha(z), z >= 0.");
  m.def(
      "wright_moment", [](double alpha, int n) { return wright_moment(Alpha(alpha), n); }, py::arg("alpha"),
      py::arg("n"));

  m.def(
      "correlation_bound",
      [](int n, double t, double alpha, double kappa, double C, double A) {
        return correlation_bound(n, t, BoundParams{Alpha(alpha), kappa, C, A});
      },
      py::arg("n"), py::arg("t"), py::arg("alpha"), py::arg("kappa"), py::arg("C") = 1.0, py::arg("A") = 1.0,
      "Regime bound on sup k_t^(n) for the effective kappa.");
  m.def(
      "regime", [](double kappa) { return to_string(regime_for(kappa)); }, py::arg("kappa"));
  m.def(
      "djrbashian_identity_residual",
      [](double alpha, double z, double lambda, double t) {
        return djrbashian_identity_residual(Alpha(alpha), z, lambda, t);
      },
      py::arg("alpha"), py::arg("z"), py::arg("lam"), py::arg("t"));
  m.def("beta_identity_residual", &beta_identity_residual, py::arg("alpha"), py::arg("beta"), py::arg("t"),
        py::arg("nodes") = 4);

  m.def(
      "solve",
      [](const std::string& config_text, std::optional<std::vector<double>> times) {
        const ChainConfig chain = chain_from(config_text, times);
        ChainSolution solution;
        {
          py::gil_scoped_release release;
          solution = solve_chain(chain);
        }
        py::list rows;
        for (const auto& e : solution.entries) rows.append(entry_to_dict(e));
        return rows;
      },
      py::arg("config_text") = "", py::arg("times") = py::none(),
      "Solve the correlation chain for a config text; one dict per (t, n) row.");
  m.def(
      "bound_report",
      [](const std::string& config_text, std::optional<std::vector<double>> times) {
        const ChainConfig chain = chain_from(config_text, times);
        const BoundParams params = BoundParams::from_chain(chain);
        BoundReport report;
        {
          py::gil_scoped_release release;
          const auto norms = chain_norms(solve_chain(chain));
          report = check_solution_against_bounds(norms, params, regime_for(params.kappa));
        }
        py::list rows;
        for (const auto& r : report.rows) {
          py::dict d;
          d["regime"] = to_string(r.regime);
          d["n"] = r.n;
          d["t"] = r.t;
          d["solver_norm"] = r.solver_norm;
          d["bound"] = r.bound;
          d["ratio"] = r.ratio;
          d["pass"] = r.pass;
          rows.append(d);
        }
        return rows;
      },
      py::arg("config_text") = "", py::arg("times") = py::none());

  m.def(
      "run_solve",
      [](const std::string& config_text, std::optional<std::filesystem::path> out_dir,
         std::optional<std::vector<double>> times) {
        py::gil_scoped_release release;
        return run_solve(parse_config(config_text), run_options(out_dir, times, ""));
      },
      py::arg("config_text") = "", py::arg("out_dir") = py::none(), py::arg("times") = py::none(),
      "Write chain_norms.csv and run_meta.txt; returns the exit code.");
  m.def(
      "run_bounds",
      [](const std::string& config_text, std::optional<std::filesystem::path> out_dir,
         std::optional<std::vector<double>> times) {
        py::gil_scoped_release release;
        return run_bounds(parse_config(config_text), run_options(out_dir, times, ""));
      },
      py::arg("config_text") = "", py::arg("out_dir") = py::none(), py::arg("times") = py::none());
  m.def(
      "run_verify",
      [](const std::string& config_text, std::optional<std::filesystem::path> out_dir, const std::string& check) {
        py::gil_scoped_release release;
        return run_verify(parse_config(config_text), run_options(out_dir, std::nullopt, check));
      },
      py::arg("config_text") = "", py::arg("out_dir") = py::none(), py::arg("check") = "");
  m.def("verify_checks", &verify_check_names);
  m.def("set_thread_count", &set_thread_count, py::arg("threads"));
  m.def("thread_count", &thread_count);
}
