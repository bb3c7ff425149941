#include "dtn/clusters.hpp"
#include "dtn/experiment.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace dtn;

namespace {

Potential potential_from(const std::vector<std::tuple<int, int, int, double>>& terms) {
  std::vector<Monomial> ms;
  for (const auto& [a, b, c, v] : terms) ms.push_back({a, b, c, v});
  return make_potential(ms);
}

}  // namespace

PYBIND11_MODULE(_dtnbands, m) {
  m.doc() = "Dirichlet-to-Neumann cluster spectra on the unit ball";

  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<NumericalGuard>(m, "NumericalGuard", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<DtNMatrix>(m, "DtNMatrix")
      .def_readonly("L", &DtNMatrix::L)
      .def_readonly("J", &DtNMatrix::J)
      .def_readonly("residual", &DtNMatrix::residual)
      .def_readonly("asymmetry", &DtNMatrix::asymmetry)
      .def_property_readonly("matrix", [](const DtNMatrix& A) { return A.A; })
      .def_property_readonly("S", &DtNMatrix::S);

  m.def(
      "assemble",
      [](const std::vector<std::tuple<int, int, int, double>>& terms, int L, int J, double tol) {
        AssembleOptions o;
        o.J = J;
        o.tol = tol;
        py::gil_scoped_release nogil;
        return assemble_dtn(potential_from(terms), L, o);
      },
      py::arg("potential"), py::arg("L"), py::arg("J") = 3, py::arg("tol") = 0.0,
      "Assemble the DtN matrix for a monomial potential [(a, b, c, coeff), ...].");

  m.def(
      "cluster_spectrum",
      [](const DtNMatrix& A, const std::string& route, int k_min, int k_max, int alpha) {
        const ClusterOptions opt{k_min, k_max};
        py::gil_scoped_release nogil;
        const auto s = route == "full" ? full_spectrum_clusters(A, alpha, opt) : averaged_spectrum(A, route == "averaged1" ? 1 : 2, alpha, opt);
        return s.mu;
      },
      py::arg("A"), py::arg("route") = "full", py::arg("k_min") = 5, py::arg("k_max") = -1, py::arg("alpha") = 1,
      "Cluster shifts lambda - k keyed by k; route is 'full', 'averaged1' or 'averaged2'.");

  m.def("constant_oracle", &dtn_constant_oracle, py::arg("c"), py::arg("k"),
        "Exact DtN eigenvalue on degree-k harmonics for the constant potential c.");
  m.def("funk_hecke_eigenvalue", &funk_hecke_eigenvalue, py::arg("k"), py::arg("l"));
  m.def("berezin_kernel", py::overload_cast<const Vec3&, const Vec3&, int>(&berezin_kernel), py::arg("p"),
        py::arg("q"), py::arg("k"));

  m.def(
      "predict",
      [](const std::vector<std::tuple<int, int, int, double>>& terms, const std::string& phi, double kappa,
         const std::string& phi_arg, int delta_sign) {
        const auto q = potential_from(terms);
        const Conventions conv{kappa, phi_arg == "qhat" ? PhiArg::QHat : PhiArg::Q0, delta_sign};
        py::gil_scoped_release nogil;
        const auto jet = symbol_jet(q, std::max(8, 2 * q.lmax + 4), conv);
        const auto r = beta_predict(jet, parse_test_function(phi));
        return std::vector<double>{r.beta0, r.beta1, r.beta2};
      },
      py::arg("potential"), py::arg("phi") = "id", py::arg("kappa") = 0.5, py::arg("phi_arg") = "q0",
      py::arg("delta_sign") = -1, "Predicted (beta0, beta1, beta2) for a test function.");

  m.def(
      "run",
      [](const std::string& command, const std::string& config_json) {
        std::ostringstream log;
        int code;
        {
          py::gil_scoped_release nogil;
          try {
            code = run_command(command, parse_config(nlohmann::json::parse(config_json)), log);
          } catch (const ConfigError& e) {
            log << "config error at " << e.what() << "\n";
            code = kConfigError;
          } catch (const nlohmann::json::parse_error& e) {
            log << "config error at /: " << e.what() << "\n";
            code = kConfigError;
          }
        }
        return py::make_tuple(code, log.str());
      },
      py::arg("command"), py::arg("config_json"),
      "Run a dtnbands command on a JSON config string; returns (exit code, log).");
}
