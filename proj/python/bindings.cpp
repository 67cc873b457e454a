#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fermobius/asymptotics.hpp"
#include "fermobius/chain_model.hpp"
#include "fermobius/cli.hpp"
#include "fermobius/correlation.hpp"
#include "fermobius/errors.hpp"
#include "fermobius/mobius.hpp"
#include "fermobius/riemann.hpp"

namespace py = pybind11;
using namespace fm;

namespace {

SubsystemSpec subsystem(py::object X, py::object intervals) {
  if (!intervals.is_none()) return make_subsystem(intervals.cast<std::vector<std::pair<long, long>>>());
  if (X.is_none()) throw Error(ErrorKind::Domain, "give X or intervals");
  return single_interval(X.cast<long>());
}

Mode mode_of(const std::string& s, double tol) {
  try {
    return cli::parse_mode(s, tol);
  } catch (const cli::UsageError& e) {
    throw Error(ErrorKind::Domain, e.what());
  }
}

py::dict report_dict(const CriticalityReport& r) {
  py::dict d;
  d["cls"] = std::string(to_string(r.cls));
  d["R"] = r.R;
  d["Q"] = r.Q;
  d["u"] = r.u;
  d["v"] = r.v;
  d["dirac_intervals"] = r.dirac_intervals;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Entanglement of free fermionic chains and Mobius flows";
  py::register_exception<Error>(m, "FermobiusError", PyExc_RuntimeError);

  py::class_<CouplingSet>(m, "CouplingSet")
      .def_readonly("L", &CouplingSet::L)
      .def_readonly("A", &CouplingSet::A)
      .def_readonly("B", &CouplingSet::B)
      .def("a", &CouplingSet::a)
      .def("b", &CouplingSet::b)
      .def("__repr__", [](const CouplingSet& c) { return "<CouplingSet L=" + std::to_string(c.L) + ">"; });

  m.def("couplings", &couplings_from_nonnegative, py::arg("L"), py::arg("A"), py::arg("B"),
        "Chain from A_l, B_l for l = 0..L");
  m.def("couplings_from_fplus", &couplings_from_fplus, py::arg("f"));
  m.def("xydm", &xydm_couplings, py::arg("gamma"), py::arg("s"), py::arg("h"));
  m.def("dispersion", &dispersion, py::arg("chain"), py::arg("theta"));
  m.def("p_coefficients", &p_coefficients, py::arg("chain"));
  m.def("classify", [](const CouplingSet& c) { return report_dict(classify(c)); }, py::arg("chain"));
  m.def("symbol", [](const CouplingSet& c, double th) { return Eigen::Matrix2cd(symbol(c, th).G); },
        py::arg("chain"), py::arg("theta"));

  m.def(
      "correlation_matrix",
      [](const CouplingSet& c, py::object X, py::object intervals, const std::string& mode, double tol) {
        return Eigen::MatrixXcd(build_VX(c, subsystem(X, intervals), mode_of(mode, tol)).V);
      },
      py::arg("chain"), py::arg("X") = py::none(), py::arg("intervals") = py::none(), py::arg("mode") = "thermo",
      py::arg("tol") = 1e-10);
  m.def(
      "spectrum",
      [](const CouplingSet& c, py::object X, py::object intervals, const std::string& mode, double tol) {
        return entanglement_spectrum(build_VX(c, subsystem(X, intervals), mode_of(mode, tol)));
      },
      py::arg("chain"), py::arg("X") = py::none(), py::arg("intervals") = py::none(), py::arg("mode") = "thermo",
      py::arg("tol") = 1e-10);
  m.def("renyi", [](const std::vector<double>& nu, double a) { return renyi(nu, a).S; }, py::arg("nu"),
        py::arg("alpha"));
  m.def(
      "entropy",
      [](const CouplingSet& c, double alpha, py::object X, py::object intervals, const std::string& mode,
         double tol) {
        return entropy(c, subsystem(X, intervals), alpha, mode_of(mode, tol)).S;
      },
      py::arg("chain"), py::arg("alpha"), py::arg("X") = py::none(), py::arg("intervals") = py::none(),
      py::arg("mode") = "thermo", py::arg("tol") = 1e-10);

  py::class_<MobiusMap>(m, "MobiusMap")
      .def(py::init(&make_mobius), py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"))
      .def_readonly("a", &MobiusMap::a)
      .def_readonly("b", &MobiusMap::b)
      .def_readonly("c", &MobiusMap::c)
      .def_readonly("d", &MobiusMap::d)
      .def("inverse", &MobiusMap::inverse)
      .def("preserves_circle", &MobiusMap::preserves_circle, py::arg("tol") = 1e-12)
      .def("__call__", [](const MobiusMap& mm, cd z) { return map_point(mm, z).z; })
      .def("__mul__", [](const MobiusMap& x, const MobiusMap& y) { return x * y; });
  m.def("boost", &boost, py::arg("zeta"));
  m.def("rotation", &rotation, py::arg("phi"));
  m.def("angular_jacobian", &angular_jacobian, py::arg("map"), py::arg("u"));
  m.def(
      "transform", [](const MobiusMap& mm, const CouplingSet& c) { return transform_couplings(mm, c); },
      py::arg("map"), py::arg("chain"));
  m.def(
      "transform_xydm",
      [](double zeta, double g, double s, double h) {
        XYDM p = transform_xydm(zeta, g, s, h);
        return py::make_tuple(p.gamma, p.s, p.h);
      },
      py::arg("zeta"), py::arg("gamma"), py::arg("s"), py::arg("h"));
  m.def(
      "predicted_shift",
      [](double alpha, const MobiusMap& mm, const CouplingSet& c, int P) {
        return predicted_shift(alpha, mm, classify(c), P).delta_S;
      },
      py::arg("alpha"), py::arg("map"), py::arg("chain"), py::arg("P") = 1);
  m.def(
      "flow_scan",
      [](const CouplingSet& c, const std::vector<double>& zetas, double alpha, long X, const std::string& mode,
         int jobs) {
        std::vector<py::dict> out;
        for (const auto& r : entropy_flow_scan(c, zetas, alpha, single_interval(X), mode_of(mode, 1e-10), jobs)) {
          py::dict d;
          d["zeta"] = r.zeta;
          d["S"] = r.S;
          d["dS_numeric"] = r.dS_numeric;
          d["dS_predicted"] = r.dS_predicted;
          d["report"] = report_dict(r.report);
          out.push_back(d);
        }
        return out;
      },
      py::arg("chain"), py::arg("zetas"), py::arg("alpha"), py::arg("X"), py::arg("mode") = "thermo",
      py::arg("jobs") = 1);

  m.def("I_alpha", &I_alpha, py::arg("alpha"));
  m.def("entropy_aef", &entropy_aef, py::arg("u"), py::arg("X"), py::arg("alpha"));
  m.def(
      "closed_form",
      [](const std::string& model, double X, double alpha, double gamma, double s, double h) {
        ClosedFormParams p;
        if (model == "crit_xx") p.model = ClosedFormModel::CritXX;
        else if (model == "ising_line") p.model = ClosedFormModel::IsingLine;
        else if (model == "xx_dm") p.model = ClosedFormModel::XXDM;
        else throw Error(ErrorKind::Domain, "model must be crit_xx, ising_line or xx_dm");
        p.gamma = gamma;
        p.s = s;
        p.h = h;
        return closed_form(p, X, alpha);
      },
      py::arg("model"), py::arg("X"), py::arg("alpha"), py::arg("gamma") = 1.0, py::arg("s") = 0.0,
      py::arg("h") = 0.0);
  m.def("exponent_sum", &exponent_sum, py::arg("P"));

  py::class_<CurveData>(m, "Curve")
      .def_property_readonly("genus", [](const CurveData& d) { return d.curve.g; })
      .def_property_readonly("branch_points", [](const CurveData& d) { return d.curve.z; })
      .def_property_readonly("period_matrix", [](const CurveData& d) { return Eigen::MatrixXcd(d.period.Pi); })
      .def_property_readonly("mu", [](const CurveData& d) { return Eigen::VectorXd(d.ch.mu); })
      .def_property_readonly("nu", [](const CurveData& d) { return Eigen::VectorXd(d.ch.nu); })
      .def_property_readonly("e", [](const CurveData& d) { return Eigen::VectorXd(d.ch.e); })
      .def("log_det", [](const CurveData& d, cd lam, double X) { return dx_lambda(d, lam, X); }, py::arg("lam"),
           py::arg("X"))
      .def("entropy", [](const CurveData& d, double alpha) { return entropy_contour(d, alpha); },
           py::arg("alpha"));
  m.def("curve", [](const CouplingSet& c) { return curve_data(c); }, py::arg("chain"));
  m.def("theta", &theta, py::arg("mu"), py::arg("nu"), py::arg("s"), py::arg("Pi"), py::arg("tol") = 1e-14);
  m.def("genus1_tau", &genus1_tau, py::arg("roots"));
}
