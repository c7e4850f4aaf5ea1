#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>
#include <string>

#include "lsecbf/cbf.hpp"
#include "lsecbf/config.hpp"
#include "lsecbf/distance.hpp"
#include "lsecbf/errors.hpp"
#include "lsecbf/lse.hpp"
#include "lsecbf/sensitivity.hpp"
#include "lsecbf/set_model.hpp"
#include "lsecbf/simulation.hpp"
#include "lsecbf/trace.hpp"
#include "lsecbf/version.hpp"

namespace py = pybind11;
using namespace lsecbf;

namespace {

SetSpec make_set(const RigidPolytope& poly, double epsilon) {
  return SetSpec(std::make_shared<const RigidPolytope>(poly), SmoothMaxParams{epsilon});
}

py::dict gradient_dict(const DistanceGradient& g) {
  py::dict d;
  d["d_dlambda_ego"] = g.d_dlambda_ego;
  d["d_dlambda_obstacle"] = g.d_dlambda_obstacle;
  d["condition_estimate"] = g.condition_estimate;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.attr("__version__") = std::string(version());

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidInput>(m, "InvalidInput", base.ptr());
  py::register_exception<EmptyInterior>(m, "EmptyInterior", base.ptr());
  py::register_exception<NumericalFailure>(m, "NumericalFailure", base.ptr());
  py::register_exception<SingularJacobian>(m, "SingularJacobian", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  m.def("lse", [](const Eigen::VectorXd& x) { return lse(x); }, py::arg("x"));
  m.def(
      "lse_eps_plus",
      [](const Eigen::VectorXd& x, double epsilon) {
        const LseEval e = lse_eps_plus(x, {epsilon});
        py::dict d;
        d["value"] = e.value;
        d["excess"] = e.excess;
        d["gradient"] = e.gradient;
        d["hessian"] = e.hessian;
        d["zero_weight"] = e.zero_weight;
        d["hessian_min_eigenvalue"] = hessian_min_eigenvalue(e);
        return d;
      },
      py::arg("x"), py::arg("epsilon"),
      "Smoothed max(0, max x) with gradient and Hessian, returned as a dict.");
  m.def(
      "hessian_min_eigenvalue", [](const Eigen::MatrixXd& h) { return hessian_min_eigenvalue(h); },
      py::arg("hessian"));

  py::class_<ParamVector>(m, "ParamVector")
      .def_static("rigid_pose", py::overload_cast<double, double, double>(&ParamVector::rigid_pose), py::arg("x"),
                  py::arg("y"), py::arg("theta"))
      .def_static("generic", &ParamVector::generic, py::arg("values"))
      .def_property_readonly("values", &ParamVector::values)
      .def("__len__", &ParamVector::size)
      .def("__repr__", [](const ParamVector& p) {
        std::string s = "ParamVector(";
        for (Eigen::Index i = 0; i < p.size(); ++i) s += (i ? ", " : "") + std::to_string(p[i]);
        return s + ")";
      });

  py::class_<RigidPolytope>(m, "RigidPolytope")
      .def(py::init<Eigen::MatrixXd, Eigen::VectorXd>(), py::arg("a"), py::arg("b"))
      .def_static("regular_polygon", &RigidPolytope::regular_polygon, py::arg("sides"), py::arg("radius"))
      .def_static("box", &RigidPolytope::box, py::arg("half_x"), py::arg("half_y"))
      .def_property_readonly("a", &RigidPolytope::base_a)
      .def_property_readonly("b", &RigidPolytope::base_b)
      .def("vertices", &RigidPolytope::vertices, py::arg("pose"))
      .def("smoothed", &make_set, py::arg("epsilon"), "SetSpec of this polytope at the given epsilon.");

  py::class_<SetSpec>(m, "SetSpec")
      .def_property_readonly("epsilon", &SetSpec::epsilon)
      .def_property_readonly("level", &SetSpec::level)
      .def_property_readonly("num_constraints", &SetSpec::num_constraints)
      .def("with_epsilon", &SetSpec::with_epsilon, py::arg("epsilon"));

  m.def(
      "membership_margin",
      [](const SetSpec& set, const Eigen::VectorXd& x, const ParamVector& params) {
        return membership_margin(set, x, params);
      },
      py::arg("set"), py::arg("x"), py::arg("params"), "Positive outside the smoothed set.");

  py::enum_<SolveStatus>(m, "SolveStatus")
      .value("Optimal", SolveStatus::Optimal)
      .value("Intersecting", SolveStatus::Intersecting)
      .value("MaxIterations", SolveStatus::MaxIterations)
      .value("NumericalFailure", SolveStatus::NumericalFailure);

  py::class_<DistanceProblem>(m, "DistanceProblem")
      .def(py::init([](SetSpec ego, SetSpec obstacle, ParamVector ego_params, ParamVector obstacle_params) {
             DistanceProblem p{std::move(ego), std::move(obstacle), std::move(ego_params), std::move(obstacle_params)};
             p.validate();
             return p;
           }),
           py::arg("ego"), py::arg("obstacle"), py::arg("ego_params"), py::arg("obstacle_params"));

  py::class_<DistanceSolution>(m, "DistanceSolution")
      .def_readonly("z_ego", &DistanceSolution::z_ego)
      .def_readonly("z_obstacle", &DistanceSolution::z_obstacle)
      .def_readonly("mu", &DistanceSolution::mu)
      .def_readonly("value", &DistanceSolution::value)
      .def_readonly("kkt_residual", &DistanceSolution::kkt_residual)
      .def_readonly("iterations", &DistanceSolution::iterations)
      .def_readonly("status", &DistanceSolution::status);

  m.def(
      "solve_distance", [](const DistanceProblem& p, int max_iter) {
        SolverOptions opt;
        opt.max_iter = max_iter;
        return solve_distance(p, opt);
      },
      py::arg("problem"), py::arg("max_iter") = 100);
  m.def(
      "distance_gradient",
      [](const DistanceProblem& p, const DistanceSolution& s) { return gradient_dict(distance_gradient(p, s)); },
      py::arg("problem"), py::arg("solution"));
  m.def(
      "envelope_gradient",
      [](const DistanceProblem& p, const DistanceSolution& s) {
        return gradient_dict(envelope_gradient(assemble_kkt_system(p, s)));
      },
      py::arg("problem"), py::arg("solution"));

  py::enum_<FilterStatus>(m, "FilterStatus")
      .value("Optimal", FilterStatus::Optimal)
      .value("Infeasible", FilterStatus::Infeasible);

  py::class_<SafetyConstraintRow>(m, "SafetyConstraintRow")
      .def(py::init([](Eigen::VectorXd coeff, double offset, int obstacle_id) {
             SafetyConstraintRow r;
             r.coeff = std::move(coeff);
             r.offset = offset;
             r.obstacle_id = obstacle_id;
             return r;
           }),
           py::arg("coeff"), py::arg("offset"), py::arg("obstacle_id") = -1)
      .def_readonly("coeff", &SafetyConstraintRow::coeff)
      .def_readonly("offset", &SafetyConstraintRow::offset)
      .def_readonly("obstacle_id", &SafetyConstraintRow::obstacle_id);

  m.def(
      "solve_filter_qp",
      [](const Eigen::VectorXd& u_nom, const std::vector<SafetyConstraintRow>& rows) {
        const FilteredInput f = solve_filter_qp(u_nom, rows);
        py::dict d;
        d["u"] = f.u;
        d["status"] = f.status;
        d["active_rows"] = f.active_rows;
        d["multipliers"] = f.multipliers;
        return d;
      },
      py::arg("u_nom"), py::arg("rows"), "min |u - u_nom|^2 subject to coeff . u + offset >= 0 per row.");

  py::enum_<TickStatus>(m, "TickStatus")
      .value("Optimal", TickStatus::Optimal)
      .value("Infeasible", TickStatus::Infeasible)
      .value("Unsafe", TickStatus::Unsafe)
      .value("NumericalFailure", TickStatus::NumericalFailure);

  py::class_<SimConfig>(m, "SimConfig")
      .def_readwrite("dt", &SimConfig::dt)
      .def_readwrite("t_final", &SimConfig::t_final)
      .def("to_json", [](const SimConfig& c) { return config_to_json(c); });
  m.def("parse_config", [](const std::string& text) { return parse_config(text); }, py::arg("text"));
  m.def("load_config", &load_config, py::arg("path"));

  py::class_<SimTrace>(m, "SimTrace")
      .def_readonly("num_ticks", &SimTrace::num_ticks)
      .def_readonly("envelope_fallbacks", &SimTrace::envelope_fallbacks)
      .def_property_readonly("num_agents", &SimTrace::num_agents)
      .def_property_readonly("clean", &SimTrace::clean)
      .def_property_readonly("min_h", &SimTrace::min_h)
      .def("poses",
           [](const SimTrace& tr, std::size_t agent) {
             if (agent >= tr.num_agents()) throw InvalidInput("agent index out of range");
             Eigen::MatrixXd out(static_cast<Eigen::Index>(tr.num_ticks), 3);
             for (std::size_t k = 0; k < tr.num_ticks; ++k) out.row(static_cast<Eigen::Index>(k)) = tr.at(k, agent).lambda;
             return out;
           },
           py::arg("agent"), "num_ticks x 3 array of (x, y, theta).")
      .def("statuses",
           [](const SimTrace& tr, std::size_t agent) {
             if (agent >= tr.num_agents()) throw InvalidInput("agent index out of range");
             std::vector<TickStatus> out;
             for (std::size_t k = 0; k < tr.num_ticks; ++k) out.push_back(tr.at(k, agent).status);
             return out;
           },
           py::arg("agent"))
      .def("csv", &trace_csv);

  m.def("run_simulation", &run_simulation, py::arg("config"), py::call_guard<py::gil_scoped_release>());
  m.def(
      "write_trace", [](const SimTrace& tr, const std::filesystem::path& dir) { return write_trace(tr, dir).csv; },
      py::arg("trace"), py::arg("dir"), "Writes the trace directory; returns the CSV path.");
}
