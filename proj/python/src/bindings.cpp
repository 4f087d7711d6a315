#include <cpc/errors.h>
#include <cpc/preview.h>
#include <cpc/scenario.h>
#include <cpc/simulation.h>
#include <cpc/stabilizer.h>
#include <cpc/wrench_opt.h>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

namespace py = pybind11;
using namespace cpc;

namespace
{

Axis axisByName(const std::string & name)
{
  for(Axis a : {Axis::X, Axis::Y, Axis::Z, Axis::Roll, Axis::Pitch, Axis::Yaw})
  {
    if(axisName(a) == name)
    {
      return a;
    }
  }
  throw InvalidArgument("unknown axis '" + name + "'");
}

// Stacks a per-row 6-vector into an (n, 6) array.
template<typename Get>
Eigen::MatrixXd stack(const std::vector<TraceRow> & rows, Get get)
{
  Eigen::MatrixXd out(rows.size(), 6);
  for(std::size_t i = 0; i < rows.size(); ++i)
  {
    out.row(static_cast<Eigen::Index>(i)) = get(rows[i]).transpose();
  }
  return out;
}

py::dict traceToDict(const RunResult & r)
{
  Eigen::VectorXd time(r.rows.size());
  Eigen::VectorXd margin(r.rows.size());
  Eigen::VectorXi phase(r.rows.size());
  for(std::size_t i = 0; i < r.rows.size(); ++i)
  {
    time[i] = r.rows[i].time;
    margin[i] = r.rows[i].zmpMargin;
    phase[i] = r.rows[i].phase;
  }
  py::dict d;
  d["scenario"] = r.scenario;
  d["limbs"] = r.limbIds;
  d["faults"] = r.faults;
  d["time"] = time;
  d["phase"] = phase;
  d["ref_pose"] = stack(r.rows, [](const TraceRow & t) { return t.refPose; });
  d["planned_pose"] = stack(r.rows, [](const TraceRow & t) { return t.plannedPose; });
  d["desired_pose"] = stack(r.rows, [](const TraceRow & t) { return t.desiredPose; });
  d["actual_pose"] = stack(r.rows, [](const TraceRow & t) { return t.actualPose; });
  d["planned_wrench"] = stack(r.rows, [](const TraceRow & t) { return t.plannedWrench; });
  d["projected_wrench"] = stack(r.rows, [](const TraceRow & t) { return t.projectedWrench; });
  d["desired_wrench"] = stack(r.rows, [](const TraceRow & t) { return t.desiredWrench; });
  d["zmp_margin"] = margin;
  return d;
}

} // namespace

PYBIND11_MODULE(_cpc, m)
{
  m.doc() = "Centroidal preview control: gain synthesis, wrench projection and the reduced-model harness.";

  // Later registrations are tried first, so the base class goes first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

  m.def("scenario_names", &scenarios::names, "Names of the built-in scenarios.");

  m.def(
      "scenario_json",
      [](const std::string & scenario) { return scenarioToJson(loadScenario(scenario)); },
      py::arg("scenario"), "Scenario as JSON text; accepts a file path or builtin:<name>.");

  m.def(
      "run",
      [](const std::string & scenario, std::optional<double> duration) {
        RunResult r;
        {
          py::gil_scoped_release release;
          r = runScenario(loadScenario(scenario), duration);
        }
        py::dict d = traceToDict(r);
        d["summary"] = py::module_::import("json").attr("loads")(summaryToJson(summarize(r)));
        return d;
      },
      py::arg("scenario"), py::arg("duration") = py::none(),
      "Run a scenario and return the trace as numpy arrays plus a summary dict.");

  m.def(
      "run_to_csv",
      [](const std::string & scenario, const std::string & path, std::optional<double> duration) {
        const RunResult r = runScenario(loadScenario(scenario), duration);
        writeCsv(r, path);
        return r.rows.size();
      },
      py::arg("scenario"), py::arg("path"), py::arg("duration") = py::none());

  m.def(
      "preview_gains",
      [](const std::string & axis, double mass, std::optional<double> dt, std::optional<int> horizon) {
        RobotParams robot;
        robot.mass = mass;
        const Axis a = axisByName(axis);
        PreviewWeights w = axisIndex(a) < 3 ? PreviewWeights::linearDefaults() : PreviewWeights::angularDefaults();
        if(dt)
        {
          w.dt = *dt;
        }
        if(horizon)
        {
          w.horizonSteps = *horizon;
        }
        const PreviewGains g = synthesizeGains(discretizeAxis(robot, a, w.dt), w);
        py::dict d;
        d["k_fb"] = Eigen::Vector3d(g.kFb.transpose());
        d["k_ff"] = Eigen::MatrixXd(g.kFf);
        d["k_tail"] = Eigen::Vector2d(g.kTail.transpose());
        d["spectral_radius"] = g.closedLoopSpectralRadius;
        d["riccati"] = g.riccati;
        return d;
      },
      py::arg("axis") = "x", py::arg("mass") = 105.0, py::arg("dt") = py::none(), py::arg("horizon") = py::none(),
      "Preview gains for one axis with the default weights.");

  m.def(
      "solve_nnls",
      [](const Eigen::MatrixXd & G, const Eigen::VectorXd & target) {
        NnlsProblem p;
        p.G = G;
        p.target = target;
        const NnlsSolution s = solveNnls(p);
        return py::make_tuple(s.lambda, s.residual, s.kktViolation);
      },
      py::arg("G"), py::arg("target"), "min |G x - target|^2 subject to x >= 0; returns (x, G x - target, kkt).");

  m.def(
      "dcm_equivalent_gains",
      [](double mass, double omega, const Eigen::Matrix2d & kxi) { return dcmEquivalentGains(mass, omega, kxi); },
      py::arg("mass"), py::arg("omega"), py::arg("kxi"));
}
