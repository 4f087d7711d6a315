#include <cpc/errors.h>
#include <cpc/simulation.h>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>

namespace cpc
{

namespace
{

constexpr std::array<const char *, 6> kAxes = {"x", "y", "z", "roll", "pitch", "yaw"};
constexpr std::array<const char *, 6> kWrench = {"fx", "fy", "fz", "nx", "ny", "nz"};
constexpr std::array<const char *, 6> kCompliance = {"x", "y", "z", "rx", "ry", "rz"};

template<std::size_t N>
void addGroup(std::vector<std::string> & h, const std::string & prefix, const std::array<const char *, N> & names)
{
  for(const char * n : names)
  {
    h.push_back(prefix + "_" + n);
  }
}

class RowWriter
{
public:
  explicit RowWriter(std::string & line) : line_(line) {}

  void num(double v)
  {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    sep();
    line_ += buf;
  }
  void integer(long v)
  {
    sep();
    line_ += std::to_string(v);
  }
  template<typename Derived>
  void vec(const Eigen::MatrixBase<Derived> & v)
  {
    for(Eigen::Index i = 0; i < v.size(); ++i)
    {
      num(v[i]);
    }
  }

private:
  void sep()
  {
    if(!first_)
    {
      line_ += ',';
    }
    first_ = false;
  }

  std::string & line_;
  bool first_ = true;
};

void requireRows(const RunResult & result)
{
  if(result.rows.empty())
  {
    throw InvalidArgument("trace is empty");
  }
}

} // namespace

std::vector<std::string> csvHeader(const std::vector<std::string> & limbIds)
{
  std::vector<std::string> h = {"time", "phase"};
  for(const char * p : {"ref", "planned", "planned_rate", "desired", "desired_rate", "actual", "actual_rate", "jerk"})
  {
    addGroup(h, p, kAxes);
  }
  for(const char * p : {"w_planned", "w_projected", "w_feedback", "w_desired", "wc_desired", "wc_distributed",
                        "wc_actual"})
  {
    addGroup(h, p, kWrench);
  }
  for(const char * c : {"proj_err_force", "proj_err_moment", "dist_residual", "proj_kkt", "dist_kkt", "zmp_planned_x",
                        "zmp_planned_y", "zmp_desired_x", "zmp_desired_y", "zmp_actual_x", "zmp_actual_y", "zmp_margin",
                        "fault"})
  {
    h.push_back(c);
  }
  for(const auto & limb : limbIds)
  {
    h.push_back(limb + "_contact");
    addGroup(h, limb + "_desired", kWrench);
    addGroup(h, limb + "_measured", kWrench);
    addGroup(h, limb + "_desired_local", kWrench);
    addGroup(h, limb + "_measured_local", kWrench);
    addGroup(h, limb + "_target", std::array<const char *, 3>{"x", "y", "z"});
    addGroup(h, limb + "_compliance", kCompliance);
  }
  return h;
}

void writeCsv(const RunResult & result, const std::string & path)
{
  requireRows(result);
  std::ofstream out(path);
  if(!out)
  {
    throw Error("cannot open " + path + " for writing");
  }
  const auto header = csvHeader(result.limbIds);
  for(std::size_t i = 0; i < header.size(); ++i)
  {
    out << (i ? "," : "") << header[i];
  }
  out << '\n';
  std::string line;
  for(const auto & r : result.rows)
  {
    line.clear();
    RowWriter w(line);
    w.num(r.time);
    w.integer(r.phase);
    w.vec(r.refPose);
    w.vec(r.plannedPose);
    w.vec(r.plannedRate);
    w.vec(r.desiredPose);
    w.vec(r.desiredRate);
    w.vec(r.actualPose);
    w.vec(r.actualRate);
    for(double j : r.jerk)
    {
      w.num(j);
    }
    w.vec(r.plannedWrench);
    w.vec(r.projectedWrench);
    w.vec(r.feedbackWrench);
    w.vec(r.desiredWrench);
    w.vec(r.desiredContactWrench);
    w.vec(r.distributedWrench);
    w.vec(r.actualContactWrench);
    w.num(r.projectionErrorForce);
    w.num(r.projectionErrorMoment);
    w.num(r.distributionResidual);
    w.num(r.projectionKkt);
    w.num(r.distributionKkt);
    w.vec(r.zmpPlanned);
    w.vec(r.zmpDesired);
    w.vec(r.zmpActual);
    w.num(r.zmpMargin);
    w.integer(r.fault ? 1 : 0);
    for(const auto & l : r.limbs)
    {
      w.integer(l.inContact ? 1 : 0);
      w.vec(l.desired);
      w.vec(l.measured);
      w.vec(l.desiredLocal);
      w.vec(l.measuredLocal);
      w.vec(l.target);
      w.vec(l.compliance);
    }
    out << line << '\n';
  }
  if(!out)
  {
    throw Error("failed while writing " + path);
  }
}

TraceSummary summarize(const RunResult & result)
{
  requireRows(result);
  TraceSummary s;
  s.scenario = result.scenario;
  s.steps = static_cast<int>(result.rows.size());
  s.duration = result.rows.back().time;
  s.faults = result.faults;
  double track = 0.0;
  double ref = 0.0;
  int marginCount = 0;
  int inside = 0;
  double marginMin = std::numeric_limits<double>::infinity();
  for(const auto & r : result.rows)
  {
    s.projectionErrorForceMean += r.projectionErrorForce;
    s.projectionErrorMomentMean += r.projectionErrorMoment;
    const Vector6 d = r.distributedWrench - r.desiredContactWrench;
    s.distributionErrorForceMean += d.head<3>().norm();
    s.distributionErrorMomentMean += d.tail<3>().norm();
    track += (r.actualPose.head<3>() - r.desiredPose.head<3>()).squaredNorm();
    const double e = (r.actualPose.head<3>() - r.refPose.head<3>()).norm();
    ref += e * e;
    s.maxReferenceError = std::max(s.maxReferenceError, e);
    if(std::isfinite(r.zmpMargin))
    {
      ++marginCount;
      inside += r.zmpMargin >= -1e-9 ? 1 : 0;
      marginMin = std::min(marginMin, r.zmpMargin);
    }
  }
  const double n = static_cast<double>(result.rows.size());
  s.projectionErrorForceMean /= n;
  s.projectionErrorMomentMean /= n;
  s.distributionErrorForceMean /= n;
  s.distributionErrorMomentMean /= n;
  s.trackingRmse = std::sqrt(track / n);
  s.referenceRmse = std::sqrt(ref / n);
  if(marginCount > 0)
  {
    s.zmpMarginMin = marginMin;
    s.zmpInsideFraction = static_cast<double>(inside) / marginCount;
  }
  return s;
}

std::string summaryToJson(const TraceSummary & s)
{
  auto finiteOrNull = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  nlohmann::json j;
  j["scenario"] = s.scenario;
  j["steps"] = s.steps;
  j["duration_s"] = s.duration;
  j["faults"] = s.faults;
  j["projection_error_force_mean_N"] = s.projectionErrorForceMean;
  j["projection_error_moment_mean_Nm"] = s.projectionErrorMomentMean;
  j["distribution_error_force_mean_N"] = s.distributionErrorForceMean;
  j["distribution_error_moment_mean_Nm"] = s.distributionErrorMomentMean;
  j["zmp_margin_min_m"] = finiteOrNull(s.zmpMarginMin);
  j["zmp_inside_fraction"] = finiteOrNull(s.zmpInsideFraction);
  j["com_tracking_rmse_m"] = s.trackingRmse;
  j["com_reference_rmse_m"] = s.referenceRmse;
  j["com_reference_error_max_m"] = s.maxReferenceError;
  return j.dump(2);
}

void writeSummary(const TraceSummary & summary, const std::string & path)
{
  std::ofstream out(path);
  if(!out)
  {
    throw Error("cannot open " + path + " for writing");
  }
  out << summaryToJson(summary) << '\n';
  if(!out)
  {
    throw Error("failed while writing " + path);
  }
}

} // namespace cpc
