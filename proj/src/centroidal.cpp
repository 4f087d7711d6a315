#include <cpc/centroidal.h>
#include <cpc/errors.h>

#include <cmath>
#include <numbers>

namespace cpc
{

namespace
{

void requireFinite(const Vector3 & v, const char * name)
{
  if(!v.allFinite())
  {
    throw InvalidArgument(std::string("CentroidalState: non-finite ") + name);
  }
}

void requirePositivePeriod(double dt, const char * where)
{
  if(!(dt > 0.0) || !std::isfinite(dt))
  {
    throw InvalidArgument(std::string(where) + ": period must be positive, got " + std::to_string(dt));
  }
}

} // namespace

double wrapAngle(double angle)
{
  constexpr double pi = std::numbers::pi;
  double wrapped = std::remainder(angle, 2.0 * pi);
  if(wrapped <= -pi)
  {
    wrapped += 2.0 * pi;
  }
  return wrapped;
}

void RobotParams::validate() const
{
  if(!(mass > 0.0) || !std::isfinite(mass))
  {
    throw InvalidArgument("RobotParams: mass must be positive");
  }
  if(!(gravity > 0.0) || !std::isfinite(gravity))
  {
    throw InvalidArgument("RobotParams: gravity must be positive");
  }
  if(!inertiaDiag.allFinite() || (inertiaDiag.array() <= 0.0).any())
  {
    throw InvalidArgument("RobotParams: inertia diagonal must be positive");
  }
}

CentroidalState::CentroidalState()
: comPos_(Vector3::Zero()), comVel_(Vector3::Zero()), comAcc_(Vector3::Zero()), euler_(Vector3::Zero()),
  eulerRate_(Vector3::Zero()), eulerAcc_(Vector3::Zero())
{
}

CentroidalState::CentroidalState(const Vector3 & comPos,
                                 const Vector3 & comVel,
                                 const Vector3 & comAcc,
                                 const Vector3 & euler,
                                 const Vector3 & eulerRate,
                                 const Vector3 & eulerAcc)
: comPos_(comPos), comVel_(comVel), comAcc_(comAcc), euler_(euler), eulerRate_(eulerRate), eulerAcc_(eulerAcc)
{
  requireFinite(comPos_, "com_pos");
  requireFinite(comVel_, "com_vel");
  requireFinite(comAcc_, "com_acc");
  requireFinite(euler_, "euler");
  requireFinite(eulerRate_, "euler_rate");
  requireFinite(eulerAcc_, "euler_acc");
  for(int i = 0; i < 3; ++i)
  {
    euler_[i] = wrapAngle(euler_[i]);
  }
}

CentroidalState CentroidalState::atRest(const Vector3 & comPos, const Vector3 & euler)
{
  return CentroidalState(comPos, Vector3::Zero(), Vector3::Zero(), euler, Vector3::Zero(), Vector3::Zero());
}

Vector6 CentroidalState::pose() const
{
  Vector6 out;
  out << comPos_, euler_;
  return out;
}

Vector6 CentroidalState::rate() const
{
  Vector6 out;
  out << comVel_, eulerRate_;
  return out;
}

ResultantWrench ResultantWrench::fromVector(const Vector6 & w, WrenchFrame frame)
{
  return ResultantWrench{w.head<3>(), w.tail<3>(), frame};
}

Vector6 ResultantWrench::vector() const
{
  Vector6 out;
  out << force, moment;
  return out;
}

ResultantWrench foldGravity(const ResultantWrench & w, const Vector3 & com, const RobotParams & params)
{
  if(w.frame != WrenchFrame::WithoutGravity)
  {
    throw InvalidArgument("foldGravity: wrench already includes gravity");
  }
  return ResultantWrench{w.force - params.mass * params.gravityVector(), w.moment - com.cross(w.force),
                         WrenchFrame::WithGravity};
}

ResultantWrench unfoldGravity(const ResultantWrench & wbar, const Vector3 & com, const RobotParams & params)
{
  if(wbar.frame != WrenchFrame::WithGravity)
  {
    throw InvalidArgument("unfoldGravity: wrench does not include gravity");
  }
  const Vector3 force = wbar.force + params.mass * params.gravityVector();
  return ResultantWrench{force, wbar.moment + com.cross(force), WrenchFrame::WithoutGravity};
}

std::string_view axisName(Axis axis)
{
  switch(axis)
  {
    case Axis::X:
      return "x";
    case Axis::Y:
      return "y";
    case Axis::Z:
      return "z";
    case Axis::Roll:
      return "roll";
    case Axis::Pitch:
      return "pitch";
    case Axis::Yaw:
      return "yaw";
  }
  return "?";
}

AxisSystem continuousAxis(const RobotParams & params, Axis axis)
{
  params.validate();
  AxisSystem sys;
  sys.A << 0, 1, 0, 0, 0, 1, 0, 0, 0;
  sys.B << 0, 0, 1;
  const double outputGain = isLinear(axis) ? params.mass : params.inertiaDiag[axisIndex(axis) - 3];
  sys.C << 1, 0, 0, 0, 0, outputGain;
  sys.dt = 0.0;
  return sys;
}

AxisSystem discretizeAxis(const RobotParams & params, Axis axis, double dt)
{
  requirePositivePeriod(dt, "discretizeAxis");
  AxisSystem sys = continuousAxis(params, axis);
  sys.A << 1, dt, 0.5 * dt * dt, 0, 1, dt, 0, 0, 1;
  sys.B << dt * dt * dt / 6.0, 0.5 * dt * dt, dt;
  sys.dt = dt;
  return sys;
}

CentroidalState integrateCentroidal(const CentroidalState & state,
                                    const ResultantWrench & wbar,
                                    const RobotParams & params,
                                    double dt)
{
  requirePositivePeriod(dt, "integrateCentroidal");
  if(wbar.frame != WrenchFrame::WithGravity)
  {
    throw InvalidArgument("integrateCentroidal: expected a gravity-folded wrench");
  }
  const Vector3 comAcc = wbar.force / params.mass;
  const Vector3 eulerAcc = wbar.moment.cwiseQuotient(params.inertiaDiag);
  const Vector3 comVel = state.comVel() + dt * comAcc;
  const Vector3 eulerRate = state.eulerRate() + dt * eulerAcc;
  return CentroidalState(state.comPos() + dt * comVel, comVel, comAcc, state.euler() + dt * eulerRate, eulerRate,
                         eulerAcc);
}

Vector2 zmpFromWrench(const ResultantWrench & w, double groundHeight, double forceEpsilon)
{
  if(w.frame != WrenchFrame::WithoutGravity)
  {
    throw InvalidArgument("zmpFromWrench: expected a contact wrench without gravity");
  }
  const double fz = w.force.z();
  if(!(fz > forceEpsilon))
  {
    throw DegenerateContact("zmpFromWrench: vertical force " + std::to_string(fz) + " N is below "
                            + std::to_string(forceEpsilon) + " N");
  }
  return Vector2((-w.moment.y() + groundHeight * w.force.x()) / fz,
                 (w.moment.x() + groundHeight * w.force.y()) / fz);
}

} // namespace cpc
