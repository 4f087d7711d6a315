#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <string_view>

namespace cpc
{

using Vector2 = Eigen::Vector2d;
using Vector3 = Eigen::Vector3d;
using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix3 = Eigen::Matrix3d;

/// Wrap an angle to (-pi, pi].
double wrapAngle(double angle);

/// Mass, gravity and the constant diagonal approximation of the base inertia.
struct RobotParams
{
  double mass = 105.0;
  double gravity = 9.8;
  Vector3 inertiaDiag = Vector3(25.0, 25.0, 5.0);

  /// Throws InvalidArgument unless mass, gravity and every inertia entry are positive and finite.
  void validate() const;

  Vector3 gravityVector() const
  {
    return Vector3(0.0, 0.0, gravity);
  }
};

/** Centroidal state: CoM position/velocity/acceleration and the ZYX Euler angles of the base with
 * their first two derivatives.
 *
 * The Euler vector is stored as (roll, pitch, yaw) so that its components line up with the x, y, z
 * moment axes. Angles are wrapped to (-pi, pi] on construction. Non-finite components are rejected.
 */
class CentroidalState
{
public:
  CentroidalState();
  CentroidalState(const Vector3 & comPos,
                  const Vector3 & comVel,
                  const Vector3 & comAcc,
                  const Vector3 & euler,
                  const Vector3 & eulerRate,
                  const Vector3 & eulerAcc);

  static CentroidalState atRest(const Vector3 & comPos, const Vector3 & euler = Vector3::Zero());

  const Vector3 & comPos() const noexcept
  {
    return comPos_;
  }
  const Vector3 & comVel() const noexcept
  {
    return comVel_;
  }
  const Vector3 & comAcc() const noexcept
  {
    return comAcc_;
  }
  const Vector3 & euler() const noexcept
  {
    return euler_;
  }
  const Vector3 & eulerRate() const noexcept
  {
    return eulerRate_;
  }
  const Vector3 & eulerAcc() const noexcept
  {
    return eulerAcc_;
  }

  /// (c, alpha)
  Vector6 pose() const;
  /// (c dot, alpha dot)
  Vector6 rate() const;

private:
  Vector3 comPos_;
  Vector3 comVel_;
  Vector3 comAcc_;
  Vector3 euler_;
  Vector3 eulerRate_;
  Vector3 eulerAcc_;
};

/// WithoutGravity: contact force f and moment n about the world origin.
/// WithGravity: f - m g and n - c x f, i.e. the rate of centroidal momentum.
enum class WrenchFrame
{
  WithGravity,
  WithoutGravity
};

struct ResultantWrench
{
  Vector3 force = Vector3::Zero();
  Vector3 moment = Vector3::Zero();
  WrenchFrame frame = WrenchFrame::WithoutGravity;

  static ResultantWrench fromVector(const Vector6 & w, WrenchFrame frame);
  Vector6 vector() const;
};

ResultantWrench foldGravity(const ResultantWrench & w, const Vector3 & com, const RobotParams & params);
ResultantWrench unfoldGravity(const ResultantWrench & wbar, const Vector3 & com, const RobotParams & params);

enum class Axis
{
  X = 0,
  Y,
  Z,
  Roll,
  Pitch,
  Yaw
};

inline constexpr std::array<Axis, 6> kAllAxes = {Axis::X, Axis::Y, Axis::Z, Axis::Roll, Axis::Pitch, Axis::Yaw};

inline constexpr bool isLinear(Axis axis)
{
  return axis == Axis::X || axis == Axis::Y || axis == Axis::Z;
}

inline constexpr int axisIndex(Axis axis)
{
  return static_cast<int>(axis);
}

std::string_view axisName(Axis axis);

/// Triple-integrator model of one axis. dt == 0 denotes the continuous-time form.
struct AxisSystem
{
  Eigen::Matrix3d A;
  Eigen::Vector3d B;
  Eigen::Matrix<double, 2, 3> C;
  double dt = 0.0;
};

/// Continuous-time model: state (position, velocity, acceleration), input jerk,
/// outputs (position, mass or inertia times acceleration).
AxisSystem continuousAxis(const RobotParams & params, Axis axis);

/// Exact zero-order-hold discretization of the triple integrator. Throws InvalidArgument for dt <= 0.
AxisSystem discretizeAxis(const RobotParams & params, Axis axis, double dt);

/// One semi-implicit Euler step driven by a gravity-folded wrench.
/// Accelerations are f/m and n./I (the Euler-rate map is taken as identity).
CentroidalState integrateCentroidal(const CentroidalState & state,
                                    const ResultantWrench & wbar,
                                    const RobotParams & params,
                                    double dt);

inline constexpr double kZmpForceEpsilon = 1.0;

/// ZMP on the horizontal plane z = groundHeight of a contact wrench (moment about the world origin).
/// Throws DegenerateContact when the vertical force is at most forceEpsilon.
Vector2 zmpFromWrench(const ResultantWrench & w, double groundHeight, double forceEpsilon = kZmpForceEpsilon);

} // namespace cpc
