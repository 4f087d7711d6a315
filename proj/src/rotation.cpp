#include <cpc/errors.h>
#include <cpc/rotation.h>

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cpc
{

namespace
{

constexpr double kOrthonormalTol = 1e-9;
// Below this angle the log uses its Taylor expansion.
constexpr double kSmallAngle = 1e-5;
// Above pi minus this angle the axis comes from the symmetric part.
constexpr double kHalfTurnBranch = 1e-3;

Vector3 vee(const Matrix3 & M)
{
  return Vector3(M(2, 1) - M(1, 2), M(0, 2) - M(2, 0), M(1, 0) - M(0, 1));
}

void checkRotation(const Matrix3 & R)
{
  if(!R.allFinite() || (R.transpose() * R - Matrix3::Identity()).cwiseAbs().maxCoeff() > kOrthonormalTol
     || std::abs(R.determinant() - 1.0) > kOrthonormalTol)
  {
    throw InvalidRotation("rotation matrix is not orthonormal with unit determinant");
  }
}

double rotationAngle(const Matrix3 & R)
{
  return std::acos(std::clamp(0.5 * (R.trace() - 1.0), -1.0, 1.0));
}

} // namespace

Matrix3 skew(const Vector3 & v)
{
  Matrix3 S;
  S << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return S;
}

Vector3 rotationLog(const Matrix3 & R)
{
  checkRotation(R);
  const double angle = rotationAngle(R);
  const Vector3 v = vee(R);
  if(angle < kSmallAngle)
  {
    return 0.5 * (1.0 + angle * angle / 6.0) * v;
  }
  if(angle > std::numbers::pi - kHalfTurnBranch)
  {
    // R + R' = 2 cos(t) I + 2 (1 - cos(t)) a a'
    const double c = std::cos(angle);
    const Matrix3 aat = (0.5 * (R + R.transpose()) - c * Matrix3::Identity()) / (1.0 - c);
    Eigen::Index k = 0;
    aat.diagonal().maxCoeff(&k);
    Vector3 axis = aat.col(k) / std::sqrt(std::max(aat(k, k), 0.0));
    axis.normalize();
    // vee(R) = 2 sin(t) a fixes the sign away from the exact half turn.
    if(axis.dot(v) < 0.0)
    {
      axis = -axis;
    }
    return angle * axis;
  }
  return angle / (2.0 * std::sin(angle)) * v;
}

bool nearHalfTurn(const Matrix3 & R, double tolerance)
{
  return rotationAngle(R) > std::numbers::pi - tolerance;
}

Matrix3 rotationExp(const Vector3 & axisAngle)
{
  const double angle = axisAngle.norm();
  const Matrix3 K = skew(axisAngle);
  double a, b;
  if(angle < kSmallAngle)
  {
    const double a2 = angle * angle;
    a = 1.0 - a2 / 6.0;
    b = 0.5 - a2 / 24.0;
  }
  else
  {
    a = std::sin(angle) / angle;
    b = (1.0 - std::cos(angle)) / (angle * angle);
  }
  return Matrix3::Identity() + a * K + b * K * K;
}

Matrix3 eulerToRotation(const Vector3 & euler)
{
  return (Eigen::AngleAxisd(euler.z(), Vector3::UnitZ()) * Eigen::AngleAxisd(euler.y(), Vector3::UnitY())
          * Eigen::AngleAxisd(euler.x(), Vector3::UnitX()))
      .toRotationMatrix();
}

Matrix3 rotationAbout(const Vector3 & axis, double angle)
{
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

} // namespace cpc
