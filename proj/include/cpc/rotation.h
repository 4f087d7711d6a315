#pragma once

#include <cpc/centroidal.h>

namespace cpc
{

/// Principal logarithm: axis-angle vector with angle in [0, pi].
/// Throws InvalidRotation if R is not orthonormal with det +1 (tolerance 1e-9).
Vector3 rotationLog(const Matrix3 & R);

/// True when the rotation angle is within `tolerance` of pi, where the sign of the log is ambiguous.
bool nearHalfTurn(const Matrix3 & R, double tolerance = 1e-6);

Matrix3 rotationExp(const Vector3 & axisAngle);

Matrix3 skew(const Vector3 & v);

/// R = Rz(yaw) Ry(pitch) Rx(roll) for euler = (roll, pitch, yaw).
Matrix3 eulerToRotation(const Vector3 & euler);

Matrix3 rotationAbout(const Vector3 & axis, double angle);

} // namespace cpc
