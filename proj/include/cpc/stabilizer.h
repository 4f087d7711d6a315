#pragma once

#include <cpc/centroidal.h>

#include <Eigen/Core>

#include <utility>

namespace cpc
{

/// Diagonals of the 6x6 PD gains on (CoM position, base orientation).
struct StabilizerGains
{
  Vector6 kp = (Vector6() << 2000, 2000, 2000, 0, 0, 0).finished();
  Vector6 kd = (Vector6() << 666, 666, 666, 0, 0, 0).finished();

  static StabilizerGains walkingDefaults();
  /// Stiffer gains, with orientation feedback, used on the vertical ladder.
  static StabilizerGains ladderDefaults();

  void validate() const;
};

/** PD feedback on the centroidal state.
 *
 * Linear rows: Kp (c_d - c_a) + Kd (cdot_d - cdot_a).
 * Angular rows: Kp log(R_d R_a^T) + Kd (alphadot_d - alphadot_a), with Euler rates used as they are.
 * Throws InvalidRotation when a rotation is not orthonormal.
 */
Vector6 centroidalFeedback(const Vector3 & comDesired,
                           const Matrix3 & rotDesired,
                           const Vector6 & rateDesired,
                           const Vector3 & comActual,
                           const Matrix3 & rotActual,
                           const Vector6 & rateActual,
                           const StabilizerGains & gains);

Vector6 centroidalFeedback(const CentroidalState & desired,
                           const CentroidalState & actual,
                           const StabilizerGains & gains);

enum class DampingPhase
{
  Contact,
  NonContact
};

/// Diagonal damper, spring and wrench gains of the limb-end damping law.
struct DampingParams
{
  Vector6 kd = Vector6::Ones();
  Vector6 ks = Vector6::Zero();
  Vector6 kf = Vector6::Zero();
  DampingPhase phase = DampingPhase::Contact;

  static DampingParams contactDefaults();
  static DampingParams nonContactDefaults();

  /// Copy whose first three entries of every gain come from `other`.
  DampingParams withLinearFrom(const DampingParams & other) const;

  void validate() const;
};

/// Compliance pose offset of one limb end relative to its desired pose.
struct ComplianceState
{
  Vector3 deltaPos = Vector3::Zero();
  /// Axis-angle of R_c R_d^T.
  Vector3 deltaRot = Vector3::Zero();

  Vector6 vector() const
  {
    Vector6 v;
    v << deltaPos, deltaRot;
    return v;
  }
};

/// Compliance velocity -Ks/Kd dr + Kf/Kd (w_a - w_d), element-wise.
Vector6 complianceVelocity(const ComplianceState & state,
                           const Vector6 & wrenchActual,
                           const Vector6 & wrenchDesired,
                           const DampingParams & params);

/// One damping-control update: Euler step on the position, exponential update on the orientation.
ComplianceState dampingStep(const ComplianceState & state,
                            const Vector6 & wrenchActual,
                            const Vector6 & wrenchDesired,
                            const DampingParams & params,
                            double dt);

/// Linear PD gains equivalent to proportional DCM feedback: Kp = m w^2 Kxi, Kd = m w Kxi.
std::pair<Eigen::Matrix2d, Eigen::Matrix2d> dcmEquivalentGains(double mass,
                                                               double lipmOmega,
                                                               const Eigen::Matrix2d & kxi);

/// First-difference rate estimate followed by a first-order low-pass filter.
class RateEstimator
{
public:
  explicit RateEstimator(double dt, double timeConstant = 0.02);

  /// Feeds a new sample and returns the filtered rate. The first call returns zero.
  Vector6 update(const Vector6 & sample);
  void reset();

  const Vector6 & rate() const
  {
    return rate_;
  }

private:
  double dt_;
  double alpha_;
  bool initialized_ = false;
  Vector6 previous_ = Vector6::Zero();
  Vector6 rate_ = Vector6::Zero();
};

} // namespace cpc
