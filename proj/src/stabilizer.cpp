#include <cpc/errors.h>
#include <cpc/rotation.h>
#include <cpc/stabilizer.h>

#include <cmath>

namespace cpc
{

namespace
{

Vector6 vec6(double a, double b, double c, double d, double e, double f)
{
  return (Vector6() << a, b, c, d, e, f).finished();
}

} // namespace

StabilizerGains StabilizerGains::walkingDefaults()
{
  return StabilizerGains{};
}

StabilizerGains StabilizerGains::ladderDefaults()
{
  StabilizerGains g;
  g.kp = vec6(3000, 3000, 3000, 1000, 1000, 1000);
  g.kd = vec6(1000, 1000, 1000, 333, 333, 333);
  return g;
}

void StabilizerGains::validate() const
{
  if(!kp.allFinite() || !kd.allFinite() || (kp.array() < 0.0).any() || (kd.array() < 0.0).any())
  {
    throw InvalidArgument("stabilizer gains must be finite and non-negative");
  }
}

Vector6 centroidalFeedback(const Vector3 & comDesired,
                           const Matrix3 & rotDesired,
                           const Vector6 & rateDesired,
                           const Vector3 & comActual,
                           const Matrix3 & rotActual,
                           const Vector6 & rateActual,
                           const StabilizerGains & gains)
{
  Vector6 poseError;
  poseError << comDesired - comActual, rotationLog(rotDesired * rotActual.transpose());
  return gains.kp.cwiseProduct(poseError) + gains.kd.cwiseProduct(rateDesired - rateActual);
}

Vector6 centroidalFeedback(const CentroidalState & desired,
                           const CentroidalState & actual,
                           const StabilizerGains & gains)
{
  return centroidalFeedback(desired.comPos(), eulerToRotation(desired.euler()), desired.rate(), actual.comPos(),
                            eulerToRotation(actual.euler()), actual.rate(), gains);
}

DampingParams DampingParams::contactDefaults()
{
  DampingParams p;
  p.kd = vec6(1e4, 1e4, 1e4, 100, 100, 100);
  p.ks = vec6(0, 0, 0, 0, 0, 2000);
  p.kf = vec6(1, 1, 1, 1, 1, 0);
  p.phase = DampingPhase::Contact;
  return p;
}

DampingParams DampingParams::nonContactDefaults()
{
  DampingParams p;
  p.kd = vec6(300, 300, 300, 40, 40, 40);
  p.ks = vec6(2250, 2250, 2250, 400, 400, 400);
  p.kf = Vector6::Zero();
  p.phase = DampingPhase::NonContact;
  return p;
}

DampingParams DampingParams::withLinearFrom(const DampingParams & other) const
{
  DampingParams out = *this;
  out.kd.head<3>() = other.kd.head<3>();
  out.ks.head<3>() = other.ks.head<3>();
  out.kf.head<3>() = other.kf.head<3>();
  return out;
}

void DampingParams::validate() const
{
  if(!kd.allFinite() || !ks.allFinite() || !kf.allFinite())
  {
    throw InvalidArgument("damping parameters must be finite");
  }
  if((kd.array() <= 0.0).any())
  {
    throw InvalidArgument("damping Kd entries must be positive");
  }
  if((ks.array() < 0.0).any())
  {
    throw InvalidArgument("damping Ks entries must be non-negative");
  }
}

Vector6 complianceVelocity(const ComplianceState & state,
                           const Vector6 & wrenchActual,
                           const Vector6 & wrenchDesired,
                           const DampingParams & params)
{
  return (-params.ks.cwiseProduct(state.vector()) + params.kf.cwiseProduct(wrenchActual - wrenchDesired))
      .cwiseQuotient(params.kd);
}

ComplianceState dampingStep(const ComplianceState & state,
                            const Vector6 & wrenchActual,
                            const Vector6 & wrenchDesired,
                            const DampingParams & params,
                            double dt)
{
  if(!(dt > 0.0))
  {
    throw InvalidArgument("dampingStep: dt must be positive");
  }
  const Vector6 v = complianceVelocity(state, wrenchActual, wrenchDesired, params);
  ComplianceState next;
  next.deltaPos = state.deltaPos + dt * v.head<3>();
  next.deltaRot = rotationLog(rotationExp(dt * v.tail<3>()) * rotationExp(state.deltaRot));
  return next;
}

std::pair<Eigen::Matrix2d, Eigen::Matrix2d> dcmEquivalentGains(double mass,
                                                               double lipmOmega,
                                                               const Eigen::Matrix2d & kxi)
{
  if(!(mass > 0.0) || !(lipmOmega > 0.0))
  {
    throw InvalidArgument("dcmEquivalentGains: mass and omega must be positive");
  }
  return {mass * lipmOmega * lipmOmega * kxi, mass * lipmOmega * kxi};
}

RateEstimator::RateEstimator(double dt, double timeConstant) : dt_(dt)
{
  if(!(dt > 0.0) || !(timeConstant >= 0.0))
  {
    throw InvalidArgument("RateEstimator: dt must be positive and the time constant non-negative");
  }
  alpha_ = timeConstant > 0.0 ? 1.0 - std::exp(-dt / timeConstant) : 1.0;
}

Vector6 RateEstimator::update(const Vector6 & sample)
{
  if(!initialized_)
  {
    initialized_ = true;
    previous_ = sample;
    rate_.setZero();
    return rate_;
  }
  const Vector6 raw = (sample - previous_) / dt_;
  previous_ = sample;
  rate_ += alpha_ * (raw - rate_);
  return rate_;
}

void RateEstimator::reset()
{
  initialized_ = false;
  previous_.setZero();
  rate_.setZero();
}

} // namespace cpc
