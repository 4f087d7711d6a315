#include <cpc/errors.h>
#include <cpc/preview.h>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cpc
{

PreviewWeights PreviewWeights::linearDefaults()
{
  return PreviewWeights{Eigen::Vector2d(2e2, 5e-4), 1e-8, 400, 0.005};
}

PreviewWeights PreviewWeights::angularDefaults()
{
  return PreviewWeights{Eigen::Vector2d(1e2, 5e-3), 1e-8, 400, 0.005};
}

void PreviewWeights::validate() const
{
  if(!outputWeight.allFinite() || (outputWeight.array() < 0.0).any())
  {
    throw InvalidArgument("PreviewWeights: output weights must be non-negative");
  }
  if(!(inputWeight > 0.0) || !std::isfinite(inputWeight))
  {
    throw InvalidArgument("PreviewWeights: input weight must be positive");
  }
  if(horizonSteps < 1)
  {
    throw InvalidArgument("PreviewWeights: horizon must be at least one step");
  }
  if(!(dt > 0.0) || !std::isfinite(dt))
  {
    throw InvalidArgument("PreviewWeights: dt must be positive");
  }
}

Eigen::Matrix3d solveDiscreteRiccati(const Eigen::Matrix3d & A,
                                     const Eigen::Vector3d & B,
                                     const Eigen::Matrix3d & H,
                                     double R,
                                     const RiccatiOptions & options,
                                     int * iterations)
{
  auto update = [&](const Eigen::Matrix3d & P) {
    const Eigen::RowVector3d BtPA = B.transpose() * P * A;
    const double S = R + B.dot(P * B);
    Eigen::Matrix3d next = A.transpose() * P * A - BtPA.transpose() * BtPA / S + H;
    return Eigen::Matrix3d(0.5 * (next + next.transpose()));
  };

  Eigen::Matrix3d P = H;
  double diff = std::numeric_limits<double>::infinity();
  int iter = 0;
  for(; iter < options.maxIterations; ++iter)
  {
    const Eigen::Matrix3d next = update(P);
    diff = (next - P).cwiseAbs().maxCoeff();
    P = next;
    if(!P.allFinite())
    {
      throw RiccatiDivergence("solveDiscreteRiccati: iterate became non-finite", diff);
    }
    if(diff <= options.tolerance * std::max(1.0, P.cwiseAbs().maxCoeff()))
    {
      break;
    }
  }
  if(iter == options.maxIterations)
  {
    throw RiccatiDivergence("solveDiscreteRiccati: no convergence after " + std::to_string(iter)
                                + " iterations, residual " + std::to_string(diff),
                            diff);
  }

  // Value iteration stalls well short of the fixed point when the closed loop is slow. Newton refinement on the
  // Lyapunov form closes the gap; the feedforward sum must match the feedback gain at DC.
  double lastChange = std::numeric_limits<double>::infinity();
  for(int newton = 0; newton < 20; ++newton)
  {
    const double S = R + B.dot(P * B);
    const Eigen::RowVector3d K = (B.transpose() * P * A) / S;
    const Eigen::Matrix3d acl = A - B * K;
    const Eigen::Matrix3d rhs = H + K.transpose() * R * K;
    // vec(acl' P acl) = kron(acl', acl') vec(P), column-major.
    Eigen::Matrix<double, 9, 9> lhs = Eigen::Matrix<double, 9, 9>::Identity();
    for(int i = 0; i < 3; ++i)
    {
      for(int j = 0; j < 3; ++j)
      {
        lhs.block<3, 3>(3 * i, 3 * j) -= acl(j, i) * acl.transpose();
      }
    }
    const Eigen::Matrix<double, 9, 1> vecP =
        lhs.partialPivLu().solve(Eigen::Map<const Eigen::Matrix<double, 9, 1>>(rhs.data()));
    Eigen::Matrix3d next = Eigen::Map<const Eigen::Matrix3d>(vecP.data());
    next = 0.5 * (next + next.transpose());
    if(!next.allFinite())
    {
      break;
    }
    const double change = (next - P).cwiseAbs().maxCoeff();
    if(change >= lastChange)
    {
      break;
    }
    P = next;
    lastChange = change;
    ++iter;
    if(change <= 4.0 * std::numeric_limits<double>::epsilon() * P.cwiseAbs().maxCoeff())
    {
      break;
    }
  }
  if(iterations)
  {
    *iterations = iter;
  }
  return P;
}

PreviewGains synthesizeGains(const AxisSystem & sys, const PreviewWeights & weights, const RiccatiOptions & options)
{
  weights.validate();
  if(!(sys.dt > 0.0))
  {
    throw InvalidArgument("synthesizeGains: system must be discretized");
  }
  if(std::abs(sys.dt - weights.dt) > 1e-12 * std::max(1.0, weights.dt))
  {
    throw InvalidArgument("synthesizeGains: system period does not match the preview period");
  }

  const Eigen::Matrix2d Q = weights.Q();
  const double R = weights.inputWeight;
  const Eigen::Matrix<double, 3, 2> CtQ = sys.C.transpose() * Q;
  const Eigen::Matrix3d H = CtQ * sys.C;

  PreviewGains gains;
  gains.riccati = solveDiscreteRiccati(sys.A, sys.B, H, R, options, &gains.riccatiIterations);
  const Eigen::Matrix3d & P = gains.riccati;

  const double S = R + sys.B.dot(P * sys.B);
  gains.kFb = (sys.B.transpose() * P * sys.A) / S;
  const Eigen::Matrix3d closedLoop = sys.A - sys.B * gains.kFb;
  gains.closedLoopSpectralRadius = closedLoop.eigenvalues().cwiseAbs().maxCoeff();

  const int N = weights.horizonSteps;
  gains.kFf.resize(N, 2);
  Eigen::Matrix<double, 3, 2> propagated = CtQ;
  for(int i = 0; i < N; ++i)
  {
    gains.kFf.row(i) = (sys.B.transpose() * propagated) / S;
    propagated = closedLoop.transpose() * propagated;
  }
  // Remaining terms of the infinite sum for a reference held at its last sample.
  const Eigen::Matrix<double, 3, 2> tail =
      (Eigen::Matrix3d::Identity() - closedLoop.transpose()).partialPivLu().solve(propagated);
  gains.kTail = (sys.B.transpose() * tail) / S;
  return gains;
}

double optimalInput(const PreviewGains & gains, const Eigen::Vector3d & x, const ReferenceWindow & window)
{
  const Eigen::Index N = gains.kFf.rows();
  if(window.rows() != N)
  {
    throw WindowSizeMismatch("optimalInput: window has " + std::to_string(window.rows()) + " samples, expected "
                             + std::to_string(N));
  }
  double u = -gains.kFb.dot(x);
  const double * k = gains.kFf.data();
  const double * y = window.data();
  // Both matrices are column-major N x 2.
  for(Eigen::Index i = 0; i < 2 * N; ++i)
  {
    u += k[i] * y[i];
  }
  u += gains.kTail.dot(window.row(N - 1));
  return u;
}

AxisStates toAxisStates(const CentroidalState & state)
{
  AxisStates axes;
  for(int i = 0; i < 3; ++i)
  {
    axes[i] = Eigen::Vector3d(state.comPos()[i], state.comVel()[i], state.comAcc()[i]);
    axes[i + 3] = Eigen::Vector3d(state.euler()[i], state.eulerRate()[i], state.eulerAcc()[i]);
  }
  return axes;
}

CentroidalState toCentroidalState(const AxisStates & axes)
{
  Vector3 pos, vel, acc, ang, rate, angAcc;
  for(int i = 0; i < 3; ++i)
  {
    pos[i] = axes[i][0];
    vel[i] = axes[i][1];
    acc[i] = axes[i][2];
    ang[i] = axes[i + 3][0];
    rate[i] = axes[i + 3][1];
    angAcc[i] = axes[i + 3][2];
  }
  return CentroidalState(pos, vel, acc, ang, rate, angAcc);
}

PlanStepResult planStep(const std::array<PreviewGains, 6> & gains,
                        const std::array<AxisSystem, 6> & systems,
                        const RobotParams & params,
                        const AxisStates & state,
                        const ReferenceWindows & refs)
{
  const double dt = systems[0].dt;
  const int N = gains[0].horizon();
  for(int i = 0; i < 6; ++i)
  {
    if(systems[i].dt != dt || gains[i].horizon() != N)
    {
      throw InvalidArgument("planStep: all axes must share the step period and horizon");
    }
  }

  PlanStepResult out;
  for(int i = 0; i < 6; ++i)
  {
    const double u = optimalInput(gains[i], state[i], refs[i]);
    out.jerk[i] = u;
    out.axes[i] = systems[i].A * state[i] + systems[i].B * u;
  }
  Vector3 force, moment;
  for(int i = 0; i < 3; ++i)
  {
    force[i] = params.mass * out.axes[i][2];
    moment[i] = params.inertiaDiag[i] * out.axes[i + 3][2];
  }
  out.wrench = ResultantWrench{force, moment, WrenchFrame::WithGravity};
  out.planned = toCentroidalState(out.axes);
  return out;
}

PlanStepResult planStep(const std::array<PreviewGains, 6> & gains,
                        const std::array<AxisSystem, 6> & systems,
                        const RobotParams & params,
                        const CentroidalState & state,
                        const ReferenceWindows & refs)
{
  return planStep(gains, systems, params, toAxisStates(state), refs);
}

PreviewPlanner::PreviewPlanner(const RobotParams & params,
                               const PreviewWeights & linear,
                               const PreviewWeights & angular,
                               double stepDt)
: params_(params), previewDt_(linear.dt)
{
  params_.validate();
  linear.validate();
  angular.validate();
  if(linear.horizonSteps != angular.horizonSteps || linear.dt != angular.dt)
  {
    throw InvalidArgument("PreviewPlanner: linear and angular weights must share horizon and period");
  }
  for(Axis axis : kAllAxes)
  {
    const PreviewWeights & w = isLinear(axis) ? linear : angular;
    gains_[axisIndex(axis)] = synthesizeGains(discretizeAxis(params_, axis, w.dt), w);
    stepSystems_[axisIndex(axis)] = discretizeAxis(params_, axis, stepDt);
  }
}

PlanStepResult PreviewPlanner::plan(const AxisStates & state, const ReferenceWindows & refs) const
{
  return planStep(gains_, stepSystems_, params_, state, refs);
}

} // namespace cpc
