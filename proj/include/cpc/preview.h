#pragma once

#include <cpc/centroidal.h>

#include <Eigen/Core>

#include <array>
#include <vector>

namespace cpc
{

/// Reference samples for one axis, one row per future sample: (position, force or moment).
using ReferenceWindow = Eigen::Matrix<double, Eigen::Dynamic, 2>;
using ReferenceWindows = std::array<ReferenceWindow, 6>;

/// Per-axis state (position, velocity, acceleration), indexed by axisIndex().
using AxisStates = std::array<Eigen::Vector3d, 6>;

/// Output weight Q (diagonal), input weight R, horizon length and sampling period of the preview model.
struct PreviewWeights
{
  Eigen::Vector2d outputWeight = Eigen::Vector2d(2e2, 5e-4);
  double inputWeight = 1e-8;
  int horizonSteps = 400;
  double dt = 0.005;

  static PreviewWeights linearDefaults();
  static PreviewWeights angularDefaults();

  void validate() const;

  Eigen::Matrix2d Q() const
  {
    return outputWeight.asDiagonal();
  }
};

struct PreviewGains
{
  Eigen::RowVector3d kFb = Eigen::RowVector3d::Zero();
  /// Row i multiplies the reference sample i + 1 steps ahead.
  Eigen::Matrix<double, Eigen::Dynamic, 2> kFf;
  /// Weight of the last sample held constant beyond the window.
  Eigen::RowVector2d kTail = Eigen::RowVector2d::Zero();
  double closedLoopSpectralRadius = 0.0;
  Eigen::Matrix3d riccati = Eigen::Matrix3d::Zero();
  int riccatiIterations = 0;

  int horizon() const
  {
    return static_cast<int>(kFf.rows());
  }
};

struct RiccatiOptions
{
  double tolerance = 1e-10;
  int maxIterations = 100000;
};

/// Stabilizing solution of P = A'PA - A'PB (R + B'PB)^-1 B'PA + H by value iteration.
/// Throws RiccatiDivergence if the tolerance is not reached within maxIterations.
Eigen::Matrix3d solveDiscreteRiccati(const Eigen::Matrix3d & A,
                                     const Eigen::Vector3d & B,
                                     const Eigen::Matrix3d & H,
                                     double R,
                                     const RiccatiOptions & options = {},
                                     int * iterations = nullptr);

/// LQ output-tracking servo gains for a discretized axis.
PreviewGains synthesizeGains(const AxisSystem & sys,
                             const PreviewWeights & weights,
                             const RiccatiOptions & options = {});

/// u = -kFb x + sum_i kFf[i] y_ref[i] + kTail y_ref[last]. The window must hold exactly horizon() rows.
double optimalInput(const PreviewGains & gains, const Eigen::Vector3d & x, const ReferenceWindow & window);

AxisStates toAxisStates(const CentroidalState & state);
/// Euler components of the result are wrapped.
CentroidalState toCentroidalState(const AxisStates & axes);

struct PlanStepResult
{
  AxisStates axes;
  CentroidalState planned;
  /// Gravity-folded planned wrench: f = m c'', n = I alpha''.
  ResultantWrench wrench;
  std::array<double, 6> jerk{};
};

/// One preview-control step over six axes. `systems` may use a step period different from the preview period
/// (the jerk is then held over that period).
PlanStepResult planStep(const std::array<PreviewGains, 6> & gains,
                        const std::array<AxisSystem, 6> & systems,
                        const RobotParams & params,
                        const AxisStates & state,
                        const ReferenceWindows & refs);

PlanStepResult planStep(const std::array<PreviewGains, 6> & gains,
                        const std::array<AxisSystem, 6> & systems,
                        const RobotParams & params,
                        const CentroidalState & state,
                        const ReferenceWindows & refs);

/// Gains for all six axes, synthesized once.
class PreviewPlanner
{
public:
  PreviewPlanner(const RobotParams & params,
                 const PreviewWeights & linear,
                 const PreviewWeights & angular,
                 double stepDt);

  const PreviewGains & gains(Axis axis) const
  {
    return gains_[axisIndex(axis)];
  }
  const std::array<PreviewGains, 6> & gains() const
  {
    return gains_;
  }
  int horizon() const
  {
    return gains_[0].horizon();
  }
  double previewDt() const
  {
    return previewDt_;
  }
  double stepDt() const
  {
    return stepSystems_[0].dt;
  }

  PlanStepResult plan(const AxisStates & state, const ReferenceWindows & refs) const;

private:
  RobotParams params_;
  double previewDt_;
  std::array<PreviewGains, 6> gains_;
  std::array<AxisSystem, 6> stepSystems_;
};

} // namespace cpc
