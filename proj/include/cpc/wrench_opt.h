#pragma once

#include <cpc/centroidal.h>
#include <cpc/contact.h>

#include <Eigen/Core>

#include <span>
#include <string>
#include <vector>

namespace cpc
{

/// min ||G lambda - target||^2 + sum_i w_i lambda_i^2  s.t. lambda >= 0
struct NnlsProblem
{
  Eigen::MatrixXd G;
  Eigen::VectorXd target;
  /// Empty, or one non-negative weight per column.
  Eigen::VectorXd columnWeights;
};

struct NnlsSolution
{
  Eigen::VectorXd lambda;
  /// G lambda - target
  Eigen::VectorXd residual;
  /// Largest KKT violation of the gradient 2 G'(G lambda - target), divided by 1 + ||G' target||_inf.
  double kktViolation = 0.0;
  int iterations = 0;

  double objective() const
  {
    return residual.squaredNorm();
  }
};

struct NnlsOptions
{
  /// 0 selects 3 * (number of columns) + 30.
  int maxIterations = 0;
};

inline constexpr double kNnlsKktTolerance = 1e-8;

/// Lawson-Hanson active-set solver. Deterministic for a fixed column order.
/// Throws IterationLimit when the active set keeps changing; never returns a negative lambda.
NnlsSolution solveNnls(const NnlsProblem & problem, const NnlsOptions & options = {});

/// Scaled KKT violation of `lambda` for `problem` (see NnlsSolution::kktViolation).
double nnlsKktViolation(const NnlsProblem & problem, const Eigen::VectorXd & lambda);

/// Among lambda >= 0 with G lambda = achieved, the one of least Euclidean norm.
/// `achieved` must be reachable (typically G times an NNLS solution). Returns `fallback` if the dual Newton
/// iteration fails to converge.
Eigen::VectorXd minimumNormCombination(const Eigen::MatrixXd & G,
                                       const Eigen::VectorXd & achieved,
                                       const Eigen::VectorXd & fallback);

struct WrenchOptOptions
{
  /// Optional penalty on every ridge force, pushing forces away from the cone boundary. Zero disables it.
  double ridgeRegularization = 0.0;
  /// Resolve the non-unique distribution by picking the least-norm ridge forces.
  bool minimumNorm = true;
};

struct ProjectionResult
{
  /// Projected gravity-folded wrench.
  ResultantWrench projected;
  /// Contact wrench G lambda (moment about the world origin).
  ResultantWrench achieved;
  Eigen::VectorXd lambda;
  NnlsSolution solution;
};

/// Nearest contact-feasible wrench to a planned one. Gravity is unfolded at `comPlanned` using the planned force.
ProjectionResult projectPlannedWrench(const ResultantWrench & wbarPlanned,
                                      const Vector3 & comPlanned,
                                      const GraspMatrix & G,
                                      const RobotParams & params,
                                      const WrenchOptOptions & options = {});

ProjectionResult projectPlannedWrench(const ResultantWrench & wbarPlanned,
                                      const Vector3 & comPlanned,
                                      std::span<const ContactSpec> contacts,
                                      const RobotParams & params,
                                      const WrenchOptOptions & options = {});

struct LimbWrench
{
  std::string limbId;
  /// Force and moment about the world origin.
  Vector6 world = Vector6::Zero();
  /// Force and moment about the contact center, in the contact surface frame.
  Vector6 local = Vector6::Zero();
};

struct DistributionResult
{
  /// Contact wrench to realize, with gravity unfolded at the actual CoM.
  Vector6 target = Vector6::Zero();
  std::vector<LimbWrench> limbs;
  Eigen::VectorXd lambda;
  /// sum of limb wrenches - target
  Vector6 residual = Vector6::Zero();
  NnlsSolution solution;
};

DistributionResult distributeDesiredWrench(const ResultantWrench & wbarDesired,
                                           const Vector3 & comActual,
                                           const GraspMatrix & G,
                                           const RobotParams & params,
                                           const WrenchOptOptions & options = {});

DistributionResult distributeDesiredWrench(const ResultantWrench & wbarDesired,
                                           const Vector3 & comActual,
                                           std::span<const ContactSpec> contacts,
                                           const RobotParams & params,
                                           const WrenchOptOptions & options = {});

/// World wrench (moment about the origin) expressed at `origin` in the frame `rotation`.
Vector6 worldToLocalWrench(const Vector6 & world, const Matrix3 & rotation, const Vector3 & origin);
Vector6 localToWorldWrench(const Vector6 & local, const Matrix3 & rotation, const Vector3 & origin);

} // namespace cpc
