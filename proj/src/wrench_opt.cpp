#include <cpc/errors.h>
#include <cpc/wrench_opt.h>

namespace cpc
{

namespace
{

NnlsProblem makeProblem(const GraspMatrix & G, const Vector6 & target, const WrenchOptOptions & options)
{
  if(G.cols() == 0)
  {
    throw EmptyContactSet("wrench optimization: grasp matrix has no columns");
  }
  NnlsProblem p;
  p.G = G.columns;
  p.target = target;
  if(options.ridgeRegularization > 0.0)
  {
    p.columnWeights = Eigen::VectorXd::Constant(G.cols(), options.ridgeRegularization);
  }
  return p;
}

} // namespace

Vector6 worldToLocalWrench(const Vector6 & world, const Matrix3 & rotation, const Vector3 & origin)
{
  const Vector3 f = world.head<3>();
  const Vector3 n = world.tail<3>() - origin.cross(f);
  Vector6 out;
  out << rotation.transpose() * f, rotation.transpose() * n;
  return out;
}

Vector6 localToWorldWrench(const Vector6 & local, const Matrix3 & rotation, const Vector3 & origin)
{
  const Vector3 f = rotation * local.head<3>();
  const Vector3 n = rotation * local.tail<3>();
  Vector6 out;
  out << f, n + origin.cross(f);
  return out;
}

ProjectionResult projectPlannedWrench(const ResultantWrench & wbarPlanned,
                                      const Vector3 & comPlanned,
                                      const GraspMatrix & G,
                                      const RobotParams & params,
                                      const WrenchOptOptions & options)
{
  if(wbarPlanned.frame != WrenchFrame::WithGravity)
  {
    throw InvalidArgument("projectPlannedWrench: expected a gravity-folded wrench");
  }
  const Vector3 forcePlanned = wbarPlanned.force + params.mass * params.gravityVector();
  Vector6 offset;
  offset << params.mass * params.gravityVector(), comPlanned.cross(forcePlanned);
  const Vector6 target = wbarPlanned.vector() + offset;

  ProjectionResult out;
  out.solution = solveNnls(makeProblem(G, target, options));
  out.lambda = out.solution.lambda;
  const Vector6 achieved = G.columns * out.lambda;
  out.achieved = ResultantWrench::fromVector(achieved, WrenchFrame::WithoutGravity);
  out.projected = ResultantWrench::fromVector(achieved - offset, WrenchFrame::WithGravity);
  return out;
}

ProjectionResult projectPlannedWrench(const ResultantWrench & wbarPlanned,
                                      const Vector3 & comPlanned,
                                      std::span<const ContactSpec> contacts,
                                      const RobotParams & params,
                                      const WrenchOptOptions & options)
{
  return projectPlannedWrench(wbarPlanned, comPlanned, assembleGraspMatrix(contacts), params, options);
}

DistributionResult distributeDesiredWrench(const ResultantWrench & wbarDesired,
                                           const Vector3 & comActual,
                                           const GraspMatrix & G,
                                           const RobotParams & params,
                                           const WrenchOptOptions & options)
{
  if(wbarDesired.frame != WrenchFrame::WithGravity)
  {
    throw InvalidArgument("distributeDesiredWrench: expected a gravity-folded wrench");
  }
  // The force rows of the target do not depend on the moment arm, so the desired force can be used directly.
  const Vector3 forceDesired = wbarDesired.force + params.mass * params.gravityVector();
  DistributionResult out;
  out.target << forceDesired, wbarDesired.moment + comActual.cross(forceDesired);

  const NnlsProblem problem = makeProblem(G, out.target, options);
  out.solution = solveNnls(problem);
  out.lambda = out.solution.lambda;
  if(options.minimumNorm && options.ridgeRegularization <= 0.0)
  {
    out.lambda = minimumNormCombination(problem.G, problem.G * out.lambda, out.lambda);
  }

  Vector6 total = Vector6::Zero();
  out.limbs.reserve(G.blocks.size());
  for(const auto & block : G.blocks)
  {
    LimbWrench lw;
    lw.limbId = block.limbId;
    lw.world = G.limbWrench(block, out.lambda);
    lw.local = worldToLocalWrench(lw.world, block.frame, block.origin);
    total += lw.world;
    out.limbs.push_back(std::move(lw));
  }
  out.residual = total - out.target;
  return out;
}

DistributionResult distributeDesiredWrench(const ResultantWrench & wbarDesired,
                                           const Vector3 & comActual,
                                           std::span<const ContactSpec> contacts,
                                           const RobotParams & params,
                                           const WrenchOptOptions & options)
{
  return distributeDesiredWrench(wbarDesired, comActual, assembleGraspMatrix(contacts), params, options);
}

} // namespace cpc
