#include <cpc/errors.h>
#include <cpc/rotation.h>
#include <cpc/wrench_opt.h>

#include "oracles/oracles.h"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <random>

using namespace cpc;

namespace
{

ContactSpec foot(const std::string & limb, double x, double y, double z = 0.0)
{
  return ContactSpec::rectangle(limb, Vector3(x, y, z), Matrix3::Identity(), 0.24, 0.14);
}

std::vector<ContactSpec> doubleSupport()
{
  return {foot("LeftFoot", 0.0, 0.1), foot("RightFoot", 0.0, -0.1)};
}

ResultantWrench folded(const Vector3 & f, const Vector3 & n = Vector3::Zero())
{
  return ResultantWrench{f, n, WrenchFrame::WithGravity};
}

Eigen::MatrixXd randomMatrix(std::mt19937_64 & rng, int rows, int cols)
{
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd M(rows, cols);
  for(int j = 0; j < cols; ++j)
  {
    for(int i = 0; i < rows; ++i)
    {
      M(i, j) = n(rng);
    }
  }
  return M;
}

/// Least-squares residual of w against the cone of one limb's columns.
double coneResidual(const GraspMatrix & G, const LimbBlock & block, const Vector6 & w)
{
  NnlsProblem p;
  p.G = G.columns.middleCols(block.offset, block.count);
  p.target = w;
  return solveNnls(p).residual.norm();
}

} // namespace

TEST(Nnls, OrthantProjection)
{
  NnlsProblem p;
  p.G = Eigen::MatrixXd::Zero(6, 2);
  p.G.topRows<2>().setIdentity();
  p.target = Eigen::VectorXd::Zero(6);
  p.target << 1.0, -1.0, 0, 0, 0, 0;
  const NnlsSolution s = solveNnls(p);
  EXPECT_NEAR(s.lambda[0], 1.0, 1e-15);
  EXPECT_EQ(s.lambda[1], 0.0);
  // Residual is G lambda - target.
  Eigen::VectorXd e2 = Eigen::VectorXd::Zero(6);
  e2[1] = 1.0;
  EXPECT_LT((s.residual - e2).norm(), 1e-15);
  EXPECT_LE(s.kktViolation, kNnlsKktTolerance);
}

TEST(Nnls, RepresentableTargetHasZeroResidual)
{
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for(int trial = 0; trial < 50; ++trial)
  {
    NnlsProblem p;
    p.G = randomMatrix(rng, 6, 24);
    Eigen::VectorXd l(24);
    for(int i = 0; i < 24; ++i)
    {
      l[i] = u(rng);
    }
    p.target = p.G * l;
    const NnlsSolution s = solveNnls(p);
    EXPECT_LE(s.residual.norm(), 1e-8 * (1.0 + p.target.norm()));
    EXPECT_GE(s.lambda.minCoeff(), 0.0);
  }
}

TEST(Nnls, MatchesProjectedGradientOracle)
{
  std::mt19937_64 rng(22);
  std::normal_distribution<double> n(0.0, 1.0);
  for(int trial = 0; trial < 50; ++trial)
  {
    NnlsProblem p;
    p.G = randomMatrix(rng, 6, 24);
    p.target = Eigen::VectorXd(6);
    for(int i = 0; i < 6; ++i)
    {
      p.target[i] = 3.0 * n(rng);
    }
    const NnlsSolution s = solveNnls(p);
    const oracle::PgResult o = oracle::projectedGradientNnls(p.G, p.target);
    EXPECT_NEAR(s.objective(), o.objective, 1e-6 * (1.0 + o.objective)) << "trial " << trial;
    EXPECT_LE(s.kktViolation, kNnlsKktTolerance);
    EXPECT_NEAR(s.kktViolation, nnlsKktViolation(p, s.lambda), 1e-15);
    EXPECT_GE(s.lambda.minCoeff(), 0.0);
  }
}

TEST(Nnls, ColumnWeightsMatchAugmentedOracle)
{
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for(int trial = 0; trial < 20; ++trial)
  {
    NnlsProblem p;
    p.G = randomMatrix(rng, 6, 12);
    p.target = randomMatrix(rng, 6, 1).col(0);
    p.columnWeights = Eigen::VectorXd(12);
    for(int i = 0; i < 12; ++i)
    {
      p.columnWeights[i] = 0.5 * u(rng);
    }
    Eigen::MatrixXd Ga(18, 12);
    Ga << p.G, Eigen::MatrixXd(p.columnWeights.cwiseSqrt().asDiagonal());
    Eigen::VectorXd wa = Eigen::VectorXd::Zero(18);
    wa.head<6>() = p.target;
    const NnlsSolution s = solveNnls(p);
    const oracle::PgResult o = oracle::projectedGradientNnls(Ga, wa);
    const double obj = (Ga * s.lambda - wa).squaredNorm();
    EXPECT_NEAR(obj, o.objective, 1e-6 * (1.0 + o.objective));
    EXPECT_LE(s.kktViolation, kNnlsKktTolerance);
  }
}

TEST(Nnls, RejectsMalformedProblems)
{
  NnlsProblem p;
  p.G = Eigen::MatrixXd::Identity(6, 3);
  p.target = Eigen::VectorXd::Zero(5);
  EXPECT_THROW(solveNnls(p), InvalidArgument);
  p.target = Eigen::VectorXd::Zero(6);
  p.target[0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(solveNnls(p), InvalidArgument);
  p.target[0] = 0.0;
  p.columnWeights = -Eigen::VectorXd::Ones(3);
  EXPECT_THROW(solveNnls(p), InvalidArgument);
  p.G.resize(6, 0);
  p.columnWeights.resize(0);
  EXPECT_THROW(solveNnls(p), InvalidArgument);
}

TEST(Nnls, DeterministicForFixedColumnOrder)
{
  std::mt19937_64 rng(24);
  NnlsProblem p;
  p.G = randomMatrix(rng, 6, 40);
  p.target = randomMatrix(rng, 6, 1).col(0);
  const NnlsSolution a = solveNnls(p);
  const NnlsSolution b = solveNnls(p);
  EXPECT_TRUE(a.lambda == b.lambda);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(MinimumNorm, PicksLeastNormAmongExactCombinations)
{
  const GraspMatrix G = assembleGraspMatrix(doubleSupport());
  const RobotParams robot;
  const Vector6 target = (Vector6() << 0, 0, robot.mass * robot.gravity, 0, 0, 0).finished();
  NnlsProblem p;
  p.G = G.columns;
  p.target = target;
  const NnlsSolution s = solveNnls(p);
  const Eigen::VectorXd l = minimumNormCombination(p.G, p.G * s.lambda, s.lambda);
  EXPECT_GE(l.minCoeff(), 0.0);
  EXPECT_LT((p.G * l - target).norm(), 1e-8);
  EXPECT_LE(l.norm(), s.lambda.norm() + 1e-12);
  // Symmetric problem, symmetric answer: every ridge of every vertex gets the same share.
  EXPECT_LT(l.maxCoeff() - l.minCoeff(), 1e-6);
}

TEST(Projection, StaticStanceIsRepresentable)
{
  const RobotParams robot;
  const ProjectionResult r = projectPlannedWrench(folded(Vector3::Zero()), Vector3(0, 0, 0.95), doubleSupport(), robot);
  EXPECT_LT((r.projected.vector() - Vector6::Zero()).norm(), 1e-9);
  EXPECT_EQ(r.projected.frame, WrenchFrame::WithGravity);
  EXPECT_EQ(r.achieved.frame, WrenchFrame::WithoutGravity);
  EXPECT_NEAR(r.achieved.force.z(), robot.mass * robot.gravity, 1e-8);
}

TEST(Projection, OverDemandedLateralForceIsClampedToCone)
{
  const RobotParams robot;
  const double mu = 0.6;
  const Vector3 com(0, 0, 0.95);
  for(double fx : {1.5 * mu * robot.mass * robot.gravity, -3.0 * mu * robot.mass * robot.gravity})
  {
    const ProjectionResult r = projectPlannedWrench(folded(Vector3(fx, 0.3 * fx, 0.0)), com, doubleSupport(), robot);
    const Vector3 f = r.achieved.force;
    EXPECT_LE(f.head<2>().norm(), mu * f.z() + 1e-6);
    EXPECT_GT(f.z(), 0.0);
  }
}

TEST(Projection, IdempotentOnFeasibleWrench)
{
  const RobotParams robot;
  const auto contacts = doubleSupport();
  const GraspMatrix G = assembleGraspMatrix(contacts);
  const Vector3 com(0.02, -0.01, 0.9);
  std::mt19937_64 rng(25);
  std::uniform_real_distribution<double> u(0.0, 40.0);
  for(int trial = 0; trial < 30; ++trial)
  {
    // Feasible by construction: fold a nonnegative ridge combination at the CoM.
    const Eigen::VectorXd lambda = Eigen::VectorXd::NullaryExpr(G.cols(), [&] { return u(rng); });
    const Vector6 w = G.columns * lambda;
    const Vector3 fbar = w.head<3>() - robot.mass * robot.gravityVector();
    const ResultantWrench wp = folded(fbar, w.tail<3>() - com.cross(w.head<3>()));
    const ProjectionResult once = projectPlannedWrench(wp, com, contacts, robot);
    EXPECT_LE((once.projected.vector() - wp.vector()).norm(), 1e-9 * (1.0 + wp.vector().norm())) << trial;
    const ProjectionResult twice = projectPlannedWrench(once.projected, com, contacts, robot);
    EXPECT_LE((twice.projected.vector() - once.projected.vector()).norm(),
              1e-9 * (1.0 + once.projected.vector().norm()));
  }
}

TEST(Projection, RefoldsMomentWithThePlannedForce)
{
  const RobotParams robot;
  const auto contacts = doubleSupport();
  const Vector3 com(0.05, 0.02, 0.9);
  // Far outside the friction cone, so the force gets clipped.
  const ResultantWrench wp = folded(Vector3(2000.0, -300.0, 100.0), Vector3(5.0, -3.0, 1.0));
  const ProjectionResult r = projectPlannedWrench(wp, com, contacts, robot);
  const Vector3 fPlanned = wp.force + robot.mass * robot.gravityVector();
  ASSERT_GT((r.achieved.force - fPlanned).norm(), 100.0);
  EXPECT_LT((r.projected.force - (r.achieved.force - robot.mass * robot.gravityVector())).norm(), 1e-9);
  EXPECT_LT((r.projected.moment - (r.achieved.moment - com.cross(fPlanned))).norm(), 1e-9);
}

TEST(Projection, AddingAContactNeverIncreasesTheResidual)
{
  const RobotParams robot;
  auto contacts = doubleSupport();
  const Vector3 com(0.0, 0.0, 0.95);
  std::mt19937_64 rng(26);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<ContactSpec> withHand = contacts;
  withHand.push_back(ContactSpec::rectangle("LeftHand", Vector3(0.3, 0.55, 1.1), rotationAbout(Vector3::UnitX(),
                                                                                                 M_PI / 2.0),
                                            0.08, 0.08));
  for(int trial = 0; trial < 50; ++trial)
  {
    const ResultantWrench wp = folded(Vector3(400 * n(rng), 400 * n(rng), 200 * n(rng)),
                                      Vector3(150 * n(rng), 150 * n(rng), 50 * n(rng)));
    const double feet = projectPlannedWrench(wp, com, contacts, robot).solution.residual.norm();
    const double hands = projectPlannedWrench(wp, com, withHand, robot).solution.residual.norm();
    EXPECT_LE(hands, feet + 1e-9);
  }
}

TEST(Distribution, SymmetricDoubleSupportSplitsWeight)
{
  const RobotParams robot;
  const DistributionResult d = distributeDesiredWrench(folded(Vector3::Zero()), Vector3(0, 0, 0.95), doubleSupport(),
                                                       robot);
  ASSERT_EQ(d.limbs.size(), 2u);
  for(const auto & l : d.limbs)
  {
    EXPECT_NEAR(l.world[2], robot.mass * robot.gravity / 2.0, 1e-6) << l.limbId;
    EXPECT_LT(l.world.head<2>().norm(), 1e-6);
    // Local: straight up, centered.
    EXPECT_NEAR(l.local[2], robot.mass * robot.gravity / 2.0, 1e-6);
    EXPECT_LT(l.local.tail<3>().norm(), 1e-6);
  }
  EXPECT_LT(d.residual.norm(), 1e-8);
}

TEST(Distribution, SingleSupportCarriesFullWeight)
{
  const RobotParams robot;
  const std::vector<ContactSpec> one = {foot("RightFoot", 0.3, -0.1)};
  const DistributionResult d = distributeDesiredWrench(folded(Vector3::Zero()), Vector3(0.3, -0.1, 0.95), one, robot);
  ASSERT_EQ(d.limbs.size(), 1u);
  EXPECT_EQ(d.limbs[0].limbId, "RightFoot");
  EXPECT_NEAR(d.limbs[0].world[2], robot.mass * robot.gravity, 1e-6);
  EXPECT_LT(d.residual.norm(), 1e-8);
}

TEST(Distribution, BlocksSumToResultantAndStayInCones)
{
  const RobotParams robot;
  std::vector<ContactSpec> contacts = doubleSupport();
  contacts.push_back(ContactSpec::rectangle("LeftHand", Vector3(0.3, 0.55, 1.1),
                                            rotationAbout(Vector3::UnitX(), M_PI / 2.0), 0.08, 0.08));
  contacts.push_back(ContactSpec::rectangle("RightHand", Vector3(0.3, -0.4, 1.0), Matrix3::Identity(), 0.05, 0.05,
                                            0.6, ContactMode::Grasp));
  const GraspMatrix G = assembleGraspMatrix(contacts);
  std::mt19937_64 rng(27);
  std::normal_distribution<double> n(0.0, 1.0);
  for(int trial = 0; trial < 30; ++trial)
  {
    const ResultantWrench wd = folded(Vector3(150 * n(rng), 150 * n(rng), 150 * n(rng)),
                                      Vector3(60 * n(rng), 60 * n(rng), 30 * n(rng)));
    const Vector3 com(0.1 * n(rng), 0.05 * n(rng), 0.9);
    const DistributionResult d = distributeDesiredWrench(wd, com, G, robot);
    Vector6 sum = Vector6::Zero();
    for(std::size_t i = 0; i < d.limbs.size(); ++i)
    {
      sum += d.limbs[i].world;
      const LimbBlock & b = G.blocks[i];
      EXPECT_EQ(d.limbs[i].limbId, b.limbId);
      EXPECT_LE(coneResidual(G, b, d.limbs[i].world), 1e-8 * (1.0 + d.limbs[i].world.norm()));
      const Vector6 back = localToWorldWrench(d.limbs[i].local, b.frame, b.origin);
      EXPECT_LT((back - d.limbs[i].world).norm(), 1e-9);
    }
    EXPECT_LT((sum - G.columns * d.lambda).norm(), 1e-9);
    EXPECT_LT((sum - d.target - d.residual).norm(), 1e-9);
    EXPECT_GE(d.lambda.minCoeff(), 0.0);
  }
}

TEST(Distribution, TargetUsesActualCom)
{
  const RobotParams robot;
  const Vector3 com(0.05, 0.02, 0.9);
  const DistributionResult d = distributeDesiredWrench(folded(Vector3(10, 0, 0)), com, doubleSupport(), robot);
  const Vector3 f(10.0, 0.0, robot.mass * robot.gravity);
  EXPECT_LT((d.target.head<3>() - f).norm(), 1e-12);
  EXPECT_LT((d.target.tail<3>() - com.cross(f)).norm(), 1e-9);
}

TEST(Distribution, RejectsWrongFrameAndEmptySet)
{
  const RobotParams robot;
  ResultantWrench w;
  w.frame = WrenchFrame::WithoutGravity;
  EXPECT_THROW(distributeDesiredWrench(w, Vector3::Zero(), doubleSupport(), robot), InvalidArgument);
  EXPECT_THROW(projectPlannedWrench(w, Vector3::Zero(), doubleSupport(), robot), InvalidArgument);
  EXPECT_THROW(distributeDesiredWrench(folded(Vector3::Zero()), Vector3::Zero(), std::vector<ContactSpec>{}, robot),
               EmptyContactSet);
}

TEST(LocalWrench, RoundTrip)
{
  std::mt19937_64 rng(28);
  std::normal_distribution<double> n(0.0, 1.0);
  for(int i = 0; i < 100; ++i)
  {
    const Matrix3 R = rotationExp(Vector3(n(rng), n(rng), n(rng)));
    const Vector3 o(n(rng), n(rng), n(rng));
    Vector6 w;
    w << n(rng), n(rng), n(rng), n(rng), n(rng), n(rng);
    EXPECT_LT((localToWorldWrench(worldToLocalWrench(w, R, o), R, o) - w).norm(), 1e-12);
  }
  // A pure force through the origin point has no local moment.
  const Vector3 o(0.3, 0.1, 0.0);
  Vector6 w;
  w << 0, 0, 100, o.cross(Vector3(0, 0, 100));
  EXPECT_LT(worldToLocalWrench(w, Matrix3::Identity(), o).tail<3>().norm(), 1e-12);
}
