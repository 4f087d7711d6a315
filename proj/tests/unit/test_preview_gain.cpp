#include <cpc/errors.h>
#include <cpc/preview.h>

#include "oracles/oracles.h"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace cpc;

namespace
{

RobotParams robot()
{
  return RobotParams{};
}

PreviewWeights withHorizon(PreviewWeights w, int n)
{
  w.horizonSteps = n;
  return w;
}

ReferenceWindow constantWindow(int n, double pos, double force = 0.0)
{
  ReferenceWindow w(n, 2);
  w.col(0).setConstant(pos);
  w.col(1).setConstant(force);
  return w;
}

double blockMax(const Eigen::VectorXd & v, int begin, int len)
{
  return v.segment(begin, len).maxCoeff();
}

} // namespace

TEST(Riccati, MatchesDoublingOracleForDefaultWeights)
{
  for(Axis axis : kAllAxes)
  {
    const PreviewWeights w = isLinear(axis) ? PreviewWeights::linearDefaults() : PreviewWeights::angularDefaults();
    const AxisSystem sys = discretizeAxis(robot(), axis, w.dt);
    const Eigen::Matrix3d H = sys.C.transpose() * w.Q() * sys.C;
    const Eigen::Matrix3d P = solveDiscreteRiccati(sys.A, sys.B, H, w.inputWeight);
    const Eigen::Matrix3d Po = oracle::dareDoubling(sys.A, sys.B, H, w.inputWeight);
    EXPECT_LE((P - Po).norm(), 1e-8 * P.norm()) << axisName(axis);
  }
}

TEST(Riccati, MatchesDoublingOracleOnRandomWeights)
{
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for(int trial = 0; trial < 30; ++trial)
  {
    RobotParams p;
    p.mass = 10.0 + 150.0 * u(rng);
    const double dt = 0.002 + 0.05 * u(rng);
    const AxisSystem sys = discretizeAxis(p, Axis::X, dt);
    const Eigen::Vector2d q(std::pow(10.0, 3.0 * u(rng)), std::pow(10.0, -6.0 + 4.0 * u(rng)));
    const double R = std::pow(10.0, -8.0 + 4.0 * u(rng));
    const Eigen::Matrix3d H = sys.C.transpose() * q.asDiagonal() * sys.C;
    const Eigen::Matrix3d P = solveDiscreteRiccati(sys.A, sys.B, H, R);
    const Eigen::Matrix3d Po = oracle::dareDoubling(sys.A, sys.B, H, R);
    EXPECT_LE((P - Po).norm(), 1e-8 * P.norm()) << "trial " << trial;
  }
}

TEST(Riccati, ReportsDivergenceWithResidual)
{
  const PreviewWeights w = PreviewWeights::linearDefaults();
  const AxisSystem sys = discretizeAxis(robot(), Axis::X, w.dt);
  const Eigen::Matrix3d H = sys.C.transpose() * w.Q() * sys.C;
  RiccatiOptions opts;
  opts.maxIterations = 5;
  try
  {
    solveDiscreteRiccati(sys.A, sys.B, H, w.inputWeight, opts);
    FAIL() << "expected RiccatiDivergence";
  }
  catch(const RiccatiDivergence & e)
  {
    EXPECT_GT(e.residual(), 0.0);
  }
}

TEST(SynthesizeGains, StableForDefaultWeights)
{
  for(Axis axis : kAllAxes)
  {
    const PreviewWeights w = isLinear(axis) ? PreviewWeights::linearDefaults() : PreviewWeights::angularDefaults();
    const PreviewGains g = synthesizeGains(discretizeAxis(robot(), axis, w.dt), w);
    EXPECT_LT(g.closedLoopSpectralRadius, 1.0) << axisName(axis);
    EXPECT_EQ(g.horizon(), 400);
  }
}

TEST(SynthesizeGains, FeedforwardDecaysGeometrically)
{
  for(Axis axis : kAllAxes)
  {
    const PreviewWeights w = isLinear(axis) ? PreviewWeights::linearDefaults() : PreviewWeights::angularDefaults();
    const AxisSystem sys = discretizeAxis(robot(), axis, w.dt);
    const PreviewGains g = synthesizeGains(sys, w);
    const Eigen::Matrix3d acl = sys.A - sys.B * g.kFb;
    Eigen::EigenSolver<Eigen::Matrix3d> es(acl);
    const Eigen::Matrix3cd V = es.eigenvectors();
    const Eigen::JacobiSVD<Eigen::Matrix3cd> svd(V);
    const double kappa = svd.singularValues()(0) / svd.singularValues()(2);
    const double rho = es.eigenvalues().cwiseAbs().maxCoeff();
    EXPECT_NEAR(rho, g.closedLoopSpectralRadius, 1e-12);
    const double S = w.inputWeight + sys.B.dot(g.riccati * sys.B);
    const double bound0 = sys.B.norm() / S * kappa * (sys.C.transpose() * w.Q()).norm();
    Eigen::VectorXd norms(g.horizon());
    for(int i = 0; i < g.horizon(); ++i)
    {
      norms[i] = g.kFf.row(i).norm();
      ASSERT_LE(norms[i], bound0 * std::pow(rho + 1e-6, i) * (1.0 + 1e-9)) << axisName(axis) << " i=" << i;
    }
    // Slow complex poles make the rows swing before they fade; by the end of the window little is left.
    EXPECT_LT(blockMax(norms, g.horizon() - 50, 50), 0.05 * norms.maxCoeff()) << axisName(axis);
  }
}

TEST(SynthesizeGains, FeedforwardShrinksAsInputWeightGrows)
{
  PreviewWeights w = PreviewWeights::linearDefaults();
  w.outputWeight = Eigen::Vector2d(1e2, 0.0);
  const AxisSystem sys = discretizeAxis(robot(), Axis::X, w.dt);
  double previous = std::numeric_limits<double>::infinity();
  for(int k = 0; k < 14; ++k)
  {
    const PreviewGains g = synthesizeGains(sys, w);
    const double n = g.kFf.norm();
    EXPECT_LT(n, previous) << "R = " << w.inputWeight;
    previous = n;
    w.inputWeight *= 10.0;
  }
  EXPECT_LT(previous, 1e-3);
}

TEST(SynthesizeGains, DeterministicBitwise)
{
  const PreviewWeights w = PreviewWeights::angularDefaults();
  const AxisSystem sys = discretizeAxis(robot(), Axis::Pitch, w.dt);
  const PreviewGains a = synthesizeGains(sys, w);
  const PreviewGains b = synthesizeGains(sys, w);
  EXPECT_TRUE(a.kFb == b.kFb);
  EXPECT_TRUE(a.kFf == b.kFf);
  EXPECT_TRUE(a.kTail == b.kTail);
  EXPECT_TRUE(a.riccati == b.riccati);
}

TEST(SynthesizeGains, RejectsMismatchedPeriod)
{
  const PreviewWeights w = PreviewWeights::linearDefaults();
  EXPECT_THROW(synthesizeGains(discretizeAxis(robot(), Axis::X, 0.002), w), InvalidArgument);
  EXPECT_THROW(synthesizeGains(continuousAxis(robot(), Axis::X), w), InvalidArgument);
}

TEST(OptimalInput, ZeroStateZeroReference)
{
  const PreviewWeights w = PreviewWeights::linearDefaults();
  const PreviewGains g = synthesizeGains(discretizeAxis(robot(), Axis::X, w.dt), w);
  EXPECT_EQ(optimalInput(g, Eigen::Vector3d::Zero(), constantWindow(400, 0.0)), 0.0);
}

TEST(OptimalInput, ServoDcProperty)
{
  for(Axis axis : kAllAxes)
  {
    const PreviewWeights w = isLinear(axis) ? PreviewWeights::linearDefaults() : PreviewWeights::angularDefaults();
    const PreviewGains g = synthesizeGains(discretizeAxis(robot(), axis, w.dt), w);
    for(double c : {0.15, -0.4, 1.0})
    {
      const double u = optimalInput(g, Eigen::Vector3d(c, 0.0, 0.0), constantWindow(400, c));
      EXPECT_NEAR(u, 0.0, 1e-9) << axisName(axis) << " c=" << c;
    }
  }
}

TEST(OptimalInput, WindowLengthMismatch)
{
  const PreviewWeights w = PreviewWeights::linearDefaults();
  const PreviewGains g = synthesizeGains(discretizeAxis(robot(), Axis::X, w.dt), w);
  EXPECT_THROW(optimalInput(g, Eigen::Vector3d::Zero(), constantWindow(399, 0.0)), WindowSizeMismatch);
}

TEST(OptimalInput, MatchesDenseOracleOnTenStepToy)
{
  RobotParams p;
  p.mass = 2.0;
  PreviewWeights w;
  w.outputWeight = Eigen::Vector2d(1.0, 0.1);
  w.inputWeight = 0.01;
  w.horizonSteps = 10;
  w.dt = 0.1;
  const AxisSystem sys = discretizeAxis(p, Axis::X, w.dt);
  const PreviewGains g = synthesizeGains(sys, w);
  const Eigen::Matrix3d Po =
      oracle::dareDoubling(sys.A, sys.B, sys.C.transpose() * w.Q() * sys.C, w.inputWeight);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  for(int trial = 0; trial < 20; ++trial)
  {
    ReferenceWindow y(10, 2);
    for(int i = 0; i < 10; ++i)
    {
      y(i, 0) = n(rng);
      y(i, 1) = i == 9 ? 0.0 : n(rng);
    }
    const Eigen::Vector3d x(n(rng), n(rng), n(rng));
    const double u = optimalInput(g, x, y);
    const double uo = oracle::densePreviewInput(sys.A, sys.B, sys.C, w.outputWeight, w.inputWeight, Po, x, y);
    EXPECT_NEAR(u, uo, 1e-6 * std::abs(uo)) << "trial " << trial;
  }
}

TEST(PlanStep, EquilibriumIsStationary)
{
  const PreviewPlanner planner(robot(), PreviewWeights::linearDefaults(), PreviewWeights::angularDefaults(), 0.002);
  AxisStates state;
  ReferenceWindows refs;
  const std::array<double, 6> pose = {0.1, -0.05, 0.95, 0.0, 0.02, -0.3};
  for(int i = 0; i < 6; ++i)
  {
    state[i] = Eigen::Vector3d(pose[i], 0.0, 0.0);
    refs[i] = constantWindow(planner.horizon(), pose[i]);
  }
  const PlanStepResult r = planner.plan(state, refs);
  for(int i = 0; i < 6; ++i)
  {
    EXPECT_NEAR(r.axes[i][0], pose[i], 1e-14);
    EXPECT_NEAR(r.axes[i][1], 0.0, 1e-11);
    EXPECT_NEAR(r.jerk[i], 0.0, 1e-9);
  }
  // The vertical contact force stays at the weight: the folded wrench vanishes.
  EXPECT_NEAR(r.wrench.force.z(), 0.0, 1e-6);
  EXPECT_LT(r.wrench.vector().norm(), 1e-6);
  EXPECT_EQ(r.wrench.frame, WrenchFrame::WithGravity);
}

TEST(PlanStep, AnticipatesReferenceStep)
{
  // Reference jumps by 0.15 m at t = 1 s; the plan starts moving well before.
  const PreviewPlanner planner(robot(), PreviewWeights::linearDefaults(), PreviewWeights::angularDefaults(), 0.005);
  const int N = planner.horizon();
  AxisStates state;
  for(auto & s : state)
  {
    s.setZero();
  }
  ReferenceWindows refs;
  double firstMotion = -1.0;
  for(int k = 0; k < 300; ++k)
  {
    const double t = k * 0.005;
    for(auto & r : refs)
    {
      r = constantWindow(N, 0.0);
    }
    for(int i = 0; i < N; ++i)
    {
      refs[0](i, 0) = t + (i + 1) * 0.005 >= 1.0 ? 0.15 : 0.0;
    }
    state = planner.plan(state, refs).axes;
    if(firstMotion < 0.0 && std::abs(state[0][1]) > 1e-3)
    {
      firstMotion = t;
    }
  }
  ASSERT_GE(firstMotion, 0.0);
  EXPECT_LE(firstMotion, 1.0 - 0.1);
  EXPECT_GT(state[0][0], 0.1);
}

TEST(PlanStep, RejectsInconsistentAxes)
{
  const PreviewWeights w = PreviewWeights::linearDefaults();
  std::array<PreviewGains, 6> gains;
  std::array<AxisSystem, 6> systems;
  for(int i = 0; i < 6; ++i)
  {
    gains[i] = synthesizeGains(discretizeAxis(robot(), Axis::X, w.dt), withHorizon(w, i == 5 ? 20 : 10));
    systems[i] = discretizeAxis(robot(), Axis::X, w.dt);
  }
  ReferenceWindows refs;
  for(auto & r : refs)
  {
    r = constantWindow(10, 0.0);
  }
  EXPECT_THROW(planStep(gains, systems, robot(), AxisStates{}, refs), InvalidArgument);
}

TEST(PreviewPlanner, RejectsMismatchedGrids)
{
  PreviewWeights angular = PreviewWeights::angularDefaults();
  angular.horizonSteps = 300;
  EXPECT_THROW(PreviewPlanner(robot(), PreviewWeights::linearDefaults(), angular, 0.002), InvalidArgument);
}
