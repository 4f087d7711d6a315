#include <cpc/errors.h>
#include <cpc/rotation.h>
#include <cpc/simulation.h>

#include <algorithm>
#include <cmath>

namespace cpc
{

namespace
{

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Vector6 axesPose(const AxisStates & axes)
{
  Vector6 v;
  for(int i = 0; i < 6; ++i)
  {
    v[i] = axes[i][0];
  }
  return v;
}

Vector6 axesRate(const AxisStates & axes)
{
  Vector6 v;
  for(int i = 0; i < 6; ++i)
  {
    v[i] = axes[i][1];
  }
  return v;
}

// Integrates the desired state, keeping the Euler angles continuous.
AxisStates integrateAxes(const AxisStates & axes, const ResultantWrench & wbar, const RobotParams & params, double dt)
{
  const CentroidalState current = toCentroidalState(axes);
  const CentroidalState next = integrateCentroidal(current, wbar, params, dt);
  AxisStates out = toAxisStates(next);
  for(int i = 0; i < 3; ++i)
  {
    out[i + 3][0] = axes[i + 3][0] + wrapAngle(next.euler()[i] - current.euler()[i]);
  }
  return out;
}

Vector2 zmpOrNaN(const Vector6 & contactWrench, double groundHeight)
{
  try
  {
    return zmpFromWrench(ResultantWrench::fromVector(contactWrench, WrenchFrame::WithoutGravity), groundHeight);
  }
  catch(const DegenerateContact &)
  {
    return Vector2::Constant(kNaN);
  }
}

Vector6 foldedVector(const Vector6 & contactWrench, const Vector3 & com, const RobotParams & params)
{
  return foldGravity(ResultantWrench::fromVector(contactWrench, WrenchFrame::WithoutGravity), com, params).vector();
}

} // namespace

Simulation::Simulation(ScenarioConfig cfg)
: cfg_((cfg.validate(), std::move(cfg))),
  planner_(cfg_.robot, cfg_.linearWeights, cfg_.angularWeights, cfg_.controlDt),
  limbIds_(cfg_.limbIds()),
  rateEstimator_(cfg_.controlDt)
{
  for(auto & w : window_)
  {
    w.resize(cfg_.linearWeights.horizonSteps, 2);
  }
  reset();
}

void Simulation::reset()
{
  stepIndex_ = 0;
  const CentroidalState start = CentroidalState::atRest(cfg_.comReference(0.0), Vector3::Zero());
  desired_ = toAxisStates(start);
  // Orientation reference may start away from zero; keep it unwrapped.
  const Vector3 euler0 = cfg_.eulerReference(0.0);
  for(int i = 0; i < 3; ++i)
  {
    desired_[i + 3][0] = euler0[i];
  }
  actual_ = toCentroidalState(desired_);
  measured_ = actual_;
  lastProjected_.setZero();
  lastProjectedContact_.setZero();
  lastDesiredLimb_.assign(limbIds_.size(), Vector6::Zero());
  measuredLimb_.assign(limbIds_.size(), Vector6::Zero());
  compliance_.assign(limbIds_.size(), ComplianceState{});
  firstStep_ = true;
  faults_ = 0;
  rng_.seed(cfg_.seed);
  rateEstimator_.reset();
  cache_ = ContactCache{};
  row_ = TraceRow{};
  row_.limbs.resize(limbIds_.size());
}

const ContactCache & Simulation::contactsAt(double t)
{
  const std::size_t k = cfg_.phaseIndex(t);
  if(k == cache_.phase && (!cfg_.environment.enabled || t == cache_.time))
  {
    return cache_;
  }
  cache_.phase = k;
  cache_.time = t;
  cache_.contacts = cfg_.activeContacts(t);
  cache_.shrunk.clear();
  for(const auto & c : cache_.contacts)
  {
    cache_.shrunk.push_back(c.shrunk(cfg_.contactMargin));
  }
  cache_.graspMatrix = assembleGraspMatrix(cache_.shrunk);
  try
  {
    cache_.support = supportPolygon(cache_.shrunk);
  }
  catch(const NoSupportingContact &)
  {
    cache_.support.reset();
  }
  double sum = 0.0;
  int n = 0;
  for(const auto & c : cache_.shrunk)
  {
    if(c.mode == ContactMode::Unilateral && c.normal.z() > 0.0)
    {
      for(const auto & v : c.vertices)
      {
        sum += v.z();
        ++n;
      }
    }
  }
  cache_.groundHeight = n > 0 ? sum / n : 0.0;
  return cache_;
}

const TraceRow & Simulation::step()
{
  const double dt = cfg_.controlDt;
  const double t = time();
  const RobotParams & robot = cfg_.robot;
  TraceRow & row = row_;
  row.fault = false;
  row.faultMessage.clear();

  // Planning from the desired state.
  generateReferenceWindow(cfg_, t, window_);
  const PlanStepResult plan = planner_.plan(desired_, window_);
  const ContactCache & cc = contactsAt(t);
  const Vector3 comPlanned(plan.axes[0][0], plan.axes[1][0], plan.axes[2][0]);

  Vector6 projected = lastProjected_;
  Vector6 projectedContact = lastProjectedContact_;
  Eigen::VectorXd projectionLambda;
  try
  {
    const ProjectionResult pr = projectPlannedWrench(plan.wrench, comPlanned, cc.graspMatrix, robot);
    projected = pr.projected.vector();
    projectedContact = pr.achieved.vector();
    projectionLambda = pr.lambda;
    row.projectionKkt = pr.solution.kktViolation;
  }
  catch(const Error & e)
  {
    row.fault = true;
    row.faultMessage = std::string("projection: ") + e.what();
  }
  lastProjected_ = projected;
  lastProjectedContact_ = projectedContact;
  const Vector6 plannedWrench = plan.wrench.vector();
  row.plannedWrench = plannedWrench;
  row.projectedWrench = projected;
  row.projectionErrorForce = (plannedWrench.head<3>() - projected.head<3>()).norm();
  row.projectionErrorMoment = (plannedWrench.tail<3>() - projected.tail<3>()).norm();
  row.zmpPlanned = zmpOrNaN(projectedContact, cc.groundHeight);
  row.zmpMargin = cc.support && row.zmpPlanned.allFinite() ? cc.support->signedDistance(row.zmpPlanned) : kNaN;

  const AxisStates desiredNow = desired_;
  desired_ = integrateAxes(desired_, ResultantWrench::fromVector(projected, WrenchFrame::WithGravity), robot, dt);

  std::size_t contactCount = cc.contacts.size();
  auto limbIndex = [&](const std::string & id) {
    return static_cast<std::size_t>(std::find(limbIds_.begin(), limbIds_.end(), id) - limbIds_.begin());
  };
  for(auto & lr : row.limbs)
  {
    lr.inContact = false;
    lr.desired.setZero();
    lr.desiredLocal.setZero();
    lr.measuredLocal.setZero();
  }
  for(const auto & block : cc.graspMatrix.blocks)
  {
    row.limbs[limbIndex(block.limbId)].inContact = true;
  }

  if(cfg_.mode == LoopMode::OpenLoop)
  {
    row.feedbackWrench.setZero();
    row.desiredWrench = projected;
    row.desiredContactWrench = projectedContact;
    row.distributedWrench = projectedContact;
    row.actualContactWrench = projectedContact;
    row.distributionResidual = 0.0;
    row.distributionKkt = row.projectionKkt;
    for(const auto & block : cc.graspMatrix.blocks)
    {
      LimbRecord & lr = row.limbs[limbIndex(block.limbId)];
      if(projectionLambda.size() == cc.graspMatrix.cols())
      {
        lr.desired = cc.graspMatrix.limbWrench(block, projectionLambda);
        lr.desiredLocal = worldToLocalWrench(lr.desired, block.frame, block.origin);
      }
      lr.measured = lr.desired;
      lr.measuredLocal = lr.desiredLocal;
    }
    actual_ = toCentroidalState(desired_);
    measured_ = actual_;
  }
  else
  {
    // Centroidal feedback on the desired state of this step.
    const Vector6 feedback = centroidalFeedback(
        Vector3(desiredNow[0][0], desiredNow[1][0], desiredNow[2][0]),
        eulerToRotation(Vector3(desiredNow[3][0], desiredNow[4][0], desiredNow[5][0])), axesRate(desiredNow),
        measured_.comPos(), eulerToRotation(measured_.euler()), measured_.rate(), cfg_.stabilizerGains);
    row.feedbackWrench = feedback;
    row.desiredWrench = projected + feedback;

    std::vector<Vector6> & desiredLimb = lastDesiredLimb_;
    try
    {
      const DistributionResult dr = distributeDesiredWrench(
          ResultantWrench::fromVector(row.desiredWrench, WrenchFrame::WithGravity), measured_.comPos(),
          cc.graspMatrix, robot);
      std::fill(desiredLimb.begin(), desiredLimb.end(), Vector6::Zero());
      for(const auto & lw : dr.limbs)
      {
        desiredLimb[limbIndex(lw.limbId)] = lw.world;
      }
      row.desiredContactWrench = dr.target;
      row.distributionResidual = dr.residual.norm();
      row.distributionKkt = dr.solution.kktViolation;
    }
    catch(const Error & e)
    {
      row.fault = true;
      row.faultMessage += (row.faultMessage.empty() ? "" : "; ") + std::string("distribution: ") + e.what();
    }

    // Realized limb wrenches: first-order lag, zero for limbs out of contact.
    const double alpha = cfg_.wrenchLag > 0.0 ? 1.0 - std::exp(-dt / cfg_.wrenchLag) : 1.0;
    Vector6 distributed = Vector6::Zero();
    Vector6 realized = Vector6::Zero();
    for(std::size_t i = 0; i < limbIds_.size(); ++i)
    {
      LimbRecord & lr = row.limbs[i];
      if(!lr.inContact)
      {
        desiredLimb[i].setZero();
        measuredLimb_[i].setZero();
      }
      else if(firstStep_)
      {
        measuredLimb_[i] = desiredLimb[i];
      }
      else
      {
        measuredLimb_[i] += alpha * (desiredLimb[i] - measuredLimb_[i]);
      }
      lr.desired = desiredLimb[i];
      lr.measured = measuredLimb_[i];
      distributed += lr.desired;
      realized += lr.measured;
    }
    row.distributedWrench = distributed;
    row.actualContactWrench = realized;

    // Damping control in each limb's contact frame.
    for(const auto & block : cc.graspMatrix.blocks)
    {
      const std::size_t i = limbIndex(block.limbId);
      row.limbs[i].desiredLocal = worldToLocalWrench(row.limbs[i].desired, block.frame, block.origin);
      row.limbs[i].measuredLocal = worldToLocalWrench(row.limbs[i].measured, block.frame, block.origin);
    }
    for(std::size_t i = 0; i < limbIds_.size(); ++i)
    {
      const LimbDamping ld = cfg_.dampingFor(limbIds_[i]);
      DampingParams params = ld.nonContact;
      if(row.limbs[i].inContact)
      {
        params = contactCount == 1 ? ld.contact.withLinearFrom(ld.nonContact) : ld.contact;
      }
      compliance_[i] = dampingStep(compliance_[i], row.limbs[i].measuredLocal, row.limbs[i].desiredLocal, params, dt);
    }

    // Plant.
    Vector6 contact = realized;
    for(const auto & d : cfg_.disturbances)
    {
      if(d.time >= t - 1e-12 && d.time < t + dt - 1e-12)
      {
        const Vector3 force = d.impulse.head<3>() / dt;
        contact.head<3>() += force;
        contact.tail<3>() += actual_.comPos().cross(force) + d.impulse.tail<3>() / dt;
      }
    }
    actual_ = integrateCentroidal(actual_, ResultantWrench::fromVector(foldedVector(contact, actual_.comPos(), robot),
                                                                       WrenchFrame::WithGravity),
                                  robot, dt);

    // Measurement.
    Vector3 pos = actual_.comPos();
    Vector3 euler = actual_.euler();
    Vector3 vel = actual_.comVel();
    Vector3 rate = actual_.eulerRate();
    if(cfg_.noise.positionStd > 0.0 || cfg_.noise.velocityStd > 0.0)
    {
      std::normal_distribution<double> pn(0.0, cfg_.noise.positionStd);
      std::normal_distribution<double> vn(0.0, cfg_.noise.velocityStd);
      for(int a = 0; a < 3; ++a)
      {
        if(cfg_.noise.positionStd > 0.0)
        {
          pos[a] += pn(rng_);
          euler[a] += pn(rng_);
        }
        if(cfg_.noise.velocityStd > 0.0)
        {
          vel[a] += vn(rng_);
          rate[a] += vn(rng_);
        }
      }
    }
    if(cfg_.noise.estimateRates)
    {
      Vector6 pose;
      pose << pos, euler;
      const Vector6 est = rateEstimator_.update(pose);
      vel = est.head<3>();
      rate = est.tail<3>();
    }
    measured_ = CentroidalState(pos, vel, actual_.comAcc(), euler, rate, actual_.eulerAcc());
  }

  ++stepIndex_;
  firstStep_ = false;
  if(row.fault)
  {
    ++faults_;
  }

  const double tEnd = time();
  row.time = tEnd;
  row.phase = static_cast<int>(cc.phase);
  row.refPose << cfg_.comReference(tEnd), cfg_.eulerReference(tEnd);
  row.plannedPose = axesPose(plan.axes);
  row.plannedRate = axesRate(plan.axes);
  row.desiredPose = axesPose(desired_);
  row.desiredRate = axesRate(desired_);
  if(cfg_.mode == LoopMode::OpenLoop)
  {
    row.actualPose = row.desiredPose;
    row.actualRate = row.desiredRate;
  }
  else
  {
    row.actualPose = actual_.pose();
    row.actualRate = actual_.rate();
  }
  row.jerk = plan.jerk;
  row.zmpDesired = zmpOrNaN(row.desiredContactWrench, cc.groundHeight);
  row.zmpActual = zmpOrNaN(row.actualContactWrench, cc.groundHeight);
  for(std::size_t i = 0; i < limbIds_.size(); ++i)
  {
    row.limbs[i].compliance = compliance_[i].vector();
    row.limbs[i].target = cfg_.limbDesiredPose(limbIds_[i], tEnd).position;
  }
  return row;
}

namespace
{

RunResult runWith(ScenarioConfig cfg, std::optional<double> duration)
{
  const double total = duration.value_or(cfg.duration());
  if(!(total > 0.0))
  {
    throw InvalidArgument("run duration must be positive");
  }
  Simulation sim(std::move(cfg));
  RunResult result;
  result.scenario = sim.config().name;
  result.limbIds = sim.limbIds();
  result.faultBudget = sim.config().faultBudget;
  const long steps = std::lround(total / sim.config().controlDt);
  result.rows.reserve(static_cast<std::size_t>(steps));
  for(long k = 0; k < steps; ++k)
  {
    result.rows.push_back(sim.step());
  }
  result.faults = sim.faults();
  return result;
}

} // namespace

RunResult runScenario(const ScenarioConfig & cfg, std::optional<double> duration)
{
  return runWith(cfg, duration);
}

RunResult runClosedLoop(ScenarioConfig cfg, std::optional<double> duration)
{
  cfg.mode = LoopMode::ClosedLoop;
  return runWith(std::move(cfg), duration);
}

RunResult runOpenLoopGeneration(ScenarioConfig cfg, std::optional<double> duration)
{
  cfg.mode = LoopMode::OpenLoop;
  return runWith(std::move(cfg), duration);
}

} // namespace cpc
