#include <cpc/errors.h>
#include <cpc/rotation.h>
#include <cpc/scenario.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace cpc
{

namespace
{

constexpr double kTimeTol = 1e-9;

LimbPose applyPose(const LimbPose & env, const LimbPose & pose)
{
  return {env.rotation * pose.position + env.position, env.rotation * pose.rotation};
}

bool hasFootContact(const ScenarioConfig & cfg, const ContactPhase & phase)
{
  return std::any_of(phase.contacts.begin(), phase.contacts.end(),
                     [&](const ContactSpec & c) { return cfg.isFoot(c.limbId); });
}

struct StaticReference
{
  Vector3 com = Vector3::Zero();
  Vector3 euler = Vector3::Zero();
};

// Mean height of the feet: contacting feet first, foot targets otherwise.
double footHeight(const ScenarioConfig & cfg, const ContactPhase & phase)
{
  double sum = 0.0;
  int n = 0;
  for(const auto & c : phase.contacts)
  {
    if(cfg.isFoot(c.limbId))
    {
      sum += c.center().z();
      ++n;
    }
  }
  if(n == 0)
  {
    for(const auto & [limb, pose] : phase.limbTargets)
    {
      if(cfg.isFoot(limb))
      {
        sum += pose.position.z();
        ++n;
      }
    }
  }
  if(n == 0)
  {
    throw ConfigError("phase starting at " + std::to_string(phase.start) + " has no foot to take the height from");
  }
  return sum / n;
}

StaticReference staticReference(const ScenarioConfig & cfg, std::size_t index)
{
  const ContactPhase & phase = cfg.phases[index];
  StaticReference ref;
  if(cfg.rule.kind == ReferenceRuleKind::Explicit)
  {
    if(!phase.comRef)
    {
      throw ConfigError("explicit reference rule requires a CoM reference in every phase");
    }
    ref.com = *phase.comRef;
    ref.euler = phase.eulerRef.value_or(Vector3::Zero());
    return ref;
  }

  const double z = footHeight(cfg, phase) + cfg.comHeightOffset;
  Vector2 xy = Vector2::Zero();
  if(cfg.rule.kind == ReferenceRuleKind::FixedOffsetFromStructure)
  {
    int n = 0;
    for(const auto & [limb, pose] : phase.limbTargets)
    {
      if(cfg.isFoot(limb))
      {
        xy += pose.position.head<2>();
        ++n;
      }
    }
    if(n == 0)
    {
      throw ConfigError("structure offset rule requires foot targets in every phase");
    }
    xy = xy / n + cfg.rule.offset.head<2>();
    ref.com << xy, z + cfg.rule.offset.z();
    return ref;
  }

  // Supporting feet, or every contact when no foot touches (hands-only support).
  const bool feet = hasFootContact(cfg, phase);
  int n = 0;
  const ContactSpec * support = nullptr;
  for(const auto & c : phase.contacts)
  {
    if(!feet || cfg.isFoot(c.limbId))
    {
      xy += c.center().head<2>();
      support = &c;
      ++n;
    }
  }
  if(n == 0)
  {
    throw ConfigError("phase starting at " + std::to_string(phase.start) + " has no contact");
  }
  xy /= n;
  if(cfg.rule.kind == ReferenceRuleKind::CenterWithLateralOffset && feet && n == 1)
  {
    // Shift toward the swing foot target.
    for(const auto & [limb, pose] : phase.limbTargets)
    {
      if(cfg.isFoot(limb) && limb != support->limbId)
      {
        const double dy = pose.position.y() - xy.y();
        if(std::abs(dy) > 1e-9)
        {
          xy.y() += std::copysign(cfg.rule.lateralOffset, dy);
        }
        break;
      }
    }
  }
  ref.com << xy, z;
  return ref;
}

Vector3 moveWithEnvironment(const ScenarioConfig & cfg, const Vector3 & p, double t)
{
  if(!cfg.environment.enabled)
  {
    return p;
  }
  const LimbPose env = cfg.environment.at(t);
  return env.rotation * p + env.position;
}

} // namespace

bool ContactPhase::hasContact(const std::string & limbId) const
{
  return std::any_of(contacts.begin(), contacts.end(), [&](const ContactSpec & c) { return c.limbId == limbId; });
}

LimbPose EnvironmentMotion::at(double t) const
{
  LimbPose pose;
  if(!enabled)
  {
    return pose;
  }
  const double s = std::sin(2.0 * std::numbers::pi * t / period);
  pose.rotation = rotationAbout(rotationAxis, rotationAmplitude * s);
  // Rotation about the pivot, then translation.
  pose.position = pivot - pose.rotation * pivot + translationAmplitude * s * translationAxis.normalized();
  return pose;
}

bool ScenarioConfig::isFoot(const std::string & limbId) const
{
  return std::find(footLimbs.begin(), footLimbs.end(), limbId) != footLimbs.end();
}

LimbDamping ScenarioConfig::dampingFor(const std::string & limbId) const
{
  const auto it = damping.find(limbId);
  return it == damping.end() ? LimbDamping{} : it->second;
}

void ScenarioConfig::validate() const
{
  if(schemaVersion != 1)
  {
    throw ConfigError("unsupported scenario schema version " + std::to_string(schemaVersion));
  }
  try
  {
    robot.validate();
    linearWeights.validate();
    angularWeights.validate();
    stabilizerGains.validate();
    for(const auto & [limb, d] : damping)
    {
      d.contact.validate();
      d.nonContact.validate();
    }
  }
  catch(const InvalidArgument & e)
  {
    throw ConfigError(std::string("scenario ") + name + ": " + e.what());
  }
  if(!(controlDt > 0.0))
  {
    throw ConfigError("control period must be positive");
  }
  if(linearWeights.dt != angularWeights.dt || linearWeights.horizonSteps != angularWeights.horizonSteps)
  {
    throw ConfigError("linear and angular preview weights must share horizon and period");
  }
  if(linearWeights.dt < controlDt - kTimeTol)
  {
    throw ConfigError("preview period must not be shorter than the control period");
  }
  if(!(contactMargin >= 0.0) || !(wrenchLag >= 0.0) || faultBudget < 0)
  {
    throw ConfigError("contact margin, wrench lag and fault budget must be non-negative");
  }
  if(environment.enabled && !(environment.period > 0.0))
  {
    throw ConfigError("environment motion period must be positive");
  }
  if(noise.positionStd < 0.0 || noise.velocityStd < 0.0)
  {
    throw ConfigError("noise standard deviations must be non-negative");
  }
  if(phases.empty())
  {
    throw ConfigError("scenario " + name + " has no phase");
  }
  if(std::abs(phases.front().start) > kTimeTol)
  {
    throw ConfigError("the first phase must start at time zero");
  }
  for(std::size_t i = 0; i < phases.size(); ++i)
  {
    const ContactPhase & p = phases[i];
    if(!(p.end > p.start))
    {
      throw ConfigError("phase " + std::to_string(i) + " must end after it starts");
    }
    if(i > 0 && std::abs(p.start - phases[i - 1].end) > kTimeTol)
    {
      throw ConfigError("phase " + std::to_string(i) + " does not start where the previous one ends");
    }
    if(p.contacts.empty())
    {
      throw ConfigError("phase " + std::to_string(i) + " has no contact");
    }
    std::set<std::string> seen;
    for(const auto & c : p.contacts)
    {
      if(!seen.insert(c.limbId).second)
      {
        throw ConfigError("phase " + std::to_string(i) + " lists limb " + c.limbId + " twice");
      }
      try
      {
        c.validate();
      }
      catch(const InvalidArgument & e)
      {
        throw ConfigError("phase " + std::to_string(i) + ": " + e.what());
      }
    }
    staticReference(*this, i);
  }
  for(const auto & d : disturbances)
  {
    if(!d.impulse.allFinite() || !std::isfinite(d.time))
    {
      throw ConfigError("disturbances must be finite");
    }
  }
}

std::size_t ScenarioConfig::phaseIndex(double t) const
{
  if(phases.empty())
  {
    throw ConfigError("scenario has no phase");
  }
  // First phase whose end lies after t.
  const auto it = std::upper_bound(phases.begin(), phases.end(), t,
                                   [](double time, const ContactPhase & p) { return time < p.end; });
  if(it == phases.end())
  {
    return phases.size() - 1;
  }
  return static_cast<std::size_t>(it - phases.begin());
}

std::vector<ContactSpec> ScenarioConfig::activeContacts(double t) const
{
  std::vector<ContactSpec> out = phaseAt(t).contacts;
  if(environment.enabled)
  {
    const LimbPose env = environment.at(t);
    for(auto & c : out)
    {
      c = c.transformed(env.rotation, env.position);
    }
  }
  return out;
}

Vector3 ScenarioConfig::comReference(double t) const
{
  return moveWithEnvironment(*this, staticReference(*this, phaseIndex(t)).com, t);
}

Vector3 ScenarioConfig::eulerReference(double t) const
{
  return staticReference(*this, phaseIndex(t)).euler;
}

LimbPose ScenarioConfig::limbDesiredPose(const std::string & limbId, double t) const
{
  const std::size_t k = phaseIndex(t);
  auto target = [&](std::size_t i) -> const LimbPose * {
    const auto it = phases[i].limbTargets.find(limbId);
    return it == phases[i].limbTargets.end() ? nullptr : &it->second;
  };
  const LimbPose * current = target(k);
  if(!current)
  {
    throw ConfigError("limb " + limbId + " has no target in the phase active at " + std::to_string(t));
  }

  LimbPose pose = *current;
  if(!phases[k].hasContact(limbId))
  {
    // Swing through the whole run of non-contact phases, from the last contact pose to the next one.
    std::size_t first = k;
    while(first > 0 && !phases[first - 1].hasContact(limbId) && target(first - 1))
    {
      --first;
    }
    std::size_t last = k;
    while(last + 1 < phases.size() && !phases[last + 1].hasContact(limbId) && target(last + 1))
    {
      ++last;
    }
    const LimbPose * from = first > 0 && target(first - 1) ? target(first - 1) : target(first);
    const LimbPose * to = last + 1 < phases.size() && target(last + 1) ? target(last + 1) : target(last);
    const double t0 = phases[first].start;
    const double t1 = phases[last].end;
    const double s = std::clamp((t - t0) / (t1 - t0), 0.0, 1.0);
    const double blend = s * s * (3.0 - 2.0 * s);
    pose.position = from->position + blend * (to->position - from->position);
    if((to->position - from->position).norm() > 1e-9)
    {
      pose.position.z() += 4.0 * swingClearance * s * (1.0 - s);
    }
    pose.rotation =
        from->rotation * rotationExp(blend * rotationLog(from->rotation.transpose() * to->rotation));
  }
  return environment.enabled ? applyPose(environment.at(t), pose) : pose;
}

std::vector<std::string> ScenarioConfig::limbIds() const
{
  std::vector<std::string> ids;
  auto add = [&](const std::string & id) {
    if(std::find(ids.begin(), ids.end(), id) == ids.end())
    {
      ids.push_back(id);
    }
  };
  for(const auto & p : phases)
  {
    for(const auto & c : p.contacts)
    {
      add(c.limbId);
    }
    for(const auto & [limb, pose] : p.limbTargets)
    {
      add(limb);
    }
  }
  return ids;
}

ScenarioConfig ScenarioConfig::withDuration(double duration) const
{
  if(!(duration > 0.0) || !std::isfinite(duration))
  {
    throw ConfigError("duration override must be positive");
  }
  ScenarioConfig out = *this;
  while(out.phases.size() > 1 && out.phases.back().start >= duration - kTimeTol)
  {
    out.phases.pop_back();
  }
  out.phases.back().end = duration;
  return out;
}

void generateReferenceWindow(const ScenarioConfig & cfg, double t, ReferenceWindows & out)
{
  const int N = cfg.linearWeights.horizonSteps;
  const double dt = cfg.linearWeights.dt;
  for(auto & w : out)
  {
    if(w.rows() != N)
    {
      w.resize(N, 2);
    }
    w.col(1).setZero();
  }
  std::size_t cached = cfg.phases.size();
  StaticReference ref;
  for(int i = 0; i < N; ++i)
  {
    const double s = t + (i + 1) * dt;
    const std::size_t k = cfg.phaseIndex(s);
    if(k != cached)
    {
      ref = staticReference(cfg, k);
      cached = k;
    }
    const Vector3 com = moveWithEnvironment(cfg, ref.com, s);
    for(int a = 0; a < 3; ++a)
    {
      out[a](i, 0) = com[a];
      out[a + 3](i, 0) = ref.euler[a];
    }
  }
}

ReferenceWindows generateReferenceWindow(const ScenarioConfig & cfg, double t)
{
  ReferenceWindows out;
  generateReferenceWindow(cfg, t, out);
  return out;
}

} // namespace cpc
