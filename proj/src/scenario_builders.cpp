#include <cpc/errors.h>
#include <cpc/rotation.h>
#include <cpc/scenario.h>

#include <cmath>
#include <numbers>

namespace cpc::scenarios
{

namespace
{

constexpr double kSoleLength = 0.24;
constexpr double kSoleWidth = 0.14;
constexpr double kFootSpacing = 0.1;
constexpr double kPalm = 0.08;

const std::string LF = "LeftFoot";
const std::string RF = "RightFoot";
const std::string LH = "LeftHand";
const std::string RH = "RightHand";

Matrix3 frameOf(const Vector3 & t1, const Vector3 & t2)
{
  Matrix3 R;
  R << t1.normalized(), t2.normalized(), t1.normalized().cross(t2.normalized());
  return R;
}

ContactSpec foot(const std::string & limb, double x, double y, double z = 0.0, const Matrix3 & R = Matrix3::Identity())
{
  return ContactSpec::rectangle(limb, Vector3(x, y, z), R, kSoleLength, kSoleWidth);
}

ContactSpec palm(const std::string & limb, const Vector3 & center, const Matrix3 & R)
{
  return ContactSpec::rectangle(limb, center, R, kPalm, kPalm);
}

// Builds contiguous phases from the current placement of every limb.
class Timeline
{
public:
  explicit Timeline(ScenarioConfig & cfg) : cfg_(cfg) {}

  void place(const ContactSpec & c)
  {
    placed_[c.limbId] = c;
  }

  Timeline & phase(double duration,
                   const std::vector<std::string> & inContact,
                   std::optional<Vector3> com = std::nullopt,
                   std::optional<Vector3> euler = std::nullopt)
  {
    ContactPhase p;
    p.start = t_;
    p.end = t_ + duration;
    for(const auto & limb : inContact)
    {
      p.contacts.push_back(placed_.at(limb));
    }
    for(const auto & [limb, c] : placed_)
    {
      p.limbTargets[limb] = LimbPose{c.center(), c.frame()};
    }
    p.comRef = com;
    p.eulerRef = euler;
    cfg_.phases.push_back(std::move(p));
    t_ += duration;
    return *this;
  }

private:
  ScenarioConfig & cfg_;
  std::map<std::string, ContactSpec> placed_;
  double t_ = 0.0;
};

LimbDamping handDamping(double linearKd)
{
  LimbDamping d;
  d.contact.kd.head<3>().setConstant(linearKd);
  return d;
}

} // namespace

ScenarioConfig stand(double duration)
{
  ScenarioConfig cfg;
  cfg.name = "stand";
  Timeline tl(cfg);
  tl.place(foot(LF, 0.0, kFootSpacing));
  tl.place(foot(RF, 0.0, -kFootSpacing));
  tl.phase(duration, {LF, RF});
  return cfg;
}

ScenarioConfig walk(int steps, double stride)
{
  if(steps < 1)
  {
    throw ConfigError("walk: at least one step is required");
  }
  ScenarioConfig cfg;
  cfg.name = "walk";
  Timeline tl(cfg);
  tl.place(foot(LF, 0.0, kFootSpacing));
  tl.place(foot(RF, 0.0, -kFootSpacing));
  tl.phase(1.0, {LF, RF});
  for(int j = 1; j <= steps; ++j)
  {
    const bool right = j % 2 == 1;
    const std::string & swing = right ? RF : LF;
    const std::string & support = right ? LF : RF;
    tl.place(foot(swing, j * stride, right ? -kFootSpacing : kFootSpacing));
    tl.phase(0.8, {support});
    tl.phase(j == steps ? 1.5 : 0.2, {LF, RF});
  }
  return cfg;
}

ScenarioConfig walkWithHands()
{
  ScenarioConfig cfg;
  cfg.name = "walk_with_hands";
  cfg.damping[LH] = handDamping(1000.0);
  cfg.damping[RH] = handDamping(1000.0);

  // Scaffold boards inclined 25 degrees, tilted toward the centerline.
  const double incline = 25.0 * std::numbers::pi / 180.0;
  const Matrix3 leftBoard = rotationAbout(Vector3::UnitX(), incline);
  const Matrix3 rightBoard = rotationAbout(Vector3::UnitX(), -incline);
  const double wall = 0.55;
  const Matrix3 leftWall = frameOf(Vector3::UnitX(), Vector3::UnitZ());
  const Matrix3 rightWall = frameOf(Vector3::UnitX(), -Vector3::UnitZ());
  const double stride = 0.3;

  Timeline tl(cfg);
  tl.place(foot(LF, 0.0, kFootSpacing, 0.0, leftBoard));
  tl.place(foot(RF, 0.0, -kFootSpacing, 0.0, rightBoard));
  tl.place(palm(LH, Vector3(0.3, wall, 1.1), leftWall));
  tl.place(palm(RH, Vector3(0.9, -wall, 1.1), rightWall));
  tl.phase(1.0, {LF, RF});
  tl.phase(0.5, {LF, RF, LH});
  for(int j = 1; j <= 4; ++j)
  {
    const bool right = j % 2 == 1;
    const std::string & swing = right ? RF : LF;
    const std::string & support = right ? LF : RF;
    const std::string & hand = j <= 2 ? LH : RH;
    if(j == 3)
    {
      // Hand switch in double support.
      tl.phase(0.5, {LF, RF});
      tl.phase(0.5, {LF, RF, RH});
    }
    tl.place(foot(swing, j * stride, right ? -kFootSpacing : kFootSpacing, 0.0, right ? rightBoard : leftBoard));
    tl.phase(0.8, {support, hand});
    tl.phase(0.4, {LF, RF, hand});
  }
  tl.phase(1.0, {LF, RF});
  return cfg;
}

ScenarioConfig handrailStairs()
{
  ScenarioConfig cfg;
  cfg.name = "handrail_stairs";
  cfg.rule.kind = ReferenceRuleKind::CenterWithLateralOffset;
  cfg.rule.lateralOffset = 0.05;

  const double rise = 0.15;
  const double run = 0.3;
  const double slope = std::atan2(rise, run);
  const Matrix3 railFrame = frameOf(Vector3(std::cos(slope), 0.0, std::sin(slope)), Vector3::UnitY());
  const double railY = 0.35;
  auto hand = [&](const std::string & limb, double x, double y) {
    return palm(limb, Vector3(x, y, 0.9 + x * rise / run), railFrame);
  };
  auto stair = [&](const std::string & limb, int k) {
    return foot(limb, k * run, limb == LF ? kFootSpacing : -kFootSpacing, k * rise);
  };

  Timeline tl(cfg);
  tl.place(stair(LF, 0));
  tl.place(stair(RF, 0));
  tl.place(hand(LH, 0.2, railY));
  tl.place(hand(RH, 0.2, -railY));
  tl.phase(1.0, {LF, RF, LH, RH});

  // Foot-over-foot up four steps, then close the stance on the top step.
  const std::vector<std::pair<std::string, int>> moves = {{RF, 1}, {LF, 2}, {RF, 3}, {LF, 4}, {RF, 4}};
  for(std::size_t i = 0; i < moves.size(); ++i)
  {
    const auto & [limb, k] = moves[i];
    tl.place(stair(limb, k));
    tl.phase(1.0, {limb == RF ? LF : RF, LH, RH});
    tl.phase(0.5, {LF, RF, LH, RH});
    if(i == 1 || i == 3)
    {
      const double x = 0.2 + 0.6 * static_cast<double>(i / 2 + 1);
      tl.place(hand(LH, x, railY));
      tl.phase(0.6, {LF, RF, RH});
      tl.phase(0.3, {LF, RF, LH, RH});
      tl.place(hand(RH, x, -railY));
      tl.phase(0.6, {LF, RF, LH});
      tl.phase(0.3, {LF, RF, LH, RH});
    }
  }
  tl.phase(1.0, {LF, RF, LH, RH});
  return cfg;
}

ScenarioConfig ladder()
{
  ScenarioConfig cfg;
  cfg.name = "ladder";
  cfg.rule.kind = ReferenceRuleKind::FixedOffsetFromStructure;
  // 0.4 m behind the ladder, moved 0.1 m forward.
  cfg.rule.offset = Vector3(-0.3, 0.0, 0.0);
  cfg.comHeightOffset = 0.8;
  cfg.stabilizerGains = StabilizerGains::ladderDefaults();
  cfg.damping[LH] = handDamping(50000.0);
  cfg.damping[RH] = handDamping(50000.0);

  const double rung = 0.2;
  auto toe = [&](const std::string & limb, int k) {
    const double y = limb == LF ? 0.12 : -0.12;
    return ContactSpec::make(limb, {Vector3(0.0, y + 0.05, k * rung), Vector3(0.0, y - 0.05, k * rung)},
                             Vector3::UnitZ());
  };
  auto grasp = [&](const std::string & limb, int k) {
    const double y = limb == LH ? 0.2 : -0.2;
    const double z = k * rung;
    return ContactSpec::make(limb,
                             {Vector3(0.02, y + 0.04, z), Vector3(-0.02, y + 0.04, z), Vector3(-0.02, y - 0.04, z),
                              Vector3(0.02, y - 0.04, z)},
                             Vector3::UnitZ(), 0.6, ContactMode::Grasp);
  };

  Timeline tl(cfg);
  int footRung = 1;
  int handRung = 6;
  tl.place(toe(LF, footRung));
  tl.place(toe(RF, footRung));
  tl.place(grasp(LH, handRung));
  tl.place(grasp(RH, handRung));
  tl.phase(1.0, {LF, RF, LH, RH});
  for(int cycle = 0; cycle < 2; ++cycle)
  {
    ++handRung;
    ++footRung;
    tl.place(grasp(RH, handRung));
    tl.phase(1.0, {LF, RF, LH});
    tl.phase(0.5, {LF, RF, LH, RH});
    tl.place(grasp(LH, handRung));
    tl.phase(1.0, {LF, RF, RH});
    tl.phase(0.5, {LF, RF, LH, RH});
    tl.place(toe(RF, footRung));
    tl.phase(1.0, {LF, LH, RH});
    tl.phase(0.5, {LF, RF, LH, RH});
    tl.place(toe(LF, footRung));
    tl.phase(1.0, {RF, LH, RH});
    tl.phase(0.5, {LF, RF, LH, RH});
  }
  tl.phase(1.0, {LF, RF, LH, RH});
  return cfg;
}

ScenarioConfig handsSupport()
{
  ScenarioConfig cfg;
  cfg.name = "hands_support";
  const double height = 0.5;
  const double y = 0.3;
  auto hand = [&](const std::string & limb, double x) {
    return palm(limb, Vector3(x, limb == LH ? y : -y, height), Matrix3::Identity());
  };

  Timeline tl(cfg);
  tl.place(foot(LF, 0.0, kFootSpacing));
  tl.place(foot(RF, 0.0, -kFootSpacing));
  tl.place(hand(LH, 0.3));
  tl.place(hand(RH, 0.3));
  tl.phase(1.0, {LF, RF});
  tl.phase(0.8, {LF, RF, LH, RH});
  double feetX = 0.0;
  double handX = 0.3;
  for(int cycle = 0; cycle < 2; ++cycle)
  {
    feetX += 0.3;
    tl.place(foot(LF, feetX, kFootSpacing));
    tl.place(foot(RF, feetX, -kFootSpacing));
    tl.phase(0.8, {LH, RH});
    tl.phase(0.8, {LF, RF, LH, RH});
    handX += 0.3;
    tl.place(hand(LH, handX));
    tl.phase(0.6, {LF, RF, RH});
    tl.phase(0.3, {LF, RF, LH, RH});
    tl.place(hand(RH, handX));
    tl.phase(0.6, {LF, RF, LH});
    tl.phase(0.3, {LF, RF, LH, RH});
  }
  tl.phase(1.0, {LF, RF, LH, RH});
  return cfg;
}

ScenarioConfig movingEnvironment()
{
  ScenarioConfig cfg;
  cfg.name = "moving_environment";
  cfg.environment.enabled = true;
  cfg.damping[LH] = handDamping(1000.0);
  cfg.damping[RH] = handDamping(1000.0);
  const double wall = 0.5;
  Timeline tl(cfg);
  tl.place(foot(LF, 0.0, kFootSpacing));
  tl.place(foot(RF, 0.0, -kFootSpacing));
  tl.place(palm(LH, Vector3(0.1, wall, 1.0), frameOf(Vector3::UnitX(), Vector3::UnitZ())));
  tl.place(palm(RH, Vector3(0.1, -wall, 1.0), frameOf(Vector3::UnitX(), -Vector3::UnitZ())));
  tl.phase(1.0, {LF, RF});
  tl.phase(5.0, {LF, RF, LH, RH});
  return cfg;
}

ScenarioConfig cartwheel()
{
  ScenarioConfig cfg;
  cfg.name = "cartwheel";
  cfg.rule.kind = ReferenceRuleKind::Explicit;
  cfg.mode = LoopMode::OpenLoop;
  const double pi = std::numbers::pi;
  const double h = 0.9;

  Timeline tl(cfg);
  tl.place(foot(LF, 0.0, 0.1));
  tl.place(foot(RF, 0.0, -0.1));
  tl.place(palm(LH, Vector3(0.0, 0.55, 0.0), Matrix3::Identity()));
  tl.place(palm(RH, Vector3(0.0, 0.95, 0.0), Matrix3::Identity()));
  tl.phase(1.0, {LF, RF}, Vector3(0.0, 0.0, h), Vector3::Zero());
  tl.phase(1.2, {LF, RF, LH}, Vector3(0.0, 0.3, h), Vector3(0.5 * pi, 0.0, 0.0));
  tl.place(foot(RF, 0.0, 1.5));
  tl.phase(1.2, {LH, RH}, Vector3(0.0, 0.75, h), Vector3(pi, 0.0, 0.0));
  tl.place(foot(LF, 0.0, 1.7));
  tl.phase(1.2, {RH, RF}, Vector3(0.0, 1.2, h), Vector3(1.5 * pi, 0.0, 0.0));
  tl.phase(2.0, {LF, RF}, Vector3(0.0, 1.6, h), Vector3(2.0 * pi, 0.0, 0.0));
  return cfg;
}

ScenarioConfig push(double impulse, double time, double duration)
{
  ScenarioConfig cfg = stand(duration);
  cfg.name = "push";
  Disturbance d;
  d.time = time;
  d.impulse << 0.0, impulse, 0.0, 0.0, 0.0, 0.0;
  cfg.disturbances.push_back(d);
  return cfg;
}

std::vector<std::string> names()
{
  return {"stand",         "walk",  "walk_with_hands",    "handrail_stairs", "ladder",
          "hands_support", "push",  "moving_environment", "cartwheel"};
}

ScenarioConfig byName(const std::string & name)
{
  if(name == "stand")
    return stand();
  if(name == "walk")
    return walk();
  if(name == "walk_with_hands")
    return walkWithHands();
  if(name == "handrail_stairs")
    return handrailStairs();
  if(name == "ladder")
    return ladder();
  if(name == "hands_support")
    return handsSupport();
  if(name == "moving_environment")
    return movingEnvironment();
  if(name == "cartwheel")
    return cartwheel();
  if(name == "push")
    return push();
  throw ConfigError("unknown built-in scenario '" + name + "'");
}

} // namespace cpc::scenarios
