#pragma once

#include <cpc/centroidal.h>
#include <cpc/contact.h>
#include <cpc/preview.h>
#include <cpc/stabilizer.h>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cpc
{

struct LimbPose
{
  Vector3 position = Vector3::Zero();
  Matrix3 rotation = Matrix3::Identity();
};

/// Interval [start, end) during which a fixed set of contacts is active.
struct ContactPhase
{
  double start = 0.0;
  double end = 0.0;
  std::vector<ContactSpec> contacts;
  /// Desired limb-end pose for every limb, in contact or not.
  std::map<std::string, LimbPose> limbTargets;
  /// Only used by the Explicit reference rule.
  std::optional<Vector3> comRef;
  std::optional<Vector3> eulerRef;

  bool hasContact(const std::string & limbId) const;
};

enum class ReferenceRuleKind
{
  /// Mean of the supporting foot centers.
  CenterOfContacts,
  /// As CenterOfContacts, but in single support the lateral reference moves inward by `lateralOffset`.
  CenterWithLateralOffset,
  /// Mean of all foot targets plus `offset`.
  FixedOffsetFromStructure,
  /// Per-phase comRef/eulerRef.
  Explicit
};

struct ReferenceRule
{
  ReferenceRuleKind kind = ReferenceRuleKind::CenterOfContacts;
  double lateralOffset = 0.0;
  Vector3 offset = Vector3::Zero();
};

struct LimbDamping
{
  DampingParams contact = DampingParams::contactDefaults();
  DampingParams nonContact = DampingParams::nonContactDefaults();
};

struct Disturbance
{
  double time = 0.0;
  /// Linear (N s) and angular (N m s) impulse applied at the CoM over one control step.
  Vector6 impulse = Vector6::Zero();
};

/// Sinusoidal motion of every contact, applied to the vertices and limb targets.
struct EnvironmentMotion
{
  bool enabled = false;
  double translationAmplitude = 0.02;
  double rotationAmplitude = 2.0 * 3.14159265358979323846 / 180.0;
  double period = 2.0;
  Vector3 translationAxis = Vector3::UnitX();
  Vector3 rotationAxis = Vector3::UnitY();
  Vector3 pivot = Vector3::Zero();

  /// Rigid transform of the environment at time t.
  LimbPose at(double t) const;
};

struct MeasurementNoise
{
  double positionStd = 0.0;
  double velocityStd = 0.0;
  /// When set, velocities come from filtered differences of the noisy positions.
  bool estimateRates = false;
};

enum class LoopMode
{
  ClosedLoop,
  OpenLoop
};

struct ScenarioConfig
{
  int schemaVersion = 1;
  std::string name = "unnamed";
  RobotParams robot;
  std::vector<ContactPhase> phases;
  ReferenceRule rule;
  double comHeightOffset = 0.95;
  PreviewWeights linearWeights = PreviewWeights::linearDefaults();
  PreviewWeights angularWeights = PreviewWeights::angularDefaults();
  StabilizerGains stabilizerGains;
  /// Limbs without an entry use the defaults.
  std::map<std::string, LimbDamping> damping;
  std::vector<std::string> footLimbs = {"LeftFoot", "RightFoot"};
  double controlDt = 0.002;
  std::vector<Disturbance> disturbances;
  double contactMargin = 0.02;
  double wrenchLag = 0.02;
  EnvironmentMotion environment;
  MeasurementNoise noise;
  std::uint64_t seed = 0;
  /// Maximum number of solver faults before a run is reported as failed.
  int faultBudget = 0;
  LoopMode mode = LoopMode::ClosedLoop;
  /// Swing apex height of limb targets moving between phases.
  double swingClearance = 0.05;

  double duration() const
  {
    return phases.empty() ? 0.0 : phases.back().end;
  }

  /// Throws ConfigError on invalid content.
  void validate() const;

  bool isFoot(const std::string & limbId) const;
  LimbDamping dampingFor(const std::string & limbId) const;

  /// Index of the phase active at t; times past the end map to the last phase.
  std::size_t phaseIndex(double t) const;
  const ContactPhase & phaseAt(double t) const
  {
    return phases[phaseIndex(t)];
  }

  /// Active contacts at t, moved with the environment.
  std::vector<ContactSpec> activeContacts(double t) const;

  /// Piecewise-constant CoM and Euler reference at t.
  Vector3 comReference(double t) const;
  Vector3 eulerReference(double t) const;

  /// Desired limb pose at t. Limbs that change target between phases follow a cubic path with a mid-swing lift.
  LimbPose limbDesiredPose(const std::string & limbId, double t) const;

  /// Every limb id that appears in any phase.
  std::vector<std::string> limbIds() const;

  /// Copy cut to `duration` seconds, or with its last phase extended when longer.
  ScenarioConfig withDuration(double duration) const;
};

/// N_h samples per axis at t + i dt (i = 1..N_h) of the preview grid. Reference forces and moments are zero.
ReferenceWindows generateReferenceWindow(const ScenarioConfig & cfg, double t);

/// Allocation-free variant writing into pre-sized windows.
void generateReferenceWindow(const ScenarioConfig & cfg, double t, ReferenceWindows & out);

/// Built-in scenarios.
namespace scenarios
{

ScenarioConfig stand(double duration = 5.0);
ScenarioConfig walk(int steps = 6, double stride = 0.3);
ScenarioConfig walkWithHands();
ScenarioConfig handrailStairs();
ScenarioConfig ladder();
ScenarioConfig handsSupport();
ScenarioConfig movingEnvironment();
ScenarioConfig cartwheel();
/// Double-support stance with a lateral 50 N s impulse.
ScenarioConfig push(double impulse = 50.0, double time = 1.0, double duration = 4.0);

std::vector<std::string> names();
/// Throws ConfigError for unknown names.
ScenarioConfig byName(const std::string & name);

} // namespace scenarios

/// Reads a JSON scenario file, or a built-in scenario when `path` is "builtin:<name>".
ScenarioConfig loadScenario(const std::string & path);
ScenarioConfig scenarioFromJson(const std::string & text);
std::string scenarioToJson(const ScenarioConfig & cfg);
void saveScenario(const ScenarioConfig & cfg, const std::string & path);

} // namespace cpc
