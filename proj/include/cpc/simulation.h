#pragma once

#include <cpc/centroidal.h>
#include <cpc/contact.h>
#include <cpc/preview.h>
#include <cpc/scenario.h>
#include <cpc/stabilizer.h>
#include <cpc/wrench_opt.h>

#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace cpc
{

struct LimbRecord
{
  bool inContact = false;
  /// World frame, moment about the origin.
  Vector6 desired = Vector6::Zero();
  Vector6 measured = Vector6::Zero();
  /// Contact surface frame, moment about the contact center.
  Vector6 desiredLocal = Vector6::Zero();
  Vector6 measuredLocal = Vector6::Zero();
  /// Desired limb-end position (contact center, or swing path).
  Vector3 target = Vector3::Zero();
  /// Compliance offset (position, axis-angle).
  Vector6 compliance = Vector6::Zero();
};

/** One control step. States are sampled at `time`, the end of the step; wrenches are the ones applied
 * during the step. Euler angles of the reference, planned and desired states are continuous (not wrapped).
 */
struct TraceRow
{
  double time = 0.0;
  int phase = 0;
  Vector6 refPose = Vector6::Zero();
  Vector6 plannedPose = Vector6::Zero();
  Vector6 plannedRate = Vector6::Zero();
  Vector6 desiredPose = Vector6::Zero();
  Vector6 desiredRate = Vector6::Zero();
  Vector6 actualPose = Vector6::Zero();
  Vector6 actualRate = Vector6::Zero();
  std::array<double, 6> jerk{};
  /// Gravity-folded planned, projected, feedback and desired wrenches.
  Vector6 plannedWrench = Vector6::Zero();
  Vector6 projectedWrench = Vector6::Zero();
  Vector6 feedbackWrench = Vector6::Zero();
  Vector6 desiredWrench = Vector6::Zero();
  /// Contact wrench targeted by the distribution and the sum of the distributed limb wrenches.
  Vector6 desiredContactWrench = Vector6::Zero();
  Vector6 distributedWrench = Vector6::Zero();
  /// Sum of the realized limb wrenches (disturbance excluded).
  Vector6 actualContactWrench = Vector6::Zero();
  double projectionErrorForce = 0.0;
  double projectionErrorMoment = 0.0;
  double distributionResidual = 0.0;
  double projectionKkt = 0.0;
  double distributionKkt = 0.0;
  /// NaN when the vertical force is too small.
  Vector2 zmpPlanned = Vector2::Constant(std::numeric_limits<double>::quiet_NaN());
  Vector2 zmpDesired = Vector2::Constant(std::numeric_limits<double>::quiet_NaN());
  Vector2 zmpActual = Vector2::Constant(std::numeric_limits<double>::quiet_NaN());
  /// Signed distance of the planned ZMP to the margin-shrunk support polygon (positive inside).
  double zmpMargin = std::numeric_limits<double>::quiet_NaN();
  std::vector<LimbRecord> limbs;
  bool fault = false;
  std::string faultMessage;
};

struct RunResult
{
  std::string scenario;
  std::vector<std::string> limbIds;
  std::vector<TraceRow> rows;
  int faults = 0;
  int faultBudget = 0;

  bool withinFaultBudget() const
  {
    return faults <= faultBudget;
  }
};

/// Per-phase data derived from the contact set.
struct ContactCache
{
  std::size_t phase = static_cast<std::size_t>(-1);
  double time = -1.0;
  std::vector<ContactSpec> contacts;
  std::vector<ContactSpec> shrunk;
  GraspMatrix graspMatrix;
  std::optional<Polygon2> support;
  double groundHeight = 0.0;
};

/** Closed-loop reduced-model harness.
 *
 * Per step: reference window, preview plan from the desired state, projection onto the contact constraints,
 * integration to the next desired state, centroidal feedback, distribution to the limbs, damping control and
 * the plant (first-order lag of the limb wrenches plus disturbances, integrated on the centroidal model).
 * In open-loop mode only planning and projection run and the actual state follows the desired one.
 */
class Simulation
{
public:
  explicit Simulation(ScenarioConfig cfg);

  void reset();
  /// Advances one control step and returns its record.
  const TraceRow & step();
  double time() const
  {
    return static_cast<double>(stepIndex_) * cfg_.controlDt;
  }
  int faults() const
  {
    return faults_;
  }

  const ScenarioConfig & config() const
  {
    return cfg_;
  }
  const PreviewPlanner & planner() const
  {
    return planner_;
  }
  const std::vector<std::string> & limbIds() const
  {
    return limbIds_;
  }
  const AxisStates & desiredAxes() const
  {
    return desired_;
  }
  const CentroidalState & actualState() const
  {
    return actual_;
  }

  /// Contacts and derived data at time t (cached per phase when the environment is static).
  const ContactCache & contactsAt(double t);

private:
  ScenarioConfig cfg_;
  PreviewPlanner planner_;
  std::vector<std::string> limbIds_;
  ReferenceWindows window_;
  ContactCache cache_;

  long stepIndex_ = 0;
  AxisStates desired_;
  CentroidalState actual_;
  CentroidalState measured_;
  Vector6 lastProjected_ = Vector6::Zero();
  Vector6 lastProjectedContact_ = Vector6::Zero();
  std::vector<Vector6> lastDesiredLimb_;
  std::vector<Vector6> measuredLimb_;
  std::vector<ComplianceState> compliance_;
  bool firstStep_ = true;
  int faults_ = 0;
  std::mt19937_64 rng_;
  RateEstimator rateEstimator_;
  TraceRow row_;
};

/// Runs the scenario (or `duration` seconds of it) in its configured mode.
RunResult runScenario(const ScenarioConfig & cfg, std::optional<double> duration = std::nullopt);
RunResult runClosedLoop(ScenarioConfig cfg, std::optional<double> duration = std::nullopt);
RunResult runOpenLoopGeneration(ScenarioConfig cfg, std::optional<double> duration = std::nullopt);

/// Named metrics of a run.
struct TraceSummary
{
  std::string scenario;
  int steps = 0;
  double duration = 0.0;
  int faults = 0;
  double projectionErrorForceMean = 0.0;
  double projectionErrorMomentMean = 0.0;
  double distributionErrorForceMean = 0.0;
  double distributionErrorMomentMean = 0.0;
  double zmpMarginMin = std::numeric_limits<double>::quiet_NaN();
  double zmpInsideFraction = std::numeric_limits<double>::quiet_NaN();
  double trackingRmse = 0.0;
  double referenceRmse = 0.0;
  double maxReferenceError = 0.0;
};

/// Throws InvalidArgument on an empty trace.
TraceSummary summarize(const RunResult & result);
std::string summaryToJson(const TraceSummary & summary);

/// Column names of the CSV trace for the given limbs.
std::vector<std::string> csvHeader(const std::vector<std::string> & limbIds);
/// Writes the trace as CSV. Throws InvalidArgument on an empty trace (no file is created) and Error on I/O failure.
void writeCsv(const RunResult & result, const std::string & path);
void writeSummary(const TraceSummary & summary, const std::string & path);

/// Timing statistics in microseconds.
/// Per-call wall times in microseconds.
struct TimingStats
{
  std::string component;
  long calls = 0;
  double mean = 0.0;
  double p50 = 0.0;
  double p90 = 0.0;
  double p99 = 0.0;
  double max = 0.0;
};

enum class BenchComponent
{
  Reference,
  Preview,
  Projection,
  Distribution,
  Total
};

std::string_view benchComponentName(BenchComponent c);
/// Throws InvalidArgument for unknown names.
BenchComponent benchComponentFromName(const std::string & name);

/// Times one component over `calls` calls after `warmup` calls, cycling through the closed-loop run of `cfg`.
TimingStats bench(const ScenarioConfig & cfg, BenchComponent component, long calls = 10000, long warmup = 1000);

} // namespace cpc
