#include <cpc/errors.h>
#include <cpc/simulation.h>

#include <algorithm>
#include <chrono>
#include <numeric>

namespace cpc
{

namespace
{

using Clock = std::chrono::steady_clock;

// Keeps the optimizer from discarding benchmarked results.
volatile double gSink = 0.0;

double micros(Clock::duration d)
{
  return std::chrono::duration<double, std::micro>(d).count();
}

double percentile(const std::vector<double> & sorted, double q)
{
  const auto idx = static_cast<std::size_t>(q * static_cast<double>(sorted.size() - 1));
  return sorted[idx];
}

} // namespace

std::string_view benchComponentName(BenchComponent c)
{
  switch(c)
  {
    case BenchComponent::Reference:
      return "reference";
    case BenchComponent::Preview:
      return "preview";
    case BenchComponent::Projection:
      return "projection";
    case BenchComponent::Distribution:
      return "distribution";
    case BenchComponent::Total:
      return "total";
  }
  return "total";
}

BenchComponent benchComponentFromName(const std::string & name)
{
  for(auto c : {BenchComponent::Reference, BenchComponent::Preview, BenchComponent::Projection,
                BenchComponent::Distribution, BenchComponent::Total})
  {
    if(name == benchComponentName(c))
    {
      return c;
    }
  }
  throw InvalidArgument("unknown bench component '" + name + "'");
}

TimingStats bench(const ScenarioConfig & cfg, BenchComponent component, long calls, long warmup)
{
  if(calls < 1 || warmup < 0)
  {
    throw InvalidArgument("bench: calls must be positive and warmup non-negative");
  }
  ScenarioConfig closed = cfg;
  closed.mode = LoopMode::ClosedLoop;
  Simulation sim(closed);
  const double duration = closed.duration();
  ReferenceWindows window;
  for(auto & w : window)
  {
    w.resize(closed.linearWeights.horizonSteps, 2);
  }

  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(calls));
  for(long i = 0; i < warmup + calls; ++i)
  {
    if(sim.time() >= duration - 0.5 * closed.controlDt)
    {
      sim.reset();
    }
    const double t = sim.time();
    Clock::duration elapsed{};
    if(component == BenchComponent::Total)
    {
      const auto t0 = Clock::now();
      const TraceRow & row = sim.step();
      elapsed = Clock::now() - t0;
      gSink = gSink + row.desiredWrench[2];
    }
    else
    {
      // State of this step, prepared outside the timed region.
      generateReferenceWindow(closed, t, window);
      const AxisStates axes = sim.desiredAxes();
      const CentroidalState actual = sim.actualState();
      const PlanStepResult plan = sim.planner().plan(axes, window);
      const std::vector<ContactSpec> shrunk = sim.contactsAt(t).shrunk;
      const Vector3 comPlanned(plan.axes[0][0], plan.axes[1][0], plan.axes[2][0]);
      const auto t0 = Clock::now();
      switch(component)
      {
        case BenchComponent::Reference:
          generateReferenceWindow(closed, t, window);
          gSink = gSink + window[0](0, 0);
          break;
        case BenchComponent::Preview:
          gSink = gSink + sim.planner().plan(axes, window).jerk[0];
          break;
        case BenchComponent::Projection:
          gSink = gSink + projectPlannedWrench(plan.wrench, comPlanned, shrunk, closed.robot).projected.force[2];
          break;
        case BenchComponent::Distribution:
          gSink = gSink + distributeDesiredWrench(plan.wrench, actual.comPos(), shrunk, closed.robot).target[2];
          break;
        case BenchComponent::Total:
          break;
      }
      elapsed = Clock::now() - t0;
      sim.step();
    }
    if(i >= warmup)
    {
      samples.push_back(micros(elapsed));
    }
  }

  TimingStats stats;
  stats.component = std::string(benchComponentName(component));
  stats.calls = calls;
  stats.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
  std::sort(samples.begin(), samples.end());
  stats.p50 = percentile(samples, 0.5);
  stats.p90 = percentile(samples, 0.9);
  stats.p99 = percentile(samples, 0.99);
  stats.max = samples.back();
  return stats;
}

} // namespace cpc
