#include <cpc/errors.h>
#include <cpc/preview.h>
#include <cpc/scenario.h>
#include <cpc/simulation.h>
#include <cpc/stabilizer.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;

namespace
{

struct Common
{
  std::string scenario = "builtin:walk";
  std::string outDir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
};

void addCommon(CLI::App * app, Common & c)
{
  app->add_option("-s,--scenario", c.scenario, "Scenario JSON file, or builtin:<name>")->capture_default_str();
  app->add_option("-o,--out", c.outDir, "Output directory")->capture_default_str();
  app->add_option("--seed", c.seed, "Random seed override (measurement noise)");
  app->add_option("-d,--duration", c.duration, "Duration override in seconds")->check(CLI::PositiveNumber);
}

cpc::ScenarioConfig loadWithOverrides(const Common & c)
{
  cpc::ScenarioConfig cfg = cpc::loadScenario(c.scenario);
  if(c.seed)
  {
    cfg.seed = *c.seed;
  }
  if(c.duration)
  {
    cfg = cfg.withDuration(*c.duration);
  }
  cfg.validate();
  return cfg;
}

fs::path outputDir(const std::string & dir)
{
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

int runCommand(const Common & c, bool openLoop)
{
  cpc::ScenarioConfig cfg = loadWithOverrides(c);
  if(openLoop)
  {
    cfg.mode = cpc::LoopMode::OpenLoop;
  }
  const cpc::RunResult result = cpc::runScenario(cfg);
  const fs::path dir = outputDir(c.outDir);
  const fs::path csv = dir / (cfg.name + "_trace.csv");
  const fs::path summaryPath = dir / (cfg.name + "_summary.json");
  cpc::writeCsv(result, csv.string());
  const cpc::TraceSummary summary = cpc::summarize(result);
  cpc::writeSummary(summary, summaryPath.string());
  std::cout << cpc::summaryToJson(summary) << '\n';
  std::cerr << "trace: " << csv.string() << "\nsummary: " << summaryPath.string() << '\n';
  if(!result.withinFaultBudget())
  {
    std::cerr << "solver faults (" << result.faults << ") exceed the budget of " << result.faultBudget << '\n';
    return 2;
  }
  return 0;
}

int benchCommand(const Common & c, const std::vector<std::string> & components, long calls, long warmup)
{
  const cpc::ScenarioConfig cfg = loadWithOverrides(c);
  nlohmann::json report;
  report["scenario"] = cfg.name;
  report["calls"] = calls;
  report["warmup"] = warmup;
  std::printf("%-13s %10s %10s %10s %10s %10s\n", "component", "mean[us]", "p50", "p90", "p99", "max");
  for(const auto & name : components)
  {
    const cpc::TimingStats s = cpc::bench(cfg, cpc::benchComponentFromName(name), calls, warmup);
    std::printf("%-13s %10.2f %10.2f %10.2f %10.2f %10.2f\n", s.component.c_str(), s.mean, s.p50, s.p90, s.p99,
                s.max);
    report["components"][s.component] = {{"mean_us", s.mean}, {"p50_us", s.p50}, {"p90_us", s.p90},
                                         {"p99_us", s.p99},   {"max_us", s.max}};
  }
  const fs::path path = outputDir(c.outDir) / (cfg.name + "_bench.json");
  std::ofstream(path) << report.dump(2) << '\n';
  return 0;
}

int gainsCommand(const Common & c, std::optional<double> omega, double kxi, int printSteps)
{
  const cpc::ScenarioConfig cfg = loadWithOverrides(c);
  const cpc::PreviewPlanner planner(cfg.robot, cfg.linearWeights, cfg.angularWeights, cfg.controlDt);
  nlohmann::json report;
  report["scenario"] = cfg.name;
  for(cpc::Axis axis : cpc::kAllAxes)
  {
    const cpc::PreviewGains & g = planner.gains(axis);
    std::printf("%-5s kfb = [%.6g %.6g %.6g]  rho = %.6f  riccati iterations = %d\n",
                std::string(cpc::axisName(axis)).c_str(), g.kFb[0], g.kFb[1], g.kFb[2], g.closedLoopSpectralRadius,
                g.riccatiIterations);
    for(int i = 0; i < std::min(printSteps, g.horizon()); ++i)
    {
      std::printf("      kff[%d] = [%.6g %.6g]\n", i + 1, g.kFf(i, 0), g.kFf(i, 1));
    }
    nlohmann::json ff = nlohmann::json::array();
    for(int i = 0; i < g.horizon(); ++i)
    {
      ff.push_back({g.kFf(i, 0), g.kFf(i, 1)});
    }
    report["preview"][std::string(cpc::axisName(axis))] = {
        {"kfb", {g.kFb[0], g.kFb[1], g.kFb[2]}},
        {"kff", ff},
        {"ktail", {g.kTail[0], g.kTail[1]}},
        {"spectral_radius", g.closedLoopSpectralRadius}};
  }
  // LIPM frequency from the nominal CoM height unless given.
  const double w = omega.value_or(std::sqrt(cfg.robot.gravity / cfg.comHeightOffset));
  const auto [kp, kd] = cpc::dcmEquivalentGains(cfg.robot.mass, w, Eigen::Matrix2d::Identity() * kxi);
  std::printf("DCM-equivalent gains (m = %g, omega^2 = %g, Kxi = %g): Kp = diag(%.6g, %.6g), Kd = diag(%.6g, %.6g)\n",
              cfg.robot.mass, w * w, kxi, kp(0, 0), kp(1, 1), kd(0, 0), kd(1, 1));
  report["dcm_equivalent"] = {{"omega", w}, {"kxi", kxi}, {"kp", {kp(0, 0), kp(1, 1)}}, {"kd", {kd(0, 0), kd(1, 1)}}};
  const fs::path path = outputDir(c.outDir) / (cfg.name + "_gains.json");
  std::ofstream(path) << report.dump(2) << '\n';
  return 0;
}

int exportCommand(const std::vector<std::string> & names, const std::string & outDir)
{
  const fs::path dir = outputDir(outDir);
  for(const auto & name : names.empty() ? cpc::scenarios::names() : names)
  {
    const fs::path path = dir / (name + ".json");
    cpc::saveScenario(cpc::scenarios::byName(name), path.string());
    std::cout << path.string() << '\n';
  }
  return 0;
}

} // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Centroidal preview control: trajectory generation, wrench distribution and stabilization harness"};
  app.require_subcommand(1);

  Common runOpts;
  bool openLoop = false;
  auto * run = app.add_subcommand("run", "Run a scenario and write the CSV trace and JSON summary");
  addCommon(run, runOpts);
  run->add_flag("--open-loop", openLoop, "Planning and projection only; the robot follows the desired state");

  Common benchOpts;
  benchOpts.scenario = "builtin:ladder";
  std::vector<std::string> components = {"reference", "preview", "projection", "distribution", "total"};
  long calls = 10000;
  long warmup = 1000;
  auto * benchCmd = app.add_subcommand("bench", "Time the controller components");
  addCommon(benchCmd, benchOpts);
  benchCmd->add_option("-c,--component", components, "Components to time")
      ->check(CLI::IsMember({"reference", "preview", "projection", "distribution", "total"}));
  benchCmd->add_option("-n,--calls", calls, "Timed calls per component")->check(CLI::PositiveNumber);
  benchCmd->add_option("--warmup", warmup, "Untimed calls before measuring")->check(CLI::NonNegativeNumber);

  Common gainsOpts;
  std::optional<double> omega;
  double kxi = 2.0;
  int printSteps = 5;
  auto * gains = app.add_subcommand("gains", "Print preview gains and DCM-equivalent stabilizer gains");
  addCommon(gains, gainsOpts);
  gains->add_option("--omega", omega, "LIPM natural frequency [1/s]")->check(CLI::PositiveNumber);
  gains->add_option("--kxi", kxi, "Proportional DCM gain")->capture_default_str();
  gains->add_option("--print-steps", printSteps, "Feedforward gains to print per axis")->capture_default_str();

  std::vector<std::string> exportNames;
  std::string exportDir = "scenarios";
  auto * exportCmd = app.add_subcommand("export-scenario", "Write built-in scenarios as JSON files");
  exportCmd->add_option("names", exportNames, "Built-in scenario names (all when omitted)");
  exportCmd->add_option("-o,--out", exportDir, "Output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try
  {
    if(*run)
    {
      return runCommand(runOpts, openLoop);
    }
    if(*benchCmd)
    {
      return benchCommand(benchOpts, components, calls, warmup);
    }
    if(*gains)
    {
      return gainsCommand(gainsOpts, omega, kxi, printSteps);
    }
    if(*exportCmd)
    {
      return exportCommand(exportNames, exportDir);
    }
  }
  catch(const cpc::Error & e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  catch(const std::exception & e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
