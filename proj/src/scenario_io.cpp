#include <cpc/errors.h>
#include <cpc/scenario.h>

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace cpc
{

namespace
{

using nlohmann::json;

template<int N>
json toJson(const Eigen::Matrix<double, N, 1> & v)
{
  json a = json::array();
  for(int i = 0; i < N; ++i)
  {
    a.push_back(v[i]);
  }
  return a;
}

template<int N>
Eigen::Matrix<double, N, 1> vecFrom(const json & j, const char * what)
{
  if(!j.is_array() || j.size() != static_cast<std::size_t>(N))
  {
    throw ConfigError(std::string(what) + ": expected an array of " + std::to_string(N) + " numbers");
  }
  Eigen::Matrix<double, N, 1> v;
  for(int i = 0; i < N; ++i)
  {
    v[i] = j.at(i).get<double>();
  }
  return v;
}

template<int N>
Eigen::Matrix<double, N, 1> vecOr(const json & j, const char * key, const Eigen::Matrix<double, N, 1> & fallback)
{
  return j.contains(key) ? vecFrom<N>(j.at(key), key) : fallback;
}

json matrixToJson(const Matrix3 & R)
{
  json rows = json::array();
  for(int r = 0; r < 3; ++r)
  {
    rows.push_back(toJson<3>(R.row(r).transpose()));
  }
  return rows;
}

Matrix3 matrixFrom(const json & j)
{
  if(!j.is_array() || j.size() != 3)
  {
    throw ConfigError("rotation: expected three rows");
  }
  Matrix3 R;
  for(int r = 0; r < 3; ++r)
  {
    R.row(r) = vecFrom<3>(j.at(r), "rotation row").transpose();
  }
  return R;
}

const char * ruleName(ReferenceRuleKind k)
{
  switch(k)
  {
    case ReferenceRuleKind::CenterOfContacts:
      return "center_of_contacts";
    case ReferenceRuleKind::CenterWithLateralOffset:
      return "center_with_lateral_offset";
    case ReferenceRuleKind::FixedOffsetFromStructure:
      return "fixed_offset_from_structure";
    case ReferenceRuleKind::Explicit:
      return "explicit";
  }
  return "center_of_contacts";
}

ReferenceRuleKind ruleFrom(const std::string & s)
{
  for(auto k : {ReferenceRuleKind::CenterOfContacts, ReferenceRuleKind::CenterWithLateralOffset,
                ReferenceRuleKind::FixedOffsetFromStructure, ReferenceRuleKind::Explicit})
  {
    if(s == ruleName(k))
    {
      return k;
    }
  }
  throw ConfigError("unknown reference rule '" + s + "'");
}

json weightsToJson(const PreviewWeights & w)
{
  return {{"q", toJson<2>(w.outputWeight)}, {"r", w.inputWeight}, {"horizon", w.horizonSteps}, {"dt", w.dt}};
}

PreviewWeights weightsFrom(const json & j, PreviewWeights w)
{
  w.outputWeight = vecOr<2>(j, "q", w.outputWeight);
  w.inputWeight = j.value("r", w.inputWeight);
  w.horizonSteps = j.value("horizon", w.horizonSteps);
  w.dt = j.value("dt", w.dt);
  return w;
}

json dampingToJson(const DampingParams & d)
{
  return {{"kd", toJson<6>(d.kd)}, {"ks", toJson<6>(d.ks)}, {"kf", toJson<6>(d.kf)}};
}

DampingParams dampingFrom(const json & j, DampingParams d)
{
  d.kd = vecOr<6>(j, "kd", d.kd);
  d.ks = vecOr<6>(j, "ks", d.ks);
  d.kf = vecOr<6>(j, "kf", d.kf);
  return d;
}

json contactToJson(const ContactSpec & c)
{
  json verts = json::array();
  for(const auto & v : c.vertices)
  {
    verts.push_back(toJson<3>(v));
  }
  return {{"limb", c.limbId},
          {"vertices", verts},
          {"normal", toJson<3>(c.normal)},
          {"tangents", {toJson<3>(c.tangents[0]), toJson<3>(c.tangents[1])}},
          {"friction", c.frictionCoeff},
          {"mode", c.mode == ContactMode::Grasp ? "grasp" : "unilateral"},
          {"ridges", c.ridgeCount}};
}

ContactSpec contactFrom(const json & j)
{
  std::vector<Vector3> verts;
  for(const auto & v : j.at("vertices"))
  {
    verts.push_back(vecFrom<3>(v, "vertex"));
  }
  const std::string mode = j.value("mode", "unilateral");
  if(mode != "unilateral" && mode != "grasp")
  {
    throw ConfigError("unknown contact mode '" + mode + "'");
  }
  ContactSpec c = ContactSpec::make(j.at("limb").get<std::string>(), std::move(verts),
                                    vecFrom<3>(j.at("normal"), "normal"), j.value("friction", 0.6),
                                    mode == "grasp" ? ContactMode::Grasp : ContactMode::Unilateral,
                                    j.value("ridges", 4));
  if(j.contains("tangents"))
  {
    const json & t = j.at("tangents");
    if(!t.is_array() || t.size() != 2)
    {
      throw ConfigError("tangents: expected two vectors");
    }
    c.tangents = {vecFrom<3>(t.at(0), "tangent"), vecFrom<3>(t.at(1), "tangent")};
  }
  return c;
}

json toJsonConfig(const ScenarioConfig & cfg)
{
  json j;
  j["schema_version"] = cfg.schemaVersion;
  j["name"] = cfg.name;
  j["mode"] = cfg.mode == LoopMode::OpenLoop ? "open_loop" : "closed_loop";
  j["robot"] = {{"mass", cfg.robot.mass}, {"gravity", cfg.robot.gravity}, {"inertia", toJson<3>(cfg.robot.inertiaDiag)}};
  j["reference_rule"] = {{"kind", ruleName(cfg.rule.kind)},
                         {"lateral_offset", cfg.rule.lateralOffset},
                         {"offset", toJson<3>(cfg.rule.offset)}};
  j["com_height_offset"] = cfg.comHeightOffset;
  j["control_dt"] = cfg.controlDt;
  j["contact_margin"] = cfg.contactMargin;
  j["wrench_lag"] = cfg.wrenchLag;
  j["seed"] = cfg.seed;
  j["fault_budget"] = cfg.faultBudget;
  j["swing_clearance"] = cfg.swingClearance;
  j["foot_limbs"] = cfg.footLimbs;
  j["preview"] = {{"linear", weightsToJson(cfg.linearWeights)}, {"angular", weightsToJson(cfg.angularWeights)}};
  j["stabilizer"] = {{"kp", toJson<6>(cfg.stabilizerGains.kp)}, {"kd", toJson<6>(cfg.stabilizerGains.kd)}};
  json damping = json::object();
  for(const auto & [limb, d] : cfg.damping)
  {
    damping[limb] = {{"contact", dampingToJson(d.contact)}, {"non_contact", dampingToJson(d.nonContact)}};
  }
  j["damping"] = damping;
  json dist = json::array();
  for(const auto & d : cfg.disturbances)
  {
    dist.push_back({{"time", d.time}, {"impulse", toJson<6>(d.impulse)}});
  }
  j["disturbances"] = dist;
  const auto & e = cfg.environment;
  j["environment"] = {{"enabled", e.enabled},
                      {"translation_amplitude", e.translationAmplitude},
                      {"rotation_amplitude", e.rotationAmplitude},
                      {"period", e.period},
                      {"translation_axis", toJson<3>(e.translationAxis)},
                      {"rotation_axis", toJson<3>(e.rotationAxis)},
                      {"pivot", toJson<3>(e.pivot)}};
  j["noise"] = {{"position_std", cfg.noise.positionStd},
                {"velocity_std", cfg.noise.velocityStd},
                {"estimate_rates", cfg.noise.estimateRates}};
  json phases = json::array();
  for(const auto & p : cfg.phases)
  {
    json jp;
    jp["start"] = p.start;
    jp["end"] = p.end;
    if(p.comRef)
    {
      jp["com_ref"] = toJson<3>(*p.comRef);
    }
    if(p.eulerRef)
    {
      jp["euler_ref"] = toJson<3>(*p.eulerRef);
    }
    json contacts = json::array();
    for(const auto & c : p.contacts)
    {
      contacts.push_back(contactToJson(c));
    }
    jp["contacts"] = contacts;
    json targets = json::object();
    for(const auto & [limb, pose] : p.limbTargets)
    {
      targets[limb] = {{"position", toJson<3>(pose.position)}, {"rotation", matrixToJson(pose.rotation)}};
    }
    jp["limb_targets"] = targets;
    phases.push_back(jp);
  }
  j["phases"] = phases;
  return j;
}

ScenarioConfig fromJsonConfig(const json & j)
{
  ScenarioConfig cfg;
  cfg.schemaVersion = j.at("schema_version").get<int>();
  if(cfg.schemaVersion != 1)
  {
    throw ConfigError("unsupported scenario schema version " + std::to_string(cfg.schemaVersion));
  }
  cfg.name = j.value("name", cfg.name);
  const std::string mode = j.value("mode", "closed_loop");
  if(mode != "closed_loop" && mode != "open_loop")
  {
    throw ConfigError("unknown loop mode '" + mode + "'");
  }
  cfg.mode = mode == "open_loop" ? LoopMode::OpenLoop : LoopMode::ClosedLoop;
  if(j.contains("robot"))
  {
    const json & r = j.at("robot");
    cfg.robot.mass = r.value("mass", cfg.robot.mass);
    cfg.robot.gravity = r.value("gravity", cfg.robot.gravity);
    cfg.robot.inertiaDiag = vecOr<3>(r, "inertia", cfg.robot.inertiaDiag);
  }
  if(j.contains("reference_rule"))
  {
    const json & r = j.at("reference_rule");
    cfg.rule.kind = ruleFrom(r.value("kind", std::string("center_of_contacts")));
    cfg.rule.lateralOffset = r.value("lateral_offset", 0.0);
    cfg.rule.offset = vecOr<3>(r, "offset", Vector3::Zero());
  }
  cfg.comHeightOffset = j.value("com_height_offset", cfg.comHeightOffset);
  cfg.controlDt = j.value("control_dt", cfg.controlDt);
  cfg.contactMargin = j.value("contact_margin", cfg.contactMargin);
  cfg.wrenchLag = j.value("wrench_lag", cfg.wrenchLag);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.faultBudget = j.value("fault_budget", cfg.faultBudget);
  cfg.swingClearance = j.value("swing_clearance", cfg.swingClearance);
  if(j.contains("foot_limbs"))
  {
    cfg.footLimbs = j.at("foot_limbs").get<std::vector<std::string>>();
  }
  if(j.contains("preview"))
  {
    const json & p = j.at("preview");
    if(p.contains("linear"))
    {
      cfg.linearWeights = weightsFrom(p.at("linear"), cfg.linearWeights);
    }
    if(p.contains("angular"))
    {
      cfg.angularWeights = weightsFrom(p.at("angular"), cfg.angularWeights);
    }
  }
  if(j.contains("stabilizer"))
  {
    const json & s = j.at("stabilizer");
    cfg.stabilizerGains.kp = vecOr<6>(s, "kp", cfg.stabilizerGains.kp);
    cfg.stabilizerGains.kd = vecOr<6>(s, "kd", cfg.stabilizerGains.kd);
  }
  if(j.contains("damping"))
  {
    for(const auto & [limb, d] : j.at("damping").items())
    {
      LimbDamping ld;
      if(d.contains("contact"))
      {
        ld.contact = dampingFrom(d.at("contact"), ld.contact);
      }
      if(d.contains("non_contact"))
      {
        ld.nonContact = dampingFrom(d.at("non_contact"), ld.nonContact);
      }
      cfg.damping[limb] = ld;
    }
  }
  if(j.contains("disturbances"))
  {
    for(const auto & d : j.at("disturbances"))
    {
      cfg.disturbances.push_back({d.at("time").get<double>(), vecFrom<6>(d.at("impulse"), "impulse")});
    }
  }
  if(j.contains("environment"))
  {
    const json & e = j.at("environment");
    auto & env = cfg.environment;
    env.enabled = e.value("enabled", env.enabled);
    env.translationAmplitude = e.value("translation_amplitude", env.translationAmplitude);
    env.rotationAmplitude = e.value("rotation_amplitude", env.rotationAmplitude);
    env.period = e.value("period", env.period);
    env.translationAxis = vecOr<3>(e, "translation_axis", env.translationAxis);
    env.rotationAxis = vecOr<3>(e, "rotation_axis", env.rotationAxis);
    env.pivot = vecOr<3>(e, "pivot", env.pivot);
  }
  if(j.contains("noise"))
  {
    const json & n = j.at("noise");
    cfg.noise.positionStd = n.value("position_std", 0.0);
    cfg.noise.velocityStd = n.value("velocity_std", 0.0);
    cfg.noise.estimateRates = n.value("estimate_rates", false);
  }
  for(const auto & jp : j.at("phases"))
  {
    ContactPhase p;
    p.start = jp.at("start").get<double>();
    p.end = jp.at("end").get<double>();
    if(jp.contains("com_ref"))
    {
      p.comRef = vecFrom<3>(jp.at("com_ref"), "com_ref");
    }
    if(jp.contains("euler_ref"))
    {
      p.eulerRef = vecFrom<3>(jp.at("euler_ref"), "euler_ref");
    }
    for(const auto & c : jp.at("contacts"))
    {
      p.contacts.push_back(contactFrom(c));
    }
    if(jp.contains("limb_targets"))
    {
      for(const auto & [limb, t] : jp.at("limb_targets").items())
      {
        LimbPose pose;
        pose.position = vecFrom<3>(t.at("position"), "position");
        if(t.contains("rotation"))
        {
          pose.rotation = matrixFrom(t.at("rotation"));
        }
        p.limbTargets[limb] = pose;
      }
    }
    // Contacting limbs without an explicit target stay at their contact.
    for(const auto & c : p.contacts)
    {
      p.limbTargets.try_emplace(c.limbId, LimbPose{c.center(), c.frame()});
    }
    cfg.phases.push_back(std::move(p));
  }
  return cfg;
}

} // namespace

std::string scenarioToJson(const ScenarioConfig & cfg)
{
  return toJsonConfig(cfg).dump(2);
}

ScenarioConfig scenarioFromJson(const std::string & text)
{
  ScenarioConfig cfg;
  try
  {
    cfg = fromJsonConfig(json::parse(text));
  }
  catch(const json::exception & e)
  {
    throw ConfigError(std::string("malformed scenario: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig loadScenario(const std::string & path)
{
  const std::string prefix = "builtin:";
  if(path.rfind(prefix, 0) == 0)
  {
    return scenarios::byName(path.substr(prefix.size()));
  }
  std::ifstream in(path);
  if(!in)
  {
    throw ConfigError("cannot open scenario file " + path);
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  try
  {
    return scenarioFromJson(buffer.str());
  }
  catch(const ConfigError & e)
  {
    throw ConfigError(path + ": " + e.what());
  }
}

void saveScenario(const ScenarioConfig & cfg, const std::string & path)
{
  std::ofstream out(path);
  if(!out)
  {
    throw ConfigError("cannot write scenario file " + path);
  }
  out << scenarioToJson(cfg) << '\n';
  if(!out)
  {
    throw ConfigError("failed while writing scenario file " + path);
  }
}

} // namespace cpc
