#include "lsecbf/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lsecbf/errors.hpp"

namespace lsecbf {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) fail(path.empty() ? key : path + "." + key, "unknown key");
  }
}

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(path, "must be finite");
  return x;
}

int get_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<int>();
}

Eigen::VectorXd get_vector(const json& v, const std::string& path, Eigen::Index expected = -1) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  if (expected >= 0 && static_cast<Eigen::Index>(v.size()) != expected) {
    fail(path, "expected " + std::to_string(expected) + " entries");
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = get_number(v[i], path + "[" + std::to_string(i) + "]");
  }
  return out;
}

PolytopeSpec parse_polytope(const json& v, const std::string& path) {
  if (!v.is_object() || !v.contains("type")) fail(path, "expected an object with a \"type\"");
  if (!v["type"].is_string()) fail(join(path, "type"), "expected a string");
  const std::string type = v["type"].get<std::string>();
  PolytopeSpec p;
  if (type == "box") {
    check_keys(v, path, {"type", "half_extents"});
    p.kind = PolytopeSpec::Kind::Box;
    if (v.contains("half_extents")) p.half_extents = get_vector(v["half_extents"], join(path, "half_extents"), 2);
    if (!(p.half_extents.minCoeff() > 0.0)) fail(join(path, "half_extents"), "must be positive");
  } else if (type == "regular_polygon") {
    check_keys(v, path, {"type", "sides", "radius"});
    p.kind = PolytopeSpec::Kind::RegularPolygon;
    if (!v.contains("sides")) fail(join(path, "sides"), "missing");
    if (!v.contains("radius")) fail(join(path, "radius"), "missing");
    p.sides = get_int(v["sides"], join(path, "sides"));
    p.radius = get_number(v["radius"], join(path, "radius"));
    if (p.sides < 3) fail(join(path, "sides"), "need at least 3 sides");
    if (!(p.radius > 0.0)) fail(join(path, "radius"), "must be positive");
  } else if (type == "halfspaces") {
    check_keys(v, path, {"type", "A", "b"});
    p.kind = PolytopeSpec::Kind::Halfspaces;
    if (!v.contains("A") || !v["A"].is_array() || v["A"].empty()) fail(join(path, "A"), "expected a nonempty list of rows");
    if (!v.contains("b")) fail(join(path, "b"), "missing");
    const auto& rows = v["A"];
    p.A.resize(static_cast<Eigen::Index>(rows.size()), 2);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      p.A.row(static_cast<Eigen::Index>(i)) = get_vector(rows[i], join(path, "A") + "[" + std::to_string(i) + "]", 2);
    }
    p.b = get_vector(v["b"], join(path, "b"), p.A.rows());
  } else {
    fail(join(path, "type"), "unknown polytope type \"" + type + "\"");
  }
  return p;
}

json polytope_json(const PolytopeSpec& p) {
  switch (p.kind) {
    case PolytopeSpec::Kind::Box:
      return {{"type", "box"}, {"half_extents", {p.half_extents[0], p.half_extents[1]}}};
    case PolytopeSpec::Kind::RegularPolygon:
      return {{"type", "regular_polygon"}, {"sides", p.sides}, {"radius", p.radius}};
    case PolytopeSpec::Kind::Halfspaces: {
      json rows = json::array();
      for (Eigen::Index i = 0; i < p.A.rows(); ++i) rows.push_back({p.A(i, 0), p.A(i, 1)});
      json b = json::array();
      for (Eigen::Index i = 0; i < p.b.size(); ++i) b.push_back(p.b[i]);
      return {{"type", "halfspaces"}, {"A", rows}, {"b", b}};
    }
  }
  return {};
}

ClassKFunction parse_alpha(const json& v, const std::string& path) {
  check_keys(v, path, {"type", "gamma"});
  ClassKFunction a;
  if (v.contains("type")) {
    if (!v["type"].is_string()) fail(join(path, "type"), "expected a string");
    const auto t = v["type"].get<std::string>();
    if (t == "linear") a.kind = ClassKFunction::Kind::Linear;
    else if (t == "cubic") a.kind = ClassKFunction::Kind::Cubic;
    else fail(join(path, "type"), "expected \"linear\" or \"cubic\"");
  }
  if (v.contains("gamma")) a.gamma = get_number(v["gamma"], join(path, "gamma"));
  if (!(a.gamma > 0.0)) fail(join(path, "gamma"), "must be positive");
  return a;
}

}  // namespace

RigidPolytope PolytopeSpec::build() const {
  switch (kind) {
    case Kind::Box: return RigidPolytope::box(half_extents[0], half_extents[1]);
    case Kind::RegularPolygon: return RigidPolytope::regular_polygon(sides, radius);
    case Kind::Halfspaces: return RigidPolytope(A, b);
  }
  throw InvalidInput("unknown polytope kind");
}

std::string_view to_string(RateMode m) {
  switch (m) {
    case RateMode::Oracle: return "oracle";
    case RateMode::FiniteDifference: return "finite_difference";
    case RateMode::Static: return "static";
  }
  return "?";
}

std::size_t SimConfig::num_ticks() const {
  return static_cast<std::size_t>(std::floor(t_final / dt + 1e-9)) + 1;
}

void SimConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) fail("dt", "must be positive");
  if (!(t_final >= dt) || !std::isfinite(t_final)) fail("t_final", "must be at least dt");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) fail("epsilon", "must be positive");
  if (!(barrier.R >= 0.0)) fail(margin_distance ? "margin_distance" : "R", "must be nonnegative");
  if (!(barrier.alpha.gamma > 0.0)) fail("alpha.gamma", "must be positive");
  if (!(heading_jitter >= 0.0)) fail("heading_jitter", "must be nonnegative");
  if (agents.empty()) fail("agents", "need at least one agent");
  std::set<int> ids;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto& a = agents[i];
    const std::string path = "agents[" + std::to_string(i) + "]";
    if (!ids.insert(a.id).second) fail(path + ".id", "duplicate agent id " + std::to_string(a.id));
    if (!(a.k_u > 0.0)) fail(path + ".k_u", "must be positive");
    if (!(a.b > 0.0)) fail(path + ".b", "must be positive");
    if (a.epsilon && !(*a.epsilon > 0.0)) fail(path + ".epsilon", "must be positive");
    if (!a.initial.allFinite()) fail(path + ".initial", "must be finite");
    if (!a.goal.allFinite()) fail(path + ".goal", "must be finite");
    std::shared_ptr<RigidPolytope> body;
    try {
      body = std::make_shared<RigidPolytope>(a.body.build());
    } catch (const Error& e) {
      fail(path + ".polytope", e.what());
    }
    if (!body->base_is_bounded()) fail(path + ".polytope", "polytope is unbounded");
    const SetSpec set(body, SmoothMaxParams{agent_epsilon(a)});
    const ParamVector pose = ParamVector::rigid_pose(a.initial);
    try {
      find_interior_point(set, pose);
      smoothed_center(set, pose);
    } catch (const EmptyInterior& e) {
      fail(path + ".polytope", std::string("empty interior at this epsilon: ") + e.what());
    }
  }
}

SimConfig parse_config(std::string_view text, std::string_view source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string(source) + ": " + e.what());
  }
  check_keys(root, "", {"agents", "epsilon", "R", "margin_distance", "alpha", "dt", "t_final", "rate_mode",
                        "integrator", "seed", "heading_jitter", "output_dir"});
  SimConfig c;
  if (root.contains("epsilon")) c.epsilon = get_number(root["epsilon"], "epsilon");
  ClassKFunction alpha;
  if (root.contains("alpha")) alpha = parse_alpha(root["alpha"], "alpha");
  if (root.contains("R") && root.contains("margin_distance")) fail("R", "give either R or margin_distance");
  if (root.contains("R")) {
    c.barrier = BarrierConfig{get_number(root["R"], "R"), alpha};
    c.margin_distance.reset();
  } else {
    const double r = root.contains("margin_distance") ? get_number(root["margin_distance"], "margin_distance") : 0.2;
    if (!(r >= 0.0)) fail("margin_distance", "must be nonnegative");
    c.barrier = BarrierConfig::from_margin_distance(r, alpha);
    c.margin_distance = r;
  }
  if (root.contains("dt")) c.dt = get_number(root["dt"], "dt");
  if (root.contains("t_final")) c.t_final = get_number(root["t_final"], "t_final");
  if (root.contains("rate_mode")) {
    const auto& v = root["rate_mode"];
    if (v == "oracle") c.rate_mode = RateMode::Oracle;
    else if (v == "finite_difference") c.rate_mode = RateMode::FiniteDifference;
    else if (v == "static") c.rate_mode = RateMode::Static;
    else fail("rate_mode", "expected \"oracle\", \"finite_difference\" or \"static\"");
  }
  if (root.contains("integrator")) {
    const auto& v = root["integrator"];
    if (v == "rk4") c.integrator = Integrator::RK4;
    else if (v == "euler") c.integrator = Integrator::Euler;
    else fail("integrator", "expected \"rk4\" or \"euler\"");
  }
  if (root.contains("seed")) {
    if (!root["seed"].is_number_unsigned()) fail("seed", "expected a nonnegative integer");
    c.seed = root["seed"].get<std::uint64_t>();
  }
  if (root.contains("heading_jitter")) c.heading_jitter = get_number(root["heading_jitter"], "heading_jitter");
  if (root.contains("output_dir")) {
    if (!root["output_dir"].is_string()) fail("output_dir", "expected a string");
    c.output_dir = root["output_dir"].get<std::string>();
  }
  if (!root.contains("agents") || !root["agents"].is_array()) fail("agents", "expected a list of agents");
  const auto& agents = root["agents"];
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const std::string path = "agents[" + std::to_string(i) + "]";
    const auto& a = agents[i];
    check_keys(a, path, {"id", "polytope", "initial", "goal", "k_u", "b", "epsilon"});
    AgentConfig ag;
    if (!a.contains("id")) fail(path + ".id", "missing");
    ag.id = get_int(a["id"], path + ".id");
    if (!a.contains("polytope")) fail(path + ".polytope", "missing");
    ag.body = parse_polytope(a["polytope"], path + ".polytope");
    if (!a.contains("initial")) fail(path + ".initial", "missing");
    ag.initial = get_vector(a["initial"], path + ".initial", 3);
    if (!a.contains("goal")) fail(path + ".goal", "missing");
    ag.goal = get_vector(a["goal"], path + ".goal", 2);
    if (a.contains("k_u")) ag.k_u = get_number(a["k_u"], path + ".k_u");
    if (a.contains("b")) ag.b = get_number(a["b"], path + ".b");
    if (a.contains("epsilon")) ag.epsilon = get_number(a["epsilon"], path + ".epsilon");
    c.agents.push_back(std::move(ag));
  }
  c.validate();
  return c;
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string config_to_json(const SimConfig& c, int indent) {
  json root;
  root["epsilon"] = c.epsilon;
  if (c.margin_distance) root["margin_distance"] = *c.margin_distance;
  else root["R"] = c.barrier.R;
  root["alpha"] = {{"type", std::string(to_string(c.barrier.alpha.kind))}, {"gamma", c.barrier.alpha.gamma}};
  root["dt"] = c.dt;
  root["t_final"] = c.t_final;
  root["rate_mode"] = std::string(to_string(c.rate_mode));
  root["integrator"] = std::string(to_string(c.integrator));
  root["seed"] = c.seed;
  root["heading_jitter"] = c.heading_jitter;
  if (!c.output_dir.empty()) root["output_dir"] = c.output_dir;
  json agents = json::array();
  for (const auto& a : c.agents) {
    json j;
    j["id"] = a.id;
    j["polytope"] = polytope_json(a.body);
    j["initial"] = {a.initial[0], a.initial[1], a.initial[2]};
    j["goal"] = {a.goal[0], a.goal[1]};
    j["k_u"] = a.k_u;
    j["b"] = a.b;
    if (a.epsilon) j["epsilon"] = *a.epsilon;
    agents.push_back(std::move(j));
  }
  root["agents"] = std::move(agents);
  return root.dump(indent);
}

}  // namespace lsecbf
