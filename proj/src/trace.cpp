#include "lsecbf/trace.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lsecbf/errors.hpp"
#include "lsecbf/version.hpp"

namespace lsecbf {
namespace {

using nlohmann::json;

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// json has no inf/nan, so non-finite pair values are spelled as strings.
json encode(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double decode(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return std::strtod(v.get<std::string>().c_str(), nullptr);
  throw IoError("pairs.json: expected a number");
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

TracePaths TracePaths::in(const std::filesystem::path& dir) {
  return {dir / "trace.csv", dir / "pairs.json", dir / "metadata.json"};
}

std::string format_g9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

double round_g9(double v) { return std::strtod(format_g9(v).c_str(), nullptr); }

std::string trace_csv(const SimTrace& tr) {
  std::string out = kTraceHeader;
  out += '\n';
  for (const auto& r : tr.rows) {
    const double vals[] = {r.lambda[0], r.lambda[1], r.lambda[2], r.body_velocity[0], r.body_velocity[1],
                           r.u[0],      r.u[1],      r.h_min};
    out += format_g9(r.t);
    out += ',';
    out += std::to_string(r.agent_id);
    for (double v : vals) {
      out += ',';
      out += format_g9(v);
    }
    out += ',';
    out += to_string(r.status);
    out += '\n';
  }
  return out;
}

TracePaths write_trace(const SimTrace& tr, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const TracePaths paths = TracePaths::in(dir);
  write_file(paths.csv, trace_csv(tr));

  json pairs = json::array();
  for (const auto& p : tr.pairs) {
    json h = json::array();
    for (double v : p.h) h.push_back(encode(round_g9(v)));
    pairs.push_back({{"agent", p.agent_id}, {"obstacle", p.obstacle_id}, {"h", std::move(h)}});
  }
  write_file(paths.pairs, json{{"dt", tr.config.dt}, {"pairs", std::move(pairs)}}.dump() + "\n");

  json meta;
  meta["version"] = std::string(version());
  meta["config"] = json::parse(config_to_json(tr.config));
  meta["num_ticks"] = tr.num_ticks;
  meta["timing_seconds"] = {{"distance", tr.timing.distance},   {"sensitivity", tr.timing.sensitivity},
                            {"filter", tr.timing.filter},       {"integrate", tr.timing.integrate},
                            {"total", tr.timing.total}};
  meta["envelope_fallbacks"] = tr.envelope_fallbacks;
  json rate = json::object();
  for (std::size_t i = 0; i < tr.num_agents(); ++i) {
    rate[std::to_string(tr.config.agents[i].id)] = tr.max_input_rate[i];
  }
  meta["max_input_rate"] = std::move(rate);
  meta["min_h"] = encode(tr.min_h());
  meta["clean"] = tr.clean();
  write_file(paths.metadata, meta.dump(2) + "\n");
  return paths;
}

SimTrace read_trace(const std::filesystem::path& dir) {
  const TracePaths paths = TracePaths::in(dir);
  SimTrace tr;
  json meta;
  try {
    meta = json::parse(read_file(paths.metadata));
  } catch (const json::exception& e) {
    throw IoError(paths.metadata.string() + ": " + e.what());
  }
  if (!meta.contains("config")) throw IoError(paths.metadata.string() + ": missing config");
  tr.config = parse_config(meta["config"].dump(), paths.metadata.string());
  const std::size_t na = tr.config.agents.size();

  std::istringstream csv(read_file(paths.csv));
  std::string line;
  if (!std::getline(csv, line) || line != kTraceHeader) throw IoError(paths.csv.string() + ": unexpected header");
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 11) throw IoError(paths.csv.string() + ": expected 11 fields in \"" + line + "\"");
    auto num = [&](int i) { return std::strtod(f[static_cast<std::size_t>(i)].c_str(), nullptr); };
    AgentSample r;
    r.t = num(0);
    r.agent_id = std::atoi(f[1].c_str());
    r.lambda = Eigen::Vector3d(num(2), num(3), num(4));
    r.body_velocity = Eigen::Vector2d(num(5), num(6));
    r.u = Eigen::Vector2d(num(7), num(8));
    r.h_min = num(9);
    try {
      r.status = parse_tick_status(f[10]);
    } catch (const InvalidInput& e) {
      throw IoError(paths.csv.string() + ": " + e.what());
    }
    tr.rows.push_back(r);
  }
  if (na == 0 || tr.rows.size() % na != 0) throw IoError(paths.csv.string() + ": row count is not a multiple of the agent count");
  tr.num_ticks = tr.rows.size() / na;

  json pairs;
  try {
    pairs = json::parse(read_file(paths.pairs));
    for (const auto& p : pairs.at("pairs")) {
      PairSeries s;
      s.agent_id = p.at("agent").get<int>();
      s.obstacle_id = p.at("obstacle").get<int>();
      for (const auto& v : p.at("h")) s.h.push_back(decode(v));
      tr.pairs.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw IoError(paths.pairs.string() + ": " + e.what());
  }
  tr.max_input_rate.assign(na, 0.0);
  return tr;
}

}  // namespace lsecbf
