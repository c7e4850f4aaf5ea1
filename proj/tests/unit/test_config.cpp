#include <doctest.h>

#include <string>

#include "lsecbf/config.hpp"
#include "lsecbf/errors.hpp"
#include "lsecbf/simulation.hpp"

using namespace lsecbf;

namespace {

std::string agent(int id, double x, double y) {
  return R"({"id": )" + std::to_string(id) + R"(, "polytope": {"type": "box", "half_extents": [0.5, 0.5]}, "initial": [)" +
         std::to_string(x) + ", " + std::to_string(y) + R"(, 0.0], "goal": [0.0, 0.0]})";
}

std::string message_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal config with one agent") {
  const SimConfig c = parse_config(R"({"agents": [)" + agent(0, 1.0, 2.0) + "]}");
  REQUIRE(c.agents.size() == 1);
  CHECK(c.agents[0].initial.x() == 1.0);
  CHECK(c.dt == 0.02);
  CHECK(c.t_final == 25.0);
  CHECK(c.epsilon == 20.0);
  CHECK(c.barrier.R == doctest::Approx(0.02));
  CHECK(c.agents[0].b == 0.25);
  CHECK(c.num_ticks() == 1251);
}

TEST_CASE("duplicate agent ids name the id") {
  const std::string msg = message_of(R"({"agents": [)" + agent(3, 0, 0) + ", " + agent(3, 5, 0) + "]}");
  CHECK(msg.find("duplicate agent id 3") != std::string::npos);
  CHECK(msg.find("agents[1].id") != std::string::npos);
}

TEST_CASE("negative dt names dt") {
  const std::string msg = message_of(R"({"dt": -0.01, "agents": [)" + agent(0, 0, 0) + "]}");
  CHECK(msg.rfind("dt:", 0) == 0);
  CHECK_THROWS_AS(load_config(LSECBF_TEST_DATA_DIR "/negative_dt.json"), ConfigError);
}

TEST_CASE("field validation") {
  CHECK(message_of(R"({"agents": [)" + agent(0, 0, 0) + R"(], "epsilon_typo": 3})").find("unknown key") !=
        std::string::npos);
  CHECK(message_of(R"({"agents": [)" + agent(0, 0, 0) + R"(], "R": 1, "margin_distance": 1})").rfind("R:", 0) == 0);
  CHECK(message_of(R"({"agents": [)" + agent(0, 0, 0) + R"(], "t_final": 0.001})").rfind("t_final:", 0) == 0);
  CHECK(message_of(R"({"agents": [)" + agent(0, 0, 0) + R"(], "rate_mode": "psychic"})").rfind("rate_mode:", 0) == 0);
  CHECK(message_of(R"({"agents": []})").rfind("agents:", 0) == 0);
  CHECK(message_of(R"({"agents": [{"id": 0, "polytope": {"type": "halfspaces", "A": [[1, 0], [0, 1], [-1, 0]], "b": [1, 1, 1]}, "initial": [0, 0, 0], "goal": [0, 0]}]})")
            .rfind("agents[0].polytope:", 0) == 0);
  CHECK(message_of(R"({"agents": [{"id": 0, "polytope": {"type": "box", "half_extents": [0.5, 0.5]}, "initial": [0, 0], "goal": [0, 0]}]})")
            .rfind("agents[0].initial:", 0) == 0);
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
}

TEST_CASE("epsilon small enough to empty the smoothed set is rejected") {
  // the smoothed box is empty once log(4) / eps exceeds the inradius scale
  const std::string msg = message_of(R"({"epsilon": 0.1, "agents": [)" + agent(0, 0, 0) + "]}");
  CHECK(msg.find("empty interior") != std::string::npos);
}

TEST_CASE("canonical JSON reads back to the same config") {
  const SimConfig a = load_config(LSECBF_SCENARIO_DIR "/cross_swap.json");
  const std::string text = config_to_json(a);
  const SimConfig b = parse_config(text);
  CHECK(config_to_json(b) == text);
  CHECK(b.rate_mode == RateMode::Static);
  CHECK(b.agents.size() == 4);
  CHECK(b.agents[1].initial.isApprox(a.agents[1].initial));
}

TEST_CASE("halfspace polytopes and per-agent epsilon") {
  const SimConfig c = load_config(LSECBF_TEST_DATA_DIR "/single.json");
  CHECK(c.agents[0].body.kind == PolytopeSpec::Kind::Halfspaces);
  CHECK(c.agents[0].id == 5);
  const SimConfig d = parse_config(R"({"epsilon": 10, "agents": [{"id": 0, "epsilon": 50, "polytope": {"type": "regular_polygon", "sides": 6, "radius": 1}, "initial": [0, 0, 0], "goal": [0, 0]}]})");
  CHECK(d.agent_epsilon(d.agents[0]) == 50.0);
}

TEST_CASE("overlapping initial poses are rejected by the simulator") {
  SimConfig c = parse_config(R"({"t_final": 0.1, "agents": [)" + agent(0, 0, 0) + ", " + agent(1, 0.5, 0) + "]}");
  CHECK_THROWS_AS(run_simulation(c), ConfigError);
}
