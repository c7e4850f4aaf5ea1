#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "lsecbf/config.hpp"

namespace lsecbf {

enum class TickStatus { Optimal, Infeasible, Unsafe, NumericalFailure };

std::string_view to_string(TickStatus status);
/// Inverse of to_string. Throws InvalidInput.
TickStatus parse_tick_status(std::string_view text);

/// One agent at one tick. The input is the one applied over [t, t + dt].
struct AgentSample {
  double t = 0.0;
  int agent_id = 0;
  Eigen::Vector3d lambda = Eigen::Vector3d::Zero();
  Eigen::Vector2d body_velocity = Eigen::Vector2d::Zero();  ///< (v, omega)
  Eigen::Vector2d u = Eigen::Vector2d::Zero();
  Eigen::Vector2d u_nom = Eigen::Vector2d::Zero();
  /// Minimum over the other agents of h; +inf with no other agents.
  double h_min = std::numeric_limits<double>::infinity();
  TickStatus status = TickStatus::Optimal;
};

/// h of one (agent, obstacle) pair at every tick.
struct PairSeries {
  int agent_id = 0;
  int obstacle_id = 0;
  std::vector<double> h;
};

struct StageTimes {
  double distance = 0.0;
  double sensitivity = 0.0;
  double filter = 0.0;
  double integrate = 0.0;
  double total = 0.0;
};

struct SimTrace {
  SimConfig config;
  std::size_t num_ticks = 0;
  /// Tick-major: rows[k * agents + a].
  std::vector<AgentSample> rows;
  std::vector<PairSeries> pairs;
  StageTimes timing;
  /// Ticks where the KKT Jacobian was singular and the Lagrangian gradient was used.
  std::size_t envelope_fallbacks = 0;
  /// Largest |u(t) - u(t - dt)| / dt per agent, in config order.
  std::vector<double> max_input_rate;

  std::size_t num_agents() const { return config.agents.size(); }
  const AgentSample& at(std::size_t tick, std::size_t agent) const { return rows[tick * num_agents() + agent]; }
  /// True when no row reports Infeasible, Unsafe or NumericalFailure.
  bool clean() const;
  /// Minimum h_min over all rows.
  double min_h() const;
};

/// Runs every agent's filter once per tick against the others' current poses,
/// then advances all agents together. Throws ConfigError when two agents'
/// smoothed sets intersect at t0. Solver failures are recorded per row.
SimTrace run_simulation(const SimConfig& config);

/// Smoothed set and pose of one configured agent.
SetSpec agent_set(const SimConfig& config, const AgentConfig& agent);

}  // namespace lsecbf
