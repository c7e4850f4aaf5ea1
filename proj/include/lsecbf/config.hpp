#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lsecbf/cbf.hpp"
#include "lsecbf/dynamics.hpp"
#include "lsecbf/set_model.hpp"

namespace lsecbf {

/// Body-frame polygon of an agent.
struct PolytopeSpec {
  enum class Kind { Halfspaces, RegularPolygon, Box };
  Kind kind = Kind::Box;
  Eigen::MatrixXd A;  ///< Halfspaces
  Eigen::VectorXd b;
  int sides = 0;  ///< RegularPolygon
  double radius = 0.0;
  Eigen::Vector2d half_extents = Eigen::Vector2d::Constant(0.5);  ///< Box

  RigidPolytope build() const;
};

/// How agents estimate the parameter rate of the others.
enum class RateMode {
  Oracle,           ///< g(lambda_j(t)) u_j applied on the previous tick
  FiniteDifference,  ///< (lambda_j(t) - lambda_j(t - dt)) / dt, zero on the first tick
  Static             ///< zero; each agent of a pair covers its own share of alpha(h)
};

std::string_view to_string(RateMode mode);

struct AgentConfig {
  int id = 0;
  PolytopeSpec body;
  Eigen::Vector3d initial = Eigen::Vector3d::Zero();  ///< (x_c1, x_c2, theta)
  Eigen::Vector2d goal = Eigen::Vector2d::Zero();
  double k_u = 1.0;
  double b = 0.25;
  /// Overrides SimConfig::epsilon for this agent's set.
  std::optional<double> epsilon;
};

struct SimConfig {
  std::vector<AgentConfig> agents;
  double epsilon = 20.0;
  /// Set when the margin was given as a Euclidean distance.
  std::optional<double> margin_distance;
  BarrierConfig barrier = BarrierConfig::from_margin_distance(0.2);
  double dt = 0.02;
  double t_final = 25.0;
  RateMode rate_mode = RateMode::Oracle;
  Integrator integrator = Integrator::RK4;
  std::uint64_t seed = 0;
  /// Uniform perturbation half-width applied to initial headings, drawn from `seed`.
  double heading_jitter = 0.0;
  std::string output_dir;

  /// Ticks per agent: floor(t_final/dt) + 1.
  std::size_t num_ticks() const;
  double agent_epsilon(const AgentConfig& agent) const { return agent.epsilon.value_or(epsilon); }
  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Parses the JSON schema documented in the README. Unknown keys are rejected.
SimConfig parse_config(std::string_view text, std::string_view source = "<config>");
SimConfig load_config(const std::filesystem::path& path);
/// Canonical JSON with every field spelled out; parse_config reads it back.
std::string config_to_json(const SimConfig& config, int indent = 2);

}  // namespace lsecbf
