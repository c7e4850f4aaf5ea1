#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <vector>

#include "lsecbf/simulation.hpp"

namespace lsecbf {

/// Boundary of the smoothed set {membership_margin <= 0}, sampled along
/// `samples` rays from the smoothed center by bracketing and bisection.
/// Counterclockwise. Throws EmptyInterior for an empty set.
std::vector<Eigen::Vector2d> smoothed_boundary(const SetSpec& set, const ParamVector& pose, int samples = 180);

/// Ticks that get a frame: 0, k, 2k, ... up to the last step, or none when k
/// exceeds the number of steps.
std::vector<std::size_t> frame_ticks(std::size_t num_ticks, std::size_t every_k);

struct RenderOutput {
  std::vector<std::filesystem::path> frames;
  std::filesystem::path chart;
};

/// Writes frame_NNNNN.svg for each selected tick (exact polytope, smoothed
/// boundary and goal star per agent) and h_min.svg. Throws IoError or
/// InvalidInput for an empty trace or every_k = 0.
RenderOutput render_frames(const SimTrace& trace, const std::filesystem::path& out_dir, std::size_t every_k);

}  // namespace lsecbf
