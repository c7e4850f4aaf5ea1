#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lsecbf/simulation.hpp"

namespace lsecbf {

inline constexpr const char* kTraceHeader = "t,agent_id,xc1,xc2,theta,v,omega,u1,u2,h_min,qp_status";

struct TracePaths {
  std::filesystem::path csv;       ///< trace.csv
  std::filesystem::path pairs;     ///< pairs.json
  std::filesystem::path metadata;  ///< metadata.json

  static TracePaths in(const std::filesystem::path& dir);
};

/// Formats with 9 significant digits ("%.9g").
std::string format_g9(double value);
/// The value that format_g9 writes.
double round_g9(double value);

/// CSV body (header plus rows) exactly as write_trace writes it.
std::string trace_csv(const SimTrace& trace);

/// Writes trace.csv, pairs.json and metadata.json into `dir`, creating it.
/// Pair values are rounded like the CSV so h_min equals the sidecar minimum
/// after a round trip. Throws IoError.
TracePaths write_trace(const SimTrace& trace, const std::filesystem::path& dir);

/// Reads a trace directory back. u_nom and timing are not stored and come back zero.
/// Throws IoError or ConfigError.
SimTrace read_trace(const std::filesystem::path& dir);

}  // namespace lsecbf
