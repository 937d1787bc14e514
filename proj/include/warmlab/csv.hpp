#pragma once

#include <string>

#include "warmlab/optimize.hpp"

namespace warmlab {

/// Shortest round-trip decimal rendering of a double.
std::string format_double(double v);

/// Serializes one row per recorded point under the header
/// `t,eta,f,gap,grad_norm,est_smoothness`, reals as shortest round-trip
/// decimals. The output is byte-identical across runs with equal inputs.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

std::string trajectory_csv_string(const Trajectory& traj);

/// Parses the points of a trajectory CSV (summary fields are not stored in
/// the file and are left at their defaults).
Trajectory read_trajectory_csv(const std::string& path);

}  // namespace warmlab
