#pragma once

#include <string>
#include <vector>

#include "hmf/geometry.hpp"

namespace hmf {

// Flat binary container for one snapshot.
//   magic "STRF" (4 bytes), then little-endian 8-byte fields:
//   version, n, d, counts[n] (u64), spacing, origin[n], time (f64);
//   payload: node values in row-major order, f64 little-endian.
// A JSON sidecar (<path>.json) mirrors the header.
inline constexpr std::uint64_t kFieldFormatVersion = 1;

void write_snapshot(const FieldSnapshot& snap, const std::string& path);
FieldSnapshot read_snapshot(const std::string& path);

// Trajectory = one file per recorded snapshot plus an index JSON listing
// times and file names.
void write_trajectory(const SpaceTimeField& traj, const std::string& dir,
                      const std::string& stem);
SpaceTimeField read_trajectory(const std::string& index_path);

} // namespace hmf
