#pragma once

#include <cstdint>
#include <filesystem>

#include "rinfo/network.hpp"

namespace rinfo {

/// Provenance stored next to the weights in manifest.json.
struct SnapshotMeta {
  std::uint64_t seed = 0;
  int block = 0;
  int trial = 0;
  int input_multiplicity = 1;
  int skipped_updates = 0;
};

struct Snapshot {
  NetworkParams params;
  NetworkState state;
  SnapshotMeta meta;
};

/// Writes w_recurrent.csv, w_input.csv, bias.csv, state.csv and manifest.json
/// into `dir` (created if needed).
void save_snapshot(const std::filesystem::path& dir, const NetworkParams& params,
                   const NetworkState& state, const SnapshotMeta& meta);

/// Throws ParseError naming the offending file or field. state.csv is
/// optional; a missing one yields the all-zero state.
Snapshot load_snapshot(const std::filesystem::path& dir);

/// Columnar export: header t,u,x_0001..x_N, one row per timestep.
void write_trace_csv(const std::filesystem::path& path, const StateTrace& trace);
StateTrace read_trace_csv(const std::filesystem::path& path);

}  // namespace rinfo
