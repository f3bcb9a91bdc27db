#pragma once

#include <string>
#include <vector>

#include "actkit/action_event.hpp"

namespace actkit {

struct TrajectoryFrame {
  std::string observation_ref;
  ActionEvent action;
  std::int64_t tick_index = 0;

  bool operator==(const TrajectoryFrame&) const = default;
};

struct Trajectory {
  std::string instruction;
  std::string source_tag;
  std::vector<TrajectoryFrame> frames;

  bool operator==(const Trajectory&) const = default;
};

/// Throws InputError on empty instruction, no frames, or non-monotone ticks.
void validate_trajectory(const Trajectory& traj);

/// Parses one JSONL trajectory record. Errors carry the supplied line number.
Trajectory parse_trajectory_record(const std::string& text, int line_number = -1);

std::string serialize_trajectory(const Trajectory& traj);

/// Loads a JSONL trajectory file, one trajectory per line. Validation errors
/// name the offending line.
std::vector<Trajectory> load_trajectories(const std::string& path);

void save_trajectories(const std::vector<Trajectory>& trajectories,
                       const std::string& path);

}  // namespace actkit
