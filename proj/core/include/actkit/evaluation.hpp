#pragma once

#include <string>
#include <vector>

namespace actkit {

/// Episode floor the evaluation protocol requires per task.
inline constexpr int kMinProtocolEpisodes = 30;

struct EpisodeOutcome {
  std::string task;
  std::string group;
  bool success = false;
};

struct TaskStats {
  std::string task;
  std::string group;
  int episodes = 0;
  int successes = 0;
  double success_rate = 0.0;
  bool protocol_ok = false;  // episodes >= kMinProtocolEpisodes

  bool operator==(const TaskStats&) const = default;
};

struct GroupAverage {
  std::string group;
  int task_count = 0;
  double mean_success_rate = 0.0;  // unweighted mean over member tasks

  bool operator==(const GroupAverage&) const = default;
};

struct SuiteReport {
  std::vector<TaskStats> tasks;    // sorted by (group, task)
  std::vector<GroupAverage> groups;  // sorted by group

  bool operator==(const SuiteReport&) const = default;
};

/// Counts successes per task and averages rates per group. Throws InputError
/// on an outcome with an empty task name.
SuiteReport aggregate_success(const std::vector<EpisodeOutcome>& outcomes);

}  // namespace actkit
