#include "actkit/evaluation.hpp"

#include <algorithm>
#include <map>

#include "actkit/errors.hpp"

namespace actkit {

SuiteReport aggregate_success(const std::vector<EpisodeOutcome>& outcomes) {
  std::map<std::pair<std::string, std::string>, std::pair<int, int>> by_task;
  for (const EpisodeOutcome& out : outcomes) {
    if (out.task.empty()) throw InputError("episode outcome with empty task");
    auto& [episodes, successes] = by_task[{out.group, out.task}];
    ++episodes;
    if (out.success) ++successes;
  }

  SuiteReport report;
  std::map<std::string, std::pair<int, double>> by_group;
  for (const auto& [key, counts] : by_task) {
    TaskStats stats;
    stats.group = key.first;
    stats.task = key.second;
    stats.episodes = counts.first;
    stats.successes = counts.second;
    stats.success_rate = static_cast<double>(counts.second) / counts.first;
    stats.protocol_ok = stats.episodes >= kMinProtocolEpisodes;
    auto& [count, sum] = by_group[stats.group];
    ++count;
    sum += stats.success_rate;
    report.tasks.push_back(std::move(stats));
  }
  for (const auto& [group, acc] : by_group)
    report.groups.push_back({group, acc.first, acc.second / acc.first});
  return report;
}

}  // namespace actkit
