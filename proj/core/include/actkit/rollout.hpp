#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "actkit/action_event.hpp"
#include "actkit/evaluation.hpp"

namespace actkit {

/// Two-parameter throughput model: a fixed cost per model decision plus a
/// cost per executed action.
struct LatencyModel {
  double decision_latency = 0.0;  // seconds per prediction
  double step_latency = 0.0;      // seconds per executed action

  void validate() const;  // both finite and >= 0
};

/// Actions per second at chunk size c: c / (L_d + c * L_e). Strictly
/// increasing in c whenever L_d > 0.
double simulate_fps(const LatencyModel& model, int chunk_size);

struct FpsObservation {
  double chunk_size = 0;
  double fps = 0;
};

struct LatencyFit {
  LatencyModel model;
  std::vector<double> relative_residuals;  // (predicted - observed) / observed
  double max_abs_relative_residual = 0.0;
};

/// Least-squares fit of (L_d, L_e) via the linearization
/// c / fps = L_d + c * L_e. Needs >= 2 distinct chunk sizes and positive fps.
LatencyFit fit_latency_model(std::span<const FpsObservation> observed);

struct TolerancePolicy {
  double camera_eps_deg = 1e-6;  // buttons always compare exactly
};

bool events_match(const ActionEvent& a, const ActionEvent& b,
                  const TolerancePolicy& tol);

struct TaskSpec {
  std::string task;
  std::string group;
  std::vector<ActionEvent> target_events;
  TolerancePolicy tolerance;
  int max_steps = 0;
};

void validate_task_spec(const TaskSpec& spec);

/// JSONL task file, one spec per line; see the repository docs for the
/// schema. Errors carry line numbers.
std::vector<TaskSpec> load_task_specs(const std::string& path);
std::vector<TaskSpec> parse_task_specs(const std::string& content);
std::string serialize_task_spec(const TaskSpec& spec);

/// What the policy sees at a decision point. The digest is a seed-derived
/// fingerprint standing in for pixels; the cue is the scripted event for the
/// current tick, which an oracle policy can echo.
struct Observation {
  std::int64_t tick = 0;
  std::uint64_t digest = 0;
  ActionEvent cue;
};

/// Policy callback: given the current observation, the previous decision
/// observations, and the chunk size, return exactly chunk_size events.
using Policy = std::function<std::vector<ActionEvent>(
    const Observation&, std::span<const Observation>, int)>;

struct EpisodeResult {
  bool success = false;
  bool protocol_error = false;  // policy returned a wrong-size chunk
  int steps = 0;                // events executed
  int decisions = 0;            // policy invocations
  int max_observation_age = 0;  // steps between decision and execution

  bool operator==(const EpisodeResult&) const = default;
};

/// Runs one scripted episode: every chunk_size steps the policy is queried
/// and must return exactly chunk_size events; events execute in order and
/// must match the script within tolerance. Deterministic given the seed.
EpisodeResult run_episode(const TaskSpec& spec, std::uint64_t seed,
                          const Policy& policy, int chunk_size);

/// Echoes the scripted sequence (an oracle; always succeeds when the script
/// matches the task's).
Policy make_replay_policy(std::vector<ActionEvent> script);
/// Always returns no-op events.
Policy make_noop_policy();
/// Repeats the decision-time cue for the whole chunk; exposes staleness.
Policy make_hold_policy();

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);
std::uint64_t derive_episode_seed(std::uint64_t base_seed, std::string_view task,
                                  std::uint64_t episode_index);
std::uint64_t observation_digest(std::uint64_t seed, std::int64_t tick);

struct EpisodeRecord {
  std::string task;
  std::string group;
  std::uint64_t seed = 0;
  EpisodeResult result;
};

struct SuiteRun {
  std::vector<EpisodeRecord> episodes;
  SuiteReport report;
};

using PolicyFactory =
    std::function<Policy(const TaskSpec&, std::uint64_t seed)>;

/// Runs episodes_per_task seeded episodes of every spec and aggregates
/// outcomes; protocol errors count as failures. Deterministic given
/// base_seed.
SuiteRun run_task_suite(const std::vector<TaskSpec>& specs,
                        int episodes_per_task, int chunk_size,
                        std::uint64_t base_seed,
                        const PolicyFactory& make_policy);

/// JSONL: one task-stats record per task, then one group-average summary
/// record.
std::string serialize_suite_report(const SuiteReport& report);

}  // namespace actkit
