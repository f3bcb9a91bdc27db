#include "actkit/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "actkit/detail/frame_json.hpp"
#include "actkit/detail/jsonl.hpp"
#include "actkit/errors.hpp"

namespace actkit {

using nlohmann::json;

void LatencyModel::validate() const {
  if (!std::isfinite(decision_latency) || decision_latency < 0)
    throw InputError("decision latency must be finite and >= 0");
  if (!std::isfinite(step_latency) || step_latency < 0)
    throw InputError("step latency must be finite and >= 0");
}

double simulate_fps(const LatencyModel& model, int chunk_size) {
  model.validate();
  if (chunk_size < 1) throw InputError("chunk size must be >= 1");
  double denom = model.decision_latency + chunk_size * model.step_latency;
  if (denom <= 0) throw InputError("latency model has zero total latency");
  return chunk_size / denom;
}

LatencyFit fit_latency_model(std::span<const FpsObservation> observed) {
  std::set<double> distinct;
  for (const FpsObservation& obs : observed) {
    if (!(obs.chunk_size >= 1) || !std::isfinite(obs.chunk_size))
      throw InputError("observed chunk size must be >= 1");
    if (!(obs.fps > 0) || !std::isfinite(obs.fps))
      throw InputError("observed fps must be > 0");
    distinct.insert(obs.chunk_size);
  }
  if (distinct.size() < 2)
    throw InputError("latency fit needs >= 2 distinct chunk sizes");

  // Linear least squares on y = c / fps against c.
  double n = static_cast<double>(observed.size());
  double sum_c = 0, sum_y = 0;
  for (const FpsObservation& obs : observed) {
    sum_c += obs.chunk_size;
    sum_y += obs.chunk_size / obs.fps;
  }
  double mean_c = sum_c / n, mean_y = sum_y / n;
  double sxx = 0, sxy = 0;
  for (const FpsObservation& obs : observed) {
    double dc = obs.chunk_size - mean_c;
    sxx += dc * dc;
    sxy += dc * (obs.chunk_size / obs.fps - mean_y);
  }
  double slope = sxy / sxx;           // L_e
  double intercept = mean_y - slope * mean_c;  // L_d

  LatencyFit fit;
  fit.model.step_latency = std::max(0.0, slope);
  fit.model.decision_latency = std::max(0.0, intercept);
  for (const FpsObservation& obs : observed) {
    double predicted =
        obs.chunk_size / (fit.model.decision_latency +
                          obs.chunk_size * fit.model.step_latency);
    double rel = (predicted - obs.fps) / obs.fps;
    fit.relative_residuals.push_back(rel);
    fit.max_abs_relative_residual =
        std::max(fit.max_abs_relative_residual, std::abs(rel));
  }
  return fit;
}

bool events_match(const ActionEvent& a, const ActionEvent& b,
                  const TolerancePolicy& tol) {
  if (a.buttons != b.buttons) return false;
  return std::abs(a.camera.yaw - b.camera.yaw) <= tol.camera_eps_deg &&
         std::abs(a.camera.pitch - b.camera.pitch) <= tol.camera_eps_deg;
}

void validate_task_spec(const TaskSpec& spec) {
  if (spec.task.empty()) throw InputError("task name is empty");
  if (spec.group.empty()) throw InputError("task group is empty");
  if (spec.target_events.empty()) throw InputError("task has no target events");
  for (const ActionEvent& ev : spec.target_events) validate_event(ev);
  if (spec.max_steps < 1) throw InputError("max_steps must be >= 1");
  if (!(spec.tolerance.camera_eps_deg >= 0) ||
      !std::isfinite(spec.tolerance.camera_eps_deg))
    throw InputError("camera tolerance must be finite and >= 0");
}

std::vector<TaskSpec> parse_task_specs(const std::string& content) {
  auto records = detail::split_jsonl(content, /*require_terminator=*/false);
  std::vector<TaskSpec> out;
  for (const detail::JsonlRecord& rec : records) {
    json doc;
    try {
      doc = json::parse(rec.text);
    } catch (const json::parse_error& e) {
      throw DataError(std::string("task record is not valid JSON: ") + e.what(),
                      rec.line_number, rec.byte_offset);
    }
    if (!doc.is_object())
      throw DataError("task record must be a JSON object", rec.line_number);
    for (auto it = doc.begin(); it != doc.end(); ++it)
      if (it.key() != "task" && it.key() != "group" &&
          it.key() != "target_events" && it.key() != "tolerance" &&
          it.key() != "max_steps")
        throw DataError("unknown field \"" + it.key() + "\" in task record",
                        rec.line_number);
    for (const char* field : {"task", "group"})
      if (!doc.contains(field) || !doc[field].is_string())
        throw DataError(std::string("task record missing string field \"") +
                            field + "\"",
                        rec.line_number);
    if (!doc.contains("target_events") || !doc["target_events"].is_array())
      throw DataError("task record missing target_events array",
                      rec.line_number);
    if (!doc.contains("max_steps") || !doc["max_steps"].is_number_integer())
      throw DataError("task record missing integer max_steps", rec.line_number);

    TaskSpec spec;
    spec.task = doc["task"].get<std::string>();
    spec.group = doc["group"].get<std::string>();
    spec.max_steps = doc["max_steps"].get<int>();
    for (const json& jf : doc["target_events"])
      spec.target_events.push_back(
          detail::frame_from_json(jf, rec.line_number).action);
    if (doc.contains("tolerance")) {
      const json& tol = doc["tolerance"];
      if (!tol.is_object())
        throw DataError("tolerance must be an object", rec.line_number);
      for (auto it = tol.begin(); it != tol.end(); ++it)
        if (it.key() != "camera_eps_deg")
          throw DataError("unknown field \"" + it.key() + "\" in tolerance",
                          rec.line_number);
      if (tol.contains("camera_eps_deg")) {
        if (!tol["camera_eps_deg"].is_number())
          throw DataError("camera_eps_deg must be a number", rec.line_number);
        spec.tolerance.camera_eps_deg = tol["camera_eps_deg"].get<double>();
      }
    }
    try {
      validate_task_spec(spec);
    } catch (const InputError& e) {
      throw DataError(e.what(), rec.line_number);
    }
    out.push_back(std::move(spec));
  }
  return out;
}

std::vector<TaskSpec> load_task_specs(const std::string& path) {
  return parse_task_specs(detail::read_file(path));
}

std::string serialize_task_spec(const TaskSpec& spec) {
  validate_task_spec(spec);
  json doc;
  doc["task"] = spec.task;
  doc["group"] = spec.group;
  doc["max_steps"] = spec.max_steps;
  doc["tolerance"] = json{{"camera_eps_deg", spec.tolerance.camera_eps_deg}};
  json events = json::array();
  for (size_t i = 0; i < spec.target_events.size(); ++i) {
    json jf = detail::event_to_json(spec.target_events[i]);
    jf["obs"] = "tick_" + std::to_string(i);
    jf["tick"] = i;
    events.push_back(std::move(jf));
  }
  doc["target_events"] = std::move(events);
  return doc.dump();
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

std::uint64_t derive_episode_seed(std::uint64_t base_seed, std::string_view task,
                                  std::uint64_t episode_index) {
  return splitmix64(splitmix64(base_seed ^ fnv1a64(task)) + episode_index);
}

std::uint64_t observation_digest(std::uint64_t seed, std::int64_t tick) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(tick)));
}

EpisodeResult run_episode(const TaskSpec& spec, std::uint64_t seed,
                          const Policy& policy, int chunk_size) {
  validate_task_spec(spec);
  if (chunk_size < 1) throw InputError("chunk size must be >= 1");
  if (!policy) throw InputError("policy is empty");

  const auto n = static_cast<int>(spec.target_events.size());
  EpisodeResult result;
  std::vector<Observation> history;
  std::vector<ActionEvent> chunk;

  int t = 0;
  while (t < n) {
    if (t % chunk_size == 0) {
      if (t >= spec.max_steps) return result;  // step budget exhausted
      Observation obs{t, observation_digest(seed, t), spec.target_events[t]};
      std::span<const Observation> past(history.data(), history.size());
      chunk = policy(obs, past, chunk_size);
      history.push_back(std::move(obs));
      ++result.decisions;
      if (static_cast<int>(chunk.size()) != chunk_size) {
        result.protocol_error = true;
        return result;
      }
    }
    int age = t % chunk_size;
    if (t >= spec.max_steps) return result;
    ++result.steps;
    result.max_observation_age = std::max(result.max_observation_age, age);
    if (!events_match(chunk[static_cast<size_t>(age)], spec.target_events[t],
                      spec.tolerance))
      return result;
    ++t;
  }
  result.success = true;
  return result;
}

Policy make_replay_policy(std::vector<ActionEvent> script) {
  return [script = std::move(script)](const Observation& obs,
                                      std::span<const Observation>,
                                      int chunk_size) {
    std::vector<ActionEvent> out;
    out.reserve(static_cast<size_t>(chunk_size));
    for (int k = 0; k < chunk_size; ++k) {
      auto idx = static_cast<size_t>(obs.tick) + static_cast<size_t>(k);
      out.push_back(idx < script.size() ? script[idx] : ActionEvent{});
    }
    return out;
  };
}

Policy make_noop_policy() {
  return [](const Observation&, std::span<const Observation>, int chunk_size) {
    return std::vector<ActionEvent>(static_cast<size_t>(chunk_size));
  };
}

Policy make_hold_policy() {
  return [](const Observation& obs, std::span<const Observation>,
            int chunk_size) {
    return std::vector<ActionEvent>(static_cast<size_t>(chunk_size), obs.cue);
  };
}

SuiteRun run_task_suite(const std::vector<TaskSpec>& specs,
                        int episodes_per_task, int chunk_size,
                        std::uint64_t base_seed,
                        const PolicyFactory& make_policy) {
  if (episodes_per_task < 1) throw InputError("episodes_per_task must be >= 1");
  if (!make_policy) throw InputError("policy factory is empty");

  SuiteRun run;
  std::vector<EpisodeOutcome> outcomes;
  for (const TaskSpec& spec : specs) {
    validate_task_spec(spec);
    for (int e = 0; e < episodes_per_task; ++e) {
      std::uint64_t seed =
          derive_episode_seed(base_seed, spec.task, static_cast<std::uint64_t>(e));
      Policy policy = make_policy(spec, seed);
      EpisodeResult result = run_episode(spec, seed, policy, chunk_size);
      outcomes.push_back({spec.task, spec.group, result.success});
      run.episodes.push_back({spec.task, spec.group, seed, result});
    }
  }
  run.report = aggregate_success(outcomes);
  return run;
}

std::string serialize_suite_report(const SuiteReport& report) {
  std::string out;
  for (const TaskStats& stats : report.tasks) {
    json doc;
    doc["task"] = stats.task;
    doc["group"] = stats.group;
    doc["episodes"] = stats.episodes;
    doc["successes"] = stats.successes;
    doc["success_rate"] = stats.success_rate;
    doc["protocol_ok"] = stats.protocol_ok;
    out += doc.dump();
    out += '\n';
  }
  json summary;
  json groups = json::array();
  for (const GroupAverage& g : report.groups)
    groups.push_back(json{{"group", g.group},
                          {"tasks", g.task_count},
                          {"mean_success_rate", g.mean_success_rate}});
  summary["group_averages"] = std::move(groups);
  out += summary.dump();
  out += '\n';
  return out;
}

}  // namespace actkit
