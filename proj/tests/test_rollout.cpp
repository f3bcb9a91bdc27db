#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "actkit/errors.hpp"
#include "actkit/rollout.hpp"

using namespace actkit;

namespace {

const char* fixture_dir() {
#ifdef ACTKIT_FIXTURE_DIR
  return ACTKIT_FIXTURE_DIR;
#else
  return "tests/fixtures";
#endif
}

std::vector<ActionEvent> script(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> cam(-10.0, 10.0);
  std::uniform_int_distribution<int> coin(0, 1);
  std::vector<ActionEvent> events;
  for (int i = 0; i < n; ++i) {
    ActionEvent e;
    if (coin(rng)) e.buttons.insert(ButtonId::Forward);
    e.camera = {cam(rng), cam(rng)};
    events.push_back(std::move(e));
  }
  return events;
}

TaskSpec spec_for(std::vector<ActionEvent> events, const std::string& task) {
  TaskSpec spec;
  spec.task = task;
  spec.group = "test_group";
  spec.target_events = std::move(events);
  spec.max_steps = 256;
  return spec;
}

}  // namespace

TEST_CASE("latency model predicts fps") {
  LatencyModel model{73.0 / 630.0, 1.0 / 112.0};
  CHECK(simulate_fps(model, 1) == doctest::Approx(1.0 / (73.0 / 630.0 + 1.0 / 112.0)));
  CHECK_THROWS_AS(simulate_fps(model, 0), InputError);
  LatencyModel bad{-1.0, 0.0};
  CHECK_THROWS_AS(bad.validate(), InputError);
}

TEST_CASE("exact fit of the published fps rows") {
  std::vector<FpsObservation> rows = {{1, 8.0}, {2, 15.0}, {3, 21.0}};
  LatencyFit fit = fit_latency_model(rows);
  // linearized system c/fps = L_d + c * L_e has the closed-form solution
  // L_e = 1/112, L_d = 73/630 for these three rows
  CHECK(fit.model.step_latency == doctest::Approx(1.0 / 112.0).epsilon(1e-9));
  CHECK(fit.model.decision_latency == doctest::Approx(73.0 / 630.0).epsilon(1e-9));
  CHECK(fit.max_abs_relative_residual < 0.05);
  for (double r : fit.relative_residuals) CHECK(std::abs(r) < 0.0032);

  // predictions for c = 1, 2, 3 stay within 5% of the observations
  for (const auto& obs : rows) {
    double predicted = simulate_fps(fit.model, static_cast<int>(obs.chunk_size));
    CHECK(std::abs(predicted - obs.fps) / obs.fps < 0.05);
  }
}

TEST_CASE("independent least squares oracle agrees") {
  // brute force the normal equations over y_i = c_i / fps_i = L_d + c_i L_e
  std::vector<FpsObservation> rows = {{1, 8.0}, {2, 15.0}, {3, 21.0}};
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double n = static_cast<double>(rows.size());
  for (const auto& r : rows) {
    double y = r.chunk_size / r.fps;
    sx += r.chunk_size;
    sy += y;
    sxx += r.chunk_size * r.chunk_size;
    sxy += r.chunk_size * y;
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  double intercept = (sy - slope * sx) / n;
  LatencyFit fit = fit_latency_model(rows);
  CHECK(fit.model.step_latency == doctest::Approx(slope).epsilon(1e-12));
  CHECK(fit.model.decision_latency == doctest::Approx(intercept).epsilon(1e-12));
}

TEST_CASE("fit input validation") {
  CHECK_THROWS_AS(fit_latency_model(std::vector<FpsObservation>{{1, 8.0}}),
                  InputError);
  CHECK_THROWS_AS(fit_latency_model(std::vector<FpsObservation>{{1, 8.0}, {1, 9.0}}),
                  InputError);  // needs two distinct chunk sizes
  CHECK_THROWS_AS(fit_latency_model(std::vector<FpsObservation>{{1, 0.0}, {2, 5.0}}),
                  InputError);
}

TEST_CASE("seed derivation is stable and task-sensitive") {
  CHECK(derive_episode_seed(1, "a", 0) == derive_episode_seed(1, "a", 0));
  CHECK(derive_episode_seed(1, "a", 0) != derive_episode_seed(1, "a", 1));
  CHECK(derive_episode_seed(1, "a", 0) != derive_episode_seed(1, "b", 0));
  CHECK(derive_episode_seed(1, "a", 0) != derive_episode_seed(2, "a", 0));
  CHECK(observation_digest(7, 3) == observation_digest(7, 3));
  CHECK(observation_digest(7, 3) != observation_digest(7, 4));
}

TEST_CASE("replay policy succeeds and decision count is ceil(steps / c)") {
  for (int steps : {1, 2, 3, 5, 8, 12}) {
    auto events = script(steps, 100 + steps);
    TaskSpec spec = spec_for(events, "replay_task");
    for (int c : {1, 2, 3}) {
      auto policy = make_replay_policy(spec.target_events);
      EpisodeResult result = run_episode(spec, 42, policy, c);
      CHECK(result.success);
      CHECK(!result.protocol_error);
      CHECK(result.steps == steps);
      CHECK(result.decisions == (steps + c - 1) / c);
      CHECK(result.max_observation_age == std::min(c - 1, steps - 1));
    }
  }
}

TEST_CASE("noop policy fails any task that needs input") {
  auto events = script(4, 5);
  events[0].buttons.insert(ButtonId::Attack);
  TaskSpec spec = spec_for(events, "noop_task");
  auto policy = make_noop_policy();
  EpisodeResult result = run_episode(spec, 42, policy, 1);
  CHECK(!result.success);
  CHECK(!result.protocol_error);
}

TEST_CASE("wrong chunk size is a protocol error, not a crash") {
  TaskSpec spec = spec_for(script(6, 6), "bad_chunk");
  Policy bad = [](const Observation&, std::span<const Observation>, int) {
    return std::vector<ActionEvent>{ActionEvent{}};  // always one action
  };
  EpisodeResult result = run_episode(spec, 42, bad, 2);
  CHECK(result.protocol_error);
  CHECK(!result.success);
}

TEST_CASE("max_steps budget halts the episode") {
  TaskSpec spec = spec_for(script(10, 7), "budget");
  spec.max_steps = 4;
  auto policy = make_replay_policy(spec.target_events);
  EpisodeResult result = run_episode(spec, 42, policy, 2);
  CHECK(!result.success);
  CHECK(result.steps <= 4);
}

TEST_CASE("camera tolerance separates near misses") {
  ActionEvent target;
  target.camera = {1.0, 0.0};
  ActionEvent close = target;
  close.camera.yaw += 5e-7;
  TolerancePolicy tol;  // default eps 1e-6
  CHECK(events_match(target, close, tol));
  close.camera.yaw = 1.0 + 1e-5;
  CHECK(!events_match(target, close, tol));
  ActionEvent other = target;
  other.buttons.insert(ButtonId::Use);
  CHECK(!events_match(target, other, tol));
}

TEST_CASE("hold policy staleness grows with chunk size") {
  // the cue switches mid-episode; holding the stale cue fails more often
  // at larger chunk sizes
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> switch_pos(1, 29);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int episodes = 400;
  double rate[4] = {0, 0, 0, 0};
  for (int c = 1; c <= 3; ++c) {
    int wins = 0;
    std::mt19937 ep_rng(999);
    for (int ep = 0; ep < episodes; ++ep) {
      std::vector<ActionEvent> events(30);
      ActionEvent a, b;
      a.buttons.insert(ButtonId::Forward);
      b.buttons.insert(ButtonId::Attack);
      bool switches = unit(ep_rng) < 0.8;
      int pos = switch_pos(ep_rng);
      for (int i = 0; i < 30; ++i) events[i] = (switches && i >= pos) ? b : a;
      TaskSpec spec = spec_for(events, "hold");
      auto policy = make_hold_policy();
      if (run_episode(spec, 7, policy, c).success) ++wins;
    }
    rate[c] = static_cast<double>(wins) / episodes;
  }
  CHECK(rate[1] == doctest::Approx(1.0));
  CHECK(rate[2] < rate[1]);
  CHECK(rate[3] < rate[2]);
  // the c=2 rate concentrates near 0.586 and c=3 near 0.448
  CHECK(rate[2] == doctest::Approx(0.586).epsilon(0.15));
  CHECK(rate[3] == doctest::Approx(0.448).epsilon(0.15));
}

TEST_CASE("task spec files load and validate") {
  auto specs = load_task_specs(std::string(fixture_dir()) + "/tasks_small.jsonl");
  REQUIRE(specs.size() == 4);
  CHECK(specs[0].task == "harvest_log");
  CHECK(specs[0].group == "mine_blocks");
  CHECK(specs[0].target_events.size() == 5);
  CHECK(specs[0].tolerance.camera_eps_deg == doctest::Approx(1e-6));
  CHECK(specs[0].max_steps == 64);
  for (const auto& s : specs) CHECK_NOTHROW(validate_task_spec(s));

  CHECK_THROWS_AS(parse_task_specs(R"({"task":"x"})" "\n"), DataError);
  CHECK_THROWS_AS(
      parse_task_specs(
          R"({"task":"x","group":"g","target_events":[],"tolerance":{},"max_steps":5})"
          "\n"),
      DataError);  // no events
  CHECK_THROWS_AS(
      parse_task_specs(
          R"({"task":"x","group":"g","target_events":[{"obs":"o","buttons":[],"camera":[0,0],"tick":0}],"tolerance":{"other":1},"max_steps":5})"
          "\n"),
      DataError);  // unknown tolerance key
}

TEST_CASE("task spec serialization round trips") {
  auto specs = load_task_specs(std::string(fixture_dir()) + "/tasks_small.jsonl");
  std::string text;
  for (const auto& s : specs) text += serialize_task_spec(s) + "\n";
  auto reparsed = parse_task_specs(text);
  REQUIRE(reparsed.size() == specs.size());
  std::string again;
  for (const auto& s : reparsed) again += serialize_task_spec(s) + "\n";
  CHECK(again == text);
}

TEST_CASE("suite run aggregates and is byte deterministic") {
  auto specs = load_task_specs(std::string(fixture_dir()) + "/tasks_small.jsonl");
  PolicyFactory replay = [](const TaskSpec& spec, std::uint64_t) {
    return make_replay_policy(spec.target_events);
  };
  SuiteRun run = run_task_suite(specs, 30, 2, 7, replay);
  CHECK(run.episodes.size() == specs.size() * 30);
  REQUIRE(run.report.tasks.size() == 4);
  for (const auto& t : run.report.tasks) {
    CHECK(t.success_rate == doctest::Approx(1.0));
    CHECK(t.protocol_ok);
  }
  REQUIRE(run.report.groups.size() == 2);
  CHECK(run.report.groups[0].group == "craft_items");
  CHECK(run.report.groups[0].mean_success_rate == doctest::Approx(1.0));

  std::string first = serialize_suite_report(run.report);
  SuiteRun second = run_task_suite(specs, 30, 2, 7, replay);
  CHECK(serialize_suite_report(second.report) == first);
  // per-episode seeds are reproduced too
  CHECK(run.episodes[17].seed == second.episodes[17].seed);

  SuiteRun other_seed = run_task_suite(specs, 30, 2, 8, replay);
  CHECK(other_seed.episodes[17].seed != run.episodes[17].seed);
}

TEST_CASE("noop suite fails but keeps protocol_ok") {
  auto specs = load_task_specs(std::string(fixture_dir()) + "/tasks_small.jsonl");
  PolicyFactory noop = [](const TaskSpec&, std::uint64_t) {
    return make_noop_policy();
  };
  SuiteRun run = run_task_suite(specs, 30, 1, 7, noop);
  for (const auto& t : run.report.tasks) {
    CHECK(t.success_rate == doctest::Approx(0.0));
    CHECK(t.protocol_ok);
  }
}

TEST_CASE("suite report serialization shape") {
  auto specs = load_task_specs(std::string(fixture_dir()) + "/tasks_small.jsonl");
  PolicyFactory replay = [](const TaskSpec& spec, std::uint64_t) {
    return make_replay_policy(spec.target_events);
  };
  SuiteRun run = run_task_suite(specs, 3, 1, 7, replay);
  std::string text = serialize_suite_report(run.report);
  // one line per task plus the summary line
  size_t lines = std::count(text.begin(), text.end(), '\n');
  CHECK(lines == specs.size() + 1);
  CHECK(text.find("\"group_averages\"") != std::string::npos);
  CHECK(text.find("\"protocol_ok\":false") != std::string::npos);  // 3 < 30
}
