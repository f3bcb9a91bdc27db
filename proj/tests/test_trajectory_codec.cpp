#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>
#include <string>

#include "actkit/action_codec.hpp"
#include "actkit/dataset.hpp"
#include "actkit/errors.hpp"
#include "actkit/sampling.hpp"
#include "actkit/token_vocab.hpp"
#include "actkit/trajectory.hpp"

using namespace actkit;

namespace {

const char* fixture_dir() {
#ifdef ACTKIT_FIXTURE_DIR
  return ACTKIT_FIXTURE_DIR;
#else
  return "tests/fixtures";
#endif
}

std::string fixture(const std::string& name) {
  return std::string(fixture_dir()) + "/" + name;
}

Trajectory make_traj(int frames, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> cam(-10.0, 10.0);
  std::uniform_int_distribution<int> coin(0, 1);
  Trajectory traj;
  traj.instruction = "fixture task " + std::to_string(seed);
  traj.source_tag = "synthetic";
  for (int i = 0; i < frames; ++i) {
    TrajectoryFrame frame;
    frame.observation_ref = "obs_" + std::to_string(i);
    frame.tick_index = i;
    if (coin(rng)) frame.action.buttons.insert(ButtonId::Forward);
    if (coin(rng)) frame.action.buttons.insert(ButtonId::Attack);
    frame.action.camera = {cam(rng), cam(rng)};
    traj.frames.push_back(std::move(frame));
  }
  return traj;
}

ActionTokenVocab test_vocab() {
  BaseVocabStats stats;
  stats.vocab_size = 1000;
  return build_vocab(stats, VocabStrategy::Append, default_surface_list());
}

}  // namespace

TEST_CASE("fixture file loads and validates") {
  auto trajectories = load_trajectories(fixture("trajectories.jsonl"));
  REQUIRE(trajectories.size() == 3);
  CHECK(trajectories[0].instruction == "chop the nearest oak tree");
  CHECK(trajectories[0].frames.size() == 7);
  CHECK(trajectories[1].frames[0].tick_index == 4);
  for (const auto& t : trajectories) CHECK_NOTHROW(validate_trajectory(t));
}

TEST_CASE("serialize then parse is identity") {
  Trajectory traj = make_traj(9, 3);
  std::string line = serialize_trajectory(traj);
  Trajectory back = parse_trajectory_record(line);
  CHECK(back.instruction == traj.instruction);
  CHECK(back.source_tag == traj.source_tag);
  REQUIRE(back.frames.size() == traj.frames.size());
  for (size_t i = 0; i < back.frames.size(); ++i) {
    CHECK(back.frames[i].observation_ref == traj.frames[i].observation_ref);
    CHECK(back.frames[i].tick_index == traj.frames[i].tick_index);
    CHECK(back.frames[i].action.buttons == traj.frames[i].action.buttons);
    CHECK(back.frames[i].action.camera.yaw == traj.frames[i].action.camera.yaw);
  }
  CHECK(serialize_trajectory(back) == line);
}

TEST_CASE("trajectory validation failures") {
  Trajectory traj = make_traj(3, 1);
  traj.frames[2].tick_index = traj.frames[1].tick_index;  // not increasing
  CHECK_THROWS_AS(validate_trajectory(traj), InputError);
  traj = make_traj(3, 1);
  traj.instruction.clear();
  CHECK_THROWS_AS(validate_trajectory(traj), InputError);
  traj = make_traj(0, 1);
  CHECK_THROWS_AS(validate_trajectory(traj), InputError);
}

TEST_CASE("record parse failures name the line") {
  CHECK_THROWS_AS(parse_trajectory_record("{}", 7), DataError);
  CHECK_THROWS_AS(parse_trajectory_record("[1,2]", 7), DataError);
  try {
    parse_trajectory_record(
        R"({"instruction":"x","source_tag":"t","frames":[],"extra":1})", 7);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(e.line() == 7);
    CHECK(std::string(e.what()).find("extra") != std::string::npos);
  }
}

TEST_CASE("chunking drops the trailing partial chunk") {
  Trajectory traj = make_traj(7, 5);
  auto chunks = chunk_actions(traj, 3);
  REQUIRE(chunks.size() == 2);
  CHECK(chunks[0].start_index == 0);
  CHECK(chunks[1].start_index == 3);
  CHECK(chunks[0].events.size() == 3);
  CHECK(chunks[1].events.size() == 3);
}

TEST_CASE("chunk concatenation equals the trajectory prefix") {
  std::mt19937 rng(99);
  std::uniform_int_distribution<int> len(1, 40);
  std::uniform_int_distribution<int> tau_dist(1, 6);
  for (int trial = 0; trial < 200; ++trial) {
    int n = len(rng);
    int tau = tau_dist(rng);
    Trajectory traj = make_traj(n, 1000 + trial);
    auto chunks = chunk_actions(traj, tau);
    size_t covered = 0;
    for (const auto& c : chunks) {
      CHECK(c.start_index == static_cast<std::int64_t>(covered));
      for (const ActionEvent& e : c.events) {
        CHECK(e.buttons == traj.frames[covered].action.buttons);
        ++covered;
      }
    }
    CHECK(covered == static_cast<size_t>(n / tau) * tau);
  }
}

TEST_CASE("overlapping stride") {
  Trajectory traj = make_traj(8, 11);
  auto chunks = chunk_actions(traj, 4, 2);
  REQUIRE(chunks.size() == 3);
  CHECK(chunks[0].start_index == 0);
  CHECK(chunks[1].start_index == 2);
  CHECK(chunks[2].start_index == 4);
  CHECK_THROWS_AS(chunk_actions(traj, 0, 1), InputError);
  CHECK_THROWS_AS(chunk_actions(traj, 2, 0), InputError);
}

TEST_CASE("chunk schedule bounds") {
  ChunkSchedule sched;
  CHECK(sched.post_train == 1);
  CHECK(sched.fine_tune == 3);
  CHECK(sched.inference == 2);
  CHECK_NOTHROW(sched.validate());
  sched.fine_tune = 4;
  CHECK_THROWS_AS(sched.validate(), InputError);
  CHECK_NOTHROW(sched.validate(true));
  sched.fine_tune = 0;
  CHECK_THROWS_AS(sched.validate(true), InputError);
}

TEST_CASE("il sample layout and masking") {
  Trajectory traj = make_traj(6, 21);
  auto vocab = test_vocab();
  IlSampleConfig cfg;
  cfg.instruction_ids = {7, 8, 9};
  cfg.history_len = 2;
  cfg.observation_placeholder_id = 500;

  auto chunks = chunk_actions(traj, 2);
  REQUIRE(chunks.size() == 3);

  // chunk at start 2: history covers observations 1 and 2
  TrainingSample sample = build_il_sample(traj, chunks[1], cfg, vocab);
  CHECK(sample.kind == SampleKind::Il);
  validate_sample(sample);

  std::vector<std::string> surfaces;
  for (const ActionEvent& e : chunks[1].events) {
    auto toks = encode_action(e);
    for (const auto& t : toks) surfaces.push_back(token_surface(t));
  }
  auto action_ids = tokens_to_ids(vocab, surfaces);

  size_t prefix = cfg.instruction_ids.size() + 2;  // 2 history observations
  REQUIRE(sample.input_ids.size() == prefix + action_ids.size());
  CHECK(sample.input_ids[0] == 7);
  CHECK(sample.input_ids[3] == 500);
  CHECK(sample.input_ids[4] == 500);
  for (size_t i = 0; i < prefix; ++i) CHECK(sample.label_ids[i] == kIgnoreLabelId);
  for (size_t i = 0; i < action_ids.size(); ++i) {
    CHECK(sample.input_ids[prefix + i] == action_ids[i]);
    CHECK(sample.label_ids[prefix + i] == action_ids[i]);
  }
  CHECK(supervised_count(sample) == action_ids.size());
  CHECK(sample.meta["observation_refs"] ==
        nlohmann::json::array({"obs_1", "obs_2"}));
  CHECK(sample.meta["chunk_start"] == 2);

  // chunk at start 0 has a single observation in the window
  TrainingSample first = build_il_sample(traj, chunks[0], cfg, vocab);
  CHECK(first.meta["observation_refs"] == nlohmann::json::array({"obs_0"}));
  size_t placeholders = 0;
  for (std::int64_t id : first.input_ids)
    if (id == cfg.observation_placeholder_id) ++placeholders;
  CHECK(placeholders == 1);
}

TEST_CASE("il supervised count equals re-encoded chunk token length") {
  auto vocab = test_vocab();
  std::mt19937 rng(4242);
  std::uniform_int_distribution<int> len(2, 20);
  std::uniform_int_distribution<int> tau_dist(1, 3);
  for (int trial = 0; trial < 100; ++trial) {
    Trajectory traj = make_traj(len(rng), 5000 + trial);
    int tau = tau_dist(rng);
    IlSampleConfig cfg;
    cfg.instruction_ids = {1, 2};
    for (const auto& chunk : chunk_actions(traj, tau)) {
      TrainingSample s = build_il_sample(traj, chunk, cfg, vocab);
      size_t expected = 0;
      for (const ActionEvent& e : chunk.events)
        expected += encode_action(e).size();
      CHECK(supervised_count(s) == expected);
    }
  }
}

TEST_CASE("sft sample supervises exactly the answer span") {
  SftSampleConfig cfg;
  cfg.vision_placeholder_id = 77;
  TrainingSample s = build_sft_sample({10, 11, 12}, 4, {900, 901}, cfg);
  CHECK(s.kind == SampleKind::Sft);
  validate_sample(s);
  REQUIRE(s.input_ids.size() == 4 + 3 + 2);
  for (int i = 0; i < 4; ++i) {
    CHECK(s.input_ids[i] == 77);
    CHECK(s.label_ids[i] == kIgnoreLabelId);
  }
  CHECK(s.label_ids[4] == kIgnoreLabelId);
  CHECK(s.label_ids[7] == 900);
  CHECK(s.label_ids[8] == 901);
  CHECK(supervised_count(s) == 2);
  CHECK(s.meta["vision_placeholder_count"] == 4);
  CHECK_THROWS_AS(build_sft_sample({1}, 0, {}, cfg), InputError);
}

TEST_CASE("validate_sample rejects broken invariants") {
  TrainingSample s;
  s.kind = SampleKind::Sft;
  s.input_ids = {1, 2};
  s.label_ids = {kIgnoreLabelId};
  CHECK_THROWS_AS(validate_sample(s), InputError);  // length mismatch
  s.label_ids = {kIgnoreLabelId, kIgnoreLabelId};
  CHECK_THROWS_AS(validate_sample(s), InputError);  // nothing supervised
  s.label_ids = {kIgnoreLabelId, 3};
  CHECK_THROWS_AS(validate_sample(s), InputError);  // not teacher forced
  s.label_ids = {kIgnoreLabelId, 2};
  CHECK_NOTHROW(validate_sample(s));
  s.label_ids = {-7, 2};
  CHECK_THROWS_AS(validate_sample(s), InputError);  // stray negative id
}

TEST_CASE("pack then unpack then pack is byte identical") {
  auto vocab = test_vocab();
  std::vector<TrainingSample> samples;
  std::mt19937 rng(31);
  std::uniform_int_distribution<int> len(2, 12);
  for (int i = 0; i < 500; ++i) {
    Trajectory traj = make_traj(len(rng), 9000 + i);
    IlSampleConfig cfg;
    cfg.instruction_ids = {static_cast<std::int64_t>(i % 13)};
    for (const auto& chunk : chunk_actions(traj, 2))
      samples.push_back(build_il_sample(traj, chunk, cfg, vocab));
    if (i % 5 == 0)
      samples.push_back(build_sft_sample({int64_t(i), 2, 3}, 2, {400, 401}));
  }
  std::string once = pack_dataset_string(samples, 1);
  auto unpacked = unpack_dataset_string(once);
  CHECK(unpacked.size() == samples.size());
  CHECK(pack_dataset_string(unpacked, 1) == once);
}

TEST_CASE("packing is invariant to worker count") {
  auto vocab = test_vocab();
  std::vector<TrainingSample> samples;
  for (int i = 0; i < 97; ++i) {
    Trajectory traj = make_traj(5, 700 + i);
    IlSampleConfig cfg;
    cfg.instruction_ids = {1};
    for (const auto& chunk : chunk_actions(traj, 2))
      samples.push_back(build_il_sample(traj, chunk, cfg, vocab));
  }
  std::string serial = pack_dataset_string(samples, 1);
  for (int jobs : {2, 3, 8}) CHECK(pack_dataset_string(samples, jobs) == serial);
}

TEST_CASE("unpack validates structure and vocab bound") {
  std::string good =
      R"({"input_ids":[1,2,3],"kind":"sft","label_ids":[-100,2,3],"meta":{}})"
      "\n";
  auto samples = unpack_dataset_string(good);
  REQUIRE(samples.size() == 1);
  CHECK(samples[0].kind == SampleKind::Sft);

  // ids must stay below the supplied limit
  CHECK_THROWS_AS(unpack_dataset_string(good, 3), DataError);
  CHECK_NOTHROW(unpack_dataset_string(good, 4));

  // missing trailing newline on the final record
  std::string torn = good.substr(0, good.size() - 1);
  CHECK_THROWS_AS(unpack_dataset_string(torn), DataError);

  CHECK_THROWS_AS(unpack_dataset_string("{\"kind\":\"sft\"}\n"), DataError);
  std::string bad_kind = good;
  bad_kind.replace(bad_kind.find("sft"), 3, "xyz");
  CHECK_THROWS_AS(unpack_dataset_string(bad_kind), DataError);
}

TEST_CASE("dataset stats split by kind") {
  std::vector<TrainingSample> samples;
  samples.push_back(build_sft_sample({1, 2}, 3, {9, 9}));
  auto vocab = test_vocab();
  Trajectory traj = make_traj(4, 61);
  IlSampleConfig cfg;
  cfg.instruction_ids = {5};
  for (const auto& chunk : chunk_actions(traj, 2))
    samples.push_back(build_il_sample(traj, chunk, cfg, vocab));
  DatasetStats stats = dataset_stats(samples);
  CHECK(stats.sample_count == samples.size());
  CHECK(stats.sft_samples == 1);
  CHECK(stats.il_samples == samples.size() - 1);
  CHECK(stats.token_count == stats.sft_tokens + stats.il_tokens);
  CHECK(stats.supervised_count == stats.sft_supervised + stats.il_supervised);
  CHECK(stats.sft_supervised == 2);
}

TEST_CASE("file round trip through disk") {
  namespace fs = std::filesystem;
  auto vocab = test_vocab();
  Trajectory traj = make_traj(6, 77);
  IlSampleConfig cfg;
  cfg.instruction_ids = {3, 4};
  std::vector<TrainingSample> samples;
  for (const auto& chunk : chunk_actions(traj, 3))
    samples.push_back(build_il_sample(traj, chunk, cfg, vocab));

  fs::path dir = fs::temp_directory_path() / "actkit_test_dataset";
  fs::create_directories(dir);
  fs::path file = dir / "packed.jsonl";
  pack_dataset(samples, file.string(), 2);
  auto loaded = unpack_dataset(file.string());
  CHECK(pack_dataset_string(loaded, 1) == pack_dataset_string(samples, 1));
  fs::remove_all(dir);
}
