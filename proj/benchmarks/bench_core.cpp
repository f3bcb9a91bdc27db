#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "actkit/action_codec.hpp"
#include "actkit/dataset.hpp"
#include "actkit/mu_law.hpp"
#include "actkit/sampling.hpp"
#include "actkit/token_vocab.hpp"
#include "actkit/trajectory.hpp"

namespace {

using namespace actkit;

std::vector<ActionEvent> random_events(size_t n) {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> cam(-10.0, 10.0);
  std::uniform_int_distribution<int> coin(0, 1);
  std::vector<ActionEvent> events(n);
  for (auto& e : events) {
    if (coin(rng)) e.buttons.insert(ButtonId::Forward);
    if (coin(rng)) e.buttons.insert(ButtonId::Attack);
    e.camera = {cam(rng), cam(rng)};
  }
  return events;
}

void BM_MuLawEncode(benchmark::State& state) {
  CameraQuantizerConfig cfg;
  double x = -10.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mu_law_encode(x, cfg));
    x += 0.001;
    if (x > 10.0) x = -10.0;
  }
}
BENCHMARK(BM_MuLawEncode);

void BM_FrameEncode(benchmark::State& state) {
  auto events = random_events(1024);
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(encode_action(events[i % events.size()]));
    ++i;
  }
}
BENCHMARK(BM_FrameEncode);

void BM_FrameDecode(benchmark::State& state) {
  auto events = random_events(256);
  std::vector<ActionToken> stream;
  for (const auto& e : events) {
    auto toks = encode_action(e);
    stream.insert(stream.end(), toks.begin(), toks.end());
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(decode_actions(stream));
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<int64_t>(events.size()));
}
BENCHMARK(BM_FrameDecode);

void BM_PackDataset(benchmark::State& state) {
  BaseVocabStats stats;
  stats.vocab_size = 2000;
  auto vocab = build_vocab(stats, VocabStrategy::Append, default_surface_list());
  Trajectory traj;
  traj.instruction = "bench";
  traj.source_tag = "bench";
  auto events = random_events(64);
  for (size_t i = 0; i < events.size(); ++i) {
    TrajectoryFrame frame;
    frame.observation_ref = "o" + std::to_string(i);
    frame.tick_index = static_cast<std::int64_t>(i);
    frame.action = events[i];
    traj.frames.push_back(std::move(frame));
  }
  IlSampleConfig cfg;
  cfg.instruction_ids = {1, 2, 3, 4};
  std::vector<TrainingSample> samples;
  for (const auto& chunk : chunk_actions(traj, 2))
    samples.push_back(build_il_sample(traj, chunk, cfg, vocab));
  const int jobs = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(pack_dataset_string(samples, jobs));
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<int64_t>(samples.size()));
}
BENCHMARK(BM_PackDataset)->Arg(1)->Arg(2)->Arg(4);

}  // namespace

BENCHMARK_MAIN();
