#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "actkit/mu_law.hpp"
#include "actkit/token_vocab.hpp"
#include "actkit/trajectory.hpp"

namespace actkit {

/// Label value for positions excluded from the loss.
inline constexpr std::int64_t kIgnoreLabelId = -100;

struct ActionChunk {
  int start_index = 0;  // frame position of the first event
  int horizon = 1;      // number of events
  std::vector<ActionEvent> events;
};

/// Windows of `horizon` consecutive events starting at frame positions
/// 0, stride, 2*stride, ...; a trailing window with fewer than `horizon`
/// events is dropped. Throws InputError if horizon or stride < 1.
std::vector<ActionChunk> chunk_actions(const Trajectory& traj, int horizon,
                                       int stride);
inline std::vector<ActionChunk> chunk_actions(const Trajectory& traj,
                                              int horizon) {
  return chunk_actions(traj, horizon, horizon);
}

/// Named chunk-size presets for the three pipeline stages.
struct ChunkSchedule {
  int post_train = 1;
  int fine_tune = 3;
  int inference = 2;

  /// Sizes must be >= 1 and, unless allow_large, <= kMaxExploredChunkSize.
  void validate(bool allow_large = false) const;
};

/// Largest chunk size the upstream ablation explored.
inline constexpr int kMaxExploredChunkSize = 3;

enum class SampleKind { Sft, Il };

struct TrainingSample {
  SampleKind kind = SampleKind::Il;
  std::vector<std::int64_t> input_ids;
  std::vector<std::int64_t> label_ids;
  nlohmann::json meta = nlohmann::json::object();

  bool operator==(const TrainingSample&) const = default;
};

/// Structural invariants: equal lengths, at least one supervised position,
/// every supervised label copies the input id at that position, and -100 is
/// the only sentinel (labels are otherwise non-negative).
void validate_sample(const TrainingSample& sample);

int supervised_count(const TrainingSample& sample);

struct IlSampleConfig {
  std::vector<std::int64_t> instruction_ids;
  int history_len = 2;
  std::int64_t observation_placeholder_id = 0;
  CameraQuantizerConfig quantizer;
};

/// Input layout: [instruction ids] [one placeholder per history observation,
/// up to history_len frames ending at the chunk start] [action tokens for all
/// chunk events]. Only the action-token positions are supervised.
TrainingSample build_il_sample(const Trajectory& traj, const ActionChunk& chunk,
                               const IlSampleConfig& cfg,
                               const ActionTokenVocab& vocab);

struct SftSampleConfig {
  std::int64_t vision_placeholder_id = 0;
};

/// Input layout: [vision placeholders] [instruction ids] [answer ids]; only
/// the answer positions are supervised. Throws InputError on empty answer.
TrainingSample build_sft_sample(const std::vector<std::int64_t>& instruction_ids,
                                int vision_placeholder_count,
                                const std::vector<std::int64_t>& answer_token_ids,
                                const SftSampleConfig& cfg = {});

}  // namespace actkit
