#include "actkit/sampling.hpp"

#include <algorithm>

#include "actkit/action_codec.hpp"
#include "actkit/errors.hpp"

namespace actkit {

std::vector<ActionChunk> chunk_actions(const Trajectory& traj, int horizon,
                                       int stride) {
  if (horizon < 1) throw InputError("chunk horizon must be >= 1");
  if (stride < 1) throw InputError("chunk stride must be >= 1");
  validate_trajectory(traj);

  std::vector<ActionChunk> out;
  const auto n = static_cast<int>(traj.frames.size());
  for (int start = 0; start + horizon <= n; start += stride) {
    ActionChunk chunk;
    chunk.start_index = start;
    chunk.horizon = horizon;
    chunk.events.reserve(static_cast<size_t>(horizon));
    for (int i = 0; i < horizon; ++i)
      chunk.events.push_back(traj.frames[static_cast<size_t>(start + i)].action);
    out.push_back(std::move(chunk));
  }
  return out;
}

void ChunkSchedule::validate(bool allow_large) const {
  for (auto [name, value] : {std::pair<const char*, int>{"post_train", post_train},
                             {"fine_tune", fine_tune},
                             {"inference", inference}}) {
    if (value < 1)
      throw InputError(std::string("chunk size for ") + name + " must be >= 1");
    if (!allow_large && value > kMaxExploredChunkSize)
      throw InputError(std::string("chunk size for ") + name + " exceeds " +
                       std::to_string(kMaxExploredChunkSize) +
                       " (pass allow_large to override)");
  }
}

void validate_sample(const TrainingSample& sample) {
  if (sample.input_ids.size() != sample.label_ids.size())
    throw InputError("input_ids and label_ids lengths differ");
  int supervised = 0;
  for (size_t i = 0; i < sample.input_ids.size(); ++i) {
    std::int64_t label = sample.label_ids[i];
    if (label == kIgnoreLabelId) continue;
    if (label < 0)
      throw InputError("label at position " + std::to_string(i) +
                       " is negative but not the ignore sentinel");
    if (label != sample.input_ids[i])
      throw InputError("supervised label at position " + std::to_string(i) +
                       " does not copy the input id");
    ++supervised;
  }
  if (supervised == 0) throw InputError("sample has no supervised positions");
}

int supervised_count(const TrainingSample& sample) {
  return static_cast<int>(
      std::count_if(sample.label_ids.begin(), sample.label_ids.end(),
                    [](std::int64_t v) { return v != kIgnoreLabelId; }));
}

TrainingSample build_il_sample(const Trajectory& traj, const ActionChunk& chunk,
                               const IlSampleConfig& cfg,
                               const ActionTokenVocab& vocab) {
  validate_trajectory(traj);
  if (cfg.history_len < 1) throw InputError("history_len must be >= 1");
  if (chunk.horizon < 1 || static_cast<int>(chunk.events.size()) != chunk.horizon)
    throw InputError("chunk events length does not match its horizon");
  if (chunk.start_index < 0 ||
      chunk.start_index + chunk.horizon > static_cast<int>(traj.frames.size()))
    throw InputError("chunk lies outside the trajectory");

  TrainingSample sample;
  sample.kind = SampleKind::Il;

  for (std::int64_t id : cfg.instruction_ids) {
    sample.input_ids.push_back(id);
    sample.label_ids.push_back(kIgnoreLabelId);
  }

  // History window runs backward from the chunk-start observation.
  int first = std::max(0, chunk.start_index - (cfg.history_len - 1));
  std::vector<std::string> history_refs;
  for (int i = first; i <= chunk.start_index; ++i) {
    history_refs.push_back(traj.frames[static_cast<size_t>(i)].observation_ref);
    sample.input_ids.push_back(cfg.observation_placeholder_id);
    sample.label_ids.push_back(kIgnoreLabelId);
  }

  std::vector<std::string> surfaces;
  for (const ActionEvent& ev : chunk.events)
    for (const ActionToken& tok : encode_action(ev, cfg.quantizer))
      surfaces.push_back(token_surface(tok));
  std::vector<std::int64_t> action_ids = tokens_to_ids(vocab, surfaces);
  for (std::int64_t id : action_ids) {
    sample.input_ids.push_back(id);
    sample.label_ids.push_back(id);
  }

  sample.meta["observation_refs"] = history_refs;
  sample.meta["history_len"] = cfg.history_len;
  sample.meta["chunk_start"] = chunk.start_index;
  sample.meta["chunk_horizon"] = chunk.horizon;
  validate_sample(sample);
  return sample;
}

TrainingSample build_sft_sample(const std::vector<std::int64_t>& instruction_ids,
                                int vision_placeholder_count,
                                const std::vector<std::int64_t>& answer_token_ids,
                                const SftSampleConfig& cfg) {
  if (vision_placeholder_count < 0)
    throw InputError("vision_placeholder_count must be >= 0");
  if (answer_token_ids.empty()) throw InputError("answer must be non-empty");

  TrainingSample sample;
  sample.kind = SampleKind::Sft;
  for (int i = 0; i < vision_placeholder_count; ++i) {
    sample.input_ids.push_back(cfg.vision_placeholder_id);
    sample.label_ids.push_back(kIgnoreLabelId);
  }
  for (std::int64_t id : instruction_ids) {
    sample.input_ids.push_back(id);
    sample.label_ids.push_back(kIgnoreLabelId);
  }
  for (std::int64_t id : answer_token_ids) {
    sample.input_ids.push_back(id);
    sample.label_ids.push_back(id);
  }
  sample.meta["vision_placeholder_count"] = vision_placeholder_count;
  validate_sample(sample);
  return sample;
}

}  // namespace actkit
