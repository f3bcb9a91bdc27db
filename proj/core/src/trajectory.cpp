#include "actkit/trajectory.hpp"

#include <nlohmann/json.hpp>

#include "actkit/detail/frame_json.hpp"
#include "actkit/detail/jsonl.hpp"
#include "actkit/errors.hpp"

namespace actkit {

using nlohmann::json;

void validate_trajectory(const Trajectory& traj) {
  if (traj.instruction.empty()) throw InputError("trajectory instruction is empty");
  if (traj.frames.empty()) throw InputError("trajectory has no frames");
  for (size_t i = 0; i < traj.frames.size(); ++i) {
    validate_event(traj.frames[i].action);
    if (i > 0 && traj.frames[i].tick_index <= traj.frames[i - 1].tick_index)
      throw InputError("tick indices not strictly increasing at frame " +
                       std::to_string(i));
  }
}

Trajectory parse_trajectory_record(const std::string& text, int line_number) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("trajectory record is not valid JSON: ") +
                        e.what(),
                    line_number);
  }
  if (!doc.is_object())
    throw DataError("trajectory record must be a JSON object", line_number);
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (it.key() != "instruction" && it.key() != "source_tag" &&
        it.key() != "frames")
      throw DataError("unknown field \"" + it.key() + "\" in trajectory record",
                      line_number);
  if (!doc.contains("instruction") || !doc["instruction"].is_string())
    throw DataError("trajectory record missing instruction", line_number);
  if (!doc.contains("source_tag") || !doc["source_tag"].is_string())
    throw DataError("trajectory record missing source_tag", line_number);
  if (!doc.contains("frames") || !doc["frames"].is_array())
    throw DataError("trajectory record missing frames array", line_number);

  Trajectory traj;
  traj.instruction = doc["instruction"].get<std::string>();
  traj.source_tag = doc["source_tag"].get<std::string>();
  for (const json& jf : doc["frames"])
    traj.frames.push_back(detail::frame_from_json(jf, line_number));

  try {
    validate_trajectory(traj);
  } catch (const InputError& e) {
    throw DataError(e.what(), line_number);
  }
  return traj;
}

std::string serialize_trajectory(const Trajectory& traj) {
  validate_trajectory(traj);
  json doc;
  doc["instruction"] = traj.instruction;
  doc["source_tag"] = traj.source_tag;
  json frames = json::array();
  for (const TrajectoryFrame& f : traj.frames)
    frames.push_back(detail::frame_to_json(f));
  doc["frames"] = std::move(frames);
  return doc.dump();
}

std::vector<Trajectory> load_trajectories(const std::string& path) {
  std::string content = detail::read_file(path);
  auto records = detail::split_jsonl(content, /*require_terminator=*/false);
  std::vector<Trajectory> out;
  out.reserve(records.size());
  for (const detail::JsonlRecord& rec : records)
    out.push_back(parse_trajectory_record(rec.text, rec.line_number));
  return out;
}

void save_trajectories(const std::vector<Trajectory>& trajectories,
                       const std::string& path) {
  std::string content;
  for (const Trajectory& traj : trajectories) {
    content += serialize_trajectory(traj);
    content += '\n';
  }
  detail::write_file(path, content);
}

}  // namespace actkit
