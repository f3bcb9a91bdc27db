#pragma once

#include <nlohmann/json.hpp>

#include "actkit/action_event.hpp"
#include "actkit/errors.hpp"
#include "actkit/trajectory.hpp"

namespace actkit::detail {

inline nlohmann::json event_to_json(const ActionEvent& ev) {
  nlohmann::json out;
  nlohmann::json buttons = nlohmann::json::array();
  for (ButtonId id : all_buttons())
    if (ev.buttons.count(id)) buttons.push_back(button_name(id));
  out["buttons"] = std::move(buttons);
  out["camera"] = nlohmann::json::array({ev.camera.yaw, ev.camera.pitch});
  return out;
}

inline ActionEvent event_from_json(const nlohmann::json& obj, int line_number) {
  ActionEvent ev;
  if (!obj.contains("buttons") || !obj["buttons"].is_array())
    throw DataError("frame missing buttons array", line_number);
  for (const nlohmann::json& jb : obj["buttons"]) {
    if (!jb.is_string())
      throw DataError("button name must be a string", line_number);
    std::string name = jb.get<std::string>();
    auto id = button_from_name(name);
    if (!id) throw DataError("unknown button name \"" + name + "\"", line_number);
    ev.buttons.insert(*id);
  }
  if (!obj.contains("camera") || !obj["camera"].is_array() ||
      obj["camera"].size() != 2 || !obj["camera"][0].is_number() ||
      !obj["camera"][1].is_number())
    throw DataError("frame camera must be [yaw, pitch]", line_number);
  ev.camera.yaw = obj["camera"][0].get<double>();
  ev.camera.pitch = obj["camera"][1].get<double>();
  return ev;
}

inline nlohmann::json frame_to_json(const TrajectoryFrame& frame) {
  nlohmann::json out = event_to_json(frame.action);
  out["obs"] = frame.observation_ref;
  out["tick"] = frame.tick_index;
  return out;
}

inline TrajectoryFrame frame_from_json(const nlohmann::json& obj,
                                       int line_number) {
  if (!obj.is_object()) throw DataError("frame must be an object", line_number);
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (it.key() != "obs" && it.key() != "buttons" && it.key() != "camera" &&
        it.key() != "tick")
      throw DataError("unknown field \"" + it.key() + "\" in frame",
                      line_number);
  if (!obj.contains("obs") || !obj["obs"].is_string())
    throw DataError("frame missing obs", line_number);
  if (!obj.contains("tick") || !obj["tick"].is_number_integer())
    throw DataError("frame missing integer tick", line_number);
  TrajectoryFrame frame;
  frame.observation_ref = obj["obs"].get<std::string>();
  frame.tick_index = obj["tick"].get<std::int64_t>();
  frame.action = event_from_json(obj, line_number);
  return frame;
}

}  // namespace actkit::detail
