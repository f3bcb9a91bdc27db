#include "actkit/action_event.hpp"

#include <cmath>
#include <unordered_map>

#include "actkit/errors.hpp"

namespace actkit {

namespace {

constexpr std::array<std::string_view, kButtonCount> kButtonNames = {
    "forward", "back",     "left",     "right",    "jump",     "sneak",
    "sprint",  "attack",   "use",      "hotbar_1", "hotbar_2", "hotbar_3",
    "hotbar_4", "hotbar_5", "hotbar_6", "hotbar_7", "hotbar_8", "hotbar_9",
    "inventory",
};

}  // namespace

const std::array<ButtonId, kButtonCount>& all_buttons() {
  static const std::array<ButtonId, kButtonCount> buttons = [] {
    std::array<ButtonId, kButtonCount> out{};
    for (int i = 0; i < kButtonCount; ++i) out[i] = static_cast<ButtonId>(i);
    return out;
  }();
  return buttons;
}

std::string_view button_name(ButtonId id) {
  const int index = static_cast<int>(id);
  if (index < 0 || index >= kButtonCount) {
    throw InputError("button id out of range: " + std::to_string(index));
  }
  return kButtonNames[static_cast<size_t>(index)];
}

std::optional<ButtonId> button_from_name(std::string_view name) {
  static const std::unordered_map<std::string_view, ButtonId> lookup = [] {
    std::unordered_map<std::string_view, ButtonId> map;
    for (ButtonId id : all_buttons()) map.emplace(button_name(id), id);
    return map;
  }();
  auto it = lookup.find(name);
  if (it == lookup.end()) return std::nullopt;
  return it->second;
}

bool is_hotbar(ButtonId id) {
  return id >= ButtonId::Hotbar1 && id <= ButtonId::Hotbar9;
}

void validate_event(const ActionEvent& event) {
  if (!std::isfinite(event.camera.yaw) || !std::isfinite(event.camera.pitch)) {
    throw InputError("camera deltas must be finite");
  }
  int hotbars = 0;
  for (ButtonId id : event.buttons) {
    if (is_hotbar(id)) ++hotbars;
  }
  if (hotbars > 1) {
    throw InputError("at most one hotbar selection per event, got " +
                     std::to_string(hotbars));
  }
}

}  // namespace actkit
