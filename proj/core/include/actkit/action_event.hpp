#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace actkit {

/// Button-like controls, in canonical emission order. Yaw/pitch camera motion
/// is carried separately as a continuous pair.
enum class ButtonId : int {
  Forward = 0,
  Back,
  Left,
  Right,
  Jump,
  Sneak,
  Sprint,
  Attack,
  Use,
  Hotbar1,
  Hotbar2,
  Hotbar3,
  Hotbar4,
  Hotbar5,
  Hotbar6,
  Hotbar7,
  Hotbar8,
  Hotbar9,
  Inventory,
};

inline constexpr int kButtonCount = 19;

/// All buttons in canonical order (matches the enum's numeric order).
const std::array<ButtonId, kButtonCount>& all_buttons();

/// Lowercase wire name, e.g. "forward", "hotbar_3", "inventory".
std::string_view button_name(ButtonId id);

/// Inverse of button_name. Empty optional for unknown names.
std::optional<ButtonId> button_from_name(std::string_view name);

bool is_hotbar(ButtonId id);

struct CameraDelta {
  double yaw = 0.0;    // mouse X, degrees
  double pitch = 0.0;  // mouse Y, degrees

  bool operator==(const CameraDelta&) const = default;
};

/// One environment step's control state: held buttons plus camera motion.
struct ActionEvent {
  std::set<ButtonId> buttons;
  CameraDelta camera;

  bool operator==(const ActionEvent&) const = default;
};

/// Throws InputError on non-finite camera deltas or more than one hotbar
/// selection.
void validate_event(const ActionEvent& event);

}  // namespace actkit
