#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "actkit/action_event.hpp"
#include "actkit/mu_law.hpp"

namespace actkit {

enum class ActionTokenKind { Begin, End, Button, CamW, CamH };

/// One token of the framed action grammar. `button` is meaningful only for
/// kind Button, `bin` only for CamW/CamH.
struct ActionToken {
  ActionTokenKind kind = ActionTokenKind::Begin;
  ButtonId button = ButtonId::Forward;
  int bin = 0;

  static ActionToken begin() { return {ActionTokenKind::Begin, {}, 0}; }
  static ActionToken end() { return {ActionTokenKind::End, {}, 0}; }
  static ActionToken for_button(ButtonId id) {
    return {ActionTokenKind::Button, id, 0};
  }
  static ActionToken cam_w(int bin) { return {ActionTokenKind::CamW, {}, bin}; }
  static ActionToken cam_h(int bin) { return {ActionTokenKind::CamH, {}, bin}; }

  bool operator==(const ActionToken&) const = default;
};

/// Exact wire form, e.g. "<|action_begin|>", "<|use|>", "<|cam_w_13|>".
std::string token_surface(const ActionToken& token);

/// Inverse of token_surface. Throws DataError for unknown surfaces or bin
/// indices outside [0, bins_per_axis).
ActionToken token_from_surface(std::string_view surface, int bins_per_axis = 21);

/// Every grammar surface in canonical order: begin, end, the buttons in table
/// order, cam_w_0..N-1, cam_h_0..N-1.
std::vector<std::string> default_surface_list(int bins_per_axis = 21);

/// Frames one event: Begin, buttons in canonical order, the camera pair iff
/// either axis quantizes off-center, End.
std::vector<ActionToken> encode_action(const ActionEvent& event,
                                       const CameraQuantizerConfig& cfg = {});

/// Splits a token stream on Begin/End frames; one event per frame, camera
/// snapped to bin centers, (0, 0) when a frame carries no camera tokens.
/// Throws DataError naming the offending token position for unbalanced
/// frames, camera tokens outside a frame, an unpaired or duplicated camera
/// axis, or conflicting hotbar tokens.
std::vector<ActionEvent> decode_actions(std::span<const ActionToken> tokens,
                                        const CameraQuantizerConfig& cfg = {});

/// Surfaces concatenated with no separator.
std::string token_string(std::span<const ActionToken> tokens);

/// Lexes a stream of `<|...|>` surfaces; whitespace between tokens is
/// ignored. Throws DataError with the byte offset of the first bad input.
std::vector<ActionToken> parse_action_text(std::string_view text,
                                           int bins_per_axis = 21);

}  // namespace actkit
