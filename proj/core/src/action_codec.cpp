#include "actkit/action_codec.hpp"

#include <charconv>
#include <optional>

#include "actkit/errors.hpp"

namespace actkit {
namespace {

std::string wrap(std::string_view body) {
  std::string out;
  out.reserve(body.size() + 4);
  out += "<|";
  out += body;
  out += "|>";
  return out;
}

std::optional<int> parse_bin_suffix(std::string_view body, std::string_view prefix) {
  if (body.size() <= prefix.size() || body.substr(0, prefix.size()) != prefix)
    return std::nullopt;
  std::string_view digits = body.substr(prefix.size());
  int value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) return std::nullopt;
  return value;
}

}  // namespace

std::string token_surface(const ActionToken& token) {
  switch (token.kind) {
    case ActionTokenKind::Begin:
      return "<|action_begin|>";
    case ActionTokenKind::End:
      return "<|action_end|>";
    case ActionTokenKind::Button:
      return wrap(button_name(token.button));
    case ActionTokenKind::CamW:
      return wrap("cam_w_" + std::to_string(token.bin));
    case ActionTokenKind::CamH:
      return wrap("cam_h_" + std::to_string(token.bin));
  }
  throw InputError("token_surface: bad token kind");
}

ActionToken token_from_surface(std::string_view surface, int bins_per_axis) {
  if (surface.size() < 5 || surface.substr(0, 2) != "<|" ||
      surface.substr(surface.size() - 2) != "|>")
    throw DataError("not an action token surface: " + std::string(surface));
  std::string_view body = surface.substr(2, surface.size() - 4);

  if (body == "action_begin") return ActionToken::begin();
  if (body == "action_end") return ActionToken::end();
  if (auto bin = parse_bin_suffix(body, "cam_w_")) {
    if (*bin < 0 || *bin >= bins_per_axis)
      throw DataError("camera bin out of range in " + std::string(surface));
    return ActionToken::cam_w(*bin);
  }
  if (auto bin = parse_bin_suffix(body, "cam_h_")) {
    if (*bin < 0 || *bin >= bins_per_axis)
      throw DataError("camera bin out of range in " + std::string(surface));
    return ActionToken::cam_h(*bin);
  }
  if (auto button = button_from_name(body)) return ActionToken::for_button(*button);
  throw DataError("unknown action token surface: " + std::string(surface));
}

std::vector<std::string> default_surface_list(int bins_per_axis) {
  CameraQuantizerConfig cfg;
  cfg.bins_per_axis = bins_per_axis;
  validate(cfg);
  std::vector<std::string> out;
  out.reserve(2 + kButtonCount + 2 * static_cast<size_t>(bins_per_axis));
  out.push_back("<|action_begin|>");
  out.push_back("<|action_end|>");
  for (ButtonId id : all_buttons()) out.push_back(wrap(button_name(id)));
  for (int b = 0; b < bins_per_axis; ++b)
    out.push_back(wrap("cam_w_" + std::to_string(b)));
  for (int b = 0; b < bins_per_axis; ++b)
    out.push_back(wrap("cam_h_" + std::to_string(b)));
  return out;
}

std::vector<ActionToken> encode_action(const ActionEvent& event,
                                       const CameraQuantizerConfig& cfg) {
  validate(cfg);
  validate_event(event);
  std::vector<ActionToken> out;
  out.push_back(ActionToken::begin());
  for (ButtonId id : all_buttons())
    if (event.buttons.count(id)) out.push_back(ActionToken::for_button(id));
  int w = mu_law_encode(event.camera.yaw, cfg);
  int h = mu_law_encode(event.camera.pitch, cfg);
  int center = center_bin(cfg);
  if (w != center || h != center) {
    out.push_back(ActionToken::cam_w(w));
    out.push_back(ActionToken::cam_h(h));
  }
  out.push_back(ActionToken::end());
  return out;
}

std::vector<ActionEvent> decode_actions(std::span<const ActionToken> tokens,
                                        const CameraQuantizerConfig& cfg) {
  validate(cfg);
  std::vector<ActionEvent> out;
  bool in_frame = false;
  ActionEvent current;
  std::optional<int> cam_w, cam_h;

  auto at = [](size_t i) { return " at token " + std::to_string(i); };

  for (size_t i = 0; i < tokens.size(); ++i) {
    const ActionToken& tok = tokens[i];
    switch (tok.kind) {
      case ActionTokenKind::Begin:
        if (in_frame) throw DataError("nested frame begin" + at(i));
        in_frame = true;
        current = {};
        cam_w.reset();
        cam_h.reset();
        break;
      case ActionTokenKind::End: {
        if (!in_frame) throw DataError("frame end without begin" + at(i));
        if (cam_w.has_value() != cam_h.has_value())
          throw DataError("unpaired camera axis in frame" + at(i));
        if (cam_w) {
          current.camera.yaw = mu_law_decode(*cam_w, cfg);
          current.camera.pitch = mu_law_decode(*cam_h, cfg);
        }
        validate_event(current);
        out.push_back(current);
        in_frame = false;
        break;
      }
      case ActionTokenKind::Button:
        if (!in_frame) throw DataError("button token outside frame" + at(i));
        if (is_hotbar(tok.button))
          for (ButtonId held : current.buttons)
            if (is_hotbar(held) && held != tok.button)
              throw DataError("conflicting hotbar tokens in frame" + at(i));
        current.buttons.insert(tok.button);
        break;
      case ActionTokenKind::CamW:
        if (!in_frame) throw DataError("camera token outside frame" + at(i));
        if (cam_w) throw DataError("duplicate cam_w token in frame" + at(i));
        if (tok.bin < 0 || tok.bin >= cfg.bins_per_axis)
          throw DataError("camera bin out of range" + at(i));
        cam_w = tok.bin;
        break;
      case ActionTokenKind::CamH:
        if (!in_frame) throw DataError("camera token outside frame" + at(i));
        if (cam_h) throw DataError("duplicate cam_h token in frame" + at(i));
        if (tok.bin < 0 || tok.bin >= cfg.bins_per_axis)
          throw DataError("camera bin out of range" + at(i));
        cam_h = tok.bin;
        break;
    }
  }
  if (in_frame)
    throw DataError("unterminated frame at end of stream (" +
                    std::to_string(tokens.size()) + " tokens)");
  return out;
}

std::string token_string(std::span<const ActionToken> tokens) {
  std::string out;
  for (const ActionToken& tok : tokens) out += token_surface(tok);
  return out;
}

std::vector<ActionToken> parse_action_text(std::string_view text,
                                           int bins_per_axis) {
  std::vector<ActionToken> out;
  size_t i = 0;
  while (i < text.size()) {
    char ch = text[i];
    if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
      ++i;
      continue;
    }
    if (text.compare(i, 2, "<|") != 0)
      throw DataError("expected token at byte offset " + std::to_string(i), -1,
                      static_cast<long long>(i));
    size_t close = text.find("|>", i + 2);
    if (close == std::string_view::npos)
      throw DataError("unterminated token at byte offset " + std::to_string(i),
                      -1, static_cast<long long>(i));
    std::string_view surface = text.substr(i, close + 2 - i);
    try {
      out.push_back(token_from_surface(surface, bins_per_axis));
    } catch (const DataError& e) {
      throw DataError(std::string(e.what()) + " at byte offset " +
                          std::to_string(i),
                      -1, static_cast<long long>(i));
    }
    i = close + 2;
  }
  return out;
}

}  // namespace actkit
