#include "actkit/token_vocab.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "actkit/errors.hpp"

namespace actkit {

using nlohmann::json;

void BaseVocabStats::validate() const {
  std::unordered_set<std::int64_t> seen;
  std::int64_t max_id = -1;
  for (const BaseVocabEntry& e : entries) {
    if (e.token_id < 0)
      throw InputError("base vocab id must be non-negative, got " +
                       std::to_string(e.token_id));
    if (!seen.insert(e.token_id).second)
      throw InputError("duplicate base vocab id " + std::to_string(e.token_id));
    max_id = std::max(max_id, e.token_id);
  }
  if (vocab_size < max_id + 1)
    throw InputError("vocab_size " + std::to_string(vocab_size) +
                     " smaller than max id + 1 (" + std::to_string(max_id + 1) +
                     ")");
}

std::string vocab_strategy_name(VocabStrategy s) {
  return s == VocabStrategy::Repurpose ? "repurpose" : "append";
}

VocabStrategy vocab_strategy_from_name(std::string_view name) {
  if (name == "repurpose") return VocabStrategy::Repurpose;
  if (name == "append") return VocabStrategy::Append;
  throw DataError("unknown vocab strategy: " + std::string(name));
}

std::optional<std::int64_t> ActionTokenVocab::id_for(std::string_view surface) const {
  for (const VocabBinding& b : bindings)
    if (b.surface == surface) return b.id;
  return std::nullopt;
}

std::optional<std::string> ActionTokenVocab::surface_for(std::int64_t id) const {
  for (const VocabBinding& b : bindings)
    if (b.id == id) return b.surface;
  return std::nullopt;
}

ActionTokenVocab build_vocab(const BaseVocabStats& stats, VocabStrategy strategy,
                             std::span<const std::string> token_surfaces) {
  stats.validate();
  {
    std::unordered_set<std::string_view> seen;
    for (const std::string& s : token_surfaces)
      if (!seen.insert(s).second)
        throw InputError("duplicate action surface: " + s);
  }

  ActionTokenVocab vocab;
  vocab.strategy = strategy;
  vocab.base_vocab_size = stats.vocab_size;
  vocab.bindings.reserve(token_surfaces.size());

  if (strategy == VocabStrategy::Append) {
    std::int64_t next = stats.vocab_size;
    for (const std::string& s : token_surfaces)
      vocab.bindings.push_back({s, next++, "appended", std::nullopt});
    return vocab;
  }

  if (stats.entries.size() < token_surfaces.size())
    throw InputError("need " + std::to_string(token_surfaces.size()) +
                     " base entries to repurpose, have " +
                     std::to_string(stats.entries.size()));

  // Least frequent first; equal frequencies prefer the larger id.
  std::vector<const BaseVocabEntry*> order;
  order.reserve(stats.entries.size());
  for (const BaseVocabEntry& e : stats.entries) order.push_back(&e);
  std::sort(order.begin(), order.end(),
            [](const BaseVocabEntry* a, const BaseVocabEntry* b) {
              if (a->frequency != b->frequency) return a->frequency < b->frequency;
              return a->token_id > b->token_id;
            });

  for (size_t i = 0; i < token_surfaces.size(); ++i)
    vocab.bindings.push_back({token_surfaces[i], order[i]->token_id, "repurposed",
                              order[i]->surface});
  return vocab;
}

std::string serialize_vocab(const ActionTokenVocab& vocab) {
  json doc;
  doc["strategy"] = vocab_strategy_name(vocab.strategy);
  doc["base_vocab_size"] = vocab.base_vocab_size;
  json arr = json::array();
  for (const VocabBinding& b : vocab.bindings) {
    json jb;
    jb["surface"] = b.surface;
    jb["id"] = b.id;
    jb["origin"] = b.origin;
    if (b.replaced_surface) jb["replaced_surface"] = *b.replaced_surface;
    arr.push_back(std::move(jb));
  }
  doc["bindings"] = std::move(arr);
  return doc.dump(2) + "\n";
}

namespace {

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> known,
                         const char* where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) ok = true;
    if (!ok)
      throw DataError(std::string("unknown field \"") + it.key() + "\" in " +
                      where);
  }
}

}  // namespace

ActionTokenVocab load_vocab(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("vocab document is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw DataError("vocab document must be a JSON object");
  reject_unknown_keys(doc, {"strategy", "base_vocab_size", "bindings"},
                      "vocab document");
  if (!doc.contains("strategy") || !doc.contains("base_vocab_size") ||
      !doc.contains("bindings"))
    throw DataError("vocab document missing required field");
  if (!doc["strategy"].is_string())
    throw DataError("vocab strategy must be a string");
  if (!doc["base_vocab_size"].is_number_integer())
    throw DataError("base_vocab_size must be an integer");
  if (!doc["bindings"].is_array())
    throw DataError("bindings must be an array");

  ActionTokenVocab vocab;
  vocab.strategy = vocab_strategy_from_name(doc["strategy"].get<std::string>());
  vocab.base_vocab_size = doc["base_vocab_size"].get<std::int64_t>();

  std::unordered_map<std::int64_t, std::string> id_to_surface;
  std::unordered_set<std::string> surfaces;
  for (const json& jb : doc["bindings"]) {
    if (!jb.is_object()) throw DataError("binding must be an object");
    reject_unknown_keys(jb, {"surface", "id", "origin", "replaced_surface"},
                        "binding");
    if (!jb.contains("surface") || !jb.contains("id") || !jb.contains("origin"))
      throw DataError("binding missing required field");
    VocabBinding b;
    b.surface = jb["surface"].get<std::string>();
    b.id = jb["id"].get<std::int64_t>();
    b.origin = jb["origin"].get<std::string>();
    if (b.origin != "repurposed" && b.origin != "appended")
      throw DataError("binding origin must be repurposed or appended, got \"" +
                      b.origin + "\"");
    if (jb.contains("replaced_surface"))
      b.replaced_surface = jb["replaced_surface"].get<std::string>();

    if (auto it = id_to_surface.find(b.id); it != id_to_surface.end())
      throw DataError("duplicate id " + std::to_string(b.id) + " bound to \"" +
                      it->second + "\" and \"" + b.surface + "\"");
    if (!surfaces.insert(b.surface).second)
      throw DataError("duplicate surface \"" + b.surface + "\"");
    if (vocab.strategy == VocabStrategy::Repurpose &&
        b.id >= vocab.base_vocab_size)
      throw DataError("repurposed id " + std::to_string(b.id) +
                      " not below base_vocab_size");
    if (vocab.strategy == VocabStrategy::Append && b.id < vocab.base_vocab_size)
      throw DataError("appended id " + std::to_string(b.id) +
                      " below base_vocab_size");
    id_to_surface.emplace(b.id, b.surface);
    vocab.bindings.push_back(std::move(b));
  }

  if (vocab.strategy == VocabStrategy::Append && !vocab.bindings.empty()) {
    std::vector<std::int64_t> ids;
    ids.reserve(vocab.bindings.size());
    for (const VocabBinding& b : vocab.bindings) ids.push_back(b.id);
    std::sort(ids.begin(), ids.end());
    for (size_t i = 1; i < ids.size(); ++i)
      if (ids[i] != ids[i - 1] + 1)
        throw DataError("appended ids are not contiguous near " +
                        std::to_string(ids[i - 1]));
  }
  return vocab;
}

std::vector<std::int64_t> tokens_to_ids(const ActionTokenVocab& vocab,
                                        std::span<const std::string> surfaces) {
  std::unordered_map<std::string_view, std::int64_t> lut;
  for (const VocabBinding& b : vocab.bindings) lut.emplace(b.surface, b.id);
  std::vector<std::int64_t> out;
  out.reserve(surfaces.size());
  for (const std::string& s : surfaces) {
    auto it = lut.find(s);
    if (it == lut.end()) throw InputError("surface not bound in vocab: " + s);
    out.push_back(it->second);
  }
  return out;
}

std::vector<std::string> ids_to_tokens(const ActionTokenVocab& vocab,
                                       std::span<const std::int64_t> ids) {
  std::unordered_map<std::int64_t, std::string_view> lut;
  for (const VocabBinding& b : vocab.bindings) lut.emplace(b.id, b.surface);
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (std::int64_t id : ids) {
    auto it = lut.find(id);
    if (it == lut.end())
      throw InputError("id not bound in vocab: " + std::to_string(id));
    out.emplace_back(it->second);
  }
  return out;
}

}  // namespace actkit
