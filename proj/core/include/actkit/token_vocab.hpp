#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace actkit {

/// Frequency table for a base tokenizer's vocabulary.
struct BaseVocabEntry {
  std::int64_t token_id = 0;
  std::string surface;
  std::uint64_t frequency = 0;
};

struct BaseVocabStats {
  std::vector<BaseVocabEntry> entries;
  std::int64_t vocab_size = 0;

  /// Throws InputError on duplicate ids, negative ids, or vocab_size smaller
  /// than max id + 1.
  void validate() const;
};

enum class VocabStrategy { Repurpose, Append };

std::string vocab_strategy_name(VocabStrategy s);
VocabStrategy vocab_strategy_from_name(std::string_view name);

struct VocabBinding {
  std::string surface;
  std::int64_t id = 0;
  std::string origin;  // "repurposed" or "appended"
  std::optional<std::string> replaced_surface;

  bool operator==(const VocabBinding&) const = default;
};

struct ActionTokenVocab {
  VocabStrategy strategy = VocabStrategy::Append;
  std::int64_t base_vocab_size = 0;
  std::vector<VocabBinding> bindings;

  bool operator==(const ActionTokenVocab&) const = default;

  std::optional<std::int64_t> id_for(std::string_view surface) const;
  std::optional<std::string> surface_for(std::int64_t id) const;
};

/// Binds the given surfaces to ids. Repurpose takes the least-frequent base
/// ids (equal frequencies broken toward the larger id) in that preference
/// order; Append hands out base_vocab_size, base_vocab_size+1, ... Throws
/// InputError on duplicate surfaces or too few base entries.
ActionTokenVocab build_vocab(const BaseVocabStats& stats, VocabStrategy strategy,
                             std::span<const std::string> token_surfaces);

/// Canonical JSON document; load(serialize(v)) == v and
/// serialize(load(serialize(v))) is byte-identical.
std::string serialize_vocab(const ActionTokenVocab& vocab);

/// Strict parse: unknown fields, duplicate ids (error names both surfaces),
/// and ids out of range for the declared strategy are all DataError.
ActionTokenVocab load_vocab(std::string_view text);

/// Lookup helpers; unbound surface or id throws InputError naming it.
std::vector<std::int64_t> tokens_to_ids(const ActionTokenVocab& vocab,
                                        std::span<const std::string> surfaces);
std::vector<std::string> ids_to_tokens(const ActionTokenVocab& vocab,
                                       std::span<const std::int64_t> ids);

}  // namespace actkit
