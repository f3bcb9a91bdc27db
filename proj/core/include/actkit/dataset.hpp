#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "actkit/sampling.hpp"

namespace actkit {

struct DatasetStats {
  std::int64_t sample_count = 0;
  std::int64_t token_count = 0;
  std::int64_t supervised_count = 0;
  std::int64_t sft_samples = 0;
  std::int64_t il_samples = 0;
  std::int64_t sft_tokens = 0;
  std::int64_t il_tokens = 0;
  std::int64_t sft_supervised = 0;
  std::int64_t il_supervised = 0;

  bool operator==(const DatasetStats&) const = default;
};

/// Serializes samples to the packed JSONL form. Output bytes depend only on
/// the samples: `jobs` splits serialization across threads but records are
/// always written in input order.
std::string pack_dataset_string(const std::vector<TrainingSample>& samples,
                                int jobs = 1);
void pack_dataset(const std::vector<TrainingSample>& samples,
                  const std::string& path, int jobs = 1);

/// Strict parse of a packed file. Every record must be newline-terminated
/// (truncation reports the record's byte offset). When `vocab_limit` is set,
/// any id outside [0, vocab_limit) is a DataError.
std::vector<TrainingSample> unpack_dataset(
    const std::string& path,
    std::optional<std::int64_t> vocab_limit = std::nullopt);
std::vector<TrainingSample> unpack_dataset_string(
    const std::string& content,
    std::optional<std::int64_t> vocab_limit = std::nullopt);

DatasetStats dataset_stats(const std::vector<TrainingSample>& samples);

}  // namespace actkit
