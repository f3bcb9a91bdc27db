#include "actkit/dataset.hpp"

#include <algorithm>
#include <thread>

#include <nlohmann/json.hpp>

#include "actkit/detail/jsonl.hpp"
#include "actkit/errors.hpp"

namespace actkit {

using nlohmann::json;

namespace {

std::string serialize_sample(const TrainingSample& sample) {
  json doc;
  doc["kind"] = sample.kind == SampleKind::Sft ? "sft" : "il";
  doc["input_ids"] = sample.input_ids;
  doc["label_ids"] = sample.label_ids;
  doc["meta"] = sample.meta;
  return doc.dump();
}

TrainingSample parse_sample(const std::string& text, int line_number,
                            long long byte_offset,
                            std::optional<std::int64_t> vocab_limit) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("packed record is not valid JSON: ") + e.what(),
                    line_number, byte_offset);
  }
  if (!doc.is_object())
    throw DataError("packed record must be a JSON object", line_number,
                    byte_offset);
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (it.key() != "kind" && it.key() != "input_ids" &&
        it.key() != "label_ids" && it.key() != "meta")
      throw DataError("unknown field \"" + it.key() + "\" in packed record",
                      line_number, byte_offset);
  if (!doc.contains("kind") || !doc["kind"].is_string())
    throw DataError("packed record missing kind", line_number, byte_offset);
  if (!doc.contains("input_ids") || !doc["input_ids"].is_array() ||
      !doc.contains("label_ids") || !doc["label_ids"].is_array())
    throw DataError("packed record missing id arrays", line_number, byte_offset);
  if (!doc.contains("meta") || !doc["meta"].is_object())
    throw DataError("packed record missing meta object", line_number,
                    byte_offset);

  TrainingSample sample;
  std::string kind = doc["kind"].get<std::string>();
  if (kind == "sft")
    sample.kind = SampleKind::Sft;
  else if (kind == "il")
    sample.kind = SampleKind::Il;
  else
    throw DataError("packed record kind must be \"sft\" or \"il\", got \"" +
                        kind + "\"",
                    line_number, byte_offset);

  for (const json& v : doc["input_ids"]) {
    if (!v.is_number_integer())
      throw DataError("input_ids must be integers", line_number, byte_offset);
    sample.input_ids.push_back(v.get<std::int64_t>());
  }
  for (const json& v : doc["label_ids"]) {
    if (!v.is_number_integer())
      throw DataError("label_ids must be integers", line_number, byte_offset);
    sample.label_ids.push_back(v.get<std::int64_t>());
  }
  sample.meta = doc["meta"];

  try {
    validate_sample(sample);
  } catch (const InputError& e) {
    throw DataError(e.what(), line_number, byte_offset);
  }
  if (vocab_limit) {
    for (std::int64_t id : sample.input_ids)
      if (id < 0 || id >= *vocab_limit)
        throw DataError("input id " + std::to_string(id) +
                            " outside declared vocab range [0, " +
                            std::to_string(*vocab_limit) + ")",
                        line_number, byte_offset);
  }
  return sample;
}

}  // namespace

std::string pack_dataset_string(const std::vector<TrainingSample>& samples,
                                int jobs) {
  if (jobs < 1) throw InputError("jobs must be >= 1");
  for (const TrainingSample& s : samples) validate_sample(s);

  std::vector<std::string> lines(samples.size());
  if (jobs == 1 || samples.size() < 2) {
    for (size_t i = 0; i < samples.size(); ++i)
      lines[i] = serialize_sample(samples[i]);
  } else {
    // Each worker serializes a contiguous slice; the join below writes the
    // slices back in input order, so byte output is independent of jobs.
    size_t workers = std::min<size_t>(static_cast<size_t>(jobs), samples.size());
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        for (size_t i = w; i < samples.size(); i += workers)
          lines[i] = serialize_sample(samples[i]);
      });
    }
    for (std::thread& t : threads) t.join();
  }

  std::string out;
  size_t total = 0;
  for (const std::string& line : lines) total += line.size() + 1;
  out.reserve(total);
  for (const std::string& line : lines) {
    out += line;
    out += '\n';
  }
  return out;
}

void pack_dataset(const std::vector<TrainingSample>& samples,
                  const std::string& path, int jobs) {
  detail::write_file(path, pack_dataset_string(samples, jobs));
}

std::vector<TrainingSample> unpack_dataset_string(
    const std::string& content, std::optional<std::int64_t> vocab_limit) {
  auto records = detail::split_jsonl(content, /*require_terminator=*/true);
  std::vector<TrainingSample> out;
  out.reserve(records.size());
  for (const detail::JsonlRecord& rec : records)
    out.push_back(parse_sample(rec.text, rec.line_number, rec.byte_offset,
                               vocab_limit));
  return out;
}

std::vector<TrainingSample> unpack_dataset(
    const std::string& path, std::optional<std::int64_t> vocab_limit) {
  return unpack_dataset_string(detail::read_file(path), vocab_limit);
}

DatasetStats dataset_stats(const std::vector<TrainingSample>& samples) {
  DatasetStats stats;
  for (const TrainingSample& s : samples) {
    auto tokens = static_cast<std::int64_t>(s.input_ids.size());
    std::int64_t supervised = supervised_count(s);
    ++stats.sample_count;
    stats.token_count += tokens;
    stats.supervised_count += supervised;
    if (s.kind == SampleKind::Sft) {
      ++stats.sft_samples;
      stats.sft_tokens += tokens;
      stats.sft_supervised += supervised;
    } else {
      ++stats.il_samples;
      stats.il_tokens += tokens;
      stats.il_supervised += supervised;
    }
  }
  return stats;
}

}  // namespace actkit
