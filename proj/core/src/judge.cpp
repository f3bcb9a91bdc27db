#include "actkit/judge.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <regex>
#include <thread>
#include <unordered_set>

#include <httplib.h>

#include "actkit/detail/jsonl.hpp"
#include "actkit/errors.hpp"

namespace actkit {

using nlohmann::json;

namespace {

constexpr const char* kSystemPreamble =
    "You are a strict grader. Judge whether the candidate answer answers the "
    "question correctly, using the reference answer as ground truth. Reply "
    "with exactly one word: Correct or Incorrect.";

constexpr const char* kReferenceMarker = "\n\nReference answer:\n";
constexpr const char* kCandidateMarker = "\n\nCandidate answer:\n";
constexpr const char* kTrailerMarker = "\n\nReply with exactly one word";

}  // namespace

std::vector<BenchmarkCase> parse_benchmark(const std::string& content) {
  auto records = detail::split_jsonl(content, /*require_terminator=*/false);
  std::vector<BenchmarkCase> out;
  std::unordered_set<std::string> ids;
  for (const detail::JsonlRecord& rec : records) {
    json doc;
    try {
      doc = json::parse(rec.text);
    } catch (const json::parse_error& e) {
      throw DataError(std::string("benchmark record is not valid JSON: ") +
                          e.what(),
                      rec.line_number, rec.byte_offset);
    }
    if (!doc.is_object())
      throw DataError("benchmark record must be a JSON object", rec.line_number);
    for (auto it = doc.begin(); it != doc.end(); ++it)
      if (it.key() != "id" && it.key() != "category" && it.key() != "question" &&
          it.key() != "reference_answer" && it.key() != "model_answer" &&
          it.key() != "image_ref")
        throw DataError("unknown field \"" + it.key() + "\" in benchmark record",
                        rec.line_number);
    for (const char* field :
         {"id", "category", "question", "reference_answer", "model_answer"})
      if (!doc.contains(field) || !doc[field].is_string())
        throw DataError(std::string("benchmark record missing string field \"") +
                            field + "\"",
                        rec.line_number);
    BenchmarkCase c;
    c.id = doc["id"].get<std::string>();
    c.category = doc["category"].get<std::string>();
    c.question = doc["question"].get<std::string>();
    c.reference_answer = doc["reference_answer"].get<std::string>();
    c.model_answer = doc["model_answer"].get<std::string>();
    if (doc.contains("image_ref")) {
      if (!doc["image_ref"].is_string())
        throw DataError("image_ref must be a string", rec.line_number);
      c.image_ref = doc["image_ref"].get<std::string>();
    }
    if (c.id.empty())
      throw DataError("benchmark record has empty id", rec.line_number);
    if (!ids.insert(c.id).second)
      throw DataError("duplicate benchmark id \"" + c.id + "\"",
                      rec.line_number);
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<BenchmarkCase> load_benchmark(const std::string& path) {
  return parse_benchmark(detail::read_file(path));
}

json build_judge_request(const std::string& question,
                         const std::string& reference_answer,
                         const std::string& model_answer,
                         const std::string& model_name) {
  if (question.empty() || reference_answer.empty() || model_answer.empty())
    throw InputError("judge request fields must be non-empty");
  std::string user = "Question:\n" + question + kReferenceMarker +
                     reference_answer + kCandidateMarker + model_answer +
                     kTrailerMarker + ": Correct or Incorrect.";
  json payload;
  payload["model"] = model_name;
  payload["messages"] = json::array(
      {json{{"role", "system"}, {"content", kSystemPreamble}},
       json{{"role", "user"}, {"content", user}}});
  payload["temperature"] = 0;
  return payload;
}

JudgeVerdict parse_judge_verdict(const std::string& case_id,
                                 const std::string& reply_text) {
  static const std::regex kGradeToken("\\b(incorrect|correct)\\b",
                                      std::regex::icase);
  JudgeVerdict verdict;
  verdict.case_id = case_id;
  verdict.raw_reply = reply_text;
  std::smatch m;
  if (std::regex_search(reply_text, m, kGradeToken)) {
    std::string token = m[1].str();
    std::transform(token.begin(), token.end(), token.begin(),
                   [](unsigned char ch) { return std::tolower(ch); });
    verdict.verdict = token == "correct" ? Verdict::Correct : Verdict::Incorrect;
    verdict.parsed = true;
  } else {
    verdict.verdict = Verdict::Incorrect;
    verdict.parsed = false;
  }
  return verdict;
}

std::string StubJudgeTransport::send(const json& payload) {
  int call = calls_.fetch_add(1);
  switch (mode_) {
    case Mode::AlwaysCorrect:
      return "Correct.";
    case Mode::AlwaysIncorrect:
      return "Incorrect.";
    case Mode::Alternate:
      return call % 2 == 0 ? "Correct." : "Incorrect.";
    case Mode::ExactMatch:
      break;
  }
  const auto& messages = payload.at("messages");
  std::string user = messages.at(1).at("content").get<std::string>();
  size_t ref_pos = user.find(kReferenceMarker);
  size_t cand_pos = user.find(kCandidateMarker);
  size_t tail_pos = user.rfind(kTrailerMarker);
  if (ref_pos == std::string::npos || cand_pos == std::string::npos ||
      tail_pos == std::string::npos || cand_pos < ref_pos || tail_pos < cand_pos)
    throw EndpointError("stub could not locate answers in payload");
  size_t ref_start = ref_pos + std::string(kReferenceMarker).size();
  std::string reference = user.substr(ref_start, cand_pos - ref_start);
  size_t cand_start = cand_pos + std::string(kCandidateMarker).size();
  std::string candidate = user.substr(cand_start, tail_pos - cand_start);
  return candidate == reference ? "Correct." : "Incorrect.";
}

std::string FlakyJudgeTransport::send(const json& payload) {
  if (remaining_failures_.fetch_sub(1) > 0)
    throw EndpointError("simulated transport failure");
  return inner_->send(payload);
}

HttpJudgeTransport::HttpJudgeTransport(std::string base_url, std::string api_key,
                                       double timeout_seconds)
    : base_url_(std::move(base_url)),
      api_key_(std::move(api_key)),
      timeout_seconds_(timeout_seconds) {
  if (base_url_.empty()) throw InputError("judge base URL is empty");
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

std::string HttpJudgeTransport::send(const json& payload) {
  size_t scheme_end = base_url_.find("://");
  if (scheme_end == std::string::npos)
    throw EndpointError("judge base URL missing scheme: " + base_url_);
  size_t path_start = base_url_.find('/', scheme_end + 3);
  std::string origin =
      path_start == std::string::npos ? base_url_ : base_url_.substr(0, path_start);
  std::string prefix =
      path_start == std::string::npos ? "" : base_url_.substr(path_start);

  httplib::Client client(origin);
  if (!client.is_valid())
    throw EndpointError("cannot create client for " + origin);
  auto timeout = std::chrono::milliseconds(
      static_cast<long long>(timeout_seconds_ * 1000));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  httplib::Headers headers;
  if (!api_key_.empty())
    headers.emplace("Authorization", "Bearer " + api_key_);

  auto res = client.Post(prefix + "/chat/completions", headers, payload.dump(),
                         "application/json");
  if (!res)
    throw EndpointError("judge endpoint unreachable: " +
                        httplib::to_string(res.error()));
  if (res->status != 200)
    throw EndpointError("judge endpoint returned HTTP " +
                        std::to_string(res->status));
  json body;
  try {
    body = json::parse(res->body);
  } catch (const json::parse_error& e) {
    throw EndpointError(std::string("judge reply is not valid JSON: ") +
                        e.what());
  }
  try {
    return body.at("choices").at(0).at("message").at("content")
        .get<std::string>();
  } catch (const json::exception&) {
    throw EndpointError("judge reply missing choices[0].message.content");
  }
}

std::string serialize_judge_verdict(const JudgeVerdict& verdict) {
  json doc;
  doc["case_id"] = verdict.case_id;
  doc["verdict"] = verdict.verdict == Verdict::Correct ? "correct" : "incorrect";
  doc["raw_reply"] = verdict.raw_reply;
  doc["parsed"] = verdict.parsed;
  return doc.dump();
}

std::vector<JudgeVerdict> read_judge_journal(const std::string& path) {
  std::string content;
  try {
    content = detail::read_file(path);
  } catch (const DataError&) {
    return {};
  }
  bool terminated = content.empty() || content.back() == '\n';
  auto records = detail::split_jsonl(content, /*require_terminator=*/false);
  std::vector<JudgeVerdict> out;
  for (size_t i = 0; i < records.size(); ++i) {
    json doc;
    try {
      doc = json::parse(records[i].text);
      JudgeVerdict v;
      v.case_id = doc.at("case_id").get<std::string>();
      std::string word = doc.at("verdict").get<std::string>();
      if (word != "correct" && word != "incorrect")
        throw DataError("bad verdict word");
      v.verdict = word == "correct" ? Verdict::Correct : Verdict::Incorrect;
      v.raw_reply = doc.at("raw_reply").get<std::string>();
      v.parsed = doc.at("parsed").get<bool>();
      out.push_back(std::move(v));
    } catch (const std::exception& e) {
      // A torn final record from an interrupted run is dropped; anything
      // else is corruption.
      if (i + 1 == records.size() && !terminated) break;
      throw DataError("corrupt journal record: " + std::string(e.what()),
                      records[i].line_number, records[i].byte_offset);
    }
  }
  return out;
}

JudgeReport run_judge_eval(const std::vector<BenchmarkCase>& cases,
                           JudgeTransport& transport,
                           const JudgeRunConfig& config) {
  if (config.concurrency < 1) throw InputError("concurrency must be >= 1");
  if (config.max_attempts < 1) throw InputError("max_attempts must be >= 1");

  std::map<std::string, JudgeVerdict> verdicts;
  if (!config.journal_path.empty())
    for (JudgeVerdict& v : read_judge_journal(config.journal_path))
      verdicts.insert_or_assign(v.case_id, std::move(v));

  std::vector<const BenchmarkCase*> pending;
  for (const BenchmarkCase& c : cases)
    if (!verdicts.count(c.id)) pending.push_back(&c);

  std::mutex mu;
  std::ofstream journal;
  if (!config.journal_path.empty()) {
    journal.open(config.journal_path, std::ios::app | std::ios::binary);
    if (!journal)
      throw DataError("cannot open journal: " + config.journal_path);
  }
  std::vector<std::string> failed;

  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= pending.size()) return;
      const BenchmarkCase& c = *pending[i];
      json payload = build_judge_request(c.question, c.reference_answer,
                                         c.model_answer, config.model_name);
      double backoff = config.initial_backoff_seconds;
      for (int attempt = 1;; ++attempt) {
        try {
          std::string reply = transport.send(payload);
          JudgeVerdict v = parse_judge_verdict(c.id, reply);
          std::lock_guard<std::mutex> lock(mu);
          if (journal.is_open()) {
            journal << serialize_judge_verdict(v) << '\n';
            journal.flush();
          }
          verdicts.insert_or_assign(c.id, std::move(v));
          break;
        } catch (const EndpointError&) {
          if (attempt >= config.max_attempts) {
            std::lock_guard<std::mutex> lock(mu);
            failed.push_back(c.id);
            break;
          }
          std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
          backoff *= config.backoff_multiplier;
        }
      }
    }
  };

  size_t workers = std::min<size_t>(static_cast<size_t>(config.concurrency),
                                    std::max<size_t>(pending.size(), 1));
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();

  JudgeReport report;
  std::map<std::string, std::pair<int, int>> by_category;
  for (const BenchmarkCase& c : cases) {
    auto it = verdicts.find(c.id);
    if (it == verdicts.end()) continue;  // failed case, reported separately
    auto& [total, correct] = by_category[c.category];
    ++total;
    ++report.total;
    if (it->second.verdict == Verdict::Correct) {
      ++correct;
      ++report.correct;
    }
  }
  for (const auto& [category, counts] : by_category)
    report.categories.push_back(
        {category, counts.first, counts.second,
         static_cast<double>(counts.second) / counts.first});
  report.accuracy =
      report.total == 0 ? 0.0 : static_cast<double>(report.correct) / report.total;
  std::sort(failed.begin(), failed.end());
  report.failed_case_ids = std::move(failed);
  report.complete = report.failed_case_ids.empty();
  return report;
}

std::string serialize_judge_report(const JudgeReport& report) {
  json doc;
  doc["total"] = report.total;
  doc["correct"] = report.correct;
  doc["accuracy"] = report.accuracy;
  doc["complete"] = report.complete;
  doc["failed_case_ids"] = report.failed_case_ids;
  json cats = json::array();
  for (const CategoryAccuracy& c : report.categories)
    cats.push_back(json{{"category", c.category},
                        {"total", c.total},
                        {"correct", c.correct},
                        {"accuracy", c.accuracy}});
  doc["categories"] = std::move(cats);
  return doc.dump(2) + "\n";
}

}  // namespace actkit
