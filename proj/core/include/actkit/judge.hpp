#pragma once

#include <atomic>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace actkit {

struct BenchmarkCase {
  std::string id;
  std::string category;
  std::string question;
  std::string reference_answer;
  std::string model_answer;
  std::optional<std::string> image_ref;

  bool operator==(const BenchmarkCase&) const = default;
};

/// Strict JSONL parse; errors carry line numbers, duplicate ids rejected.
std::vector<BenchmarkCase> load_benchmark(const std::string& path);
std::vector<BenchmarkCase> parse_benchmark(const std::string& content);

/// Deterministic chat payload: fixed binary-grading system preamble, one
/// user message embedding the three texts, temperature 0.
nlohmann::json build_judge_request(const std::string& question,
                                   const std::string& reference_answer,
                                   const std::string& model_answer,
                                   const std::string& model_name);

enum class Verdict { Correct, Incorrect };

struct JudgeVerdict {
  std::string case_id;
  Verdict verdict = Verdict::Incorrect;
  std::string raw_reply;
  bool parsed = false;  // false when no grading token was found

  bool operator==(const JudgeVerdict&) const = default;
};

/// Finds the first standalone "correct"/"incorrect" (case-insensitive) in the
/// reply; "incorrect" is never read as Correct. A reply with no grading token
/// yields Incorrect with parsed=false.
JudgeVerdict parse_judge_verdict(const std::string& case_id,
                                 const std::string& reply_text);

/// Abstract chat endpoint; send returns the assistant reply text or throws
/// EndpointError.
class JudgeTransport {
 public:
  virtual ~JudgeTransport() = default;
  virtual std::string send(const nlohmann::json& payload) = 0;
};

/// Offline stand-in endpoints for tests and air-gapped runs.
class StubJudgeTransport : public JudgeTransport {
 public:
  enum class Mode {
    AlwaysCorrect,
    AlwaysIncorrect,
    // Replies Correct iff the candidate answer in the payload equals the
    // reference answer, so the verdict depends only on case content.
    ExactMatch,
    // Alternates Correct/Incorrect per call; order-dependent, use with
    // concurrency 1.
    Alternate,
  };

  explicit StubJudgeTransport(Mode mode) : mode_(mode) {}
  std::string send(const nlohmann::json& payload) override;

  int calls() const { return calls_.load(); }

 private:
  Mode mode_;
  std::atomic<int> calls_{0};
};

/// Wraps a transport and fails the first `failures` sends, for exercising
/// retry and resume paths.
class FlakyJudgeTransport : public JudgeTransport {
 public:
  FlakyJudgeTransport(std::shared_ptr<JudgeTransport> inner, int failures)
      : inner_(std::move(inner)), remaining_failures_(failures) {}
  std::string send(const nlohmann::json& payload) override;

 private:
  std::shared_ptr<JudgeTransport> inner_;
  std::atomic<int> remaining_failures_;
};

/// Talks to an OpenAI-compatible {base_url}/chat/completions endpoint with a
/// bearer token.
class HttpJudgeTransport : public JudgeTransport {
 public:
  HttpJudgeTransport(std::string base_url, std::string api_key,
                     double timeout_seconds = 30.0);
  std::string send(const nlohmann::json& payload) override;

 private:
  std::string base_url_;
  std::string api_key_;
  double timeout_seconds_;
};

struct JudgeRunConfig {
  std::string model_name = "grader-default";
  int concurrency = 4;
  int max_attempts = 3;
  double initial_backoff_seconds = 0.05;
  double backoff_multiplier = 2.0;
  std::string journal_path;  // empty disables journaling
};

struct CategoryAccuracy {
  std::string category;
  int total = 0;
  int correct = 0;
  double accuracy = 0.0;

  bool operator==(const CategoryAccuracy&) const = default;
};

struct JudgeReport {
  std::vector<CategoryAccuracy> categories;  // sorted by category
  int total = 0;
  int correct = 0;
  double accuracy = 0.0;
  bool complete = true;
  std::vector<std::string> failed_case_ids;  // sorted

  bool operator==(const JudgeReport&) const = default;
};

/// Grades every case with bounded concurrency, per-case retries with
/// exponential backoff, and an append-only journal. Cases already present in
/// the journal are not re-sent, so an interrupted run resumed with the same
/// journal matches an uninterrupted one. Cases that exhaust retries are
/// listed in failed_case_ids and leave the report flagged incomplete.
JudgeReport run_judge_eval(const std::vector<BenchmarkCase>& cases,
                           JudgeTransport& transport,
                           const JudgeRunConfig& config);

std::string serialize_judge_report(const JudgeReport& report);

/// Journal round trip used by run_judge_eval; exposed for tooling.
std::vector<JudgeVerdict> read_judge_journal(const std::string& path);
std::string serialize_judge_verdict(const JudgeVerdict& verdict);

}  // namespace actkit
