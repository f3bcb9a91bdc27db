#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "actkit/action_codec.hpp"
#include "actkit/annotation.hpp"
#include "actkit/augment.hpp"
#include "actkit/dataset.hpp"
#include "actkit/detail/frame_json.hpp"
#include "actkit/detail/jsonl.hpp"
#include "actkit/errors.hpp"
#include "actkit/grounding.hpp"
#include "actkit/judge.hpp"
#include "actkit/mu_law.hpp"
#include "actkit/rollout.hpp"
#include "actkit/sampling.hpp"
#include "actkit/token_vocab.hpp"
#include "actkit/trajectory.hpp"
#include "actkit/version.hpp"
#include "toml_config.hpp"

namespace {

using actkit::DataError;
using actkit::EndpointError;
using actkit::InputError;
using nlohmann::json;
namespace tools = actkit::tools;

struct GlobalOptions {
  std::string config_path;
  tools::TomlTable config;
  long long seed = 0;
  int jobs = 0;  // 0 = hardware concurrency
  CLI::Option* seed_opt = nullptr;
  CLI::Option* jobs_opt = nullptr;

  long long effective_seed() const {
    if (seed_opt && seed_opt->count() > 0) return seed;
    if (auto v = config.get_int("run.seed")) return *v;
    return seed;
  }
  int effective_jobs() const {
    int value = jobs;
    if (!(jobs_opt && jobs_opt->count() > 0)) {
      if (auto v = config.get_int("run.jobs")) value = static_cast<int>(*v);
    }
    if (value <= 0) {
      unsigned hc = std::thread::hardware_concurrency();
      value = hc == 0 ? 1 : static_cast<int>(hc);
    }
    return value;
  }
};

// Flag > config > built-in default.
template <typename T>
T pick(const CLI::Option* opt, T flag_value, std::optional<T> config_value,
       T fallback) {
  if (opt && opt->count() > 0) return flag_value;
  if (config_value) return *config_value;
  return fallback;
}

std::optional<double> config_double(const tools::TomlTable& t,
                                    const std::string& key) {
  return t.get_double(key);
}

/// Every file output gets a deterministic sidecar `<path>.run.json` recording
/// tool versions, seed, jobs, and the effective subcommand config. "-" means
/// stdout and skips the sidecar.
void write_output(const std::string& path, const std::string& content,
                  const std::string& subcommand, const GlobalOptions& global,
                  const json& effective_config) {
  if (path == "-") {
    std::cout << content;
    return;
  }
  actkit::detail::write_file(path, content);
  json header;
  header["tool"] = "actkit";
  header["toolkit_version"] = actkit::kToolkitVersion;
  header["schema_version"] = actkit::kSchemaVersion;
  header["subcommand"] = subcommand;
  header["seed"] = global.effective_seed();
  header["jobs"] = global.effective_jobs();
  header["config"] = effective_config;
  actkit::detail::write_file(path + ".run.json", header.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// codec

struct CodecOptions {
  std::string in_path, out_path = "-";
  actkit::CameraQuantizerConfig quantizer;
  CLI::Option *mu_opt = nullptr, *max_opt = nullptr, *bins_opt = nullptr;
};

actkit::CameraQuantizerConfig effective_quantizer(const CodecOptions& opt,
                                                  const GlobalOptions& global) {
  actkit::CameraQuantizerConfig cfg;
  cfg.mu = pick(opt.mu_opt, opt.quantizer.mu,
                config_double(global.config, "codec.mu"), cfg.mu);
  cfg.max_abs_delta =
      pick(opt.max_opt, opt.quantizer.max_abs_delta,
           config_double(global.config, "codec.max_abs_delta"), cfg.max_abs_delta);
  cfg.bins_per_axis = pick<int>(
      opt.bins_opt, opt.quantizer.bins_per_axis,
      [&]() -> std::optional<int> {
        if (auto v = global.config.get_int("codec.bins"))
          return static_cast<int>(*v);
        return std::nullopt;
      }(),
      cfg.bins_per_axis);
  actkit::validate(cfg);
  return cfg;
}

json quantizer_json(const actkit::CameraQuantizerConfig& cfg) {
  return json{{"mu", cfg.mu},
              {"max_abs_delta", cfg.max_abs_delta},
              {"bins", cfg.bins_per_axis}};
}

void run_codec_encode(const CodecOptions& opt, const GlobalOptions& global) {
  auto cfg = effective_quantizer(opt, global);
  auto trajectories = actkit::load_trajectories(opt.in_path);
  std::string out;
  size_t frames = 0;
  for (const actkit::Trajectory& traj : trajectories)
    for (const actkit::TrajectoryFrame& frame : traj.frames) {
      auto tokens = actkit::encode_action(frame.action, cfg);
      out += actkit::token_string(tokens);
      out += '\n';
      ++frames;
    }
  write_output(opt.out_path, out, "codec encode", global,
               json{{"in", opt.in_path}, {"quantizer", quantizer_json(cfg)}});
  std::cerr << "encoded " << frames << " frames from " << trajectories.size()
            << " trajectories\n";
}

void run_codec_decode(const CodecOptions& opt, const GlobalOptions& global) {
  auto cfg = effective_quantizer(opt, global);
  std::string text = actkit::detail::read_file(opt.in_path);
  auto tokens = actkit::parse_action_text(text, cfg.bins_per_axis);
  auto events = actkit::decode_actions(tokens, cfg);
  std::string out;
  for (const actkit::ActionEvent& ev : events) {
    out += actkit::detail::event_to_json(ev).dump();
    out += '\n';
  }
  write_output(opt.out_path, out, "codec decode", global,
               json{{"in", opt.in_path}, {"quantizer", quantizer_json(cfg)}});
  std::cerr << "decoded " << events.size() << " events\n";
}

// ---------------------------------------------------------------------------
// vocab

actkit::BaseVocabStats load_stats_file(const std::string& path) {
  json doc;
  try {
    doc = json::parse(actkit::detail::read_file(path));
  } catch (const json::parse_error& e) {
    throw DataError(std::string("stats file is not valid JSON: ") + e.what());
  }
  actkit::BaseVocabStats stats;
  if (!doc.is_object() || !doc.contains("vocab_size") ||
      !doc["vocab_size"].is_number_integer() || !doc.contains("entries") ||
      !doc["entries"].is_array())
    throw DataError("stats file needs integer vocab_size and entries array");
  stats.vocab_size = doc["vocab_size"].get<std::int64_t>();
  for (const json& je : doc["entries"]) {
    if (!je.is_object() || !je.contains("id") || !je.contains("surface") ||
        !je.contains("freq"))
      throw DataError("stats entry needs id, surface, freq");
    actkit::BaseVocabEntry entry;
    entry.token_id = je["id"].get<std::int64_t>();
    entry.surface = je["surface"].get<std::string>();
    if (!je["freq"].is_number_integer() || je["freq"].get<std::int64_t>() < 0)
      throw DataError("stats entry freq must be a non-negative integer");
    entry.frequency = je["freq"].get<std::uint64_t>();
    stats.entries.push_back(std::move(entry));
  }
  stats.validate();
  return stats;
}

struct VocabBuildOptions {
  std::string strategy = "append";
  std::string stats_path;
  std::string out_path;
  long long base_size = 0;
  int bins = 21;
  CLI::Option* base_size_opt = nullptr;
};

void run_vocab_build(const VocabBuildOptions& opt, const GlobalOptions& global) {
  actkit::VocabStrategy strategy = actkit::vocab_strategy_from_name(opt.strategy);
  actkit::BaseVocabStats stats;
  if (!opt.stats_path.empty()) {
    stats = load_stats_file(opt.stats_path);
  } else {
    if (strategy == actkit::VocabStrategy::Repurpose)
      throw InputError("repurpose needs --stats with base token frequencies");
    if (!(opt.base_size_opt && opt.base_size_opt->count() > 0))
      throw InputError("append needs --base-size or --stats");
    stats.vocab_size = opt.base_size;
  }
  auto surfaces = actkit::default_surface_list(opt.bins);
  auto vocab = actkit::build_vocab(stats, strategy, surfaces);
  write_output(opt.out_path, actkit::serialize_vocab(vocab), "vocab build",
               global,
               json{{"strategy", opt.strategy},
                    {"stats", opt.stats_path},
                    {"base_vocab_size", stats.vocab_size},
                    {"bins", opt.bins},
                    {"surfaces", surfaces.size()}});
  std::cerr << "bound " << vocab.bindings.size() << " surfaces ("
            << opt.strategy << ")\n";
}

void run_vocab_inspect(const std::string& vocab_path,
                       const std::string& out_path,
                       const GlobalOptions& global) {
  auto vocab = actkit::load_vocab(actkit::detail::read_file(vocab_path));
  std::int64_t min_id = 0, max_id = 0;
  size_t repurposed = 0;
  for (size_t i = 0; i < vocab.bindings.size(); ++i) {
    const actkit::VocabBinding& b = vocab.bindings[i];
    if (i == 0) min_id = max_id = b.id;
    min_id = std::min(min_id, b.id);
    max_id = std::max(max_id, b.id);
    if (b.origin == "repurposed") ++repurposed;
  }
  json report;
  report["strategy"] = actkit::vocab_strategy_name(vocab.strategy);
  report["base_vocab_size"] = vocab.base_vocab_size;
  report["bindings"] = vocab.bindings.size();
  report["min_id"] = min_id;
  report["max_id"] = max_id;
  report["repurposed"] = repurposed;
  report["appended"] = vocab.bindings.size() - repurposed;
  write_output(out_path, report.dump(2) + "\n", "vocab inspect", global,
               json{{"vocab", vocab_path}});
  std::cerr << "inspected " << vocab.bindings.size() << " bindings\n";
}

// ---------------------------------------------------------------------------
// dataset

/// Stand-in tokenizer for instruction text: one id per UTF-8 byte (0..255).
/// Real pipelines pass pre-tokenized ids; the CLI needs something
/// deterministic and reversible for fixtures.
std::vector<std::int64_t> byte_ids(const std::string& text) {
  std::vector<std::int64_t> out;
  out.reserve(text.size());
  for (unsigned char ch : text) out.push_back(static_cast<std::int64_t>(ch));
  return out;
}

struct DatasetPackOptions {
  std::string traj_path, vocab_path, out_path;
  int horizon = 1;
  int stride = 0;  // 0 = horizon
  int history_len = 2;
  long long obs_placeholder = 256;
  CLI::Option *horizon_opt = nullptr, *history_opt = nullptr,
              *placeholder_opt = nullptr;
};

void run_dataset_pack(const DatasetPackOptions& opt,
                      const GlobalOptions& global) {
  const auto& cfgfile = global.config;
  int horizon = pick<int>(opt.horizon_opt, opt.horizon,
                          [&]() -> std::optional<int> {
                            if (auto v = cfgfile.get_int("dataset.horizon"))
                              return static_cast<int>(*v);
                            return std::nullopt;
                          }(),
                          1);
  int history = pick<int>(opt.history_opt, opt.history_len,
                          [&]() -> std::optional<int> {
                            if (auto v = cfgfile.get_int("dataset.history_len"))
                              return static_cast<int>(*v);
                            return std::nullopt;
                          }(),
                          2);
  long long placeholder =
      pick<long long>(opt.placeholder_opt, opt.obs_placeholder,
                      cfgfile.get_int("dataset.obs_placeholder_id"), 256);
  int stride = opt.stride > 0 ? opt.stride : horizon;

  auto vocab = actkit::load_vocab(actkit::detail::read_file(opt.vocab_path));
  auto trajectories = actkit::load_trajectories(opt.traj_path);
  std::vector<actkit::TrainingSample> samples;
  for (const actkit::Trajectory& traj : trajectories) {
    actkit::IlSampleConfig cfg;
    cfg.instruction_ids = byte_ids(traj.instruction);
    cfg.history_len = history;
    cfg.observation_placeholder_id = placeholder;
    for (const actkit::ActionChunk& chunk :
         actkit::chunk_actions(traj, horizon, stride))
      samples.push_back(actkit::build_il_sample(traj, chunk, cfg, vocab));
  }
  int jobs = global.effective_jobs();
  write_output(opt.out_path, actkit::pack_dataset_string(samples, jobs),
               "dataset pack", global,
               json{{"traj", opt.traj_path},
                    {"vocab", opt.vocab_path},
                    {"horizon", horizon},
                    {"stride", stride},
                    {"history_len", history},
                    {"obs_placeholder_id", placeholder}});
  std::cerr << "packed " << samples.size() << " samples from "
            << trajectories.size() << " trajectories (jobs=" << jobs << ")\n";
}

void run_dataset_unpack(const std::string& in_path, const std::string& out_path,
                        long long vocab_limit, bool has_limit,
                        const GlobalOptions& global) {
  std::optional<std::int64_t> limit;
  if (has_limit) limit = vocab_limit;
  auto samples = actkit::unpack_dataset(in_path, limit);
  write_output(out_path, actkit::pack_dataset_string(samples, 1),
               "dataset unpack", global,
               json{{"in", in_path},
                    {"vocab_limit", has_limit ? json(vocab_limit) : json()}});
  std::cerr << "unpacked " << samples.size() << " samples\n";
}

void run_dataset_stats(const std::string& in_path, const std::string& out_path,
                       const GlobalOptions& global) {
  auto samples = actkit::unpack_dataset(in_path);
  actkit::DatasetStats stats = actkit::dataset_stats(samples);
  json report;
  report["samples"] = stats.sample_count;
  report["tokens"] = stats.token_count;
  report["supervised_tokens"] = stats.supervised_count;
  report["sft"] = json{{"samples", stats.sft_samples},
                       {"tokens", stats.sft_tokens},
                       {"supervised_tokens", stats.sft_supervised}};
  report["il"] = json{{"samples", stats.il_samples},
                      {"tokens", stats.il_tokens},
                      {"supervised_tokens", stats.il_supervised}};
  write_output(out_path, report.dump(2) + "\n", "dataset stats", global,
               json{{"in", in_path}});
  std::cerr << "summarized " << stats.sample_count << " samples\n";
}

// ---------------------------------------------------------------------------
// augment

actkit::Annotation annotation_from_json(const json& doc, int line) {
  if (!doc.is_object()) throw DataError("annotation must be an object", line);
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (it.key() != "name" && it.key() != "space" && it.key() != "width" &&
        it.key() != "height" && it.key() != "bbox" && it.key() != "points")
      throw DataError("unknown field \"" + it.key() + "\" in annotation", line);
  if (!doc.contains("name") || !doc["name"].is_string())
    throw DataError("annotation missing name", line);
  if (!doc.contains("space") || !doc["space"].is_string())
    throw DataError("annotation missing space", line);

  actkit::Annotation ann;
  ann.name = doc["name"].get<std::string>();
  std::string space = doc["space"].get<std::string>();
  if (space == "pixel") {
    if (!doc.contains("width") || !doc.contains("height"))
      throw DataError("pixel annotation needs width and height", line);
    ann.space = actkit::PixelSpace{doc["width"].get<double>(),
                                   doc["height"].get<double>()};
  } else if (space == "normalized") {
    ann.space = actkit::NormalizedSpace{};
  } else {
    throw DataError("space must be \"pixel\" or \"normalized\"", line);
  }

  bool has_bbox = doc.contains("bbox"), has_points = doc.contains("points");
  if (has_bbox == has_points)
    throw DataError("annotation needs exactly one of bbox or points", line);
  if (has_bbox) {
    const json& jb = doc["bbox"];
    if (!jb.is_array() || jb.size() != 4)
      throw DataError("bbox must be [x1, y1, x2, y2]", line);
    ann.geometry =
        actkit::BBox{jb[0].get<double>(), jb[1].get<double>(),
                     jb[2].get<double>(), jb[3].get<double>()};
  } else {
    const json& jp = doc["points"];
    if (!jp.is_array() || jp.empty())
      throw DataError("points must be a non-empty array", line);
    std::vector<actkit::Point> points;
    for (const json& pair : jp) {
      if (!pair.is_array() || pair.size() != 2)
        throw DataError("each point must be [x, y]", line);
      points.push_back({pair[0].get<double>(), pair[1].get<double>()});
    }
    ann.geometry = std::move(points);
  }
  try {
    actkit::validate_annotation(ann);
  } catch (const InputError& e) {
    throw DataError(e.what(), line);
  }
  return ann;
}

json annotation_to_json(const actkit::Annotation& ann) {
  json doc;
  doc["name"] = ann.name;
  if (const auto* pixel = std::get_if<actkit::PixelSpace>(&ann.space)) {
    doc["space"] = "pixel";
    doc["width"] = pixel->width;
    doc["height"] = pixel->height;
  } else {
    doc["space"] = "normalized";
  }
  if (const auto* box = std::get_if<actkit::BBox>(&ann.geometry)) {
    doc["bbox"] = json::array({box->x1, box->y1, box->x2, box->y2});
  } else {
    json points = json::array();
    for (const actkit::Point& p :
         std::get<std::vector<actkit::Point>>(ann.geometry))
      points.push_back(json::array({p.x, p.y}));
    doc["points"] = std::move(points);
  }
  return doc;
}

struct AugmentOptions {
  std::string in_path, out_path;
  actkit::AffineAugmentSpec spec;
  double out_width = 0, out_height = 0;  // 0 = input size
  bool normalize = false;
};

void run_augment_plan(const AugmentOptions& opt, const GlobalOptions& global) {
  opt.spec.validate();
  std::string content = actkit::detail::read_file(opt.in_path);
  auto records = actkit::detail::split_jsonl(content, false);
  std::string out;
  size_t dropped = 0;
  for (const auto& rec : records) {
    json doc;
    try {
      doc = json::parse(rec.text);
    } catch (const json::parse_error& e) {
      throw DataError(std::string("annotation record is not valid JSON: ") +
                          e.what(),
                      rec.line_number, rec.byte_offset);
    }
    actkit::Annotation ann = annotation_from_json(doc, rec.line_number);
    const auto* pixel = std::get_if<actkit::PixelSpace>(&ann.space);
    if (!pixel)
      throw DataError("augment plan needs pixel-space annotations",
                      rec.line_number);
    actkit::PixelSpace out_size{opt.out_width > 0 ? opt.out_width : pixel->width,
                                opt.out_height > 0 ? opt.out_height
                                                   : pixel->height};
    auto transformed = actkit::transform_annotation(ann, opt.spec, out_size);
    if (!transformed) {
      ++dropped;
      continue;
    }
    json emitted = annotation_to_json(
        opt.normalize ? actkit::normalize_annotation(*transformed)
                      : *transformed);
    out += emitted.dump();
    out += '\n';
  }
  json spec_json{{"translate_x", opt.spec.translate_x},
                 {"translate_y", opt.spec.translate_y},
                 {"rotate_deg", opt.spec.rotate_deg},
                 {"scale", opt.spec.scale},
                 {"shear_deg", opt.spec.shear_deg},
                 {"hflip", opt.spec.hflip},
                 {"normalize", opt.normalize}};
  write_output(opt.out_path, out, "augment plan", global,
               json{{"in", opt.in_path}, {"spec", spec_json}});
  std::cerr << "transformed " << (records.size() - dropped) << " annotations, "
            << dropped << " dropped as fully outside\n";
}

// ---------------------------------------------------------------------------
// ground

struct GroundOptions {
  std::string in_path, out_path;
  double point_threshold = 25.0;
  bool use_iou = false;
  double iou_threshold = 0.5;
};

void run_ground_score(const GroundOptions& opt, const GlobalOptions& global) {
  std::string content = actkit::detail::read_file(opt.in_path);
  auto records = actkit::detail::split_jsonl(content, false);
  std::vector<actkit::GroundingCase> cases;
  for (const auto& rec : records) {
    json doc;
    try {
      doc = json::parse(rec.text);
    } catch (const json::parse_error& e) {
      throw DataError(std::string("grounding case is not valid JSON: ") +
                          e.what(),
                      rec.line_number, rec.byte_offset);
    }
    if (!doc.is_object())
      throw DataError("grounding case must be an object", rec.line_number);
    for (auto it = doc.begin(); it != doc.end(); ++it)
      if (it.key() != "image_ref" && it.key() != "name" &&
          it.key() != "gt_bbox" && it.key() != "gt_point" &&
          it.key() != "prediction")
        throw DataError("unknown field \"" + it.key() + "\" in grounding case",
                        rec.line_number);
    for (const char* field : {"image_ref", "name", "prediction"})
      if (!doc.contains(field) || !doc[field].is_string())
        throw DataError(std::string("grounding case missing string field \"") +
                            field + "\"",
                        rec.line_number);
    bool has_box = doc.contains("gt_bbox"), has_point = doc.contains("gt_point");
    if (has_box == has_point)
      throw DataError("grounding case needs exactly one of gt_bbox or gt_point",
                      rec.line_number);
    actkit::GroundingCase c;
    c.image_ref = doc["image_ref"].get<std::string>();
    c.target_name = doc["name"].get<std::string>();
    c.prediction_text = doc["prediction"].get<std::string>();
    c.ground_truth.name = c.target_name;
    c.ground_truth.space = actkit::NormalizedSpace{};
    if (has_box) {
      const json& jb = doc["gt_bbox"];
      if (!jb.is_array() || jb.size() != 4)
        throw DataError("gt_bbox must be [x1, y1, x2, y2]", rec.line_number);
      c.ground_truth.geometry =
          actkit::BBox{jb[0].get<double>(), jb[1].get<double>(),
                       jb[2].get<double>(), jb[3].get<double>()};
    } else {
      const json& jp = doc["gt_point"];
      if (!jp.is_array() || jp.size() != 2)
        throw DataError("gt_point must be [x, y]", rec.line_number);
      c.ground_truth.geometry = std::vector<actkit::Point>{
          {jp[0].get<double>(), jp[1].get<double>()}};
    }
    try {
      actkit::validate_annotation(c.ground_truth);
    } catch (const InputError& e) {
      throw DataError(e.what(), rec.line_number);
    }
    cases.push_back(std::move(c));
  }

  actkit::ScoringPolicy policy;
  policy.point_threshold = opt.point_threshold;
  policy.bbox_rule = opt.use_iou ? actkit::ScoringPolicy::BBoxRule::Iou
                                 : actkit::ScoringPolicy::BBoxRule::CenterContainment;
  policy.iou_threshold = opt.iou_threshold;
  actkit::GroundingReport report = actkit::score_grounding_set(cases, policy);

  json out;
  out["total"] = report.total;
  out["hits"] = report.hits;
  out["misses"] = report.misses;
  out["parse_failures"] = report.parse_failures;
  out["accuracy"] = report.accuracy();
  write_output(opt.out_path, out.dump(2) + "\n", "ground score", global,
               json{{"in", opt.in_path},
                    {"point_threshold", opt.point_threshold},
                    {"bbox_rule", opt.use_iou ? "iou" : "center_containment"},
                    {"iou_threshold", opt.iou_threshold}});
  std::cerr << "scored " << report.total << " cases, accuracy "
            << report.accuracy() << "\n";
}

// ---------------------------------------------------------------------------
// judge

struct JudgeOptions {
  std::string in_path, out_path;
  std::string stub;
  std::string base_url;
  std::string model = "grader-default";
  int concurrency = 4;
  int max_attempts = 3;
  double backoff = 0.05;
  std::string journal;
  double timeout = 30.0;
  CLI::Option *model_opt = nullptr, *concurrency_opt = nullptr,
              *attempts_opt = nullptr, *journal_opt = nullptr,
              *base_url_opt = nullptr;
};

std::string interpolate_env(const std::string& value) {
  if (value.size() >= 3 && value.substr(0, 2) == "${" && value.back() == '}') {
    std::string var = value.substr(2, value.size() - 3);
    const char* resolved = std::getenv(var.c_str());
    return resolved ? resolved : "";
  }
  return value;
}

void run_judge(const JudgeOptions& opt, const GlobalOptions& global) {
  const auto& cfgfile = global.config;
  actkit::JudgeRunConfig run_cfg;
  run_cfg.model_name =
      pick(opt.model_opt, opt.model, cfgfile.get_string("judge.model"),
           std::string("grader-default"));
  run_cfg.concurrency = pick<int>(opt.concurrency_opt, opt.concurrency,
                                  [&]() -> std::optional<int> {
                                    if (auto v = cfgfile.get_int("judge.concurrency"))
                                      return static_cast<int>(*v);
                                    return std::nullopt;
                                  }(),
                                  4);
  run_cfg.max_attempts = pick<int>(opt.attempts_opt, opt.max_attempts,
                                   [&]() -> std::optional<int> {
                                     if (auto v = cfgfile.get_int("judge.max_attempts"))
                                       return static_cast<int>(*v);
                                     return std::nullopt;
                                   }(),
                                   3);
  run_cfg.initial_backoff_seconds = opt.backoff;
  run_cfg.journal_path = pick(opt.journal_opt, opt.journal,
                              cfgfile.get_string("judge.journal"), std::string());

  auto cases = actkit::load_benchmark(opt.in_path);

  std::unique_ptr<actkit::JudgeTransport> transport;
  std::string endpoint_desc;
  if (!opt.stub.empty()) {
    using Mode = actkit::StubJudgeTransport::Mode;
    Mode mode;
    if (opt.stub == "always-correct")
      mode = Mode::AlwaysCorrect;
    else if (opt.stub == "always-incorrect")
      mode = Mode::AlwaysIncorrect;
    else if (opt.stub == "exact-match")
      mode = Mode::ExactMatch;
    else if (opt.stub == "alternate")
      mode = Mode::Alternate;
    else
      throw InputError("unknown stub mode: " + opt.stub);
    transport = std::make_unique<actkit::StubJudgeTransport>(mode);
    endpoint_desc = "stub:" + opt.stub;
  } else {
    std::string base_url = opt.base_url;
    if (!(opt.base_url_opt && opt.base_url_opt->count() > 0)) {
      if (auto v = cfgfile.get_string("judge.base_url")) {
        base_url = *v;
      } else if (const char* env = std::getenv("JUDGE_BASE_URL")) {
        base_url = env;
      }
    }
    if (base_url.empty())
      throw InputError(
          "judge needs --stub, --base-url, judge.base_url in the config, or "
          "JUDGE_BASE_URL in the environment");
    std::string api_key;
    if (auto v = cfgfile.get_string("judge.api_key")) {
      api_key = interpolate_env(*v);
    } else if (const char* env = std::getenv("JUDGE_API_KEY")) {
      api_key = env;
    }
    transport = std::make_unique<actkit::HttpJudgeTransport>(base_url, api_key,
                                                             opt.timeout);
    endpoint_desc = base_url;
  }

  actkit::JudgeReport report = actkit::run_judge_eval(cases, *transport, run_cfg);
  write_output(opt.out_path, actkit::serialize_judge_report(report), "judge run",
               global,
               json{{"in", opt.in_path},
                    {"endpoint", endpoint_desc},
                    {"model", run_cfg.model_name},
                    {"concurrency", run_cfg.concurrency},
                    {"max_attempts", run_cfg.max_attempts},
                    {"journal", run_cfg.journal_path}});
  std::cerr << "graded " << report.total << " of " << cases.size()
            << " cases, accuracy " << report.accuracy
            << (report.complete ? "" : " (incomplete)") << "\n";
  if (!report.complete)
    throw EndpointError(std::to_string(report.failed_case_ids.size()) +
                        " cases failed after retries; report flagged incomplete");
}

// ---------------------------------------------------------------------------
// sim

struct SimRunOptions {
  std::string tasks_path, out_path;
  int episodes = 30;
  int chunk_size = 2;
  std::string policy = "replay";
  bool allow_large = false;
  CLI::Option *episodes_opt = nullptr, *chunk_opt = nullptr,
              *policy_opt = nullptr;
};

void run_sim_run(const SimRunOptions& opt, const GlobalOptions& global) {
  const auto& cfgfile = global.config;
  int episodes = pick<int>(opt.episodes_opt, opt.episodes,
                           [&]() -> std::optional<int> {
                             if (auto v = cfgfile.get_int("sim.episodes"))
                               return static_cast<int>(*v);
                             return std::nullopt;
                           }(),
                           30);
  int chunk = pick<int>(opt.chunk_opt, opt.chunk_size,
                        [&]() -> std::optional<int> {
                          if (auto v = cfgfile.get_int("sim.chunk_size"))
                            return static_cast<int>(*v);
                          return std::nullopt;
                        }(),
                        2);
  std::string policy_name = pick(opt.policy_opt, opt.policy,
                                 cfgfile.get_string("sim.policy"),
                                 std::string("replay"));
  if (chunk < 1) throw InputError("chunk size must be >= 1");
  if (!opt.allow_large && chunk > actkit::kMaxExploredChunkSize)
    throw InputError("chunk size exceeds " +
                     std::to_string(actkit::kMaxExploredChunkSize) +
                     " (pass --allow-large-chunks to override)");

  auto specs = actkit::load_task_specs(opt.tasks_path);
  actkit::PolicyFactory factory;
  if (policy_name == "replay") {
    factory = [](const actkit::TaskSpec& spec, std::uint64_t) {
      return actkit::make_replay_policy(spec.target_events);
    };
  } else if (policy_name == "noop") {
    factory = [](const actkit::TaskSpec&, std::uint64_t) {
      return actkit::make_noop_policy();
    };
  } else if (policy_name == "hold") {
    factory = [](const actkit::TaskSpec&, std::uint64_t) {
      return actkit::make_hold_policy();
    };
  } else {
    throw InputError("unknown policy: " + policy_name);
  }

  auto seed = static_cast<std::uint64_t>(global.effective_seed());
  actkit::SuiteRun run =
      actkit::run_task_suite(specs, episodes, chunk, seed, factory);
  write_output(opt.out_path, actkit::serialize_suite_report(run.report),
               "sim run", global,
               json{{"tasks", opt.tasks_path},
                    {"episodes", episodes},
                    {"chunk_size", chunk},
                    {"policy", policy_name}});
  size_t protocol_errors = 0;
  for (const actkit::EpisodeRecord& rec : run.episodes)
    if (rec.result.protocol_error) ++protocol_errors;
  std::cerr << "ran " << run.episodes.size() << " episodes over "
            << specs.size() << " tasks (" << protocol_errors
            << " protocol errors)\n";
}

struct FitOptions {
  std::vector<std::string> rows;
  std::string out_path;
};

void run_sim_fit(const FitOptions& opt, const GlobalOptions& global) {
  std::vector<actkit::FpsObservation> observed;
  for (const std::string& row : opt.rows) {
    size_t eq = row.find('=');
    if (eq == std::string::npos)
      throw InputError("--obs expects c=fps, got \"" + row + "\"");
    try {
      observed.push_back({std::stod(row.substr(0, eq)),
                          std::stod(row.substr(eq + 1))});
    } catch (const std::exception&) {
      throw InputError("--obs expects numeric c=fps, got \"" + row + "\"");
    }
  }
  actkit::LatencyFit fit = actkit::fit_latency_model(observed);

  json report;
  report["decision_latency_s"] = fit.model.decision_latency;
  report["step_latency_s"] = fit.model.step_latency;
  report["relative_residuals"] = fit.relative_residuals;
  report["max_abs_relative_residual"] = fit.max_abs_relative_residual;
  json predictions = json::array();
  for (const actkit::FpsObservation& obs : observed) {
    double predicted =
        obs.chunk_size / (fit.model.decision_latency +
                          obs.chunk_size * fit.model.step_latency);
    predictions.push_back(json{{"chunk_size", obs.chunk_size},
                               {"observed_fps", obs.fps},
                               {"predicted_fps", predicted}});
  }
  report["predictions"] = std::move(predictions);
  write_output(opt.out_path, report.dump(2) + "\n", "sim fit-latency", global,
               json{{"rows", opt.rows}});
  std::cerr << "fit over " << observed.size()
            << " rows, max relative residual " << fit.max_abs_relative_residual
            << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Action-token toolkit: codecs, vocab grafting, dataset "
               "packing, augmentation planning, grounding and judge "
               "evaluation, and a scripted rollout harness"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("actkit ") +
                                        actkit::kToolkitVersion + " (schema " +
                                        actkit::kSchemaVersion + ")");

  GlobalOptions global;
  app.add_option("--config", global.config_path,
                 "TOML run config; flags take precedence over its values");
  global.seed_opt =
      app.add_option("--seed", global.seed, "Seed recorded in output headers");
  global.jobs_opt = app.add_option(
      "--jobs", global.jobs, "Worker threads for parallel stages (0 = auto)");

  // codec
  CodecOptions codec_enc, codec_dec;
  CLI::App* codec_cmd = app.add_subcommand("codec", "Action token codec");
  codec_cmd->require_subcommand(1);
  auto add_quantizer_flags = [](CLI::App* cmd, CodecOptions& opt) {
    opt.mu_opt =
        cmd->add_option("--mu", opt.quantizer.mu, "Companding strength");
    opt.max_opt = cmd->add_option("--max-abs-delta", opt.quantizer.max_abs_delta,
                                  "Camera clamp in degrees");
    opt.bins_opt = cmd->add_option("--bins", opt.quantizer.bins_per_axis,
                                   "Bins per camera axis (odd)");
  };
  CLI::App* codec_encode =
      codec_cmd->add_subcommand("encode", "Trajectory JSONL to token lines");
  codec_encode->add_option("--in", codec_enc.in_path, "Trajectory JSONL")
      ->required();
  codec_encode->add_option("--out", codec_enc.out_path, "Output file or -");
  add_quantizer_flags(codec_encode, codec_enc);
  CLI::App* codec_decode =
      codec_cmd->add_subcommand("decode", "Token text to event JSONL");
  codec_decode->add_option("--in", codec_dec.in_path, "Token text file")
      ->required();
  codec_decode->add_option("--out", codec_dec.out_path, "Output file or -");
  add_quantizer_flags(codec_decode, codec_dec);

  // vocab
  VocabBuildOptions vocab_build;
  CLI::App* vocab_cmd = app.add_subcommand("vocab", "Action token vocab");
  vocab_cmd->require_subcommand(1);
  CLI::App* vocab_build_cmd =
      vocab_cmd->add_subcommand("build", "Bind grammar surfaces to ids");
  vocab_build_cmd
      ->add_option("--strategy", vocab_build.strategy, "repurpose or append")
      ->check(CLI::IsMember({"repurpose", "append"}));
  vocab_build_cmd->add_option("--stats", vocab_build.stats_path,
                              "Base vocab frequency JSON");
  vocab_build.base_size_opt = vocab_build_cmd->add_option(
      "--base-size", vocab_build.base_size, "Base vocab size for append");
  vocab_build_cmd->add_option("--bins", vocab_build.bins,
                              "Bins per camera axis (odd)");
  vocab_build_cmd->add_option("--out", vocab_build.out_path, "Vocab JSON out")
      ->required();
  std::string vocab_inspect_in, vocab_inspect_out = "-";
  CLI::App* vocab_inspect_cmd =
      vocab_cmd->add_subcommand("inspect", "Summarize a vocab file");
  vocab_inspect_cmd->add_option("--vocab", vocab_inspect_in, "Vocab JSON")
      ->required();
  vocab_inspect_cmd->add_option("--out", vocab_inspect_out,
                                "Report file or -");

  // dataset
  DatasetPackOptions pack;
  CLI::App* dataset_cmd = app.add_subcommand("dataset", "Packed sample files");
  dataset_cmd->require_subcommand(1);
  CLI::App* pack_cmd = dataset_cmd->add_subcommand(
      "pack", "Build imitation samples from trajectories");
  pack_cmd->add_option("--traj", pack.traj_path, "Trajectory JSONL")
      ->required();
  pack_cmd->add_option("--vocab", pack.vocab_path, "Vocab JSON")->required();
  pack_cmd->add_option("--out", pack.out_path, "Packed JSONL out")->required();
  pack.horizon_opt =
      pack_cmd->add_option("--horizon", pack.horizon, "Chunk size");
  pack_cmd->add_option("--stride", pack.stride, "Chunk stride (0 = horizon)");
  pack.history_opt = pack_cmd->add_option("--history-len", pack.history_len,
                                          "Observation history length");
  pack.placeholder_opt = pack_cmd->add_option(
      "--obs-placeholder-id", pack.obs_placeholder, "Observation placeholder id");

  std::string unpack_in, unpack_out;
  long long unpack_limit = 0;
  CLI::App* unpack_cmd = dataset_cmd->add_subcommand(
      "unpack", "Validate and canonically re-emit a packed file");
  unpack_cmd->add_option("--in", unpack_in, "Packed JSONL")->required();
  unpack_cmd->add_option("--out", unpack_out, "Canonical packed JSONL out")
      ->required();
  CLI::Option* unpack_limit_opt = unpack_cmd->add_option(
      "--vocab-limit", unpack_limit, "Reject ids outside [0, N)");

  std::string stats_in, stats_out = "-";
  CLI::App* stats_cmd =
      dataset_cmd->add_subcommand("stats", "Token accounting for a packed file");
  stats_cmd->add_option("--in", stats_in, "Packed JSONL")->required();
  stats_cmd->add_option("--out", stats_out, "Report file or -");

  // augment
  AugmentOptions augment;
  CLI::App* augment_cmd = app.add_subcommand("augment", "Annotation transforms");
  CLI::App* plan_cmd = augment_cmd->add_subcommand(
      "plan", "Apply an affine spec to pixel annotations");
  plan_cmd->add_option("--in", augment.in_path, "Annotation JSONL")->required();
  plan_cmd->add_option("--out", augment.out_path, "Transformed JSONL out")
      ->required();
  plan_cmd->add_option("--translate-x", augment.spec.translate_x, "Pixels");
  plan_cmd->add_option("--translate-y", augment.spec.translate_y, "Pixels");
  plan_cmd->add_option("--rotate", augment.spec.rotate_deg,
                       "Degrees about image center");
  plan_cmd->add_option("--scale", augment.spec.scale, "Scale factor (> 0)");
  plan_cmd->add_option("--shear", augment.spec.shear_deg, "Shear degrees");
  plan_cmd->add_flag("--hflip", augment.spec.hflip, "Horizontal flip first");
  plan_cmd->add_option("--out-width", augment.out_width,
                       "Output frame width (0 = input)");
  plan_cmd->add_option("--out-height", augment.out_height,
                       "Output frame height (0 = input)");
  plan_cmd->add_flag("--normalize", augment.normalize,
                     "Emit normalized integer coordinates");
  augment_cmd->require_subcommand(1);

  // ground
  GroundOptions ground;
  CLI::App* ground_cmd = app.add_subcommand("ground", "Grounding evaluation");
  CLI::App* score_cmd =
      ground_cmd->add_subcommand("score", "Rule-based grounding scorer");
  score_cmd->add_option("--in", ground.in_path, "Grounding case JSONL")
      ->required();
  score_cmd->add_option("--out", ground.out_path, "Report file or -")
      ->required();
  score_cmd->add_option("--point-threshold", ground.point_threshold,
                        "Point hit radius, normalized units");
  score_cmd->add_flag("--iou", ground.use_iou,
                      "Score bbox predictions by IoU instead of center");
  score_cmd->add_option("--iou-threshold", ground.iou_threshold,
                        "IoU hit threshold");
  ground_cmd->require_subcommand(1);

  // judge
  JudgeOptions judge;
  CLI::App* judge_cmd = app.add_subcommand("judge", "LLM-as-judge harness");
  CLI::App* judge_run_cmd =
      judge_cmd->add_subcommand("run", "Grade a benchmark file");
  judge_run_cmd->add_option("--in", judge.in_path, "Benchmark JSONL")
      ->required();
  judge_run_cmd->add_option("--out", judge.out_path, "Report file or -")
      ->required();
  judge_run_cmd
      ->add_option("--stub", judge.stub,
                   "Offline stub: always-correct, always-incorrect, "
                   "exact-match, alternate")
      ->check(CLI::IsMember(
          {"always-correct", "always-incorrect", "exact-match", "alternate"}));
  judge.base_url_opt = judge_run_cmd->add_option(
      "--base-url", judge.base_url,
      "OpenAI-compatible endpoint (default env JUDGE_BASE_URL)");
  judge.model_opt =
      judge_run_cmd->add_option("--model", judge.model, "Judge model name");
  judge.concurrency_opt = judge_run_cmd->add_option(
      "--concurrency", judge.concurrency, "Requests in flight");
  judge.attempts_opt = judge_run_cmd->add_option(
      "--max-attempts", judge.max_attempts, "Attempts per case");
  judge_run_cmd->add_option("--backoff", judge.backoff,
                            "Initial retry backoff seconds");
  judge.journal_opt = judge_run_cmd->add_option(
      "--journal", judge.journal, "Append-only verdict journal for resume");
  judge_run_cmd->add_option("--timeout", judge.timeout,
                            "HTTP timeout seconds");
  judge_cmd->require_subcommand(1);

  // sim
  SimRunOptions sim;
  FitOptions fit;
  CLI::App* sim_cmd = app.add_subcommand("sim", "Scripted rollout harness");
  sim_cmd->require_subcommand(1);
  CLI::App* sim_run_cmd =
      sim_cmd->add_subcommand("run", "Run a seeded task suite");
  sim_run_cmd->add_option("--tasks", sim.tasks_path, "Task spec JSONL")
      ->required();
  sim_run_cmd->add_option("--out", sim.out_path, "Report JSONL out")
      ->required();
  sim.episodes_opt =
      sim_run_cmd->add_option("--episodes", sim.episodes, "Episodes per task");
  sim.chunk_opt =
      sim_run_cmd->add_option("--chunk-size", sim.chunk_size, "Actions per decision");
  sim.policy_opt = sim_run_cmd
                       ->add_option("--policy", sim.policy,
                                    "replay, noop, or hold")
                       ->check(CLI::IsMember({"replay", "noop", "hold"}));
  sim_run_cmd->add_flag("--allow-large-chunks", sim.allow_large,
                        "Permit chunk sizes above 3");
  CLI::App* fit_cmd = sim_cmd->add_subcommand(
      "fit-latency", "Fit the two-parameter latency model to (c, fps) rows");
  fit_cmd->add_option("--obs", fit.rows, "Observation as c=fps (repeatable)")
      ->required();
  fit_cmd->add_option("--out", fit.out_path, "Report file or -")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // help/version exit 0; every usage error maps to 1
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (!global.config_path.empty())
      global.config = tools::load_toml(global.config_path);

    if (codec_encode->parsed()) run_codec_encode(codec_enc, global);
    if (codec_decode->parsed()) run_codec_decode(codec_dec, global);
    if (vocab_build_cmd->parsed()) run_vocab_build(vocab_build, global);
    if (vocab_inspect_cmd->parsed())
      run_vocab_inspect(vocab_inspect_in, vocab_inspect_out, global);
    if (pack_cmd->parsed()) run_dataset_pack(pack, global);
    if (unpack_cmd->parsed())
      run_dataset_unpack(unpack_in, unpack_out, unpack_limit,
                         unpack_limit_opt->count() > 0, global);
    if (stats_cmd->parsed()) run_dataset_stats(stats_in, stats_out, global);
    if (plan_cmd->parsed()) run_augment_plan(augment, global);
    if (score_cmd->parsed()) run_ground_score(ground, global);
    if (judge_run_cmd->parsed()) run_judge(judge, global);
    if (sim_run_cmd->parsed()) run_sim_run(sim, global);
    if (fit_cmd->parsed()) run_sim_fit(fit, global);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what();
    if (e.line() >= 0) std::cerr << " (line " << e.line() << ")";
    if (e.byte_offset() >= 0) std::cerr << " (byte " << e.byte_offset() << ")";
    std::cerr << "\n";
    return 2;
  } catch (const EndpointError& e) {
    std::cerr << "endpoint error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
