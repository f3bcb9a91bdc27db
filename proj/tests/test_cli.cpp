#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "actkit/detail/jsonl.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

#ifndef ACTKIT_CLI_PATH
#error "ACTKIT_CLI_PATH must point at the actkit binary"
#endif
#ifndef ACTKIT_FIXTURE_DIR
#error "ACTKIT_FIXTURE_DIR must point at tests/fixtures"
#endif

std::string cli() { return ACTKIT_CLI_PATH; }
std::string fixture(const std::string& name) {
  return std::string(ACTKIT_FIXTURE_DIR) + "/" + name;
}

struct RunResult {
  int exit_code = -1;
  std::string stdout_text;
};

// std::system with captured stdout; stderr flows to the test log.
RunResult run(const std::string& args) {
  fs::path out = fs::temp_directory_path() /
                 ("actkit_cli_out_" + std::to_string(::getpid()) + ".txt");
  std::string cmd = cli() + " " + args + " > " + out.string();
  int raw = std::system(cmd.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(out);
  std::stringstream buffer;
  buffer << in.rdbuf();
  result.stdout_text = buffer.str();
  fs::remove(out);
  return result;
}

fs::path work_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "actkit_cli_work";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

TEST_CASE("version and help") {
  auto v = run("--version");
  CHECK(v.exit_code == 0);
  CHECK(v.stdout_text.find("actkit 0.1.0") != std::string::npos);
  CHECK(v.stdout_text.find("schema 1") != std::string::npos);
  CHECK(run("--help").exit_code == 0);
}

TEST_CASE("usage errors exit 1") {
  CHECK(run("codec encode 2>/dev/null").exit_code == 1);          // missing --in
  CHECK(run("codec encode --bogus x 2>/dev/null").exit_code == 1);
  CHECK(run("nosuchcommand 2>/dev/null").exit_code == 1);
}

TEST_CASE("codec encode reproduces the crafting fixture exactly") {
  auto r = run("codec encode --in " + fixture("bread_actions.jsonl") +
               " --out - 2>/dev/null");
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text ==
        "<|action_begin|><|cam_w_13|><|cam_h_5|><|action_end|>\n"
        "<|action_begin|><|use|><|cam_w_3|><|cam_h_2|><|action_end|>\n");
}

TEST_CASE("codec decode inverts encode") {
  fs::path tokens = work_dir() / "bread_tokens.txt";
  auto enc = run("codec encode --in " + fixture("bread_actions.jsonl") +
                 " --out " + tokens.string() + " 2>/dev/null");
  REQUIRE(enc.exit_code == 0);
  auto dec = run("codec decode --in " + tokens.string() + " --out - 2>/dev/null");
  CHECK(dec.exit_code == 0);
  auto records = actkit::detail::split_jsonl(dec.stdout_text, false);
  REQUIRE(records.size() == 2);
  json first = json::parse(records[0].text);
  CHECK(first["buttons"].empty());
  CHECK(first["camera"][0].get<double>() ==
        doctest::Approx(1.0531364136588446).epsilon(1e-12));
  json second = json::parse(records[1].text);
  CHECK(second["buttons"] == json::array({"use"}));
}

TEST_CASE("file outputs come with a sidecar header") {
  fs::path out = work_dir() / "bread_tokens2.txt";
  auto r = run("--seed 9 codec encode --in " + fixture("bread_actions.jsonl") +
               " --out " + out.string() + " 2>/dev/null");
  REQUIRE(r.exit_code == 0);
  json header = json::parse(slurp(out.string() + ".run.json"));
  CHECK(header["tool"] == "actkit");
  CHECK(header["subcommand"] == "codec encode");
  CHECK(header["seed"] == 9);
  CHECK(header["toolkit_version"] == "0.1.0");
  CHECK(header["config"]["quantizer"]["mu"] == 10.0);
  // deterministic: no clocks anywhere in the header
  CHECK(header.dump().find("time") == std::string::npos);
}

TEST_CASE("vocab build and inspect") {
  fs::path vocab = work_dir() / "vocab_append.json";
  auto r = run("vocab build --strategy append --base-size 151646 --out " +
               vocab.string() + " 2>/dev/null");
  REQUIRE(r.exit_code == 0);
  json doc = json::parse(slurp(vocab));
  CHECK(doc["strategy"] == "append");
  CHECK(doc["bindings"].size() == 63);
  CHECK(doc["bindings"][0]["id"] == 151646);

  auto inspect = run("vocab inspect --vocab " + vocab.string() +
                     " --out - 2>/dev/null");
  CHECK(inspect.exit_code == 0);
  json report = json::parse(inspect.stdout_text);
  CHECK(report["bindings"] == 63);
  CHECK(report["min_id"] == 151646);
  CHECK(report["max_id"] == 151646 + 62);
  CHECK(report["appended"] == 63);

  fs::path repurposed = work_dir() / "vocab_repurpose.json";
  auto rep = run("vocab build --strategy repurpose --stats " +
                 fixture("stats_small.json") + " --out " + repurposed.string() +
                 " 2>/dev/null");
  REQUIRE(rep.exit_code == 0);
  json rdoc = json::parse(slurp(repurposed));
  CHECK(rdoc["strategy"] == "repurpose");
  CHECK(rdoc["bindings"].size() == 63);
  CHECK(rdoc["bindings"][0].contains("replaced_surface"));

  CHECK(run("vocab build --strategy repurpose --out /dev/null 2>/dev/null")
            .exit_code == 1);  // repurpose without stats
}

TEST_CASE("dataset pack, stats, unpack round trip") {
  fs::path vocab = work_dir() / "vocab_ds.json";
  REQUIRE(run("vocab build --strategy append --base-size 1000 --out " +
              vocab.string() + " 2>/dev/null")
              .exit_code == 0);
  fs::path packed = work_dir() / "packed.jsonl";
  auto r = run("dataset pack --traj " + fixture("trajectories.jsonl") +
               " --vocab " + vocab.string() + " --out " + packed.string() +
               " --horizon 2 2>/dev/null");
  REQUIRE(r.exit_code == 0);
  std::string packed_bytes = slurp(packed);

  auto stats = run("dataset stats --in " + packed.string() + " --out - 2>/dev/null");
  REQUIRE(stats.exit_code == 0);
  json sreport = json::parse(stats.stdout_text);
  // 7-frame, 2-frame, 5-frame trajectories at horizon 2: 3 + 1 + 2 chunks
  CHECK(sreport["samples"] == 6);
  CHECK(sreport["il"]["samples"] == 6);
  CHECK(sreport["sft"]["samples"] == 0);

  fs::path unpacked = work_dir() / "unpacked.jsonl";
  REQUIRE(run("dataset unpack --in " + packed.string() + " --out " +
              unpacked.string() + " 2>/dev/null")
              .exit_code == 0);
  CHECK(slurp(unpacked) == packed_bytes);

  // pack twice with different job counts: byte identical
  fs::path packed_j3 = work_dir() / "packed_j3.jsonl";
  REQUIRE(run("--jobs 3 dataset pack --traj " + fixture("trajectories.jsonl") +
              " --vocab " + vocab.string() + " --out " + packed_j3.string() +
              " --horizon 2 2>/dev/null")
              .exit_code == 0);
  CHECK(slurp(packed_j3) == packed_bytes);

  // vocab bound enforcement: ids start at 1000, so --vocab-limit 1000 fails
  CHECK(run("dataset unpack --in " + packed.string() +
            " --out /dev/null --vocab-limit 1000 2>/dev/null")
            .exit_code == 2);
}

TEST_CASE("augment plan transforms and drops annotations") {
  fs::path ann = work_dir() / "annotations.jsonl";
  {
    std::ofstream out(ann);
    out << R"({"name":"torch","space":"pixel","width":1000,"height":1000,"bbox":[453,333,563,528]})"
        << "\n";
    out << R"({"name":"edge","space":"pixel","width":1000,"height":1000,"points":[[5,5]]})"
        << "\n";
  }
  auto r = run("augment plan --in " + ann.string() +
               " --out - --hflip --translate-x 10 2>/dev/null");
  REQUIRE(r.exit_code == 0);
  // hflip sends the point to x=995 and the +10 shift pushes it outside,
  // so only the bbox survives
  auto records = actkit::detail::split_jsonl(r.stdout_text, false);
  REQUIRE(records.size() == 1);
  json torch = json::parse(records[0].text);
  CHECK(torch["bbox"][0].get<double>() == doctest::Approx(447.0));
  CHECK(torch["bbox"][2].get<double>() == doctest::Approx(557.0));

  // translate far enough and the point annotation disappears
  auto drop = run("augment plan --in " + ann.string() +
                  " --out - --translate-x 990 2>/dev/null");
  REQUIRE(drop.exit_code == 0);
  auto kept = actkit::detail::split_jsonl(drop.stdout_text, false);
  CHECK(kept.size() == 1);
  json survivor = json::parse(kept[0].text);
  CHECK(survivor["name"] == "edge");

  // --normalize emits integer grid coordinates
  auto norm = run("augment plan --in " + ann.string() +
                  " --out - --normalize 2>/dev/null");
  REQUIRE(norm.exit_code == 0);
  json nfirst = json::parse(
      actkit::detail::split_jsonl(norm.stdout_text, false)[0].text);
  CHECK(nfirst["space"] == "normalized");
  CHECK(nfirst["bbox"][0] == 453.0);
}

TEST_CASE("ground score on the fixture cases") {
  auto r = run("ground score --in " + fixture("grounding_cases.jsonl") +
               " --out - 2>/dev/null");
  REQUIRE(r.exit_code == 0);
  json report = json::parse(r.stdout_text);
  CHECK(report["total"] == 5);
  CHECK(report["hits"] == 3);
  CHECK(report["misses"] == 1);
  CHECK(report["parse_failures"] == 1);
  CHECK(report["accuracy"].get<double>() == doctest::Approx(0.6));
}

TEST_CASE("judge run with the offline stub and journal resume") {
  fs::path report_path = work_dir() / "judge_report.json";
  fs::path journal = work_dir() / "judge_journal.jsonl";
  auto r = run("judge run --in " + fixture("benchmark_small.jsonl") + " --out " +
               report_path.string() + " --stub exact-match --journal " +
               journal.string() + " 2>/dev/null");
  REQUIRE(r.exit_code == 0);
  json report = json::parse(slurp(report_path));
  CHECK(report["total"] == 6);
  CHECK(report["accuracy"].get<double>() == doctest::Approx(4.0 / 6.0));
  CHECK(report["complete"] == true);

  // all six verdicts journaled; a second run sends nothing new and agrees
  auto journal_lines = actkit::detail::split_jsonl(slurp(journal), false);
  CHECK(journal_lines.size() == 6);
  fs::path report2 = work_dir() / "judge_report2.json";
  auto again = run("judge run --in " + fixture("benchmark_small.jsonl") +
                   " --out " + report2.string() + " --stub exact-match --journal " +
                   journal.string() + " 2>/dev/null");
  REQUIRE(again.exit_code == 0);
  CHECK(slurp(report2) == slurp(report_path));
  CHECK(actkit::detail::split_jsonl(slurp(journal), false).size() == 6);

  // without stub or endpoint configuration the run is a usage error
  CHECK(run("judge run --in " + fixture("benchmark_small.jsonl") +
            " --out /dev/null 2>/dev/null")
            .exit_code == 1);
}

TEST_CASE("sim run produces a deterministic report") {
  fs::path report1 = work_dir() / "sim1.jsonl";
  fs::path report2 = work_dir() / "sim2.jsonl";
  std::string base = "sim run --tasks " + fixture("tasks_small.jsonl") +
                     " --episodes 30 --chunk-size 2 --policy replay ";
  REQUIRE(run("--seed 5 " + base + "--out " + report1.string() + " 2>/dev/null")
              .exit_code == 0);
  REQUIRE(run("--seed 5 " + base + "--out " + report2.string() + " 2>/dev/null")
              .exit_code == 0);
  CHECK(slurp(report1) == slurp(report2));
  auto records = actkit::detail::split_jsonl(slurp(report1), false);
  REQUIRE(records.size() == 5);  // 4 tasks + summary
  json task0 = json::parse(records[0].text);
  CHECK(task0["success_rate"] == 1.0);
  CHECK(task0["protocol_ok"] == true);
  json summary = json::parse(records[4].text);
  CHECK(summary["group_averages"].size() == 2);

  CHECK(run("sim run --tasks " + fixture("tasks_small.jsonl") +
            " --out /dev/null --chunk-size 9 2>/dev/null")
            .exit_code == 1);  // above the explored range without the override
  CHECK(run("sim run --tasks " + fixture("tasks_small.jsonl") +
            " --out - --chunk-size 9 --allow-large-chunks --episodes 2 2>/dev/null")
            .exit_code == 0);
}

TEST_CASE("sim fit-latency reproduces the published table") {
  auto r = run("sim fit-latency --obs 1=8 --obs 2=15 --obs 3=21 --out - 2>/dev/null");
  REQUIRE(r.exit_code == 0);
  json report = json::parse(r.stdout_text);
  CHECK(report["step_latency_s"].get<double>() ==
        doctest::Approx(1.0 / 112.0).epsilon(1e-9));
  CHECK(report["decision_latency_s"].get<double>() ==
        doctest::Approx(73.0 / 630.0).epsilon(1e-9));
  CHECK(report["max_abs_relative_residual"].get<double>() < 0.05);
  for (const auto& p : report["predictions"]) {
    double rel = std::abs(p["predicted_fps"].get<double>() -
                          p["observed_fps"].get<double>()) /
                 p["observed_fps"].get<double>();
    CHECK(rel < 0.05);
  }
}

TEST_CASE("config file values apply with flag precedence") {
  fs::path packed_cfg = work_dir() / "packed_cfg.jsonl";
  fs::path vocab = work_dir() / "vocab_cfg.json";
  REQUIRE(run("vocab build --strategy append --base-size 1000 --out " +
              vocab.string() + " 2>/dev/null")
              .exit_code == 0);
  // config sets horizon=2 history_len=3 obs_placeholder_id=300 seed=77
  auto r = run("--config " + fixture("config_sample.toml") + " dataset pack --traj " +
               fixture("trajectories.jsonl") + " --vocab " + vocab.string() +
               " --out " + packed_cfg.string() + " 2>/dev/null");
  REQUIRE(r.exit_code == 0);
  json header = json::parse(slurp(packed_cfg.string() + ".run.json"));
  CHECK(header["config"]["horizon"] == 2);
  CHECK(header["config"]["history_len"] == 3);
  CHECK(header["config"]["obs_placeholder_id"] == 300);
  CHECK(header["seed"] == 77);
  CHECK(header["jobs"] == 2);

  // an explicit flag wins over the config value
  fs::path packed_flag = work_dir() / "packed_flag.jsonl";
  auto rf = run("--config " + fixture("config_sample.toml") +
                " --seed 123 dataset pack --traj " + fixture("trajectories.jsonl") +
                " --vocab " + vocab.string() + " --out " + packed_flag.string() +
                " --horizon 1 2>/dev/null");
  REQUIRE(rf.exit_code == 0);
  json fheader = json::parse(slurp(packed_flag.string() + ".run.json"));
  CHECK(fheader["config"]["horizon"] == 1);
  CHECK(fheader["config"]["history_len"] == 3);  // still from the config
  CHECK(fheader["seed"] == 123);

  CHECK(run("--config /nonexistent.toml vocab inspect --vocab " + vocab.string() +
            " 2>/dev/null")
            .exit_code == 2);
}

TEST_CASE("data errors exit 2") {
  fs::path bad = work_dir() / "bad.jsonl";
  {
    std::ofstream out(bad);
    out << "{\"instruction\": 5}\n";
  }
  CHECK(run("codec encode --in " + bad.string() + " --out - 2>/dev/null")
            .exit_code == 2);
  CHECK(run("codec encode --in /nonexistent.jsonl --out - 2>/dev/null")
            .exit_code == 2);
}
