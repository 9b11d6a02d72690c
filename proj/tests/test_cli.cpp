// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>

#include "avbench/cli.hpp"
#include "avbench/corpus.hpp"

using namespace avbench;
using namespace avbench::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("avbench_cli_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("load_config parses key=value with comments") {
  TempDir dir;
  write_file(dir.file("run.cfg"),
             "# a comment\n"
             "seed=7\n"
             "mode = guided\n"
             "\n"
             "train.lr=2.5  \n");
  auto cfg = load_config(dir.file("run.cfg"));
  CHECK(cfg.get_seed() == 7);
  CHECK(cfg.get("mode") == "guided");
  CHECK(cfg.get_double("train.lr", 0.0) == doctest::Approx(2.5));
  CHECK(cfg.get("absent", "dflt") == "dflt");
  CHECK(cfg.get_int("absent", 42) == 42);

  // a later set() overrides the file value, as CLI flags do
  cfg.set("mode", "agentic");
  CHECK(cfg.get("mode") == "agentic");

  CHECK_THROWS_WITH_AS((void)load_config(dir.file("missing.cfg")),
                       doctest::Contains("IoError"), Error);

  RunConfig empty;
  CHECK_THROWS_WITH_AS((void)empty.get_seed(), doctest::Contains("ConfigError"),
                       Error);
}

TEST_CASE("parse helpers") {
  RunConfig cfg;
  cfg.set("seed", "3");
  cfg.set("quota.stg", "5");
  cfg.set("quota.csnl", "2");
  auto quotas = parse_quotas(cfg);
  CHECK(quotas.wanted.at(corpus::Task::STG) == 5);
  CHECK(quotas.wanted.at(corpus::Task::CSNL) == 2);
  // unspecified tasks keep the benchmark-scale defaults
  CHECK(quotas.wanted.at(corpus::Task::AVDS) == 400);

  cfg.set("train.beta", "0.9");
  cfg.set("train.variant", "velocity");
  auto tc = parse_train_config(cfg);
  CHECK(tc.beta == doctest::Approx(0.9));
  CHECK(tc.temporal_variant == raft::TemporalVariant::VelocityAugmented);
  CHECK(tc.seed == 3);
  cfg.set("train.variant", "sideways");
  CHECK_THROWS_AS((void)parse_train_config(cfg), Error);
}

TEST_CASE("cmd_build exit codes") {
  TempDir dir;
  RunConfig cfg;
  cfg.set("seed", "1");
  cfg.set("manifest", dir.file("absent.jsonl"));
  cfg.set("dataset", dir.file("dataset.jsonl"));
  cfg.set("stats", dir.file("stats.json"));
  CHECK(cmd_build(cfg) == kExitConfig);
}

TEST_CASE("small end-to-end pipeline through the commands") {
  TempDir dir;

  RunConfig gen;
  gen.set("seed", "11");
  gen.set("gen.clips", "3");
  gen.set("gen.csnl", "2");
  gen.set("manifest", dir.file("clips.jsonl"));
  gen.set("csnl", dir.file("csnl.jsonl"));
  REQUIRE(cmd_gen_manifest(gen) == kExitOk);
  // deterministic regeneration
  auto bytes = read_file(dir.file("clips.jsonl"));
  REQUIRE(cmd_gen_manifest(gen) == kExitOk);
  CHECK(read_file(dir.file("clips.jsonl")) == bytes);

  RunConfig build;
  build.set("seed", "11");
  build.set("manifest", dir.file("clips.jsonl"));
  build.set("csnl", dir.file("csnl.jsonl"));
  build.set("dataset", dir.file("dataset.jsonl"));
  build.set("stats", dir.file("stats.json"));
  build.set("quota.stg", "4");
  build.set("quota.avds", "0");
  build.set("quota.avsa", "4");
  build.set("quota.nsp", "0");
  build.set("quota.srid", "0");
  build.set("quota.csnl", "2");
  REQUIRE(cmd_build(build) == kExitOk);
  auto items = corpus::load_dataset_jsonl(dir.file("dataset.jsonl"));
  CHECK(items.size() == 10);

  // zero quotas: an empty dataset is still a success
  RunConfig empty_build = build;
  for (const char* key : {"quota.stg", "quota.avsa", "quota.csnl"}) {
    empty_build.set(key, "0");
  }
  empty_build.set("dataset", dir.file("empty.jsonl"));
  empty_build.set("stats", dir.file("empty_stats.json"));
  CHECK(cmd_build(empty_build) == kExitOk);
  CHECK(corpus::load_dataset_jsonl(dir.file("empty.jsonl")).empty());

  RunConfig eval;
  eval.set("seed", "11");
  eval.set("dataset", dir.file("dataset.jsonl"));
  eval.set("manifest", dir.file("clips.jsonl"));
  eval.set("mode", "guided");
  eval.set("model", "oracle");
  eval.set("tools", "mock");
  eval.set("records", dir.file("records.jsonl"));
  eval.set("scorecard", dir.file("scorecard.csv"));
  eval.set("plot_data", dir.file("plot.txt"));
  REQUIRE(cmd_eval(eval) == kExitOk);

  auto card = read_file(dir.file("scorecard.csv"));
  CHECK(card.find("STG") != std::string::npos);
  CHECK(card.find("CSNL") != std::string::npos);

  // resume: a second run re-evaluates nothing and rewrites the same records
  auto records_bytes = read_file(dir.file("records.jsonl"));
  REQUIRE(cmd_eval(eval) == kExitOk);
  CHECK(read_file(dir.file("records.jsonl")) == records_bytes);

  // report over the produced records
  RunConfig report;
  report.set("seed", "11");
  report.set("dataset", dir.file("dataset.jsonl"));
  report.set("report_dir", dir.file("reports"));
  REQUIRE(cmd_report(report, {dir.file("records.jsonl")}) == kExitOk);
  CHECK(fs::exists(dir.file("reports") + "/report.csv"));

  // a record with an unknown field is a schema failure
  auto tampered = records_bytes;
  auto pos = tampered.find("{\"sample_id\"");
  REQUIRE(pos != std::string::npos);
  tampered.insert(pos + 1, "\"mystery\":1,");
  write_file(dir.file("tampered.jsonl"), tampered);
  CHECK(cmd_report(report, {dir.file("tampered.jsonl")}) != kExitOk);
}

TEST_CASE("cmd_train writes trace and checkpoint deterministically") {
  TempDir dir;
  RunConfig train;
  train.set("seed", "5");
  train.set("train.iterations", "40");
  train.set("train.dataset_size", "24");
  train.set("trace", dir.file("trace.csv"));
  train.set("checkpoint", dir.file("checkpoint.json"));
  REQUIRE(cmd_train(train) == kExitOk);
  auto trace = read_file(dir.file("trace.csv"));
  CHECK(trace.find("iteration") != std::string::npos);
  REQUIRE(cmd_train(train) == kExitOk);
  CHECK(read_file(dir.file("trace.csv")) == trace);

  // method comparison output
  RunConfig cmp = train;
  cmp.set("train.seeds", "2");
  cmp.set("comparison", dir.file("comparison.csv"));
  REQUIRE(cmd_train(cmp) == kExitOk);
  auto comparison = read_file(dir.file("comparison.csv"));
  CHECK(comparison.find("final_raft") != std::string::npos);

  RunConfig bad = train;
  bad.set("method", "adam");
  CHECK(cmd_train(bad) == kExitConfig);
}
