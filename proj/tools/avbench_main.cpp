// SPDX-License-Identifier: Apache-2.0
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "avbench/cli.hpp"

namespace {

using avbench::cli::RunConfig;

struct CommonFlags {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "flat key=value config file");
  cmd->add_option("--set", flags.overrides,
                  "extra key=value overrides (repeatable)");
}

RunConfig resolve_config(const CommonFlags& flags) {
  RunConfig config;
  if (!flags.config_path.empty())
    config = avbench::cli::load_config(flags.config_path);
  for (const auto& kv : flags.overrides) {
    size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw avbench::Error(avbench::ErrorCode::ConfigError,
                           "override must be key=value: " + kv);
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-speaker audio-visual benchmark harness"};
  app.require_subcommand(1);

  CommonFlags gen_flags, build_flags, eval_flags, train_flags, report_flags;

  auto* gen = app.add_subcommand("gen-manifest",
                                 "write a synthetic annotation manifest");
  add_common(gen, gen_flags);
  std::string gen_seed;
  gen->add_option("--seed", gen_seed, "generator seed");

  auto* build = app.add_subcommand("build", "build the QA dataset");
  add_common(build, build_flags);
  std::string build_seed;
  std::vector<std::string> quota_flags;
  build->add_option("--seed", build_seed, "build seed");
  build->add_option("--quota", quota_flags, "per-task quota, e.g. stg=400");

  auto* eval = app.add_subcommand("eval", "run an evaluation protocol");
  add_common(eval, eval_flags);
  std::string mode, model, tools, eval_seed;
  int budget = -1, workers = -1;
  eval->add_option("--mode", mode, "zero-shot | guided | agentic");
  eval->add_option("--model", model, "oracle | replay:PATH | remote");
  eval->add_option("--tools", tools, "mock:noise=SIGMA | remote");
  eval->add_option("--budget", budget, "agentic tool budget");
  eval->add_option("--workers", workers, "concurrent workers");
  eval->add_option("--seed", eval_seed, "evaluation seed");

  auto* train = app.add_subcommand("train", "train the toy policy");
  add_common(train, train_flags);
  std::string method, train_seed;
  int iters = -1, seeds = -1;
  train->add_option("--method", method, "raft | grpo-lite");
  train->add_option("--iters", iters, "iteration count");
  train->add_option("--seeds", seeds, "paired-seed comparison count");
  train->add_option("--seed", train_seed, "training seed");

  auto* report = app.add_subcommand("report", "aggregate records files");
  add_common(report, report_flags);
  std::vector<std::string> records_files;
  report->add_option("records", records_files, "records.jsonl files");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      RunConfig config = resolve_config(gen_flags);
      if (!gen_seed.empty()) config.set("seed", gen_seed);
      return avbench::cli::cmd_gen_manifest(config);
    }
    if (build->parsed()) {
      RunConfig config = resolve_config(build_flags);
      if (!build_seed.empty()) config.set("seed", build_seed);
      for (const auto& q : quota_flags) {
        size_t eq = q.find('=');
        if (eq == std::string::npos) {
          std::cerr << "bad --quota (want task=N): " << q << "\n";
          return avbench::cli::kExitConfig;
        }
        config.set("quota." + q.substr(0, eq), q.substr(eq + 1));
      }
      return avbench::cli::cmd_build(config);
    }
    if (eval->parsed()) {
      RunConfig config = resolve_config(eval_flags);
      if (!mode.empty()) config.set("mode", mode);
      if (!model.empty()) config.set("model", model);
      if (!tools.empty()) config.set("tools", tools);
      if (budget >= 0) config.set("budget", std::to_string(budget));
      if (workers >= 0) config.set("workers", std::to_string(workers));
      if (!eval_seed.empty()) config.set("seed", eval_seed);
      return avbench::cli::cmd_eval(config);
    }
    if (train->parsed()) {
      RunConfig config = resolve_config(train_flags);
      if (!method.empty()) config.set("method", method);
      if (iters >= 0) config.set("train.iterations", std::to_string(iters));
      if (seeds >= 0) config.set("train.seeds", std::to_string(seeds));
      if (!train_seed.empty()) config.set("seed", train_seed);
      return avbench::cli::cmd_train(config);
    }
    if (report->parsed()) {
      RunConfig config = resolve_config(report_flags);
      return avbench::cli::cmd_report(config, records_files);
    }
  } catch (const avbench::Error& e) {
    std::cerr << e.what() << "\n";
    return e.code() == avbench::ErrorCode::ConfigError ||
                   e.code() == avbench::ErrorCode::IoError
               ? avbench::cli::kExitConfig
               : avbench::cli::kExitEvalFailure;
  }
  return avbench::cli::kExitConfig;
}
