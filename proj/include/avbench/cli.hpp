// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

#include "avbench/corpus.hpp"
#include "avbench/raft.hpp"

namespace avbench::cli {

/// Flat key=value run configuration; CLI flags override file values.
struct RunConfig {
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) > 0; }
  std::string get(const std::string& key,
                  const std::string& fallback = "") const;
  int get_int(const std::string& key, int fallback) const;
  double get_double(const std::string& key, double fallback) const;
  uint64_t get_seed() const;  // required: no implicit randomness
  void set(const std::string& key, const std::string& value) {
    values[key] = value;
  }
};

RunConfig load_config(const std::string& path);

/// Exit codes: 0 ok, 1 evaluation/metric failures, 2 configuration/IO.
constexpr int kExitOk = 0;
constexpr int kExitEvalFailure = 1;
constexpr int kExitConfig = 2;

int cmd_gen_manifest(const RunConfig& config);
int cmd_build(const RunConfig& config);
int cmd_eval(const RunConfig& config);
int cmd_train(const RunConfig& config);
int cmd_report(const RunConfig& config,
               const std::vector<std::string>& records_files);

// parsing helpers shared with tests
corpus::Quotas parse_quotas(const RunConfig& config);
raft::TrainConfig parse_train_config(const RunConfig& config);

}  // namespace avbench::cli
