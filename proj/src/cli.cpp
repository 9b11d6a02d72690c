// SPDX-License-Identifier: Apache-2.0
#include "avbench/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "avbench/extraction.hpp"
#include "avbench/harness.hpp"
#include "avbench/metrics.hpp"
#include "avbench/perception.hpp"
#include "avbench/synthetic.hpp"

namespace avbench::cli {

namespace fs = std::filesystem;
using corpus::QaItem;
using corpus::Task;
using harness::EvalMode;
using harness::EvalRecord;
using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// RunConfig
// ---------------------------------------------------------------------------

std::string RunConfig::get(const std::string& key,
                           const std::string& fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

int RunConfig::get_int(const std::string& key, int fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  try {
    return std::stoi(it->second);
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError,
                "key '" + key + "' is not an integer: " + it->second);
  }
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError,
                "key '" + key + "' is not a number: " + it->second);
  }
}

uint64_t RunConfig::get_seed() const {
  auto it = values.find("seed");
  if (it == values.end())
    throw Error(ErrorCode::ConfigError,
                "seed is required (no implicit randomness)");
  try {
    return std::stoull(it->second);
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError, "bad seed: " + it->second);
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path);
  RunConfig config;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    size_t a = line.find_first_not_of(" \t\r");
    if (a == std::string::npos) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::ConfigError,
                  path + ":" + std::to_string(lineno) + ": expected key=value");
    auto strip = [](std::string s) {
      size_t x = s.find_first_not_of(" \t\r");
      size_t y = s.find_last_not_of(" \t\r");
      return x == std::string::npos ? std::string() : s.substr(x, y - x + 1);
    };
    std::string key = strip(line.substr(0, eq));
    std::string value = strip(line.substr(eq + 1));
    if (key.empty())
      throw Error(ErrorCode::ConfigError,
                  path + ":" + std::to_string(lineno) + ": empty key");
    config.values[key] = value;
  }
  return config;
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

namespace {

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::ConfigError:
    case ErrorCode::IoError:
      return kExitConfig;
    default:
      return kExitEvalFailure;
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) return;
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << text;
}

perception::NoiseProfile parse_tools_profile(const std::string& spec,
                                             uint64_t seed) {
  perception::NoiseProfile profile;
  profile.seed = seed;
  // spec: "mock" or "mock:noise=SIGMA"
  size_t colon = spec.find(':');
  if (colon == std::string::npos) return profile;
  std::string rest = spec.substr(colon + 1);
  if (rest.rfind("noise=", 0) != 0)
    throw Error(ErrorCode::ConfigError, "bad tools spec: " + spec);
  double sigma = 0.0;
  try {
    sigma = std::stod(rest.substr(6));
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError, "bad tools noise: " + spec);
  }
  if (sigma < 0.0)
    throw Error(ErrorCode::ConfigError, "tools noise must be >= 0");
  profile.timestamp_jitter_sigma = sigma;
  profile.boundary_jitter_sigma = sigma;
  profile.word_error_rate = std::min(sigma, 0.9);
  profile.track_swap_prob = std::min(sigma, 1.0);
  return profile;
}

struct OracleSpec {
  double error_rate = 0.0;
};

OracleSpec parse_oracle_spec(const std::string& spec) {
  OracleSpec s;
  size_t colon = spec.find(':');
  if (colon == std::string::npos) return s;
  std::string rest = spec.substr(colon + 1);
  if (rest.rfind("err=", 0) != 0)
    throw Error(ErrorCode::ConfigError, "bad model spec: " + spec);
  try {
    s.error_rate = std::stod(rest.substr(4));
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError, "bad model error rate: " + spec);
  }
  return s;
}

std::map<std::string, harness::StructuredResponse> load_replay(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open replay file " + path);
  std::map<std::string, harness::StructuredResponse> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    harness::StructuredResponse r;
    r.plan = j.value("plan", "");
    r.act = j.value("act", "");
    r.reflect = j.value("reflect", "");
    r.final_answer = j.at("final_answer").get<std::string>();
    out[j.at("sample_id").get<std::string>()] = std::move(r);
  }
  return out;
}

std::unique_ptr<harness::ModelClient> make_model(
    const std::string& spec, const std::map<std::string, QaItem>* items,
    const std::map<std::string, harness::StructuredResponse>* replay,
    uint64_t seed) {
  if (spec.rfind("oracle", 0) == 0) {
    OracleSpec o = parse_oracle_spec(spec);
    return std::make_unique<harness::GoldOracleClient>(items, o.error_rate,
                                                       seed);
  }
  if (spec.rfind("replay:", 0) == 0)
    return std::make_unique<harness::ReplayClient>(*replay);
  if (spec == "remote")
    return std::make_unique<harness::RemoteClient>(
        harness::RemoteClient::from_env());
  throw Error(ErrorCode::ConfigError, "unknown model spec: " + spec);
}

std::vector<metrics::ScoredSample> score_records(
    const std::map<std::string, QaItem>& items,
    const std::vector<EvalRecord>& records) {
  // CIDEr document frequencies come from the gold AVDS references
  std::vector<std::vector<metrics::Tokens>> cider_corpus;
  for (const auto& [id, item] : items) {
    if (item.task == Task::AVDS)
      cider_corpus.push_back(
          {tokenize(std::get<std::string>(item.gold.value))});
  }

  std::vector<metrics::ScoredSample> out;
  for (const auto& rec : records) {
    auto it = items.find(rec.sample_id);
    if (it == items.end())
      throw Error(ErrorCode::SchemaError,
                  "record for unknown sample " + rec.sample_id);
    const QaItem& item = it->second;

    metrics::ScoredSample s;
    s.task = corpus::task_name(item.task);
    s.mode = harness::mode_name(rec.mode);
    s.model = rec.model_id;
    s.is_mcq = item.is_mcq();

    const std::string& answer = rec.response.final_answer;
    if (item.is_mcq()) {
      auto ext = extraction::extract_choice(item.question, item.options,
                                            answer, nullptr);
      if (ext.label) {
        s.extracted_label = std::string(1, *ext.label);
      } else {
        s.no_match = true;
      }
      s.gold_label = std::string(1, item.gold_label());
    } else if (item.task == Task::STG) {
      auto iv = harness::parse_interval_answer(answer);
      s.tiou_score =
          iv ? metrics::tiou(*iv, std::get<Interval>(item.gold.value)) : 0.0;
    } else {
      metrics::Tokens cand = tokenize(answer);
      metrics::Tokens ref = tokenize(std::get<std::string>(item.gold.value));
      metrics::GenerationScores g;
      g.bleu4 = metrics::bleu4(cand, {ref});
      g.meteor = metrics::meteor_lite(cand, ref);
      g.cider = metrics::cider(cand, {ref}, cider_corpus);
      s.generation = g;
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

corpus::Quotas parse_quotas(const RunConfig& config) {
  corpus::Quotas quotas = corpus::Quotas::benchmark_default();
  for (Task t : corpus::kAllTasks) {
    std::string key = "quota." + corpus::task_name(t);
    std::transform(key.begin(), key.end(), key.begin(), ::tolower);
    if (config.has(key)) quotas.wanted[t] = config.get_int(key, 0);
  }
  return quotas;
}

raft::TrainConfig parse_train_config(const RunConfig& config) {
  raft::TrainConfig tc;
  tc.alpha = config.get_double("train.alpha", tc.alpha);
  tc.beta = config.get_double("train.beta", tc.beta);
  tc.gamma = config.get_double("train.gamma", tc.gamma);
  tc.lambda_reg = config.get_double("train.lambda_reg", tc.lambda_reg);
  tc.k_candidates = config.get_int("train.k", tc.k_candidates);
  tc.learning_rate = config.get_double("train.lr", tc.learning_rate);
  tc.iterations = config.get_int("train.iterations", tc.iterations);
  tc.batch_size = config.get_int("train.batch", tc.batch_size);
  tc.seed = config.get_seed();
  std::string variant = config.get("train.variant", "main");
  if (variant == "main") {
    tc.temporal_variant = raft::TemporalVariant::Main;
  } else if (variant == "velocity") {
    tc.temporal_variant = raft::TemporalVariant::VelocityAugmented;
  } else {
    throw Error(ErrorCode::ConfigError, "unknown train.variant " + variant);
  }
  return tc;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_gen_manifest(const RunConfig& config) {
  try {
    synthetic::ManifestSpec spec;
    spec.n_clips = config.get_int("gen.clips", spec.n_clips);
    spec.n_csnl = config.get_int("gen.csnl", spec.n_csnl);
    spec.seed = config.get_seed();
    corpus::Manifest manifest = synthetic::make_manifest(spec);

    std::string clips_path = config.get("manifest", "clips.jsonl");
    std::string csnl_path = config.get("csnl", "csnl.jsonl");
    fs::path cp(clips_path);
    if (cp.has_parent_path()) fs::create_directories(cp.parent_path());
    fs::path kp(csnl_path);
    if (kp.has_parent_path()) fs::create_directories(kp.parent_path());
    corpus::save_clips_jsonl(clips_path, manifest.clips);
    corpus::save_csnl_jsonl(csnl_path, manifest.csnl);
    std::cout << "wrote " << manifest.clips.size() << " clips to "
              << clips_path << " and " << manifest.csnl.size()
              << " narrative records to " << csnl_path << "\n";
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << "gen-manifest: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

int cmd_build(const RunConfig& config) {
  try {
    corpus::Manifest manifest;
    manifest.clips = corpus::load_clips_jsonl(config.get("manifest",
                                                         "clips.jsonl"));
    std::string csnl_path = config.get("csnl");
    if (!csnl_path.empty() && fs::exists(csnl_path))
      manifest.csnl = corpus::load_csnl_jsonl(csnl_path);

    auto [items, stats] =
        corpus::build_dataset(manifest, parse_quotas(config),
                              config.get_seed());
    std::string dataset_path = config.get("dataset", "dataset.jsonl");
    corpus::save_dataset_jsonl(dataset_path, items);
    write_text(config.get("stats", "stats.json"),
               corpus::to_json(stats).dump(2) + "\n");
    std::cout << "built " << stats.total << " items -> " << dataset_path
              << "\n";
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << "build: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

int cmd_eval(const RunConfig& config) {
  try {
    uint64_t seed = config.get_seed();
    std::vector<QaItem> dataset =
        corpus::load_dataset_jsonl(config.get("dataset", "dataset.jsonl"));
    std::map<std::string, QaItem> items;
    for (const auto& item : dataset) items[item.sample_id] = item;

    EvalMode mode = harness::mode_from_name(config.get("mode", "zero-shot"));
    std::string model_spec = config.get("model", "oracle");
    std::string tools_spec = config.get("tools", "mock");
    int budget = config.get_int("budget", harness::kDefaultAgentBudget);
    int workers = std::max(1, config.get_int("workers", 1));
    std::string records_path = config.get("records", "records.jsonl");

    std::map<std::string, harness::StructuredResponse> replay;
    if (model_spec.rfind("replay:", 0) == 0)
      replay = load_replay(model_spec.substr(7));

    corpus::ClipIndex clips;
    bool mock_tools = tools_spec.rfind("mock", 0) == 0;
    bool needs_tools = mode != EvalMode::ZeroShot;
    if (needs_tools && mock_tools) {
      for (auto& clip :
           corpus::load_clips_jsonl(config.get("manifest", "clips.jsonl")))
        clips[clip.clip_id] = std::move(clip);
    }
    perception::NoiseProfile profile = parse_tools_profile(tools_spec, seed);

    std::string cache_dir = config.get("cache_dir");
    if (cache_dir.empty()) {
      const char* env = std::getenv("TOOL_CACHE_DIR");
      if (env) cache_dir = env;
    }

    // resume: ids already in the records file are not re-evaluated
    std::set<std::string> done;
    std::vector<EvalRecord> existing;
    if (fs::exists(records_path)) {
      std::ifstream in(records_path);
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        EvalRecord r = harness::record_from_json(json::parse(line));
        done.insert(r.sample_id);
        existing.push_back(std::move(r));
      }
    }
    std::vector<const QaItem*> todo;
    for (const auto& item : dataset)
      if (!done.count(item.sample_id)) todo.push_back(&item);

    std::vector<std::optional<EvalRecord>> results(todo.size());
    std::vector<std::pair<std::string, std::string>> failures;
    std::mutex failures_mutex;
    std::atomic<size_t> next{0};

    auto worker_fn = [&]() {
      auto model = make_model(model_spec, &items, &replay, seed);
      std::unique_ptr<perception::Transport> transport;
      if (needs_tools) {
        if (mock_tools) {
          transport =
              std::make_unique<perception::MockTransport>(&clips, profile);
        } else if (tools_spec == "remote") {
          transport = std::make_unique<perception::RemoteTransport>(
              perception::RemoteTransport::from_env());
        } else {
          throw Error(ErrorCode::ConfigError,
                      "unknown tools spec: " + tools_spec);
        }
      }
      std::optional<perception::ToolClient> tools;
      if (transport) tools.emplace(*transport, cache_dir);

      while (true) {
        size_t i = next.fetch_add(1);
        if (i >= todo.size()) break;
        const QaItem& item = *todo[i];
        try {
          EvalRecord rec;
          switch (mode) {
            case EvalMode::ZeroShot:
              rec = harness::run_zero_shot(item, *model);
              break;
            case EvalMode::Guided:
              rec = harness::run_guided(item, *model, *tools);
              break;
            case EvalMode::Agentic:
              rec = harness::run_agentic(item, *model, *tools, budget);
              break;
          }
          rec.latency_ms = 0.0;  // wall-clock excluded from persisted output
          results[i] = std::move(rec);
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(failures_mutex);
          failures.emplace_back(item.sample_id, e.what());
        }
      }
    };

    if (!tools_spec.empty() && !mock_tools && tools_spec != "remote")
      throw Error(ErrorCode::ConfigError, "unknown tools spec: " + tools_spec);

    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(worker_fn);
    worker_fn();
    for (auto& t : pool) t.join();

    {
      fs::path rp(records_path);
      if (rp.has_parent_path()) fs::create_directories(rp.parent_path());
      std::ofstream out(records_path, std::ios::app);
      if (!out)
        throw Error(ErrorCode::IoError, "cannot write " + records_path);
      for (const auto& rec : results)
        if (rec) out << harness::to_json(*rec).dump() << '\n';
    }

    // score everything now on file (resumed + fresh)
    std::vector<EvalRecord> all = std::move(existing);
    for (auto& rec : results)
      if (rec) all.push_back(std::move(*rec));
    metrics::ScoreCard card = metrics::aggregate(score_records(items, all));
    write_text(config.get("scorecard", "scorecard.csv"), card.to_csv());
    write_text(config.get("plot_data", "plot_data.txt"),
               card.to_plot_data());

    if (!failures.empty()) {
      std::cerr << failures.size() << " samples failed:\n";
      for (const auto& [id, why] : failures)
        std::cerr << "  " << id << ": " << why << "\n";
      return kExitEvalFailure;
    }
    std::cout << "evaluated " << results.size() << " samples ("
              << existing.size() << " resumed) -> " << records_path << "\n";
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << "eval: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

int cmd_train(const RunConfig& config) {
  std::vector<raft::TraceRow> partial;
  std::string trace_path = config.get("trace", "trace.csv");
  try {
    raft::TrainConfig tc = parse_train_config(config);
    std::string method_name = config.get("method", "raft");
    raft::Method method;
    if (method_name == "raft") {
      method = raft::Method::Raft;
    } else if (method_name == "grpo-lite") {
      method = raft::Method::GrpoLite;
    } else {
      throw Error(ErrorCode::ConfigError, "unknown method " + method_name);
    }

    int dataset_size = config.get_int("train.dataset_size", 64);
    auto dataset = raft::make_toy_dataset(dataset_size, tc.seed);
    raft::TrainResult result = raft::train(
        dataset, tc, method,
        [&partial](const raft::TraceRow& row) { partial.push_back(row); });

    write_text(trace_path, raft::trace_csv(result.trace));
    write_text(config.get("checkpoint", "checkpoint.json"),
               raft::checkpoint_to_json(result.policy).dump() + "\n");

    int n_seeds = config.get_int("train.seeds", 0);
    if (n_seeds > 0) {
      auto outcomes = raft::compare_methods(n_seeds, tc, dataset_size);
      std::ostringstream csv;
      csv << "seed,initial_reward,final_raft,final_grpo\n";
      csv.precision(12);
      for (const auto& o : outcomes)
        csv << o.seed << ',' << o.initial_reward << ',' << o.final_raft
            << ',' << o.final_grpo << '\n';
      write_text(config.get("comparison", "comparison.csv"), csv.str());
    }
    std::cout << "trained " << method_name << ": reward "
              << result.initial_reward << " -> " << result.final_reward
              << "\n";
    return kExitOk;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DivergenceDetected)
      write_text(trace_path, raft::trace_csv(partial));  // keep partial trace
    std::cerr << "train: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

int cmd_report(const RunConfig& config,
               const std::vector<std::string>& records_files) {
  try {
    if (records_files.empty())
      throw Error(ErrorCode::ConfigError, "report needs >= 1 records file");
    std::vector<QaItem> dataset =
        corpus::load_dataset_jsonl(config.get("dataset", "dataset.jsonl"));
    std::map<std::string, QaItem> items;
    for (const auto& item : dataset) items[item.sample_id] = item;

    std::vector<EvalRecord> all;
    for (const auto& path : records_files) {
      std::ifstream in(path);
      if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j;
        try {
          j = json::parse(line);
        } catch (const std::exception& e) {
          throw Error(ErrorCode::SchemaError,
                      path + ": bad record line: " + e.what());
        }
        all.push_back(harness::record_from_json(j, /*strict=*/true));
      }
    }

    metrics::ScoreCard card = metrics::aggregate(score_records(items, all));
    std::string report_dir = config.get("report_dir", "reports");
    fs::create_directories(report_dir);
    write_text((fs::path(report_dir) / "report.csv").string(), card.to_csv());
    write_text((fs::path(report_dir) / "plot_data.txt").string(),
               card.to_plot_data());
    std::cout << "report over " << all.size() << " records -> " << report_dir
              << "\n";
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << "report: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

}  // namespace avbench::cli
