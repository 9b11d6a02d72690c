// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "avbench/corpus.hpp"
#include "avbench/perception.hpp"

namespace avbench::harness {

using corpus::QaItem;
using corpus::Task;
using perception::CueBundle;
using perception::CueKind;
using perception::ToolClient;
using perception::ToolKind;
using json = nlohmann::ordered_json;

enum class EvalMode { ZeroShot, Guided, Agentic };
std::string mode_name(EvalMode m);
EvalMode mode_from_name(const std::string& name);

struct PromptBundle {
  std::string system_text;
  std::string task_text;
  std::map<CueKind, json> cues;           // Guided only
  std::vector<std::string> tool_catalog;  // Agentic only
  // option order as presented (CircularEval rotates contents)
  std::vector<corpus::Option> options;
  std::string sample_id;
  Task task = Task::STG;
};

struct StructuredResponse {
  std::string plan;
  std::string act;
  std::string reflect;
  std::string final_answer;  // non-empty
};

struct AgentStep {
  int index = 0;
  enum class Decision { CallTool, Answer } decision = Decision::Answer;
  ToolKind tool = ToolKind::Asr;
  json params = json::object();
  std::string result_digest;
  std::string rationale;
};

struct EvalRecord {
  std::string sample_id;
  EvalMode mode = EvalMode::ZeroShot;
  StructuredResponse response;
  std::vector<AgentStep> steps;  // Agentic only
  double latency_ms = 0.0;
  std::string model_id;
};

json to_json(const EvalRecord& r);
/// `strict` rejects unknown fields (SchemaError naming the field).
EvalRecord record_from_json(const json& j, bool strict = false);

// ---------------------------------------------------------------------------
// Model clients
// ---------------------------------------------------------------------------

class ModelClient {
 public:
  virtual ~ModelClient() = default;
  /// `context` carries accumulated agentic turns (tool results etc.).
  virtual StructuredResponse complete(
      const PromptBundle& bundle, const std::vector<std::string>& context) = 0;
  virtual std::string model_id() const = 0;
};

/// Answers from the gold annotation, optionally flipping answers at a
/// configurable error rate. Lets the harness run without any real model.
class GoldOracleClient : public ModelClient {
 public:
  GoldOracleClient(const std::map<std::string, QaItem>* items,
                   double error_rate = 0.0, uint64_t seed = 0)
      : items_(items), error_rate_(error_rate), seed_(seed) {}
  StructuredResponse complete(const PromptBundle& bundle,
                              const std::vector<std::string>& context) override;
  std::string model_id() const override { return "oracle"; }

 private:
  const std::map<std::string, QaItem>* items_;
  double error_rate_;
  uint64_t seed_;  // flips are derived per sample id: order-independent
};

/// Replays canned responses keyed by sample id (fallback: sequential).
class ReplayClient : public ModelClient {
 public:
  explicit ReplayClient(std::map<std::string, StructuredResponse> by_sample)
      : by_sample_(std::move(by_sample)) {}
  explicit ReplayClient(std::vector<StructuredResponse> sequence)
      : sequence_(std::move(sequence)) {}
  StructuredResponse complete(const PromptBundle& bundle,
                              const std::vector<std::string>& context) override;
  std::string model_id() const override { return "replay"; }

 private:
  std::map<std::string, StructuredResponse> by_sample_;
  std::vector<StructuredResponse> sequence_;
  size_t next_ = 0;
};

/// Emits a fixed sequence of agentic decision lines.
class ScriptedClient : public ModelClient {
 public:
  explicit ScriptedClient(std::vector<std::string> decisions)
      : decisions_(std::move(decisions)) {}
  StructuredResponse complete(const PromptBundle& bundle,
                              const std::vector<std::string>& context) override;
  std::string model_id() const override { return "scripted"; }
  int calls() const { return calls_; }

 private:
  std::vector<std::string> decisions_;
  int calls_ = 0;
};

/// POST {bundle, context} to MODEL_URL with MODEL_API_KEY auth header.
class RemoteClient : public ModelClient {
 public:
  RemoteClient(std::string url, std::string api_key)
      : url_(std::move(url)), api_key_(std::move(api_key)) {}
  static RemoteClient from_env();
  StructuredResponse complete(const PromptBundle& bundle,
                              const std::vector<std::string>& context) override;
  std::string model_id() const override { return "remote"; }

 private:
  std::string url_;
  std::string api_key_;
};

// ---------------------------------------------------------------------------
// Evaluation protocols
// ---------------------------------------------------------------------------

/// Builds the prompt for a mode. Guided requires `cues` to carry exactly
/// required_cues(item.task); the other modes require no cues.
PromptBundle assemble_prompt(const QaItem& item, EvalMode mode,
                             const std::optional<CueBundle>& cues);

EvalRecord run_zero_shot(const QaItem& item, ModelClient& model);

/// Computes (or cache-serves) all required cues, then makes one model call.
EvalRecord run_guided(const QaItem& item, ModelClient& model,
                      ToolClient& tools);

constexpr int kDefaultAgentBudget = 4;

/// Iterative decision loop: `TOOL <kind> <json-params>` lines execute a tool,
/// `ANSWER <text>` ends the loop. Budget exhaustion forces an answer.
EvalRecord run_agentic(const QaItem& item, ModelClient& model,
                       ToolClient& toolbox, int budget = kDefaultAgentBudget);

struct OracleToolPolicy {
  std::map<Task, std::set<ToolKind>> expected;

  /// Derived from the cue matrix: one tool per required cue.
  static OracleToolPolicy from_cue_matrix();
};

/// Mean exact-match between each record's invoked-tool set and the oracle
/// set for its task. All records must be Agentic.
double tool_decision_accuracy(
    const std::vector<std::pair<EvalRecord, Task>>& records,
    const OracleToolPolicy& oracle);

/// Gold answer rendered in the format the oracle client uses (label for MCQ,
/// "start end" for STG, reference text for AVDS).
std::string render_gold_answer(const QaItem& item);

/// Parses "<start> <end>" interval answers (STG scoring).
std::optional<Interval> parse_interval_answer(const std::string& text);

}  // namespace avbench::harness
