// SPDX-License-Identifier: Apache-2.0
#include "avbench/harness.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include <httplib.h>

namespace avbench::harness {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string format_seconds(double s) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", s);
  return buf;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string answer_instruction(const QaItem& item) {
  if (item.is_mcq())
    return "Reply with the letter of the correct option.";
  if (item.task == Task::STG)
    return "Reply with the start and end time of the span in seconds, "
           "separated by a space.";
  return "Summarize the dialogue in the window in one short passage.";
}

std::string render_options(const std::vector<corpus::Option>& options) {
  std::ostringstream out;
  for (const auto& opt : options)
    out << opt.label << ") " << opt.content << "\n";
  return out.str();
}

constexpr const char* kRetryNote =
    "Your previous reply could not be parsed. Reply with exactly one line: "
    "TOOL <name> <json-params> or ANSWER <text>.";
constexpr const char* kBudgetNote =
    "The tool budget is exhausted. You must answer now with one line: "
    "ANSWER <text>.";

struct Decision {
  bool is_answer = false;
  std::string answer_text;
  ToolKind tool = ToolKind::Asr;
  json params = json::object();
};

std::optional<Decision> parse_decision(const std::string& text) {
  std::string line = trim(text);
  // only the first line carries the decision
  size_t nl = line.find('\n');
  if (nl != std::string::npos) line = trim(line.substr(0, nl));
  if (line.rfind("ANSWER ", 0) == 0) {
    Decision d;
    d.is_answer = true;
    d.answer_text = trim(line.substr(7));
    if (d.answer_text.empty()) return std::nullopt;
    return d;
  }
  if (line.rfind("TOOL ", 0) == 0) {
    std::string rest = trim(line.substr(5));
    size_t sp = rest.find(' ');
    std::string name = sp == std::string::npos ? rest : rest.substr(0, sp);
    std::string body = sp == std::string::npos ? "{}" : trim(rest.substr(sp));
    Decision d;
    try {
      d.tool = perception::tool_from_name(name);
      d.params = json::parse(body);
    } catch (const std::exception&) {
      return std::nullopt;
    }
    if (!d.params.is_object()) return std::nullopt;
    return d;
  }
  return std::nullopt;
}

std::string digest_payload(ToolKind tool, const json& payload) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(payload.dump())));
  return perception::tool_name(tool) + ":" + buf;
}

json bundle_to_json(const PromptBundle& b) {
  json cues = json::object();
  for (const auto& [kind, payload] : b.cues)
    cues[perception::cue_name(kind)] = payload;
  json options = json::array();
  for (const auto& opt : b.options)
    options.push_back({{"label", std::string(1, opt.label)},
                       {"content", opt.content}});
  return json{{"sample_id", b.sample_id},
              {"task", corpus::task_name(b.task)},
              {"system_text", b.system_text},
              {"task_text", b.task_text},
              {"cues", cues},
              {"tool_catalog", b.tool_catalog},
              {"options", options}};
}

}  // namespace

std::string mode_name(EvalMode m) {
  switch (m) {
    case EvalMode::ZeroShot: return "zero-shot";
    case EvalMode::Guided: return "guided";
    case EvalMode::Agentic: return "agentic";
  }
  return "?";
}

EvalMode mode_from_name(const std::string& name) {
  if (name == "zero-shot" || name == "zeroshot") return EvalMode::ZeroShot;
  if (name == "guided") return EvalMode::Guided;
  if (name == "agentic") return EvalMode::Agentic;
  throw Error(ErrorCode::ConfigError, "unknown eval mode '" + name + "'");
}

// ---------------------------------------------------------------------------
// Prompt assembly
// ---------------------------------------------------------------------------

PromptBundle assemble_prompt(const QaItem& item, EvalMode mode,
                             const std::optional<CueBundle>& cues) {
  PromptBundle b;
  b.sample_id = item.sample_id;
  b.task = item.task;
  b.options = item.options;

  bool has_cues = cues.has_value() && !cues->payloads.empty();
  if (mode != EvalMode::Guided && has_cues)
    throw Error(ErrorCode::CueMismatch,
                mode_name(mode) + " bundles carry no cue payloads (" +
                    item.sample_id + ")");

  std::ostringstream task_text;
  task_text << "Task: " << corpus::task_name(item.task) << "\n";
  task_text << "Question: " << item.question << "\n";
  if (!item.options.empty())
    task_text << "Options:\n" << render_options(item.options);

  switch (mode) {
    case EvalMode::ZeroShot:
      b.system_text =
          "You are answering a question about a multi-speaker audio-visual "
          "clip. No perceptual cues or tools are provided; answer from the "
          "question alone. " +
          answer_instruction(item);
      break;
    case EvalMode::Guided: {
      auto wanted = perception::required_cues(item.task);
      std::set<CueKind> got;
      if (cues)
        for (const auto& [kind, payload] : cues->payloads) got.insert(kind);
      if (got != wanted) {
        std::string msg = "guided bundle for " + item.sample_id +
                          " must carry exactly the cues required by task " +
                          corpus::task_name(item.task);
        throw Error(ErrorCode::CueMismatch, msg);
      }
      b.system_text =
          "You are answering a question about a multi-speaker audio-visual "
          "clip. Structured perceptual cues are attached below; ground your "
          "answer in them and do not infer speakers, timestamps, or events "
          "the cues do not support. " +
          answer_instruction(item);
      b.cues = cues->payloads;
      task_text << "Cues:\n";
      for (const auto& [kind, payload] : b.cues)
        task_text << "[" << perception::cue_name(kind)
                  << "] " << payload.dump() << "\n";
      break;
    }
    case EvalMode::Agentic:
      b.system_text =
          "You are answering a question about a multi-speaker audio-visual "
          "clip. You may call perception tools before answering; avoid "
          "unnecessary tool calls. Each turn, reply with exactly one line: "
          "TOOL <name> <json-params> to invoke a tool, or ANSWER <text> to "
          "answer. " +
          answer_instruction(item);
      for (auto t : perception::kAllTools)
        b.tool_catalog.push_back(perception::tool_name(t));
      task_text << "Tools: ";
      for (size_t i = 0; i < b.tool_catalog.size(); ++i)
        task_text << (i ? ", " : "") << b.tool_catalog[i];
      task_text << "\n";
      break;
  }
  b.task_text = task_text.str();
  return b;
}

// ---------------------------------------------------------------------------
// Gold answer rendering
// ---------------------------------------------------------------------------

std::string render_gold_answer(const QaItem& item) {
  if (item.is_mcq()) return std::string(1, item.gold_label());
  if (item.task == Task::STG) {
    const auto& iv = std::get<Interval>(item.gold.value);
    return format_seconds(iv.start) + " " + format_seconds(iv.end);
  }
  return std::get<std::string>(item.gold.value);
}

std::optional<Interval> parse_interval_answer(const std::string& text) {
  const char* p = text.c_str();
  char* end = nullptr;
  double a = std::strtod(p, &end);
  if (end == p) return std::nullopt;
  p = end;
  double b = std::strtod(p, &end);
  if (end == p) return std::nullopt;
  // reject trailing junk beyond whitespace/punctuation
  for (const char* q = end; *q; ++q)
    if (!std::isspace(static_cast<unsigned char>(*q))) return std::nullopt;
  if (b < a) return std::nullopt;
  return Interval{a, b};
}

// ---------------------------------------------------------------------------
// Model clients
// ---------------------------------------------------------------------------

StructuredResponse GoldOracleClient::complete(
    const PromptBundle& bundle, const std::vector<std::string>& context) {
  (void)context;
  auto it = items_->find(bundle.sample_id);
  if (it == items_->end())
    throw Error(ErrorCode::ModelError,
                "oracle has no item " + bundle.sample_id);
  const QaItem& item = it->second;

  std::string answer;
  SeededRng flip_rng(mix_seed(seed_, fnv1a(bundle.sample_id)));
  bool flip = error_rate_ > 0.0 && flip_rng.uniform() < error_rate_;
  if (item.is_mcq()) {
    // answer by content so option rotation cannot de-synchronize the label
    std::string gold = item.gold_content();
    char label = 0;
    for (const auto& opt : bundle.options)
      if (opt.content == gold) label = opt.label;
    if (label == 0)
      throw Error(ErrorCode::ModelError,
                  "gold content missing from presented options for " +
                      bundle.sample_id);
    if (flip) {
      size_t idx = 0;
      for (size_t i = 0; i < bundle.options.size(); ++i)
        if (bundle.options[i].label == label) idx = i;
      label = bundle.options[(idx + 1) % bundle.options.size()].label;
    }
    answer = std::string(1, label);
  } else if (item.task == Task::STG) {
    Interval iv = std::get<Interval>(item.gold.value);
    if (flip) {
      double shift = std::max(1.0, iv.length()) * 2.0;
      iv = {iv.start + shift, iv.end + shift};
    }
    answer = format_seconds(iv.start) + " " + format_seconds(iv.end);
  } else {
    answer = flip ? "no relevant dialogue occurs"
                  : std::get<std::string>(item.gold.value);
  }

  StructuredResponse r;
  r.plan = "locate the gold annotation";
  r.act = "read the answer";
  r.reflect = "consistent with the record";
  bool agentic = !bundle.tool_catalog.empty();
  r.final_answer = agentic ? "ANSWER " + answer : answer;
  return r;
}

StructuredResponse ReplayClient::complete(
    const PromptBundle& bundle, const std::vector<std::string>& context) {
  (void)context;
  if (!by_sample_.empty()) {
    auto it = by_sample_.find(bundle.sample_id);
    if (it == by_sample_.end())
      throw Error(ErrorCode::ModelError,
                  "no replay entry for " + bundle.sample_id);
    return it->second;
  }
  if (next_ >= sequence_.size())
    throw Error(ErrorCode::ModelError, "replay sequence exhausted at " +
                                           bundle.sample_id);
  return sequence_[next_++];
}

StructuredResponse ScriptedClient::complete(
    const PromptBundle& bundle, const std::vector<std::string>& context) {
  (void)bundle;
  (void)context;
  ++calls_;
  StructuredResponse r;
  r.final_answer = calls_ <= static_cast<int>(decisions_.size())
                       ? decisions_[calls_ - 1]
                       : "ANSWER [script exhausted]";
  return r;
}

RemoteClient RemoteClient::from_env() {
  const char* url = std::getenv("MODEL_URL");
  if (!url || !*url)
    throw Error(ErrorCode::ConfigError, "MODEL_URL is not set");
  const char* key = std::getenv("MODEL_API_KEY");
  return RemoteClient(url, key ? key : "");
}

StructuredResponse RemoteClient::complete(
    const PromptBundle& bundle, const std::vector<std::string>& context) {
  json body{{"bundle", bundle_to_json(bundle)}, {"context", context}};
  httplib::Client cli(url_);
  cli.set_read_timeout(60, 0);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("MODEL_API_KEY", api_key_);
  auto res = cli.Post("/complete", headers, body.dump(), "application/json");
  if (!res || res->status != 200)
    throw Error(ErrorCode::ModelError,
                "remote model call failed for " + bundle.sample_id +
                    (res ? " (status " + std::to_string(res->status) + ")"
                         : " (no response)"));
  try {
    json j = json::parse(res->body);
    StructuredResponse r;
    r.plan = j.value("plan", "");
    r.act = j.value("act", "");
    r.reflect = j.value("reflect", "");
    r.final_answer = j.at("final_answer").get<std::string>();
    if (r.final_answer.empty())
      throw Error(ErrorCode::ModelError, "empty final_answer");
    return r;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::ModelError,
                std::string("bad remote model payload: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Protocols
// ---------------------------------------------------------------------------

EvalRecord run_zero_shot(const QaItem& item, ModelClient& model) {
  auto t0 = Clock::now();
  PromptBundle bundle = assemble_prompt(item, EvalMode::ZeroShot, std::nullopt);
  EvalRecord rec;
  rec.sample_id = item.sample_id;
  rec.mode = EvalMode::ZeroShot;
  rec.model_id = model.model_id();
  try {
    rec.response = model.complete(bundle, {});
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::ModelError,
                item.sample_id + ": " + e.what());
  }
  rec.latency_ms = elapsed_ms(t0);
  return rec;
}

EvalRecord run_guided(const QaItem& item, ModelClient& model,
                      ToolClient& tools) {
  auto t0 = Clock::now();
  if (item.clip_refs.empty())
    throw Error(ErrorCode::ToolError, item.sample_id + ": no clip refs");
  CueBundle cues;
  // cues are computed before any model interaction; tool failure aborts early
  for (CueKind kind : perception::kAllCues) {
    if (!perception::required_cues(item.task).count(kind)) continue;
    perception::ToolRequest req;
    req.tool = perception::tool_for_cue(kind);
    req.clip_id = item.clip_refs.front();
    try {
      cues.payloads[kind] = tools.call_raw(req);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ToolError) throw;
      throw Error(ErrorCode::ToolError, item.sample_id + ": " + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorCode::ToolError, item.sample_id + ": " + e.what());
    }
  }
  PromptBundle bundle = assemble_prompt(item, EvalMode::Guided, cues);
  EvalRecord rec;
  rec.sample_id = item.sample_id;
  rec.mode = EvalMode::Guided;
  rec.model_id = model.model_id();
  try {
    rec.response = model.complete(bundle, {});
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::ModelError, item.sample_id + ": " + e.what());
  }
  rec.latency_ms = elapsed_ms(t0);
  return rec;
}

EvalRecord run_agentic(const QaItem& item, ModelClient& model,
                       ToolClient& toolbox, int budget) {
  if (budget < 0)
    throw Error(ErrorCode::ConfigError, "agentic budget must be >= 0");
  auto t0 = Clock::now();
  PromptBundle bundle = assemble_prompt(item, EvalMode::Agentic, std::nullopt);

  EvalRecord rec;
  rec.sample_id = item.sample_id;
  rec.mode = EvalMode::Agentic;
  rec.model_id = model.model_id();

  std::vector<std::string> context;
  int tool_calls = 0;
  bool forced = false;
  int step_index = 0;

  while (true) {
    StructuredResponse resp;
    try {
      resp = model.complete(bundle, context);
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw Error(ErrorCode::ModelError, item.sample_id + ": " + e.what());
    }

    auto decision = parse_decision(resp.final_answer);
    if (!decision) {
      // one re-prompt, then give up
      context.push_back(kRetryNote);
      try {
        resp = model.complete(bundle, context);
      } catch (const Error&) {
        throw;
      } catch (const std::exception& e) {
        throw Error(ErrorCode::ModelError, item.sample_id + ": " + e.what());
      }
      decision = parse_decision(resp.final_answer);
      if (!decision)
        throw Error(ErrorCode::MalformedDecision,
                    item.sample_id + ": unparseable decision '" +
                        resp.final_answer + "'");
    }

    if (decision->is_answer || forced) {
      AgentStep step;
      step.index = step_index++;
      step.decision = AgentStep::Decision::Answer;
      step.rationale = resp.plan;
      rec.steps.push_back(step);
      rec.response = resp;
      rec.response.final_answer =
          decision->is_answer ? decision->answer_text : resp.final_answer;
      break;
    }

    if (tool_calls >= budget) {
      // budget exhausted: tell the model to answer; whatever comes back next
      // becomes the answer
      context.push_back(kBudgetNote);
      forced = true;
      continue;
    }

    AgentStep step;
    step.index = step_index++;
    step.decision = AgentStep::Decision::CallTool;
    step.tool = decision->tool;
    step.params = decision->params;
    step.rationale = resp.plan;
    perception::ToolRequest req;
    req.tool = decision->tool;
    req.clip_id = decision->params.value("clip_id",
                                         item.clip_refs.empty()
                                             ? std::string()
                                             : item.clip_refs.front());
    req.params = decision->params;
    req.params.erase("clip_id");
    json payload;
    try {
      payload = toolbox.call_raw(req);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ToolError) throw;
      throw Error(ErrorCode::ToolError, item.sample_id + ": " + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorCode::ToolError, item.sample_id + ": " + e.what());
    }
    step.result_digest = digest_payload(decision->tool, payload);
    rec.steps.push_back(step);
    ++tool_calls;
    context.push_back("TOOL_RESULT " + perception::tool_name(decision->tool) +
                      " " + payload.dump());
  }

  rec.latency_ms = elapsed_ms(t0);
  return rec;
}

// ---------------------------------------------------------------------------
// Tool-decision scoring
// ---------------------------------------------------------------------------

OracleToolPolicy OracleToolPolicy::from_cue_matrix() {
  OracleToolPolicy p;
  for (Task t : corpus::kAllTasks) {
    std::set<ToolKind> tools;
    for (CueKind c : perception::required_cues(t))
      tools.insert(perception::tool_for_cue(c));
    p.expected[t] = tools;
  }
  return p;
}

double tool_decision_accuracy(
    const std::vector<std::pair<EvalRecord, Task>>& records,
    const OracleToolPolicy& oracle) {
  if (records.empty())
    throw Error(ErrorCode::EmptyInput, "no records to score");
  int correct = 0;
  for (const auto& [rec, task] : records) {
    if (rec.mode != EvalMode::Agentic)
      throw Error(ErrorCode::ModeMismatch,
                  rec.sample_id + " is not an agentic record");
    std::set<ToolKind> invoked;
    for (const auto& step : rec.steps)
      if (step.decision == AgentStep::Decision::CallTool)
        invoked.insert(step.tool);
    auto it = oracle.expected.find(task);
    if (it != oracle.expected.end() && invoked == it->second) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

json to_json(const EvalRecord& r) {
  json steps = json::array();
  for (const auto& s : r.steps) {
    json js{{"index", s.index},
            {"decision",
             s.decision == AgentStep::Decision::CallTool ? "call_tool"
                                                         : "answer"},
            {"rationale", s.rationale}};
    if (s.decision == AgentStep::Decision::CallTool) {
      js["tool"] = perception::tool_name(s.tool);
      js["params"] = s.params;
      js["result_digest"] = s.result_digest;
    }
    steps.push_back(std::move(js));
  }
  return json{{"sample_id", r.sample_id},
              {"mode", mode_name(r.mode)},
              {"response",
               {{"plan", r.response.plan},
                {"act", r.response.act},
                {"reflect", r.response.reflect},
                {"final_answer", r.response.final_answer}}},
              {"steps", steps},
              {"latency_ms", r.latency_ms},
              {"model_id", r.model_id}};
}

namespace {

void check_fields(const json& j, const std::set<std::string>& allowed,
                  const char* where) {
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      throw Error(ErrorCode::SchemaError,
                  std::string("unknown field '") + key + "' in " + where);
}

}  // namespace

EvalRecord record_from_json(const json& j, bool strict) {
  if (strict) {
    check_fields(j, {"sample_id", "mode", "response", "steps", "latency_ms",
                     "model_id"},
                 "record");
    check_fields(j.at("response"), {"plan", "act", "reflect", "final_answer"},
                 "response");
    for (const auto& js : j.at("steps"))
      check_fields(js, {"index", "decision", "rationale", "tool", "params",
                        "result_digest"},
                   "step");
  }
  EvalRecord r;
  r.sample_id = j.at("sample_id").get<std::string>();
  r.mode = mode_from_name(j.at("mode").get<std::string>());
  const json& resp = j.at("response");
  r.response.plan = resp.value("plan", "");
  r.response.act = resp.value("act", "");
  r.response.reflect = resp.value("reflect", "");
  r.response.final_answer = resp.at("final_answer").get<std::string>();
  for (const auto& js : j.at("steps")) {
    AgentStep s;
    s.index = js.at("index").get<int>();
    std::string d = js.at("decision").get<std::string>();
    s.decision = d == "call_tool" ? AgentStep::Decision::CallTool
                                  : AgentStep::Decision::Answer;
    s.rationale = js.value("rationale", "");
    if (s.decision == AgentStep::Decision::CallTool) {
      s.tool = perception::tool_from_name(js.at("tool").get<std::string>());
      s.params = js.at("params");
      s.result_digest = js.value("result_digest", "");
    }
    r.steps.push_back(std::move(s));
  }
  if (r.mode != EvalMode::Agentic && !r.steps.empty())
    throw Error(ErrorCode::SchemaError,
                r.sample_id + ": non-agentic record carries steps");
  r.latency_ms = j.value("latency_ms", 0.0);
  r.model_id = j.value("model_id", "");
  return r;
}

}  // namespace avbench::harness
