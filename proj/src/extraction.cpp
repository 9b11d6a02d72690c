// SPDX-License-Identifier: Apache-2.0
#include "avbench/extraction.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace avbench::extraction {

namespace {

bool is_boundary(char c) {
  return !std::isalnum(static_cast<unsigned char>(c));
}

struct LabelHit {
  char label;
  size_t pos;
  size_t len;        // length of the label construct itself
  bool structured;   // one of `A)` `A.` `A,` `(A)`
};

/// All positions where an option label occurs in label-like position.
std::vector<LabelHit> find_hits(const std::string& text,
                                const std::set<char>& labels) {
  std::vector<LabelHit> hits;
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (!labels.count(c)) continue;
    bool left_ok = i == 0 || is_boundary(text[i - 1]);
    if (!left_ok) continue;
    char next = i + 1 < text.size() ? text[i + 1] : '\0';
    if (next != '\0' && !is_boundary(next)) continue;  // word like "Answer"
    bool structured = next == ')' || next == '.' || next == ',';
    // `(A)` counts as structured too
    if (i > 0 && text[i - 1] == '(' && next == ')') structured = true;
    hits.push_back({c, i, 1, structured});
  }
  return hits;
}

}  // namespace

std::optional<char> heuristic_match(const std::string& response,
                                    const std::vector<Option>& options) {
  std::set<char> labels;
  for (const auto& opt : options) labels.insert(opt.label);

  auto hits = find_hits(response, labels);
  if (hits.empty()) return std::nullopt;

  std::set<char> distinct;
  for (const auto& h : hits) distinct.insert(h.label);
  if (distinct.size() > 1) return std::nullopt;  // ambiguous, defer

  return hits.front().label;
}

std::string extraction_prompt(const std::string& question,
                              const std::vector<Option>& options,
                              const std::string& response) {
  std::ostringstream p;
  p << "Can you help me match an answer with a set of options for a "
       "single-correct-answer question? I will provide a question, a set of "
       "options, and a model-generated response. Your task is to map the "
       "response to the most similar option. Output exactly one uppercase "
       "letter from {A, B, C, D, E}. If no option matches, respond with "
       "\"No match found\". Please avoid subjectivity and do not use "
       "external knowledge.\n\n";
  p << "Example 1:\n"
       "Question: What color is the man's shirt who is sitting left of the "
       "object making this sound?\n"
       "Options: A. Green  B. Red  C. Yellow  D. Black\n"
       "Answer: The person sitting next to the record player is wearing a "
       "black shirt.\n"
       "Your output: D\n\n";
  p << "Example 2:\n"
       "Question: What does the audio-visual event constitute?\n"
       "Options: A. A dog barking at a cat  B. A dog barking on being hit "
       "by a stick  C. The dog is hungry  D. The dog is chasing another "
       "dog\n"
       "Answer: It is a wolf.\n"
       "Your output: No match found\n\n";
  p << "Question: " << question << "\n";
  p << "Options:";
  for (const auto& opt : options)
    p << " " << opt.label << ". " << opt.content;
  p << "\nAnswer: " << response << "\nYour output:";
  return p.str();
}

namespace {

std::optional<std::optional<char>> parse_extractor_reply(
    const std::string& reply, const std::vector<Option>& options) {
  std::string t = reply;
  // trim
  size_t a = t.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return std::nullopt;
  size_t b = t.find_last_not_of(" \t\r\n.");
  t = t.substr(a, b - a + 1);
  if (t == "No match found") return std::optional<char>{};
  if (t.size() == 1) {
    for (const auto& opt : options)
      if (opt.label == t[0]) return std::optional<char>{t[0]};
  }
  return std::nullopt;  // unparseable
}

}  // namespace

std::optional<char> llm_extract(const std::string& question,
                                const std::vector<Option>& options,
                                const std::string& response,
                                metrics::TextClient& extractor) {
  std::string prompt = extraction_prompt(question, options, response);
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::string reply = extractor.complete(prompt);
    auto parsed = parse_extractor_reply(reply, options);
    if (parsed) return *parsed;
    if (attempt == 1)
      throw Error(ErrorCode::ExtractorParseError,
                  "unusable extractor reply '" + reply + "'");
  }
  return std::nullopt;  // unreachable
}

ExtractionResult extract_choice(const std::string& question,
                                const std::vector<Option>& options,
                                const std::string& response,
                                metrics::TextClient* extractor) {
  ExtractionResult result;
  if (auto label = heuristic_match(response, options)) {
    result.label = label;
    result.method = ExtractionMethod::Heuristic;
    result.evidence = std::string(1, *label);
    return result;
  }
  result.method = ExtractionMethod::LlmFallback;
  if (!extractor) return result;  // no fallback configured -> no match
  result.label = llm_extract(question, options, response, *extractor);
  result.evidence = response;
  return result;
}

bool circular_eval(const QaItem& item, harness::ModelClient& model,
                   metrics::TextClient* extractor) {
  if (!item.is_mcq())
    throw Error(ErrorCode::ModeMismatch,
                item.sample_id + " is not an MCQ item");
  const size_t n = item.options.size();
  std::string gold = item.gold_content();

  for (size_t shift = 0; shift < n; ++shift) {
    QaItem rotated = item;
    for (size_t i = 0; i < n; ++i)
      rotated.options[i].content = item.options[(i + shift) % n].content;
    harness::PromptBundle bundle =
        harness::assemble_prompt(rotated, harness::EvalMode::ZeroShot,
                                 std::nullopt);
    harness::StructuredResponse resp = model.complete(bundle, {});
    ExtractionResult ext = extract_choice(
        rotated.question, rotated.options, resp.final_answer, extractor);
    if (!ext.label) return false;
    std::string picked;
    for (const auto& opt : rotated.options)
      if (opt.label == *ext.label) picked = opt.content;
    if (picked != gold) return false;
  }
  return true;
}

}  // namespace avbench::extraction
