// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "avbench/harness.hpp"
#include "avbench/metrics.hpp"

namespace avbench::extraction {

using corpus::Option;
using corpus::QaItem;

enum class ExtractionMethod { Heuristic, LlmFallback };

struct ExtractionResult {
  std::optional<char> label;  // nullopt = no match
  ExtractionMethod method = ExtractionMethod::Heuristic;
  std::string evidence;  // matched span (heuristic) or extractor reply
};

/// Stage 1: isolated label or `A)` / `A.` / `A,` / `(A)` followed by text
/// that contains no other option label. Case-sensitive; multiple distinct
/// labels defer to the fallback.
std::optional<char> heuristic_match(const std::string& response,
                                    const std::vector<Option>& options);

/// Builds the two-example extraction prompt for the fallback client.
std::string extraction_prompt(const std::string& question,
                              const std::vector<Option>& options,
                              const std::string& response);

/// Stage 2: semantic alignment via an extractor client. Returns the matched
/// label, or nullopt for a "No match found" reply.
std::optional<char> llm_extract(const std::string& question,
                                const std::vector<Option>& options,
                                const std::string& response,
                                metrics::TextClient& extractor);

/// Two-stage pipeline; the fallback is only consulted when stage 1 misses.
ExtractionResult extract_choice(const std::string& question,
                                const std::vector<Option>& options,
                                const std::string& response,
                                metrics::TextClient* extractor);

/// Runs the item under every cyclic rotation of the option contents (labels
/// fixed). Correct iff each rotation's extracted label maps to gold content.
bool circular_eval(const QaItem& item, harness::ModelClient& model,
                   metrics::TextClient* extractor);

}  // namespace avbench::extraction
