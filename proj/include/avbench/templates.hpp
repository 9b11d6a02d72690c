// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "avbench/common.hpp"
#include "avbench/corpus.hpp"

namespace avbench::corpus {

/// Placeholder values consumed in order of appearance.
struct TemplateContext {
  std::vector<std::string> time_tokens;        // fills <time_token>
  std::vector<std::string> descriptors;        // fills <descriptor>
  std::vector<std::string> outfit_descriptors; // fills <outfit descriptor>
  std::vector<std::string> objects;            // fills <object>
};

constexpr int kTemplatesPerTask = 20;

/// Raw template text, `index` is 1-based.
const std::string& question_template(Task task, int index);

/// Deterministic placeholder substitution. Throws UnboundPlaceholder when a
/// placeholder has no remaining value in the context.
std::string render_question(Task task, const TemplateContext& context,
                            int template_index, uint64_t rng_seed = 0);

}  // namespace avbench::corpus
