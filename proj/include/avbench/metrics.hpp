// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "avbench/common.hpp"

namespace avbench::metrics {

/// Temporal IoU of two intervals, clamped to [0, 1]. Disjoint pairs score 0;
/// two identical degenerate points score 1 by convention.
double tiou(const Interval& pred, const Interval& gold);

/// Fraction of predictions within distance 1 of the gold index.
double off_by_one(const std::vector<long>& preds, const std::vector<long>& golds);

/// Fraction of exact label matches.
double top1(const std::vector<std::string>& preds,
            const std::vector<std::string>& golds);

using Tokens = std::vector<std::string>;

/// BLEU@4: geometric mean of clipped n-gram precisions (n = 1..4) with
/// brevity penalty. Zero precisions are smoothed with 1e-9.
double bleu4(const Tokens& candidate, const std::vector<Tokens>& references);

/// Exact-unigram-match METEOR: harmonic mean F (alpha = 0.9) times the
/// fragmentation penalty (gamma = 0.5, beta = 3). No stemming or synonyms.
double meteor_lite(const Tokens& candidate, const Tokens& reference);

/// CIDEr: mean over n = 1..4 of 10 x tf-idf n-gram cosine similarity,
/// averaged over references. Document frequencies come from `corpus`.
double cider(const Tokens& candidate, const std::vector<Tokens>& references,
             const std::vector<std::vector<Tokens>>& corpus);

struct GenerationScores {
  double bleu4 = 0.0;
  double meteor = 0.0;
  double cider = 0.0;
};

/// Arithmetic mean of 0..10 integer coherence ratings.
double coherence_mean(const std::vector<int>& ratings);

// ---------------------------------------------------------------------------
// LLM judge
// ---------------------------------------------------------------------------

struct JudgeVerdict {
  double raw_score = 0.0;
  double normalized = 0.0;  // in [0,1]
  std::string rubric_id;
  std::string transcript_digest;
};

/// Text-in/text-out client shared by the judge and the choice extractor.
class TextClient {
 public:
  virtual ~TextClient() = default;
  virtual std::string complete(const std::string& prompt) = 0;
};

/// Canned single- or multi-reply client for offline runs and tests.
class ReplayTextClient : public TextClient {
 public:
  explicit ReplayTextClient(std::vector<std::string> replies)
      : replies_(std::move(replies)) {}
  std::string complete(const std::string& prompt) override;
  int calls() const { return calls_; }

 private:
  std::vector<std::string> replies_;
  int calls_ = 0;
};

struct Rubric {
  std::string id;
  std::string text;
  double scale_max = 10.0;  // raw scores above 1 are divided by this
};

JudgeVerdict judge(const std::string& task_name, const std::string& gold,
                   const std::string& response, const Rubric& rubric,
                   TextClient& judge_client);

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

/// One scorable evaluation outcome, prepared by the caller.
struct ScoredSample {
  std::string task;   // STG, AVDS, ...
  std::string mode;   // zero-shot, guided, agentic
  std::string model;
  bool is_mcq = false;
  bool no_match = false;          // extraction failed; counts as incorrect
  std::optional<std::string> extracted_label;
  std::optional<std::string> gold_label;
  std::optional<double> tiou_score;
  std::optional<GenerationScores> generation;
};

struct ScoreRow {
  std::string task;
  std::string mode;
  std::string model;
  int count = 0;
  std::optional<double> accuracy;
  std::optional<double> mean_tiou;
  std::optional<double> mean_bleu4;
  std::optional<double> mean_meteor;
  std::optional<double> mean_cider;
};

struct ScoreCard {
  std::vector<ScoreRow> rows;

  std::string to_csv() const;
  /// (x, y) series per task/mode pair for generic plotting tools.
  std::string to_plot_data() const;
};

ScoreCard aggregate(const std::vector<ScoredSample>& samples);

}  // namespace avbench::metrics
