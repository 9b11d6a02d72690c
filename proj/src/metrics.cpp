// SPDX-License-Identifier: Apache-2.0
#include "avbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace avbench::metrics {

double tiou(const Interval& pred, const Interval& gold) {
  double inter = std::min(pred.end, gold.end) - std::max(pred.start, gold.start);
  double uni = std::max(pred.end, gold.end) - std::min(pred.start, gold.start);
  if (uni <= 0.0) {
    // both degenerate; identical points count as a perfect hit
    return pred.start == gold.start ? 1.0 : 0.0;
  }
  double v = inter / uni;
  return std::clamp(v, 0.0, 1.0);
}

double off_by_one(const std::vector<long>& preds,
                  const std::vector<long>& golds) {
  if (preds.empty()) throw Error(ErrorCode::EmptyInput, "no predictions");
  if (preds.size() != golds.size())
    throw Error(ErrorCode::LengthMismatch, "preds vs golds");
  long hits = 0;
  for (size_t i = 0; i < preds.size(); ++i) {
    if (std::labs(preds[i] - golds[i]) <= 1) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

double top1(const std::vector<std::string>& preds,
            const std::vector<std::string>& golds) {
  if (preds.empty()) throw Error(ErrorCode::EmptyInput, "no predictions");
  if (preds.size() != golds.size())
    throw Error(ErrorCode::LengthMismatch, "preds vs golds");
  long hits = 0;
  for (size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] == golds[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

namespace {

using NgramCounts = std::map<std::vector<std::string>, int>;

NgramCounts count_ngrams(const Tokens& tokens, int n) {
  NgramCounts counts;
  if (static_cast<int>(tokens.size()) < n) return counts;
  for (size_t i = 0; i + n <= tokens.size(); ++i) {
    counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)]++;
  }
  return counts;
}

}  // namespace

double bleu4(const Tokens& candidate, const std::vector<Tokens>& references) {
  if (references.empty()) throw Error(ErrorCode::EmptyReference, "bleu4");
  if (candidate.empty()) return 0.0;

  double log_sum = 0.0;
  for (int n = 1; n <= 4; ++n) {
    NgramCounts cand = count_ngrams(candidate, n);
    int total = 0;
    for (const auto& [ng, c] : cand) total += c;
    int clipped = 0;
    for (const auto& [ng, c] : cand) {
      int max_ref = 0;
      for (const auto& ref : references) {
        NgramCounts rc = count_ngrams(ref, n);
        auto it = rc.find(ng);
        if (it != rc.end()) max_ref = std::max(max_ref, it->second);
      }
      clipped += std::min(c, max_ref);
    }
    double precision =
        total > 0 ? static_cast<double>(clipped) / total : 0.0;
    if (precision <= 0.0) precision = 1e-9;  // smoothing
    log_sum += std::log(precision);
  }
  double geo = std::exp(log_sum / 4.0);

  // closest reference length for the brevity penalty
  size_t c = candidate.size();
  size_t best_r = references.front().size();
  for (const auto& ref : references) {
    size_t r = ref.size();
    size_t d_new = r > c ? r - c : c - r;
    size_t d_old = best_r > c ? best_r - c : c - best_r;
    if (d_new < d_old || (d_new == d_old && r < best_r)) best_r = r;
  }
  double bp = c >= best_r
                  ? 1.0
                  : std::exp(1.0 - static_cast<double>(best_r) /
                                       static_cast<double>(c));
  return std::min(1.0, bp * geo);
}

double meteor_lite(const Tokens& candidate, const Tokens& reference) {
  if (candidate.empty() || reference.empty()) return 0.0;

  // greedy left-to-right exact-match alignment; each reference token is
  // consumed at most once, preferring the nearest unused position
  std::vector<int> match_pos(candidate.size(), -1);
  std::vector<bool> used(reference.size(), false);
  int m = 0;
  int last = -1;
  for (size_t i = 0; i < candidate.size(); ++i) {
    int best = -1;
    for (size_t j = 0; j < reference.size(); ++j) {
      if (used[j] || reference[j] != candidate[i]) continue;
      if (best == -1 ||
          std::abs(static_cast<int>(j) - (last + 1)) <
              std::abs(best - (last + 1))) {
        best = static_cast<int>(j);
      }
    }
    if (best >= 0) {
      used[best] = true;
      match_pos[i] = best;
      last = best;
      ++m;
    }
  }
  if (m == 0) return 0.0;

  // chunk count: maximal runs of adjacent matches mapping to adjacent
  // reference positions
  int chunks = 0;
  int prev = -2;
  bool in_chunk = false;
  for (size_t i = 0; i < candidate.size(); ++i) {
    if (match_pos[i] < 0) {
      in_chunk = false;
      prev = -2;
      continue;
    }
    if (!in_chunk || match_pos[i] != prev + 1) ++chunks;
    in_chunk = true;
    prev = match_pos[i];
  }

  const double alpha = 0.9, gamma = 0.5, beta = 3.0;
  double p = static_cast<double>(m) / candidate.size();
  double r = static_cast<double>(m) / reference.size();
  double f = (p * r) / (alpha * p + (1.0 - alpha) * r);
  double frag = static_cast<double>(chunks) / m;
  double penalty = gamma * std::pow(frag, beta);
  return f * (1.0 - penalty);
}

double cider(const Tokens& candidate, const std::vector<Tokens>& references,
             const std::vector<std::vector<Tokens>>& corpus) {
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "cider");
  if (references.empty()) throw Error(ErrorCode::EmptyReference, "cider");

  double total = 0.0;
  for (int n = 1; n <= 4; ++n) {
    // document frequency over reference sets: a "document" is one image's
    // reference set; an n-gram counts once per set it appears in
    NgramCounts df;
    for (const auto& ref_set : corpus) {
      NgramCounts seen;
      for (const auto& ref : ref_set) {
        for (const auto& [ng, c] : count_ngrams(ref, n)) seen[ng] = 1;
      }
      for (const auto& [ng, one] : seen) df[ng]++;
    }
    double log_docs = std::log(static_cast<double>(corpus.size()));

    auto tfidf = [&](const Tokens& tokens) {
      NgramCounts counts = count_ngrams(tokens, n);
      int total_ngrams = 0;
      for (const auto& [ng, c] : counts) total_ngrams += c;
      std::map<std::vector<std::string>, double> vec;
      for (const auto& [ng, c] : counts) {
        auto it = df.find(ng);
        int d = it == df.end() ? 0 : it->second;
        double idf = log_docs - std::log(std::max(1.0, static_cast<double>(d)));
        vec[ng] = (static_cast<double>(c) / std::max(1, total_ngrams)) * idf;
      }
      return vec;
    };

    auto cand_vec = tfidf(candidate);
    double cand_norm = 0.0;
    for (const auto& [ng, v] : cand_vec) cand_norm += v * v;
    cand_norm = std::sqrt(cand_norm);

    double sim_sum = 0.0;
    for (const auto& ref : references) {
      auto ref_vec = tfidf(ref);
      double ref_norm = 0.0;
      for (const auto& [ng, v] : ref_vec) ref_norm += v * v;
      ref_norm = std::sqrt(ref_norm);
      double dot = 0.0;
      for (const auto& [ng, v] : cand_vec) {
        auto it = ref_vec.find(ng);
        if (it != ref_vec.end()) dot += v * it->second;
      }
      if (cand_norm > 0.0 && ref_norm > 0.0) {
        sim_sum += dot / (cand_norm * ref_norm);
      }
    }
    total += 10.0 * sim_sum / references.size();
  }
  return total / 4.0;
}

double coherence_mean(const std::vector<int>& ratings) {
  if (ratings.empty()) throw Error(ErrorCode::EmptyInput, "no ratings");
  double sum = 0.0;
  for (int r : ratings) {
    if (r < 0 || r > 10)
      throw Error(ErrorCode::OutOfRangeRating, std::to_string(r));
    sum += r;
  }
  return sum / ratings.size();
}

std::string ReplayTextClient::complete(const std::string&) {
  if (replies_.empty())
    throw Error(ErrorCode::TransportError, "replay client exhausted");
  size_t idx = std::min(static_cast<size_t>(calls_), replies_.size() - 1);
  ++calls_;
  return replies_[idx];
}

namespace {

struct ParsedScore {
  double raw;
  double normalized;
};

/// Parses "0.8", "8", or "8/10" style judge replies; nullopt on failure.
std::optional<ParsedScore> parse_score(const std::string& reply,
                                       double scale_max) {
  const char* s = reply.c_str();
  while (*s && !(std::isdigit(static_cast<unsigned char>(*s)) || *s == '.' ||
                 *s == '-'))
    ++s;
  if (!*s) return std::nullopt;
  char* end = nullptr;
  double num = std::strtod(s, &end);
  if (end == s) return std::nullopt;
  // fraction form "x/y"
  const char* p = end;
  while (*p == ' ') ++p;
  if (*p == '/') {
    ++p;
    char* end2 = nullptr;
    double den = std::strtod(p, &end2);
    if (end2 != p && den > 0.0) return ParsedScore{num, num / den};
    return std::nullopt;
  }
  if (num >= 0.0 && num <= 1.0) return ParsedScore{num, num};
  if (num > 1.0 && num <= scale_max) return ParsedScore{num, num / scale_max};
  return std::nullopt;
}

}  // namespace

JudgeVerdict judge(const std::string& task_name, const std::string& gold,
                   const std::string& response, const Rubric& rubric,
                   TextClient& judge_client) {
  std::ostringstream prompt;
  prompt << "You are grading a model response against a task-specific rubric.\n"
         << "Task: " << task_name << "\n"
         << "Rubric: " << rubric.text << "\n"
         << "Ground truth: " << gold << "\n"
         << "Model response: " << response << "\n"
         << "Reply with a single numeric score.";

  std::string reply;
  std::optional<ParsedScore> score;
  for (int attempt = 0; attempt < 2; ++attempt) {
    try {
      reply = judge_client.complete(prompt.str());
    } catch (const Error&) {
      throw Error(ErrorCode::JudgeTransportError, task_name);
    }
    score = parse_score(reply, rubric.scale_max);
    if (score) break;
  }
  if (!score) throw Error(ErrorCode::JudgeParseError, reply);

  JudgeVerdict v;
  v.raw_score = score->raw;
  v.normalized = std::clamp(score->normalized, 0.0, 1.0);
  v.rubric_id = rubric.id;
  v.transcript_digest =
      std::to_string(fnv1a(prompt.str() + "\n" + reply));
  return v;
}

ScoreCard aggregate(const std::vector<ScoredSample>& samples) {
  struct Acc {
    int count = 0;
    int mcq_total = 0, mcq_correct = 0;
    int tiou_n = 0;
    double tiou_sum = 0.0;
    int gen_n = 0;
    double bleu_sum = 0.0, meteor_sum = 0.0, cider_sum = 0.0;
  };
  std::map<std::tuple<std::string, std::string, std::string>, Acc> acc;
  for (const auto& s : samples) {
    Acc& a = acc[{s.task, s.mode, s.model}];
    a.count++;
    if (s.is_mcq) {
      a.mcq_total++;
      if (!s.no_match && s.extracted_label && s.gold_label &&
          *s.extracted_label == *s.gold_label) {
        a.mcq_correct++;
      }
    }
    if (s.tiou_score) {
      a.tiou_n++;
      a.tiou_sum += *s.tiou_score;
    }
    if (s.generation) {
      a.gen_n++;
      a.bleu_sum += s.generation->bleu4;
      a.meteor_sum += s.generation->meteor;
      a.cider_sum += s.generation->cider;
    }
  }

  ScoreCard card;
  for (const auto& [key, a] : acc) {
    ScoreRow row;
    std::tie(row.task, row.mode, row.model) = key;
    row.count = a.count;
    if (a.mcq_total > 0)
      row.accuracy = static_cast<double>(a.mcq_correct) / a.mcq_total;
    if (a.tiou_n > 0) row.mean_tiou = a.tiou_sum / a.tiou_n;
    if (a.gen_n > 0) {
      row.mean_bleu4 = a.bleu_sum / a.gen_n;
      row.mean_meteor = a.meteor_sum / a.gen_n;
      row.mean_cider = a.cider_sum / a.gen_n;
    }
    card.rows.push_back(row);
  }
  return card;
}

namespace {
std::string fmt_opt(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", *v);
  return buf;
}
}  // namespace

std::string ScoreCard::to_csv() const {
  std::ostringstream out;
  out << "task,mode,model,count,accuracy,mean_tiou,bleu4,meteor,cider\n";
  for (const auto& r : rows) {
    out << r.task << ',' << r.mode << ',' << r.model << ',' << r.count << ','
        << fmt_opt(r.accuracy) << ',' << fmt_opt(r.mean_tiou) << ','
        << fmt_opt(r.mean_bleu4) << ',' << fmt_opt(r.mean_meteor) << ','
        << fmt_opt(r.mean_cider) << '\n';
  }
  return out.str();
}

std::string ScoreCard::to_plot_data() const {
  // one series per (task, mode): x = model index, y = headline score
  std::ostringstream out;
  out << "series,x,y\n";
  std::map<std::string, int> next_x;
  for (const auto& r : rows) {
    std::string series = r.task + "/" + r.mode;
    double y = r.accuracy ? *r.accuracy
                          : (r.mean_tiou ? *r.mean_tiou
                                         : (r.mean_bleu4 ? *r.mean_bleu4 : 0.0));
    out << series << ',' << next_x[series]++ << ',' << y << '\n';
  }
  return out.str();
}

}  // namespace avbench::metrics
