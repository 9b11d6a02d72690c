// SPDX-License-Identifier: Apache-2.0
// Independent brute-force oracles, written before the library implementations
// and frozen: these deliberately avoid sharing code with src/.
#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace oracles {

/// Discretized interval IoU: counts 1e-4 s grid cells inside each interval.
inline double tiou_grid(double ps, double pe, double gs, double ge,
                        double cell = 1e-4) {
  double lo = std::min(ps, gs);
  double hi = std::max(pe, ge);
  long n = static_cast<long>(std::ceil((hi - lo) / cell)) + 1;
  long inter = 0, uni = 0;
  for (long i = 0; i < n; ++i) {
    double mid = lo + (i + 0.5) * cell;
    bool in_p = mid >= ps && mid <= pe;
    bool in_g = mid >= gs && mid <= ge;
    if (in_p && in_g) ++inter;
    if (in_p || in_g) ++uni;
  }
  if (uni == 0) return ps == gs && pe == ge ? 1.0 : 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

using Sent = std::vector<std::string>;

inline std::map<Sent, int> ngram_counts(const Sent& s, size_t n) {
  std::map<Sent, int> out;
  if (s.size() < n) return out;
  for (size_t i = 0; i + n <= s.size(); ++i)
    out[Sent(s.begin() + i, s.begin() + i + n)]++;
  return out;
}

/// Naive BLEU@4: clipped modified precision per order, 1e-9 smoothing for
/// zero counts, exp-mean-log combination, brevity penalty.
inline double bleu4_naive(const Sent& cand, const std::vector<Sent>& refs) {
  if (cand.empty()) return 0.0;
  double log_sum = 0.0;
  for (size_t n = 1; n <= 4; ++n) {
    auto cc = ngram_counts(cand, n);
    long total = 0, clipped = 0;
    for (const auto& [gram, count] : cc) total += count;
    for (const auto& [gram, count] : cc) {
      int best = 0;
      for (const auto& ref : refs) {
        auto rc = ngram_counts(ref, n);
        auto it = rc.find(gram);
        if (it != rc.end() && it->second > best) best = it->second;
      }
      clipped += std::min<long>(count, best);
    }
    double p = total == 0 ? 0.0
                          : static_cast<double>(clipped) / total;
    if (p <= 0.0) p = 1e-9;
    log_sum += std::log(p) / 4.0;
  }
  // closest reference length; ties -> shorter
  size_t best_len = refs.front().size();
  for (const auto& ref : refs) {
    size_t d_new = ref.size() > cand.size() ? ref.size() - cand.size()
                                            : cand.size() - ref.size();
    size_t d_old = best_len > cand.size() ? best_len - cand.size()
                                          : cand.size() - best_len;
    if (d_new < d_old || (d_new == d_old && ref.size() < best_len))
      best_len = ref.size();
  }
  double bp = cand.size() >= best_len
                  ? 1.0
                  : std::exp(1.0 - static_cast<double>(best_len) /
                                       static_cast<double>(cand.size()));
  return bp * std::exp(log_sum);
}

/// Naive CIDEr: mean over n=1..4 of 10 x tf-idf cosine, averaged over refs.
/// Document frequencies count documents (reference sets) containing a gram.
inline double cider_naive(const Sent& cand, const std::vector<Sent>& refs,
                          const std::vector<std::vector<Sent>>& corpus) {
  double total = 0.0;
  for (size_t n = 1; n <= 4; ++n) {
    std::map<Sent, int> df;
    for (const auto& doc : corpus) {
      std::map<Sent, bool> seen;
      for (const auto& ref : doc)
        for (const auto& [gram, count] : ngram_counts(ref, n))
          seen[gram] = true;
      for (const auto& [gram, unused] : seen) df[gram]++;
    }
    double log_docs = std::log(std::max<size_t>(corpus.size(), 1));
    auto tfidf = [&](const std::map<Sent, int>& counts) {
      std::map<Sent, double> v;
      long total_count = 0;
      for (const auto& [gram, count] : counts) total_count += count;
      for (const auto& [gram, count] : counts) {
        auto it = df.find(gram);
        double idf = log_docs - std::log(std::max(
                                    it == df.end() ? 0 : it->second, 1));
        v[gram] = (static_cast<double>(count) / std::max<long>(total_count, 1)) *
                  idf;
      }
      return v;
    };
    auto cv = tfidf(ngram_counts(cand, n));
    double ref_mean = 0.0;
    for (const auto& ref : refs) {
      auto rv = tfidf(ngram_counts(ref, n));
      double dot = 0.0, cn = 0.0, rn = 0.0;
      for (const auto& [gram, x] : cv) {
        cn += x * x;
        auto it = rv.find(gram);
        if (it != rv.end()) dot += x * it->second;
      }
      for (const auto& [gram, x] : rv) rn += x * x;
      double denom = std::sqrt(cn) * std::sqrt(rn);
      ref_mean += denom > 0.0 ? dot / denom : 0.0;
    }
    total += 10.0 * ref_mean / refs.size();
  }
  return total / 4.0;
}

/// Central finite differences of a scalar function.
template <typename Fn>
std::vector<double> fd_gradient(Fn&& f, std::vector<double> x,
                                double eps = 1e-5) {
  std::vector<double> g(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    double keep = x[i];
    x[i] = keep + eps;
    double hi = f(x);
    x[i] = keep - eps;
    double lo = f(x);
    x[i] = keep;
    g[i] = (hi - lo) / (2.0 * eps);
  }
  return g;
}

inline double max_rel_err(const std::vector<double>& a,
                          const std::vector<double>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    if (std::fabs(a[i]) < 1e-10 && std::fabs(b[i]) < 1e-7) continue;
    double denom = std::max({std::fabs(a[i]), std::fabs(b[i]), 1e-8});
    m = std::max(m, std::fabs(a[i] - b[i]) / denom);
  }
  return m;
}

}  // namespace oracles
