// SPDX-License-Identifier: Apache-2.0
#include "avbench/raft.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "avbench/metrics.hpp"

namespace avbench::raft {

namespace {

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

std::vector<double> softmax(const std::vector<double>& logits) {
  double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    z += p[i];
  }
  for (double& x : p) x /= z;
  return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// Toy substrate
// ---------------------------------------------------------------------------

Interval ToyContext::gold_span() const {
  return candidate_interval(*this, gold_candidate);
}

Interval candidate_interval(const ToyContext& ctx, int candidate) {
  if (candidate < 0 || candidate >= kCandidates)
    throw Error(ErrorCode::InvalidCategory,
                "candidate index " + std::to_string(candidate));
  double step = ctx.duration / kCandidates;
  double start = candidate * step;
  return {start, start + ctx.duration / 4.0};
}

double candidate_reward(const ToyContext& ctx, int candidate) {
  return metrics::tiou(candidate_interval(ctx, candidate), ctx.gold_span());
}

std::vector<size_t> ToyPolicy::base_indices() const {
  std::vector<size_t> idx(kBaseSize);
  std::iota(idx.begin(), idx.end(), size_t{0});
  return idx;
}

std::vector<size_t> ToyPolicy::cross_indices() const {
  std::vector<size_t> idx(kParamCount - kBaseSize);
  std::iota(idx.begin(), idx.end(), kCrossOffset);
  return idx;
}

std::vector<double> ToyPolicy::candidate_probs(const ToyContext& ctx) const {
  if (ctx.cue < 0 || ctx.cue >= kCues)
    throw Error(ErrorCode::InvalidCategory, "cue index out of range");
  std::vector<double> logits(kCandidates);
  for (int i = 0; i < kCandidates; ++i)
    logits[i] = theta[i] + theta[kCrossOffset + ctx.cue * kCandidates + i];
  return softmax(logits);
}

std::vector<double> ToyPolicy::grad_log_prob(const ToyContext& ctx,
                                             int candidate) const {
  if (candidate < 0 || candidate >= kCandidates)
    throw Error(ErrorCode::InvalidCategory, "candidate index out of range");
  std::vector<double> p = candidate_probs(ctx);
  std::vector<double> g(kParamCount, 0.0);
  for (int i = 0; i < kCandidates; ++i) {
    double delta = (i == candidate ? 1.0 : 0.0) - p[i];
    g[i] = delta;                                            // bias
    g[kCrossOffset + ctx.cue * kCandidates + i] = delta;     // cross block
  }
  return g;
}

size_t ToyPolicy::phase_param_index(int head, int prev_gold,
                                    int category) const {
  return kPhaseOffset +
         static_cast<size_t>(head) * kPhaseCategories * kPhaseCategories +
         static_cast<size_t>(prev_gold) * kPhaseCategories +
         static_cast<size_t>(category);
}

std::vector<double> ToyPolicy::phase_probs(int head, int prev_gold) const {
  std::vector<double> logits(kPhaseCategories);
  for (int c = 0; c < kPhaseCategories; ++c)
    logits[c] = theta[phase_param_index(head, prev_gold, c)];
  return softmax(logits);
}

// ---------------------------------------------------------------------------
// Losses and weights
// ---------------------------------------------------------------------------

std::pair<double, std::vector<double>> align_loss(
    const ToyPolicy& policy, const ToyContext& ctx,
    const std::array<int, kPhaseHeads>& gold_phases) {
  (void)ctx;  // the toy heads condition only on the previous gold phase
  for (int g : gold_phases)
    if (g < 0 || g >= kPhaseCategories)
      throw Error(ErrorCode::InvalidCategory,
                  "gold phase " + std::to_string(g));
  double loss = 0.0;
  std::vector<double> grad(ToyPolicy::kParamCount, 0.0);
  for (int head = 0; head < kPhaseHeads; ++head) {
    int prev = head == 0 ? 0 : gold_phases[head - 1];  // teacher forcing
    std::vector<double> p = policy.phase_probs(head, prev);
    int gold = gold_phases[head];
    loss += -std::log(std::max(p[gold], 1e-300));
    for (int c = 0; c < kPhaseCategories; ++c)
      grad[policy.phase_param_index(head, prev, c)] +=
          p[c] - (c == gold ? 1.0 : 0.0);
  }
  return {loss, grad};
}

double perceptual_reward(const RewardComponents& c,
                         const std::array<double, 4>& weights) {
  double wsum = 0.0;
  for (double w : weights) {
    if (w < 0.0)
      throw Error(ErrorCode::ZeroWeights, "negative aggregation weight");
    wsum += w;
  }
  if (wsum <= 0.0)
    throw Error(ErrorCode::ZeroWeights, "aggregation weights sum to zero");
  double scores[4] = {c.sync, c.face, c.speech, c.diarization};
  double r = 0.0;
  for (int i = 0; i < 4; ++i) r += weights[i] * scores[i];
  return r / wsum;
}

double reflective_reward(const RewardComponents& c) {
  return c.lambda_task * c.s_task + c.lambda_align * c.s_align +
         c.lambda_conf * c.s_conf;
}

std::vector<double> rro_weights(const std::vector<double>& rewards,
                                double beta) {
  if (rewards.size() < 2)
    throw Error(ErrorCode::ConfigError, "need at least 2 rewards");
  if (!all_finite(rewards))
    throw Error(ErrorCode::NonFiniteReward, "non-finite reward");
  double mean =
      std::accumulate(rewards.begin(), rewards.end(), 0.0) / rewards.size();
  std::vector<double> logits(rewards.size());
  for (size_t i = 0; i < rewards.size(); ++i)
    logits[i] = beta * (rewards[i] - mean);
  return softmax(logits);
}

std::vector<double> rro_grad(const ToyPolicy& policy, const ToyContext& ctx,
                             const std::vector<int>& candidates,
                             const std::vector<double>& weights) {
  if (candidates.size() != weights.size())
    throw Error(ErrorCode::DimensionMismatch,
                "candidates/weights length mismatch");
  std::vector<double> g(ToyPolicy::kParamCount, 0.0);
  for (size_t i = 0; i < candidates.size(); ++i) {
    std::vector<double> gi = policy.grad_log_prob(ctx, candidates[i]);
    for (size_t k = 0; k < g.size(); ++k) g[k] += weights[i] * gi[k];
  }
  return g;
}

namespace {

void check_streams(const EmbeddingStreams& s) {
  if (s.steps.empty())
    throw Error(ErrorCode::StreamLengthMismatch, "empty streams");
  size_t d = s.steps[0][0].size();
  if (d == 0)
    throw Error(ErrorCode::StreamLengthMismatch, "zero-dimensional streams");
  for (const auto& step : s.steps)
    for (const auto& f : step)
      if (f.size() != d)
        throw Error(ErrorCode::StreamLengthMismatch,
                    "stream dimension mismatch");
}

}  // namespace

std::pair<double, std::vector<double>> temp_loss(
    const EmbeddingStreams& streams, double gamma, TemporalVariant variant) {
  check_streams(streams);
  const size_t T = streams.steps.size();
  const size_t d = streams.steps[0][0].size();
  auto flat = [d](size_t t, size_t stream, size_t k) {
    return (t * 4 + stream) * d + k;
  };

  double loss = 0.0;
  std::vector<double> grad(T * 4 * d, 0.0);
  auto add_pair = [&](size_t t, size_t sa, size_t sb, double w) {
    const auto& fa = streams.steps[t][sa];
    const auto& fb = streams.steps[t][sb];
    for (size_t k = 0; k < d; ++k) {
      double diff = fa[k] - fb[k];
      loss += w * diff * diff;
      grad[flat(t, sa, k)] += 2.0 * w * diff;
      grad[flat(t, sb, k)] -= 2.0 * w * diff;
    }
  };

  for (size_t t = 0; t < T; ++t) {
    if (variant == TemporalVariant::Main) {
      add_pair(t, 0, 1, 1.0);    // audio vs visual
      add_pair(t, 2, 3, gamma);  // textual vs reflective
    } else {
      add_pair(t, 0, 1, 1.0);  // audio vs visual
      add_pair(t, 1, 2, 1.0);  // visual vs textual
    }
  }
  if (variant == TemporalVariant::VelocityAugmented) {
    for (size_t t = 0; t + 1 < T; ++t) {
      const auto& a0 = streams.steps[t][0];
      const auto& a1 = streams.steps[t + 1][0];
      const auto& v0 = streams.steps[t][1];
      const auto& v1 = streams.steps[t + 1][1];
      for (size_t k = 0; k < d; ++k) {
        double diff = (a1[k] - a0[k]) - (v1[k] - v0[k]);
        loss += gamma * diff * diff;
        grad[flat(t + 1, 0, k)] += 2.0 * gamma * diff;
        grad[flat(t, 0, k)] -= 2.0 * gamma * diff;
        grad[flat(t + 1, 1, k)] -= 2.0 * gamma * diff;
        grad[flat(t, 1, k)] += 2.0 * gamma * diff;
      }
    }
  }
  return {loss, grad};
}

Matrix sra_apply(const Matrix& w0, const AdapterPair& adapter) {
  if (adapter.rank <= 0)
    throw Error(ErrorCode::ShapeMismatch, "rank must be positive");
  size_t d = w0.size();
  size_t dp = d ? w0[0].size() : 0;
  if (adapter.a.size() != d)
    throw Error(ErrorCode::ShapeMismatch, "A row count != W0 rows");
  for (const auto& row : adapter.a)
    if (row.size() != static_cast<size_t>(adapter.rank))
      throw Error(ErrorCode::ShapeMismatch, "A column count != rank");
  if (adapter.b.size() != static_cast<size_t>(adapter.rank))
    throw Error(ErrorCode::ShapeMismatch, "B row count != rank");
  for (const auto& row : adapter.b)
    if (row.size() != dp)
      throw Error(ErrorCode::ShapeMismatch, "B column count != W0 columns");
  for (const auto& row : w0)
    if (row.size() != dp)
      throw Error(ErrorCode::ShapeMismatch, "ragged W0");

  double scale = adapter.alpha_sra / adapter.rank;
  Matrix w = w0;
  for (size_t i = 0; i < d; ++i)
    for (size_t j = 0; j < dp; ++j) {
      double acc = 0.0;
      for (int k = 0; k < adapter.rank; ++k)
        acc += adapter.a[i][k] * adapter.b[k][j];
      w[i][j] += scale * acc;
    }
  return w;
}

std::vector<double> sra_mask(const std::vector<double>& gradient,
                             const std::vector<size_t>& base,
                             const std::vector<size_t>& cross) {
  std::vector<int> seen(gradient.size(), 0);
  for (size_t i : base) {
    if (i >= gradient.size())
      throw Error(ErrorCode::PartitionError, "base index out of range");
    ++seen[i];
  }
  for (size_t i : cross) {
    if (i >= gradient.size())
      throw Error(ErrorCode::PartitionError, "cross index out of range");
    ++seen[i];
  }
  for (size_t i = 0; i < seen.size(); ++i)
    if (seen[i] != 1)
      throw Error(ErrorCode::PartitionError,
                  "partition does not cover index " + std::to_string(i) +
                      " exactly once");
  std::vector<double> masked = gradient;
  for (size_t i : base) masked[i] = 0.0;
  return masked;
}

double raft_objective(double l_align, double l_temp, double j_rro,
                      double alpha, double beta) {
  return l_align + alpha * l_temp - beta * j_rro;
}

std::vector<double> grpo_lite_weights(const std::vector<double>& rewards,
                                      double epsilon) {
  if (rewards.size() < 2)
    throw Error(ErrorCode::ConfigError, "need at least 2 rewards");
  if (!all_finite(rewards))
    throw Error(ErrorCode::NonFiniteReward, "non-finite reward");
  double mu =
      std::accumulate(rewards.begin(), rewards.end(), 0.0) / rewards.size();
  double var = 0.0;
  for (double r : rewards) var += (r - mu) * (r - mu);
  double sigma = std::sqrt(var / rewards.size());  // population std
  std::vector<double> w(rewards.size());
  for (size_t i = 0; i < rewards.size(); ++i) {
    if (sigma + epsilon == 0.0) {
      w[i] = 0.0;  // all rewards equal and epsilon 0: flat advantage
    } else {
      w[i] = (rewards[i] - mu) / (sigma + epsilon);
    }
  }
  return w;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

std::vector<ToyContext> make_toy_dataset(int n, uint64_t seed) {
  SeededRng rng(mix_seed(seed, 0x746f79ULL));
  // fixed cue -> gold-candidate permutation, so the cross block can solve
  // the task exactly
  std::vector<int> gold_of_cue(kCues);
  std::iota(gold_of_cue.begin(), gold_of_cue.end(), 0);
  rng.shuffle(gold_of_cue);

  std::vector<ToyContext> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    ToyContext ctx;
    ctx.id = "toy_" + std::to_string(i);
    ctx.cue = static_cast<int>(rng.uniform_int(kCues));
    ctx.gold_candidate = gold_of_cue[ctx.cue];
    for (int h = 0; h < kPhaseHeads; ++h)
      ctx.gold_phases[h] = static_cast<int>(rng.uniform_int(kPhaseCategories));
    ctx.duration = 32.0;
    out.push_back(std::move(ctx));
  }
  return out;
}

double expected_reward(const ToyPolicy& policy,
                       const std::vector<ToyContext>& dataset) {
  if (dataset.empty()) throw Error(ErrorCode::EmptyInput, "empty dataset");
  double total = 0.0;
  for (const auto& ctx : dataset) {
    std::vector<double> p = policy.candidate_probs(ctx);
    for (int i = 0; i < kCandidates; ++i)
      total += p[i] * candidate_reward(ctx, i);
  }
  return total / dataset.size();
}

namespace {

/// Deterministic per-context streams; constant in theta, so l_temp enters the
/// trace but not the gradient of the toy objective.
EmbeddingStreams context_streams(const ToyContext& ctx) {
  SeededRng rng(mix_seed(fnv1a(ctx.id), 0x73747265616dULL));
  EmbeddingStreams s;
  s.steps.resize(3);
  for (auto& step : s.steps)
    for (auto& f : step) {
      f.resize(4);
      for (double& x : f) x = rng.uniform();
    }
  return s;
}

int sample_candidate(const std::vector<double>& probs, SeededRng& rng) {
  double u = rng.uniform();
  double acc = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace

TrainResult train(const std::vector<ToyContext>& dataset,
                  const TrainConfig& config, Method method,
                  const std::function<void(const TraceRow&)>& on_row) {
  if (dataset.empty()) throw Error(ErrorCode::EmptyInput, "empty dataset");
  if (config.k_candidates < 2)
    throw Error(ErrorCode::ConfigError, "K must be >= 2");
  if (config.beta <= 0.0)
    throw Error(ErrorCode::ConfigError, "beta must be positive");
  if (config.learning_rate <= 0.0)
    throw Error(ErrorCode::ConfigError, "learning rate must be positive");

  TrainResult result;
  ToyPolicy& policy = result.policy;
  std::vector<size_t> base = policy.base_indices();
  std::vector<size_t> cross = policy.cross_indices();
  SeededRng rng(mix_seed(config.seed, 0x726166745fULL));

  result.initial_reward = expected_reward(policy, dataset);

  int batch = std::min<int>(config.batch_size, dataset.size());
  for (int iter = 0; iter < config.iterations; ++iter) {
    double mean_reward = expected_reward(policy, dataset);

    std::vector<double> grad(ToyPolicy::kParamCount, 0.0);
    double l_align_sum = 0.0, l_temp_sum = 0.0, j_rro_sum = 0.0;

    for (int b = 0; b < batch; ++b) {
      const ToyContext& ctx =
          dataset[rng.uniform_int(dataset.size())];

      auto [la, la_grad] = align_loss(policy, ctx, ctx.gold_phases);
      l_align_sum += la;

      auto [lt, lt_grad] = temp_loss(context_streams(ctx), config.gamma,
                                     config.temporal_variant);
      l_temp_sum += lt;  // constant in theta on the toy substrate

      std::vector<double> probs = policy.candidate_probs(ctx);
      std::vector<int> candidates(config.k_candidates);
      std::vector<double> rewards(config.k_candidates);
      for (int k = 0; k < config.k_candidates; ++k) {
        candidates[k] = sample_candidate(probs, rng);
        rewards[k] = candidate_reward(ctx, candidates[k]);
      }
      std::vector<double> weights =
          method == Method::Raft ? rro_weights(rewards, config.beta)
                                 : grpo_lite_weights(rewards, 1e-8);
      std::vector<double> jg = rro_grad(policy, ctx, candidates, weights);

      double j_est = 0.0;
      for (int k = 0; k < config.k_candidates; ++k)
        j_est += weights[k] *
                 std::log(std::max(probs[candidates[k]], 1e-300));
      j_rro_sum += j_est;

      for (size_t i = 0; i < grad.size(); ++i)
        grad[i] += la_grad[i] - config.beta * jg[i];
    }

    double l_align = l_align_sum / batch;
    double l_temp = l_temp_sum / batch;
    double j_rro = j_rro_sum / batch;
    double objective =
        raft_objective(l_align, l_temp, j_rro, config.alpha, config.beta);
    if (!std::isfinite(objective))
      throw Error(ErrorCode::DivergenceDetected,
                  "non-finite objective at iteration " +
                      std::to_string(iter));

    std::vector<double> masked = sra_mask(grad, base, cross);
    double scale = config.learning_rate / batch;
    for (size_t i = 0; i < masked.size(); ++i)
      policy.theta[i] -= scale * masked[i];
    if (!all_finite(policy.theta))
      throw Error(ErrorCode::DivergenceDetected,
                  "non-finite parameters at iteration " +
                      std::to_string(iter));

    TraceRow row{iter, mean_reward, l_align, l_temp, j_rro, objective};
    if (on_row) on_row(row);
    result.trace.push_back(row);
  }

  result.final_reward = expected_reward(policy, dataset);
  return result;
}

std::string trace_csv(const std::vector<TraceRow>& trace) {
  std::ostringstream out;
  out << "iteration,mean_reward,l_align,l_temp,j_rro,objective\n";
  out.precision(12);
  for (const auto& row : trace)
    out << row.iteration << ',' << row.mean_reward << ',' << row.l_align
        << ',' << row.l_temp << ',' << row.j_rro << ',' << row.objective
        << '\n';
  return out.str();
}

json checkpoint_to_json(const ToyPolicy& policy) {
  return json{{"format", "toy-policy-v1"}, {"theta", policy.theta}};
}

ToyPolicy checkpoint_from_json(const json& j) {
  if (j.value("format", "") != "toy-policy-v1")
    throw Error(ErrorCode::SchemaError, "unknown checkpoint format");
  ToyPolicy p;
  auto theta = j.at("theta").get<std::vector<double>>();
  if (theta.size() != ToyPolicy::kParamCount)
    throw Error(ErrorCode::SchemaError, "checkpoint parameter count");
  p.theta = std::move(theta);
  return p;
}

std::vector<SeedOutcome> compare_methods(int n_seeds,
                                         const TrainConfig& base_config,
                                         int dataset_size) {
  std::vector<SeedOutcome> out;
  for (int s = 0; s < n_seeds; ++s) {
    TrainConfig cfg = base_config;
    cfg.seed = base_config.seed + static_cast<uint64_t>(s);
    auto dataset = make_toy_dataset(dataset_size, cfg.seed);
    TrainResult raft = train(dataset, cfg, Method::Raft);
    TrainResult grpo = train(dataset, cfg, Method::GrpoLite);
    out.push_back({cfg.seed, raft.initial_reward, raft.final_reward,
                   grpo.final_reward});
  }
  return out;
}

GradReport finite_diff_check(
    const std::function<double(const std::vector<double>&)>& loss,
    const std::vector<double>& params, const std::vector<double>& analytic,
    double epsilon) {
  if (epsilon <= 0.0)
    throw Error(ErrorCode::ConfigError, "epsilon must be positive");
  GradReport report;
  report.analytic = analytic;
  report.finite_diff.resize(params.size());
  std::vector<double> probe = params;
  double max_err = 0.0;
  for (size_t i = 0; i < params.size(); ++i) {
    probe[i] = params[i] + epsilon;
    double hi = loss(probe);
    probe[i] = params[i] - epsilon;
    double lo = loss(probe);
    probe[i] = params[i];
    double fd = (hi - lo) / (2.0 * epsilon);
    report.finite_diff[i] = fd;
    double a = analytic.size() > i ? analytic[i] : 0.0;
    double denom = std::max({std::fabs(a), std::fabs(fd), 1e-8});
    double err = std::fabs(a - fd) / denom;
    // treat both-tiny coordinates as matching
    if (std::fabs(a) < 1e-10 && std::fabs(fd) < 1e-7) err = 0.0;
    max_err = std::max(max_err, err);
  }
  report.max_rel_error = max_err;
  return report;
}

}  // namespace avbench::raft
