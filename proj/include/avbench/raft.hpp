// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "avbench/common.hpp"

namespace avbench::raft {

using json = nlohmann::ordered_json;
using Matrix = std::vector<std::vector<double>>;

// ---------------------------------------------------------------------------
// Toy substrate: 16 quantized interval candidates scored by a linear-softmax
// policy over (cue, candidate) cross features, plus three categorical
// phase heads conditioned on the previous gold phase.
// ---------------------------------------------------------------------------

constexpr int kCandidates = 16;
constexpr int kCues = 16;
constexpr int kPhaseHeads = 3;
constexpr int kPhaseCategories = 4;

struct ToyContext {
  std::string id;
  int cue = 0;             // in [0, kCues)
  int gold_candidate = 0;  // in [0, kCandidates)
  std::array<int, kPhaseHeads> gold_phases = {0, 0, 0};
  double duration = 32.0;

  Interval gold_span() const;
};

/// Candidate j's interval within a context of the given duration.
Interval candidate_interval(const ToyContext& ctx, int candidate);

/// tiou of a candidate against the context's gold span — the exact reward
/// the harness reports for grounding answers.
double candidate_reward(const ToyContext& ctx, int candidate);

struct ToyPolicy {
  // flat parameter vector; layout:
  //   [0, 16)          candidate bias            (base partition)
  //   [16, 16+256)      cue x candidate cross     (cross partition)
  //   [272, 272+48)     phase heads [head][prev][category] (cross partition)
  std::vector<double> theta;

  static constexpr size_t kBaseSize = kCandidates;
  static constexpr size_t kCrossOffset = kCandidates;
  static constexpr size_t kCrossSize = kCues * kCandidates;
  static constexpr size_t kPhaseOffset = kCrossOffset + kCrossSize;
  static constexpr size_t kPhaseSize =
      kPhaseHeads * kPhaseCategories * kPhaseCategories;
  static constexpr size_t kParamCount = kPhaseOffset + kPhaseSize;

  ToyPolicy() : theta(kParamCount, 0.0) {}

  std::vector<size_t> base_indices() const;
  std::vector<size_t> cross_indices() const;

  /// Softmax distribution over the 16 candidates; sums to 1 within 1e-9.
  std::vector<double> candidate_probs(const ToyContext& ctx) const;
  /// d log pi(candidate | ctx) / d theta, full parameter length.
  std::vector<double> grad_log_prob(const ToyContext& ctx,
                                    int candidate) const;
  /// Phase-head categorical distribution under teacher forcing: head `head`
  /// conditioned on the gold previous phase (head 0 uses a fixed start slot).
  std::vector<double> phase_probs(int head, int prev_gold) const;
  size_t phase_param_index(int head, int prev_gold, int category) const;
};

struct RewardComponents {
  double sync = 0.0, face = 0.0, speech = 0.0, diarization = 0.0;
  double s_task = 0.0, s_align = 0.0, s_conf = 0.0;  // s_conf may be signed
  double lambda_task = 1.0, lambda_align = 0.0, lambda_conf = 0.0;
};

struct AdapterPair {
  Matrix a;  // d x r
  Matrix b;  // r x d'
  int rank = 1;
  double alpha_sra = 1.0;
};

enum class TemporalVariant { Main, VelocityAugmented };
enum class Method { Raft, GrpoLite };

/// Per-timestep embedding streams; [t][stream 0..3 = a,v,t,r][dim].
struct EmbeddingStreams {
  std::vector<std::array<std::vector<double>, 4>> steps;
};

struct TrainConfig {
  double alpha = 0.1;       // temporal weight (objective)
  double beta = 0.5;        // RRO temperature and reward weight
  double gamma = 0.5;       // inner temporal weight
  double lambda_reg = 0.0;  // exposed but folded into (alpha, beta) here
  // defaults tuned once on the synthetic grounding task, then frozen
  int k_candidates = 16;
  double learning_rate = 20.0;
  int iterations = 800;
  int batch_size = 4;
  uint64_t seed = 0;
  TemporalVariant temporal_variant = TemporalVariant::Main;
};

struct TraceRow {
  int iteration = 0;
  double mean_reward = 0.0;  // exact expected reward over the dataset
  double l_align = 0.0;
  double l_temp = 0.0;
  double j_rro = 0.0;
  double objective = 0.0;
};

struct TrainResult {
  ToyPolicy policy;
  std::vector<TraceRow> trace;
  double initial_reward = 0.0;
  double final_reward = 0.0;
};

struct GradReport {
  std::vector<double> analytic;
  std::vector<double> finite_diff;
  double max_rel_error = 0.0;
};

// ---------------------------------------------------------------------------
// Losses, rewards, and weights
// ---------------------------------------------------------------------------

/// Teacher-forced phase alignment loss with its analytic gradient.
std::pair<double, std::vector<double>> align_loss(
    const ToyPolicy& policy, const ToyContext& ctx,
    const std::array<int, kPhaseHeads>& gold_phases);

/// Convex combination of the four perceptual consistency scores.
double perceptual_reward(const RewardComponents& c,
                         const std::array<double, 4>& weights);

/// lambda_task*s_task + lambda_align*s_align + lambda_conf*s_conf.
double reflective_reward(const RewardComponents& c);

/// w_i = exp(beta*(r_i - mean)) / sum_j exp(beta*(r_j - mean)).
std::vector<double> rro_weights(const std::vector<double>& rewards,
                                double beta);

/// sum_i w_i * grad log pi(candidate_i | ctx).
std::vector<double> rro_grad(const ToyPolicy& policy, const ToyContext& ctx,
                             const std::vector<int>& candidates,
                             const std::vector<double>& weights);

/// Temporal coherence loss and its gradient with respect to the flattened
/// stream entries (t-major, stream order a,v,t,r).
std::pair<double, std::vector<double>> temp_loss(
    const EmbeddingStreams& streams, double gamma, TemporalVariant variant);

Matrix sra_apply(const Matrix& w0, const AdapterPair& adapter);

/// Zeroes gradient entries on the base index set; cross entries pass through.
std::vector<double> sra_mask(const std::vector<double>& gradient,
                             const std::vector<size_t>& base,
                             const std::vector<size_t>& cross);

double raft_objective(double l_align, double l_temp, double j_rro,
                      double alpha, double beta);

/// Group-normalized advantages r_hat_i = (r_i - mu)/(sigma + eps).
std::vector<double> grpo_lite_weights(const std::vector<double>& rewards,
                                      double epsilon);

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

std::vector<ToyContext> make_toy_dataset(int n, uint64_t seed);

/// Exact expected reward of the policy over the dataset.
double expected_reward(const ToyPolicy& policy,
                       const std::vector<ToyContext>& dataset);

/// `on_row` (optional) observes each trace row as it is produced, so callers
/// can keep a partial trace if training diverges mid-run.
TrainResult train(const std::vector<ToyContext>& dataset,
                  const TrainConfig& config, Method method,
                  const std::function<void(const TraceRow&)>& on_row = {});

std::string trace_csv(const std::vector<TraceRow>& trace);

json checkpoint_to_json(const ToyPolicy& policy);
ToyPolicy checkpoint_from_json(const json& j);

struct SeedOutcome {
  uint64_t seed = 0;
  double initial_reward = 0.0;
  double final_raft = 0.0;
  double final_grpo = 0.0;
};

/// Runs both methods from the same initialization across n seeds.
std::vector<SeedOutcome> compare_methods(int n_seeds,
                                         const TrainConfig& base_config,
                                         int dataset_size = 64);

/// Central-difference check of `analytic` against `loss` at `params`.
GradReport finite_diff_check(
    const std::function<double(const std::vector<double>&)>& loss,
    const std::vector<double>& params, const std::vector<double>& analytic,
    double epsilon = 1e-5);

}  // namespace avbench::raft
