// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "avbench/raft.hpp"
#include "oracles.hpp"

using namespace avbench;
using namespace avbench::raft;

namespace {

ToyContext make_ctx(int cue, int gold, std::array<int, 3> phases = {1, 2, 0}) {
  ToyContext ctx;
  ctx.id = "ctx";
  ctx.cue = cue;
  ctx.gold_candidate = gold;
  ctx.gold_phases = phases;
  return ctx;
}

ToyPolicy random_policy(uint64_t seed, double scale = 0.5) {
  ToyPolicy p;
  SeededRng rng(seed);
  for (double& v : p.theta) v = rng.normal() * scale;
  return p;
}

EmbeddingStreams random_streams(uint64_t seed, int steps, int dim) {
  EmbeddingStreams s;
  SeededRng rng(seed);
  s.steps.resize(steps);
  for (auto& step : s.steps) {
    for (auto& stream : step) {
      stream.resize(dim);
      for (double& v : stream) v = rng.normal();
    }
  }
  return s;
}

std::vector<double> flatten(const EmbeddingStreams& s) {
  std::vector<double> flat;
  for (const auto& step : s.steps)
    for (const auto& stream : step)
      flat.insert(flat.end(), stream.begin(), stream.end());
  return flat;
}

EmbeddingStreams unflatten(const std::vector<double>& flat, int steps,
                           int dim) {
  EmbeddingStreams s;
  s.steps.resize(steps);
  size_t k = 0;
  for (auto& step : s.steps)
    for (auto& stream : step) {
      stream.assign(flat.begin() + k, flat.begin() + k + dim);
      k += dim;
    }
  return s;
}

}  // namespace

TEST_CASE("candidate geometry and reward") {
  auto ctx = make_ctx(0, 4);
  auto iv = candidate_interval(ctx, 4);
  CHECK(iv.start == doctest::Approx(4.0 * 32.0 / 16.0));
  CHECK(iv.length() == doctest::Approx(32.0 / 4.0));
  CHECK(candidate_reward(ctx, 4) == doctest::Approx(1.0));
  CHECK(candidate_reward(ctx, 4) >= candidate_reward(ctx, 5));
}

TEST_CASE("candidate_probs is a softmax distribution") {
  auto policy = random_policy(1);
  auto ctx = make_ctx(3, 7);
  auto p = policy.candidate_probs(ctx);
  REQUIRE(p.size() == static_cast<size_t>(kCandidates));
  double sum = std::accumulate(p.begin(), p.end(), 0.0);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  for (double v : p) CHECK(v > 0.0);
  // shift invariance of the logits
  ToyPolicy shifted = policy;
  for (int i = 0; i < kCandidates; ++i) shifted.theta[i] += 100.0;
  auto p2 = shifted.candidate_probs(ctx);
  for (int i = 0; i < kCandidates; ++i) {
    CHECK(p2[i] == doctest::Approx(p[i]).epsilon(1e-9));
  }
}

TEST_CASE("align_loss anchored values and gradient") {
  // zero policy: every head is uniform over 4 categories
  ToyPolicy zero;
  auto ctx = make_ctx(0, 0);
  auto [loss, grad] = align_loss(zero, ctx, {0, 1, 2});
  CHECK(loss == doctest::Approx(3.0 * std::log(4.0)).epsilon(1e-12));

  // strongly peaked heads drive the loss toward zero
  ToyPolicy peaked;
  std::array<int, 3> gold = {2, 3, 1};
  int prev = 0;
  for (int head = 0; head < kPhaseHeads; ++head) {
    peaked.theta[peaked.phase_param_index(head, prev, gold[head])] = 50.0;
    prev = gold[head];
  }
  auto [small_loss, g2] = align_loss(peaked, ctx, gold);
  CHECK(small_loss < 1e-6);

  CHECK_THROWS_WITH_AS((void)align_loss(zero, ctx, {0, 4, 0}),
                       doctest::Contains("InvalidCategory"), Error);

  // gradient against central finite differences
  SeededRng rng(70);
  for (int rep = 0; rep < 5; ++rep) {
    auto policy = random_policy(rng.next_u64());
    std::array<int, 3> phases = {static_cast<int>(rng.uniform_int(4)),
                                 static_cast<int>(rng.uniform_int(4)),
                                 static_cast<int>(rng.uniform_int(4))};
    auto [l, analytic] = align_loss(policy, ctx, phases);
    auto loss_fn = [&](const std::vector<double>& theta) {
      ToyPolicy p;
      p.theta = theta;
      return align_loss(p, ctx, phases).first;
    };
    auto report = finite_diff_check(loss_fn, policy.theta, analytic);
    CHECK(report.max_rel_error <= 1e-4);
  }
}

TEST_CASE("perceptual and reflective rewards") {
  RewardComponents c;
  c.sync = 0.8;
  c.face = 0.6;
  c.speech = 1.0;
  c.diarization = 0.6;
  CHECK(perceptual_reward(c, {0.25, 0.25, 0.25, 0.25}) ==
        doctest::Approx(0.75));
  CHECK_THROWS_WITH_AS((void)perceptual_reward(c, {0.0, 0.0, 0.0, 0.0}),
                       doctest::Contains("ZeroWeights"), Error);

  RewardComponents r;
  r.s_task = 0.5;
  r.s_align = 0.4;
  r.s_conf = -0.2;
  r.lambda_task = 1.0;
  r.lambda_align = 1.0;
  r.lambda_conf = 1.0;
  CHECK(reflective_reward(r) == doctest::Approx(0.7));
}

TEST_CASE("rro_weights anchored values") {
  auto w = rro_weights({1.0, 0.0}, 1.0);
  REQUIRE(w.size() == 2);
  CHECK(std::fabs(w[0] - 0.7311) < 1e-4);
  CHECK(std::fabs(w[1] - 0.2689) < 1e-4);

  // equal rewards: uniform
  auto u = rro_weights({0.4, 0.4, 0.4}, 2.0);
  for (double v : u) CHECK(v == doctest::Approx(1.0 / 3.0));

  // beta = 0: uniform regardless of rewards
  auto z = rro_weights({5.0, -1.0, 2.0}, 0.0);
  for (double v : z) CHECK(v == doctest::Approx(1.0 / 3.0));

  CHECK_THROWS_AS((void)rro_weights({1.0}, 1.0), Error);
  CHECK_THROWS_WITH_AS((void)rro_weights({1.0, std::nan("")}, 1.0),
                       doctest::Contains("NonFiniteReward"), Error);
}

TEST_CASE("rro_weights properties (fuzzed)") {
  SeededRng rng(123);
  for (int rep = 0; rep < 2000; ++rep) {
    size_t n = 2 + rng.uniform_int(7);
    double beta = rng.uniform() * 4.0;
    std::vector<double> rewards(n);
    for (double& r : rewards) r = rng.normal() * 3.0;
    auto w = rro_weights(rewards, beta);

    double sum = std::accumulate(w.begin(), w.end(), 0.0);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    for (double v : w) CHECK(v > 0.0);

    // shift invariance
    std::vector<double> shifted = rewards;
    for (double& r : shifted) r += 17.3;
    auto w2 = rro_weights(shifted, beta);
    for (size_t i = 0; i < n; ++i) {
      CHECK(w2[i] == doctest::Approx(w[i]).epsilon(1e-9));
    }

    // monotonic: a larger reward never gets a smaller weight
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < n; ++j) {
        if (rewards[i] > rewards[j]) CHECK(w[i] >= w[j]);
      }
    }
  }
}

TEST_CASE("rro_grad matches finite differences with frozen weights") {
  SeededRng rng(300);
  auto ctx = make_ctx(5, 9);
  for (int rep = 0; rep < 5; ++rep) {
    auto policy = random_policy(rng.next_u64());
    std::vector<int> candidates = {static_cast<int>(rng.uniform_int(16)),
                                   static_cast<int>(rng.uniform_int(16)),
                                   static_cast<int>(rng.uniform_int(16))};
    std::vector<double> weights = {0.5, 0.3, 0.2};
    auto analytic = rro_grad(policy, ctx, candidates, weights);
    auto surrogate = [&](const std::vector<double>& theta) {
      ToyPolicy p;
      p.theta = theta;
      double s = 0.0;
      auto probs = p.candidate_probs(ctx);
      for (size_t i = 0; i < candidates.size(); ++i) {
        s += weights[i] * std::log(probs[candidates[i]]);
      }
      return s;
    };
    auto report = finite_diff_check(surrogate, policy.theta, analytic);
    CHECK(report.max_rel_error <= 1e-4);
  }

  // repeated candidates accumulate
  auto policy = random_policy(8);
  auto g1 = rro_grad(policy, ctx, {3, 3}, {0.5, 0.5});
  auto g2 = rro_grad(policy, ctx, {3}, {1.0});
  for (size_t i = 0; i < g1.size(); ++i) {
    CHECK(g1[i] == doctest::Approx(g2[i]).epsilon(1e-12));
  }
}

TEST_CASE("temp_loss values per variant") {
  // identical audio/visual and text/reflect streams: zero loss
  EmbeddingStreams same;
  same.steps.resize(3);
  for (auto& step : same.steps) {
    step[0] = step[1] = {1.0, -2.0};
    step[2] = step[3] = {0.5, 0.5};
  }
  CHECK(temp_loss(same, 0.5, TemporalVariant::Main).first ==
        doctest::Approx(0.0));

  // T=1, unit gaps: 1 + gamma with gamma = 0 isolates the first pair
  EmbeddingStreams one;
  one.steps.resize(1);
  one.steps[0][0] = {1.0};
  one.steps[0][1] = {0.0};
  one.steps[0][2] = {0.0};
  one.steps[0][3] = {0.0};
  CHECK(temp_loss(one, 0.0, TemporalVariant::Main).first ==
        doctest::Approx(1.0));
  one.steps[0][2] = {2.0};
  CHECK(temp_loss(one, 0.5, TemporalVariant::Main).first ==
        doctest::Approx(1.0 + 0.5 * 4.0));

  // velocity variant with constant per-stream offsets: velocities match
  EmbeddingStreams drift;
  drift.steps.resize(3);
  for (int t = 0; t < 3; ++t) {
    drift.steps[t][0] = {static_cast<double>(t)};
    drift.steps[t][1] = {static_cast<double>(t) + 1.0};
    drift.steps[t][2] = {static_cast<double>(t) + 1.0};
    drift.steps[t][3] = {0.0};
  }
  auto [vel_loss, vg] = temp_loss(drift, 0.7, TemporalVariant::VelocityAugmented);
  // pairs (a,v) and (v,t) each contribute 1 per step; velocity term is zero
  CHECK(vel_loss == doctest::Approx(3.0 * 1.0 + 3.0 * 0.0 + 0.0));

  EmbeddingStreams ragged = same;
  ragged.steps[1][2] = {1.0, 2.0, 3.0};
  CHECK_THROWS_WITH_AS(
      (void)temp_loss(ragged, 0.5, TemporalVariant::Main),
      doctest::Contains("StreamLengthMismatch"), Error);
}

TEST_CASE("temp_loss gradient matches finite differences (both variants)") {
  const int steps = 4, dim = 3;
  SeededRng rng(55);
  for (auto variant :
       {TemporalVariant::Main, TemporalVariant::VelocityAugmented}) {
    for (int rep = 0; rep < 3; ++rep) {
      auto streams = random_streams(rng.next_u64(), steps, dim);
      auto [loss, analytic] = temp_loss(streams, 0.5, variant);
      auto loss_fn = [&](const std::vector<double>& flat) {
        return temp_loss(unflatten(flat, steps, dim), 0.5, variant).first;
      };
      auto report = finite_diff_check(loss_fn, flatten(streams), analytic);
      CHECK(report.max_rel_error <= 1e-4);
    }
  }
}

TEST_CASE("sra_apply") {
  Matrix w0 = {{1.0, 0.0}, {0.0, 1.0}};
  AdapterPair adapter;
  adapter.a = {{1.0}, {0.0}};
  adapter.b = {{0.0, 2.0}};
  adapter.rank = 1;
  adapter.alpha_sra = 2.0;
  // W = W0 + (alpha/r) A B = I + 2 * [[0,2],[0,0]]
  auto w = sra_apply(w0, adapter);
  CHECK(w[0][0] == doctest::Approx(1.0));
  CHECK(w[0][1] == doctest::Approx(4.0));
  CHECK(w[1][0] == doctest::Approx(0.0));
  CHECK(w[1][1] == doctest::Approx(1.0));

  // zero adapter returns W0 exactly
  AdapterPair zero = adapter;
  zero.a = {{0.0}, {0.0}};
  auto same = sra_apply(w0, zero);
  CHECK(same == w0);

  AdapterPair bad = adapter;
  bad.b = {{1.0}};
  CHECK_THROWS_WITH_AS((void)sra_apply(w0, bad),
                       doctest::Contains("ShapeMismatch"), Error);
}

TEST_CASE("sra_mask zeroes exactly the base partition") {
  std::vector<double> grad = {1, 2, 3, 4, 5, 6};
  auto masked = sra_mask(grad, {0, 2}, {1, 3, 4, 5});
  CHECK(masked == std::vector<double>{0, 2, 0, 4, 5, 6});

  // partitions must exactly cover the gradient
  CHECK_THROWS_WITH_AS((void)sra_mask(grad, {0, 2}, {1, 3, 4}),
                       doctest::Contains("PartitionError"), Error);
  CHECK_THROWS_WITH_AS((void)sra_mask(grad, {0, 2}, {1, 2, 3, 4, 5}),
                       doctest::Contains("PartitionError"), Error);
}

TEST_CASE("raft_objective composition") {
  CHECK(raft_objective(2.0, 4.0, 3.0, 0.1, 0.5) ==
        doctest::Approx(2.0 + 0.1 * 4.0 - 0.5 * 3.0));
  CHECK(raft_objective(0.0, 0.0, 0.0, 0.1, 0.5) == 0.0);
}

TEST_CASE("grpo_lite_weights") {
  // equal rewards: zero advantages
  auto z = grpo_lite_weights({0.3, 0.3, 0.3}, 1e-8);
  for (double v : z) CHECK(v == 0.0);

  // (1, -1), eps = 0: population sigma = 1 -> (1, -1)
  auto w = grpo_lite_weights({1.0, -1.0}, 0.0);
  CHECK(w[0] == doctest::Approx(1.0));
  CHECK(w[1] == doctest::Approx(-1.0));

  // shift invariance
  auto a = grpo_lite_weights({2.0, 5.0, 9.0}, 1e-8);
  auto b = grpo_lite_weights({12.0, 15.0, 19.0}, 1e-8);
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-9));
  }
}

TEST_CASE("training runs deterministically without touching theta_base") {
  auto dataset = make_toy_dataset(32, 4);
  TrainConfig cfg;
  cfg.iterations = 50;
  cfg.seed = 4;

  // zero iterations: identity
  TrainConfig zero = cfg;
  zero.iterations = 0;
  auto r0 = train(dataset, zero, Method::Raft);
  CHECK(r0.trace.empty());
  CHECK(r0.final_reward == doctest::Approx(r0.initial_reward));

  auto r1 = train(dataset, cfg, Method::Raft);
  CHECK(r1.trace.size() == 50);
  CHECK(r1.final_reward > r1.initial_reward);

  // the bias partition never moves under gradient masking
  for (size_t i : r1.policy.base_indices()) {
    CHECK(r1.policy.theta[i] == 0.0);
  }
  bool cross_moved = false;
  for (size_t i : r1.policy.cross_indices()) {
    if (r1.policy.theta[i] != 0.0) cross_moved = true;
  }
  CHECK(cross_moved);

  // byte-identical rerun
  auto r2 = train(dataset, cfg, Method::Raft);
  CHECK(trace_csv(r2.trace) == trace_csv(r1.trace));
  CHECK(checkpoint_to_json(r2.policy).dump() ==
        checkpoint_to_json(r1.policy).dump());

  // on_row observes every row in order
  std::vector<int> seen;
  (void)train(dataset, cfg, Method::Raft,
              [&](const TraceRow& row) { seen.push_back(row.iteration); });
  CHECK(seen.size() == 50);
  CHECK(seen.front() == 0);
  CHECK(seen.back() == 49);

  // checkpoints round trip
  auto back = checkpoint_from_json(checkpoint_to_json(r1.policy));
  CHECK(back.theta == r1.policy.theta);
}

TEST_CASE("finite_diff_check on closed-form cases") {
  // quadratic: gradient 2x
  std::vector<double> x = {1.0, -2.0, 3.0};
  auto quad = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double e : v) s += e * e;
    return s;
  };
  std::vector<double> grad = {2.0, -4.0, 6.0};
  auto ok = finite_diff_check(quad, x, grad);
  CHECK(ok.max_rel_error <= 1e-6);

  // deliberately wrong gradient is flagged
  std::vector<double> wrong = {2.0, -4.0, 7.0};
  auto bad = finite_diff_check(quad, x, wrong);
  CHECK(bad.max_rel_error > 1e-2);

  // constant function: zero against zero
  auto constant = [](const std::vector<double>&) { return 5.0; };
  auto flat = finite_diff_check(constant, x, {0.0, 0.0, 0.0});
  CHECK(flat.max_rel_error <= 1e-6);
}
