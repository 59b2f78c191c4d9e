#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "foldcall/config.hpp"
#include "foldcall/reward.hpp"
#include "foldcall/synthworld.hpp"

namespace foldcall {

/// Logits of the three categorical decision heads for one query.
struct HeadLogits {
  std::vector<double> solvability;
  std::vector<double> budget;
  std::vector<double> commit;  // {solve, fold}
};

/// Tabular policy over a fixed query pool: one set of decision heads per
/// query, the trainable analog of a query-conditioned reasoning policy.
struct PolicyParams {
  int solvability_buckets = 8;
  int budget_buckets = 8;
  std::vector<std::string> query_ids;  // aligned with World::queries
  std::vector<HeadLogits> heads;

  /// Heads mimicking an untrained long-thinking base policy: committed to
  /// attempting, budget mass near the top bucket, flat solvability.
  static PolicyParams vanilla_biased(const World& world, int s_buckets,
                                     int b_buckets);

  void validate() const;
};

std::vector<double> softmax(std::span<const double> logits);

/// Samples one decision from the behavior policy, recording per-step
/// probabilities for later ratio computation.
PolicyDecision sample_decision(const PolicyParams& policy, int query_index,
                               std::mt19937_64& rng);

struct GroupRollout {
  std::vector<RolloutRecord> records;
  std::vector<PolicyDecision> decisions;
};

/// Draws k independent decisions and materializes them in the world.
GroupRollout rollout_group(const World& world, const PolicyParams& policy,
                           int query_index, int k, std::mt19937_64& rng);

/// Composite reward totals for a group, in record order.
std::vector<double> group_rewards(std::span<const RolloutRecord> records,
                                  const GroupProfile& profile,
                                  const RewardConfig& cfg);

/// One profiled group with its normalized advantages, the unit the
/// surrogate objective is built from.
struct GroupSample {
  int query_index = 0;
  std::vector<PolicyDecision> decisions;
  std::vector<double> advantages;
};

/// Mean over groups, rollouts, and the three decision steps of
/// r * A (unclipped) or min(r*A, clip(r)*A) (clipped), where r is the
/// probability ratio of the step choice under policy vs the recorded
/// behavior probabilities.
double surrogate_value(const PolicyParams& policy,
                       std::span<const GroupSample> batch, bool clipped,
                       double clip_eps);

/// Analytic gradient of the surrogate with respect to every logit; same
/// shape as the policy heads.
std::vector<HeadLogits> surrogate_gradient(const PolicyParams& policy,
                                           std::span<const GroupSample> batch,
                                           bool clipped, double clip_eps);

/// Per-class scalar keyed by the world class label.
struct ClassStats {
  double easy = 0.0;
  double worthy = 0.0;
  double unsolvable = 0.0;

  double& at(QueryClass c);
  double at(QueryClass c) const;
};

struct StepStats {
  int step = 0;
  double mean_reward = 0.0;
  double objective = 0.0;  // expected net return estimate for this batch
  double accuracy = 0.0;
  ClassStats fold_rate;
  ClassStats mean_budget;  // invested fraction of l_max
  ClassStats mean_cost;    // realized think tokens
};

/// One on-policy GRPO update over a batch of query indices: profile each
/// group, score the composite reward, normalize advantages, ascend the
/// clipped surrogate once. Throws on non-finite numerics.
StepStats grpo_step(const World& world, PolicyParams& policy,
                    std::span<const int> query_indices,
                    const RewardConfig& reward_cfg,
                    const TrainConfig& train_cfg, std::mt19937_64& rng);

/// Per-rollout contribution to the expected net return: solution value
/// minus the failed-attempt penalty, minus alpha_cost per unit of
/// normalized cost. Folds are zero-value, cost-only actions.
double rollout_value(const RolloutRecord& r, const RewardConfig& cfg,
                     double alpha_cost);

/// Monte Carlo estimate of the expected net return of the policy over the
/// world's query pool, k rollouts per query.
double objective_value(const World& world, const PolicyParams& policy,
                       const RewardConfig& reward_cfg,
                       const TrainConfig& train_cfg, int k,
                       std::uint64_t seed);

struct TrainResult {
  PolicyParams policy;
  std::vector<StepStats> stats;
};

/// Full training loop: fresh query batches every step, stats per step,
/// deterministic given the seed in train_cfg.
TrainResult train(const World& world, const RewardConfig& reward_cfg,
                  const TrainConfig& train_cfg, int s_buckets = 8,
                  int b_buckets = 8);

/// Post-training evaluation pass with fresh sampled rollouts.
struct QueryEval {
  std::string query_id;
  QueryClass class_label = QueryClass::Easy;
  double fold_rate = 0.0;
  double mean_cost = 0.0;
  double mean_budget = 0.0;
  double success_rate = 0.0;
};

struct EvalReport {
  ClassStats fold_rate;
  ClassStats mean_cost;
  ClassStats mean_budget;
  ClassStats accuracy;
  double overall_accuracy = 0.0;
  double overall_mean_cost = 0.0;
  double objective = 0.0;
  std::vector<QueryEval> per_query;
};

EvalReport evaluate(const World& world, const PolicyParams& policy,
                    const RewardConfig& reward_cfg,
                    const TrainConfig& train_cfg, int k, std::uint64_t seed);

}  // namespace foldcall
