#include "foldcall/trainer.hpp"

#include <cmath>
#include <stdexcept>

#include "foldcall/profiler.hpp"

namespace foldcall {

namespace {

// Initialization constants mimicking a long-thinking base policy that
// always attempts at near-maximal budget.
constexpr double kAttemptBias = 2.2;
constexpr double kTopBudgetBias = 3.5;

double unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

int sample_categorical(std::span<const double> probs, std::mt19937_64& rng) {
  const double u = unit_double(rng);
  double cumulative = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cumulative += probs[i];
    if (u < cumulative) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

double bucket_midpoint(int bucket, int bucket_count) {
  return (bucket + 0.5) / bucket_count;
}

struct StatsAccumulator {
  ClassStats fold_sum, budget_sum, cost_sum, correct_sum, count;

  void add(QueryClass c, const RolloutRecord& rec, double invested) {
    count.at(c) += 1.0;
    fold_sum.at(c) += rec.abstained ? 1.0 : 0.0;
    budget_sum.at(c) += invested;
    cost_sum.at(c) += rec.think_tokens;
    correct_sum.at(c) += rec.is_correct() ? 1.0 : 0.0;
  }

  ClassStats ratio(const ClassStats& numer) const {
    ClassStats out;
    for (const auto c :
         {QueryClass::Easy, QueryClass::Worthy, QueryClass::Unsolvable}) {
      const double n = count.at(c);
      out.at(c) = n > 0.0 ? numer.at(c) / n : 0.0;
    }
    return out;
  }
};

}  // namespace

double& ClassStats::at(QueryClass c) {
  switch (c) {
    case QueryClass::Easy: return easy;
    case QueryClass::Worthy: return worthy;
    case QueryClass::Unsolvable: return unsolvable;
  }
  throw std::logic_error("ClassStats: bad class");
}

double ClassStats::at(QueryClass c) const {
  return const_cast<ClassStats*>(this)->at(c);
}

PolicyParams PolicyParams::vanilla_biased(const World& world, int s_buckets,
                                          int b_buckets) {
  if (s_buckets < 2 || b_buckets < 2)
    throw std::invalid_argument("policy: bucket counts must be at least 2");
  PolicyParams p;
  p.solvability_buckets = s_buckets;
  p.budget_buckets = b_buckets;
  p.query_ids.reserve(world.queries.size());
  p.heads.reserve(world.queries.size());
  for (const auto& q : world.queries) {
    p.query_ids.push_back(q.query_id);
    HeadLogits h;
    h.solvability.assign(s_buckets, 0.0);
    h.budget.assign(b_buckets, 0.0);
    h.budget.back() = kTopBudgetBias;
    h.commit = {kAttemptBias, -kAttemptBias};
    p.heads.push_back(std::move(h));
  }
  return p;
}

void PolicyParams::validate() const {
  if (query_ids.size() != heads.size())
    throw std::invalid_argument("policy: id/head count mismatch");
  for (const auto& h : heads) {
    if (static_cast<int>(h.solvability.size()) != solvability_buckets ||
        static_cast<int>(h.budget.size()) != budget_buckets ||
        h.commit.size() != 2)
      throw std::invalid_argument("policy: head size mismatch");
    for (const auto* head : {&h.solvability, &h.budget, &h.commit}) {
      double sum = 0.0;
      for (const double p : softmax(*head)) sum += p;
      if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("policy: head probabilities must sum to 1");
      for (const double z : *head)
        if (!std::isfinite(z))
          throw std::invalid_argument("policy: non-finite logit");
    }
  }
}

std::vector<double> softmax(std::span<const double> logits) {
  double max_logit = logits.front();
  for (const double z : logits) max_logit = std::max(max_logit, z);
  std::vector<double> probs(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - max_logit);
    sum += probs[i];
  }
  for (double& p : probs) p /= sum;
  return probs;
}

PolicyDecision sample_decision(const PolicyParams& policy, int query_index,
                               std::mt19937_64& rng) {
  const auto& h = policy.heads.at(query_index);
  const auto probs_s = softmax(h.solvability);
  const auto probs_b = softmax(h.budget);
  const auto probs_c = softmax(h.commit);

  PolicyDecision d;
  d.solvability_bucket = sample_categorical(probs_s, rng);
  d.budget_bucket = sample_categorical(probs_b, rng);
  d.fold = sample_categorical(probs_c, rng) == 1;
  d.declared_solvability =
      bucket_midpoint(d.solvability_bucket, policy.solvability_buckets);
  d.declared_budget = bucket_midpoint(d.budget_bucket, policy.budget_buckets);
  d.invested_budget = d.fold ? 0.0 : d.declared_budget;
  d.prob_solvability = probs_s[d.solvability_bucket];
  d.prob_budget = probs_b[d.budget_bucket];
  d.prob_commit = probs_c[d.fold ? 1 : 0];
  return d;
}

GroupRollout rollout_group(const World& world, const PolicyParams& policy,
                           int query_index, int k, std::mt19937_64& rng) {
  if (k < 2) throw std::invalid_argument("rollout_group: k must be at least 2");
  const auto& q = world.queries.at(query_index);
  GroupRollout out;
  out.records.reserve(k);
  out.decisions.reserve(k);
  const double abstain_frac =
      static_cast<double>(world.abstention_cost) / world.l_max;
  for (int i = 0; i < k; ++i) {
    auto d = sample_decision(policy, query_index, rng);
    if (d.fold) d.invested_budget = abstain_frac;
    out.records.push_back(sample_rollout(world, q, d, i, rng));
    out.decisions.push_back(d);
  }
  return out;
}

std::vector<double> group_rewards(std::span<const RolloutRecord> records,
                                  const GroupProfile& profile,
                                  const RewardConfig& cfg) {
  std::vector<double> rewards;
  rewards.reserve(records.size());
  for (const auto& r : records)
    rewards.push_back(composite_reward(r, profile, cfg).total);
  return rewards;
}

namespace {

// Per-step ratio of the chosen action under the evaluated policy vs the
// recorded behavior probability.
struct StepRatio {
  const std::vector<double>* logits;
  int choice;
  double behavior_prob;
};

template <typename Fn>
void for_each_step(const PolicyParams& policy, const GroupSample& group,
                   Fn&& fn) {
  const auto& h = policy.heads.at(group.query_index);
  for (std::size_t k = 0; k < group.decisions.size(); ++k) {
    const auto& d = group.decisions[k];
    const double advantage = group.advantages.at(k);
    fn(StepRatio{&h.solvability, d.solvability_bucket, d.prob_solvability},
       advantage, group.query_index, 0);
    fn(StepRatio{&h.budget, d.budget_bucket, d.prob_budget}, advantage,
       group.query_index, 1);
    fn(StepRatio{&h.commit, d.fold ? 1 : 0, d.prob_commit}, advantage,
       group.query_index, 2);
  }
}

}  // namespace

double surrogate_value(const PolicyParams& policy,
                       std::span<const GroupSample> batch, bool clipped,
                       double clip_eps) {
  if (batch.empty())
    throw std::invalid_argument("surrogate_value: empty batch");
  double total = 0.0;
  for (const auto& group : batch) {
    if (group.decisions.size() != group.advantages.size())
      throw std::invalid_argument(
          "surrogate_value: decision/advantage size mismatch");
    double group_sum = 0.0;
    for_each_step(policy, group,
                  [&](const StepRatio& step, double advantage, int, int) {
                    const auto probs = softmax(*step.logits);
                    const double ratio =
                        probs[step.choice] / step.behavior_prob;
                    double term = ratio * advantage;
                    if (clipped) {
                      const double clipped_ratio = std::clamp(
                          ratio, 1.0 - clip_eps, 1.0 + clip_eps);
                      term = std::min(term, clipped_ratio * advantage);
                    }
                    group_sum += term;
                  });
    total += group_sum / (3.0 * static_cast<double>(group.decisions.size()));
  }
  return total / static_cast<double>(batch.size());
}

std::vector<HeadLogits> surrogate_gradient(const PolicyParams& policy,
                                           std::span<const GroupSample> batch,
                                           bool clipped, double clip_eps) {
  if (batch.empty())
    throw std::invalid_argument("surrogate_gradient: empty batch");
  std::vector<HeadLogits> grad(policy.heads.size());
  for (std::size_t i = 0; i < grad.size(); ++i) {
    grad[i].solvability.assign(policy.solvability_buckets, 0.0);
    grad[i].budget.assign(policy.budget_buckets, 0.0);
    grad[i].commit.assign(2, 0.0);
  }

  for (const auto& group : batch) {
    const double scale =
        1.0 / (static_cast<double>(batch.size()) * 3.0 *
               static_cast<double>(group.decisions.size()));
    for_each_step(
        policy, group,
        [&](const StepRatio& step, double advantage, int query_index,
            int head_index) {
          const auto probs = softmax(*step.logits);
          const double ratio = probs[step.choice] / step.behavior_prob;
          if (clipped) {
            // The clipped branch of min(rA, clip(r)A) has zero gradient.
            const bool active = advantage >= 0.0 ? ratio <= 1.0 + clip_eps
                                                 : ratio >= 1.0 - clip_eps;
            if (!active) return;
          }
          auto& g = grad[query_index];
          auto& head = head_index == 0   ? g.solvability
                       : head_index == 1 ? g.budget
                                         : g.commit;
          // d(ratio)/dz_i = ratio * (1{i = choice} - p_i)
          for (std::size_t i = 0; i < head.size(); ++i) {
            const double indicator = static_cast<int>(i) == step.choice;
            head[i] += scale * advantage * ratio * (indicator - probs[i]);
          }
        });
  }
  return grad;
}

double rollout_value(const RolloutRecord& r, const RewardConfig& cfg,
                     double alpha_cost) {
  double value = 0.0;
  if (r.is_correct())
    value = cfg.r_plus;
  else if (!r.abstained)
    value = -fail_penalty(r.think_tokens, cfg);
  value -= alpha_cost * static_cast<double>(r.think_tokens) / cfg.l_max;
  return value;
}

StepStats grpo_step(const World& world, PolicyParams& policy,
                    std::span<const int> query_indices,
                    const RewardConfig& reward_cfg,
                    const TrainConfig& train_cfg, std::mt19937_64& rng) {
  if (query_indices.empty())
    throw std::invalid_argument("grpo_step: empty prompt batch");

  std::vector<GroupSample> batch;
  batch.reserve(query_indices.size());
  StatsAccumulator acc;
  double reward_sum = 0.0;
  double objective_sum = 0.0;
  std::int64_t rollout_count = 0;

  for (const int qi : query_indices) {
    auto group = rollout_group(world, policy, qi, train_cfg.k_rollouts, rng);
    const auto profile = build_profile(group.records, reward_cfg);
    const auto rewards = group_rewards(group.records, profile, reward_cfg);

    GroupSample sample;
    sample.query_index = qi;
    sample.advantages = group_advantages(rewards, train_cfg.eps_norm);
    sample.decisions = std::move(group.decisions);

    const auto cls = world.queries[qi].class_label;
    for (std::size_t k = 0; k < group.records.size(); ++k) {
      acc.add(cls, group.records[k], sample.decisions[k].invested_budget);
      reward_sum += rewards[k];
      objective_sum += rollout_value(group.records[k], reward_cfg,
                                     train_cfg.objective_cost_weight);
      ++rollout_count;
    }
    batch.push_back(std::move(sample));
  }

  const auto grad =
      surrogate_gradient(policy, batch, /*clipped=*/true, train_cfg.clip_eps);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    auto apply = [&](std::vector<double>& logits,
                     const std::vector<double>& g) {
      for (std::size_t j = 0; j < logits.size(); ++j) {
        logits[j] += train_cfg.learn_rate * g[j];
        if (!std::isfinite(logits[j]))
          throw std::runtime_error(
              "grpo_step: non-finite logit after update on query " +
              policy.query_ids[i]);
      }
    };
    apply(policy.heads[i].solvability, grad[i].solvability);
    apply(policy.heads[i].budget, grad[i].budget);
    apply(policy.heads[i].commit, grad[i].commit);
  }

  StepStats stats;
  stats.mean_reward = reward_sum / static_cast<double>(rollout_count);
  stats.objective = objective_sum / static_cast<double>(rollout_count);
  stats.fold_rate = acc.ratio(acc.fold_sum);
  stats.mean_budget = acc.ratio(acc.budget_sum);
  stats.mean_cost = acc.ratio(acc.cost_sum);
  double correct_total = acc.correct_sum.easy + acc.correct_sum.worthy +
                         acc.correct_sum.unsolvable;
  stats.accuracy = correct_total / static_cast<double>(rollout_count);
  return stats;
}

double objective_value(const World& world, const PolicyParams& policy,
                       const RewardConfig& reward_cfg,
                       const TrainConfig& train_cfg, int k,
                       std::uint64_t seed) {
  if (k < 1)
    throw std::invalid_argument("objective_value: k must be at least 1");
  std::mt19937_64 rng(splitmix64(seed));
  double sum = 0.0;
  std::int64_t count = 0;
  for (std::size_t qi = 0; qi < world.queries.size(); ++qi) {
    for (int i = 0; i < k; ++i) {
      auto d = sample_decision(policy, static_cast<int>(qi), rng);
      if (d.fold)
        d.invested_budget =
            static_cast<double>(world.abstention_cost) / world.l_max;
      const auto rec = sample_rollout(world, world.queries[qi], d, i, rng);
      sum += rollout_value(rec, reward_cfg, train_cfg.objective_cost_weight);
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

TrainResult train(const World& world, const RewardConfig& reward_cfg,
                  const TrainConfig& train_cfg, int s_buckets,
                  int b_buckets) {
  reward_cfg.validate();
  train_cfg.validate();
  if (world.queries.empty())
    throw std::invalid_argument("train: world has no queries");

  TrainResult result;
  result.policy = PolicyParams::vanilla_biased(world, s_buckets, b_buckets);
  result.stats.reserve(train_cfg.steps);

  std::mt19937_64 rng(splitmix64(train_cfg.seed));
  const auto pool = world.queries.size();
  for (int step = 0; step < train_cfg.steps; ++step) {
    std::vector<int> batch(train_cfg.prompt_batch);
    for (auto& qi : batch) qi = static_cast<int>(rng() % pool);
    auto stats =
        grpo_step(world, result.policy, batch, reward_cfg, train_cfg, rng);
    stats.step = step;
    result.stats.push_back(stats);
  }
  return result;
}

EvalReport evaluate(const World& world, const PolicyParams& policy,
                    const RewardConfig& reward_cfg,
                    const TrainConfig& train_cfg, int k, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("evaluate: k must be at least 1");
  std::mt19937_64 rng(splitmix64(seed ^ 0xE7A1BA73ULL));
  EvalReport report;
  StatsAccumulator acc;
  double objective_sum = 0.0;
  double cost_sum = 0.0;
  double correct_sum = 0.0;
  std::int64_t count = 0;

  const double abstain_frac =
      static_cast<double>(world.abstention_cost) / world.l_max;
  for (std::size_t qi = 0; qi < world.queries.size(); ++qi) {
    const auto& q = world.queries[qi];
    QueryEval qe;
    qe.query_id = q.query_id;
    qe.class_label = q.class_label;
    for (int i = 0; i < k; ++i) {
      auto d = sample_decision(policy, static_cast<int>(qi), rng);
      if (d.fold) d.invested_budget = abstain_frac;
      const auto rec = sample_rollout(world, q, d, i, rng);
      acc.add(q.class_label, rec, d.invested_budget);
      qe.fold_rate += rec.abstained ? 1.0 : 0.0;
      qe.mean_cost += rec.think_tokens;
      qe.mean_budget += d.invested_budget;
      qe.success_rate += rec.is_correct() ? 1.0 : 0.0;
      objective_sum += rollout_value(rec, reward_cfg,
                                     train_cfg.objective_cost_weight);
      cost_sum += rec.think_tokens;
      correct_sum += rec.is_correct() ? 1.0 : 0.0;
      ++count;
    }
    qe.fold_rate /= k;
    qe.mean_cost /= k;
    qe.mean_budget /= k;
    qe.success_rate /= k;
    report.per_query.push_back(std::move(qe));
  }

  report.fold_rate = acc.ratio(acc.fold_sum);
  report.mean_cost = acc.ratio(acc.cost_sum);
  report.mean_budget = acc.ratio(acc.budget_sum);
  report.accuracy = acc.ratio(acc.correct_sum);
  report.overall_accuracy = correct_sum / static_cast<double>(count);
  report.overall_mean_cost = cost_sum / static_cast<double>(count);
  report.objective = objective_sum / static_cast<double>(count);
  return report;
}

}  // namespace foldcall
