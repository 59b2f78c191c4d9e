#include "foldcall/reward.hpp"

#include <cmath>
#include <stdexcept>

namespace foldcall {

namespace {

bool has_estimates(const RolloutRecord& r) {
  return r.format_valid && r.predicted_solvability.has_value() &&
         r.predicted_budget.has_value();
}

void check_pair(const RolloutRecord& r, const GroupProfile& p) {
  if (r.query_id != p.query_id)
    throw std::invalid_argument("reward: record and profile query ids differ");
}

}  // namespace

double fail_penalty(int cost, const RewardConfig& cfg) {
  if (cost < 0 || cost > cfg.l_max)
    throw std::invalid_argument("fail_penalty: cost outside [0, l_max]");
  return cfg.alpha_fail * static_cast<double>(cost) / cfg.l_max;
}

double value_reward(const RolloutRecord& r, const GroupProfile& profile,
                    const RewardConfig& cfg) {
  check_pair(r, profile);
  if (r.abstained) {
    if (!cfg.enable_fold_gate) return 0.0;
    return profile.success_rate < cfg.eps_abs ? cfg.delta : -cfg.lambda_;
  }
  if (r.is_correct()) return cfg.r_plus;
  return -fail_penalty(r.think_tokens, cfg);
}

double efficiency_reward(const RolloutRecord& r, const GroupProfile& profile,
                         const RewardConfig& cfg) {
  check_pair(r, profile);
  if (!cfg.enable_eff || r.abstained || !r.is_correct()) return 0.0;
  if (profile.success_rate <= cfg.tau) return 0.0;
  if (!profile.efficient_cost)
    throw std::logic_error(
        "efficiency_reward: success rate above tau but no efficient cost");
  const double ratio = static_cast<double>(r.think_tokens) /
                       static_cast<double>(*profile.efficient_cost);
  return cfg.beta * std::max(0.0, 1.0 - ratio);
}

double budget_loss(double b_hat, double b_star, double mu) {
  const double gap = std::abs(b_hat - b_star);
  return b_hat < b_star ? mu * gap : gap;
}

double calibration_reward(const RolloutRecord& r, const GroupProfile& profile,
                          const RewardConfig& cfg) {
  check_pair(r, profile);
  const bool estimates = has_estimates(r);

  if (profile.success_rate >= cfg.eps_abs) {
    if (!profile.budget_target)
      throw std::logic_error(
          "calibration_reward: solvable profile without a budget target");
    const double b_star = *profile.budget_target;
    double s_dist, loss;
    if (estimates) {
      s_dist = std::abs(*r.predicted_solvability - profile.success_rate);
      loss = budget_loss(*r.predicted_budget, b_star, cfg.mu);
    } else {
      // Worst case: full solvability distance, budget loss at the endpoint
      // farther from the target.
      s_dist = 1.0;
      const double endpoint = b_star >= 1.0 - b_star ? 0.0 : 1.0;
      loss = budget_loss(endpoint, b_star, cfg.mu);
    }
    double reward = 0.0;
    if (cfg.enable_cal_solv) reward -= cfg.gamma_s * s_dist;
    if (cfg.enable_cal_bud) reward -= cfg.gamma_b * loss;
    return reward;
  }

  const double declared_s = estimates ? *r.predicted_solvability : 1.0;
  const double declared_b = estimates ? *r.predicted_budget : 1.0;
  double reward = 0.0;
  if (cfg.enable_cal_solv) reward -= cfg.gamma_s_prime * declared_s;
  if (cfg.enable_cal_bud) reward -= cfg.gamma_b_prime * declared_b;
  return reward;
}

RewardBreakdown composite_reward(const RolloutRecord& r,
                                 const GroupProfile& profile,
                                 const RewardConfig& cfg) {
  RewardBreakdown b;
  b.r_val = value_reward(r, profile, cfg);
  b.r_eff = efficiency_reward(r, profile, cfg);
  b.r_cal = calibration_reward(r, profile, cfg);
  b.total = b.r_val + b.r_eff + b.r_cal;
  return b;
}

std::vector<double> group_advantages(std::span<const double> rewards,
                                     double eps_norm) {
  if (rewards.size() < 2)
    throw std::invalid_argument("group_advantages: need at least two rewards");
  const auto k = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (const double r : rewards) mean += r;
  mean /= k;
  double var = 0.0;
  for (const double r : rewards) var += (r - mean) * (r - mean);
  const double std_dev = std::sqrt(var / k);  // population std over the group
  std::vector<double> advantages;
  advantages.reserve(rewards.size());
  for (const double r : rewards)
    advantages.push_back((r - mean) / (std_dev + eps_norm));
  return advantages;
}

}  // namespace foldcall
