#pragma once

#include <span>
#include <vector>

#include "foldcall/config.hpp"
#include "foldcall/types.hpp"

namespace foldcall {

struct RewardBreakdown {
  double r_val = 0.0;
  double r_eff = 0.0;
  double r_cal = 0.0;
  double total = 0.0;  // exact sum of the three components
};

/// Cost-proportional penalty for a failed attempt: alpha_fail * c / l_max.
/// cost outside [0, l_max] is an error.
double fail_penalty(int cost, const RewardConfig& cfg);

/// Solution value with the abstention gate: +r_plus when correct, minus the
/// fail penalty when incorrect (format violations included), and for
/// abstentions +delta below the guard threshold, -lambda at or above it.
/// With enable_fold_gate off, abstentions score 0 regardless of the profile.
double value_reward(const RolloutRecord& r, const GroupProfile& profile,
                    const RewardConfig& cfg);

/// Query-adaptive efficiency bonus: beta * max(0, 1 - c/c*) for correct
/// rollouts when the group success rate strictly exceeds tau; else 0.
double efficiency_reward(const RolloutRecord& r, const GroupProfile& profile,
                         const RewardConfig& cfg);

/// Asymmetric budget loss: mu * |b_hat - b_star| when underestimating,
/// |b_hat - b_star| otherwise.
double budget_loss(double b_hat, double b_star, double mu);

/// Calibration of the declared estimates against the group profile.
/// Solvable branch (rate >= eps_abs): -gamma_s*|s_hat - s| - gamma_b*loss.
/// Zero-return branch: -gamma_s'*s_hat - gamma_b'*b_hat.
/// Format-invalid records take the worst case of the active branch.
double calibration_reward(const RolloutRecord& r, const GroupProfile& profile,
                          const RewardConfig& cfg);

RewardBreakdown composite_reward(const RolloutRecord& r,
                                 const GroupProfile& profile,
                                 const RewardConfig& cfg);

/// Group-relative advantages: (R_k - mean) / (population std + eps_norm).
/// Requires at least two rewards.
std::vector<double> group_advantages(std::span<const double> rewards,
                                     double eps_norm);

}  // namespace foldcall
