#pragma once

#include <span>
#include <vector>

#include "foldcall/config.hpp"
#include "foldcall/types.hpp"

namespace foldcall {

/// Fraction of graded-correct rollouts in the group. Abstained and
/// format-invalid records count as not-correct. Empty group is an error.
double group_success_rate(std::span<const RolloutRecord> group);

/// Mean of the m = max(1, ceil(p * n)) smallest costs, rounded to the
/// nearest integer with ties rounding half-up. Costs need not be presorted.
int efficient_cost(std::span<const int> costs, double p);

/// Assembles the group profile: success rate, sorted correct costs, and
/// (when any rollout is correct) the efficient cost and its budget target.
GroupProfile build_profile(std::span<const RolloutRecord> group,
                           const RewardConfig& cfg);

}  // namespace foldcall
