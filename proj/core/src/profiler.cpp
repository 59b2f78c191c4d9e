#include "foldcall/profiler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace foldcall {

double group_success_rate(std::span<const RolloutRecord> group) {
  if (group.empty())
    throw std::invalid_argument("group_success_rate: empty group");
  const auto& id = group.front().query_id;
  std::int64_t correct = 0;
  for (const auto& r : group) {
    if (r.query_id != id)
      throw std::invalid_argument(
          "group_success_rate: mixed query ids in one group");
    if (r.is_correct() && !r.abstained) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(group.size());
}

int efficient_cost(std::span<const int> costs, double p) {
  if (costs.empty())
    throw std::invalid_argument("efficient_cost: empty cost list");
  if (p <= 0.0 || p > 1.0)
    throw std::invalid_argument("efficient_cost: p must lie in (0,1]");
  std::vector<int> sorted(costs.begin(), costs.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  const auto m = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::ceil(p * n)));
  std::int64_t sum = 0;
  for (std::int64_t i = 0; i < m; ++i) sum += sorted[static_cast<size_t>(i)];
  // Mean of the m smallest, rounded half-up, in exact integer arithmetic.
  return static_cast<int>((2 * sum + m) / (2 * m));
}

GroupProfile build_profile(std::span<const RolloutRecord> group,
                           const RewardConfig& cfg) {
  GroupProfile profile;
  profile.success_rate = group_success_rate(group);  // validates the group
  profile.query_id = group.front().query_id;
  profile.k_rollouts = static_cast<int>(group.size());
  for (const auto& r : group) {
    // Abstentions never enter the correct set, whatever their answer text.
    if (r.is_correct() && !r.abstained)
      profile.correct_costs.push_back(r.think_tokens);
  }
  std::sort(profile.correct_costs.begin(), profile.correct_costs.end());
  if (!profile.correct_costs.empty()) {
    profile.efficient_cost =
        efficient_cost(profile.correct_costs, cfg.percentile_p);
    profile.budget_target =
        static_cast<double>(*profile.efficient_cost) / cfg.l_max;
  }
  return profile;
}

}  // namespace foldcall
