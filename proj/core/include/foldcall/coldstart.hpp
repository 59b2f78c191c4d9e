#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "foldcall/config.hpp"
#include "foldcall/types.hpp"

namespace foldcall {

enum class BehaviorLabel { ShortSolve, HeroCall, NiceFold };

const char* to_string(BehaviorLabel label);
std::optional<BehaviorLabel> behavior_label_from_string(const std::string& s);

/// One demonstration target. target_text is a serialized structured
/// response; source_cost is the think-token count of the retained trace
/// (0 for NiceFold).
struct Demonstration {
  std::string query_id;
  BehaviorLabel behavior_label = BehaviorLabel::ShortSolve;
  std::string target_text;
  int source_cost = 0;
};

/// A profiled query with the rollouts its profile was built from.
struct ProfiledQuery {
  GroupProfile profile;
  std::vector<RolloutRecord> rollouts;
};

/// Nearest-rank quantile: the ceil(rho * n)-th smallest value.
double split_threshold(std::span<const double> efficient_costs, double rho);

/// Exhaustive partition of a profiled pool into demonstrations. Every query
/// yields exactly one target: zero-success queries fold; the rest split into
/// short solves and hero calls at the rho-quantile of efficient costs.
std::vector<Demonstration> construct(std::span<const ProfiledQuery> pool,
                                     double rho, const RewardConfig& cfg);

/// Optional per-label uniform subsampling with a seeded generator. Labels
/// without a cap keep everything; a cap above availability is an error.
std::vector<Demonstration> balance(
    const std::vector<Demonstration>& demos,
    const std::map<BehaviorLabel, int>& caps, std::uint64_t seed);

struct ColdstartSummary {
  std::map<BehaviorLabel, int> counts;
  std::map<BehaviorLabel, double> mean_think_tokens;
};

ColdstartSummary summarize(std::span<const Demonstration> demos);

}  // namespace foldcall
