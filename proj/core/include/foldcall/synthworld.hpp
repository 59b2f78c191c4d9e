#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "foldcall/types.hpp"

namespace foldcall {

enum class QueryClass { Easy, Worthy, Unsolvable };

const char* to_string(QueryClass c);
std::optional<QueryClass> query_class_from_string(const std::string& s);

/// A synthetic query with a latent success curve. class_label tags the
/// generating regime for diagnostics; rollout outcomes depend only on
/// s_max, c_req, and steepness.
struct SynthQuery {
  std::string query_id;
  QueryClass class_label = QueryClass::Easy;
  double s_max = 0.0;     // solvability ceiling at full budget
  int c_req = 0;          // tokens at which success probability is s_max/2
  double steepness = 0.0; // logistic sharpness per token
  std::string answer;     // canonical boxed answer for grading
};

/// Sampling ranges per class; [lo, hi] pairs. c_req is drawn as a fraction
/// of l_max.
struct ClassRanges {
  double s_max_lo = 0.0, s_max_hi = 0.0;
  double c_req_frac_lo = 0.0, c_req_frac_hi = 0.0;
  double steepness_lo = 0.004, steepness_hi = 0.008;
};

struct WorldConfig {
  int query_count = 128;
  int l_max = 16384;
  int abstention_cost = 40;  // think tokens charged for a fold
  int cost_noise = 64;       // attempt cost jitter, uniform in [-n, n]
  double weight_easy = 0.35;
  double weight_worthy = 0.35;
  double weight_unsolvable = 0.30;
  ClassRanges easy{0.995, 1.0, 0.03, 0.18, 0.004, 0.008};
  ClassRanges worthy{0.35, 0.85, 0.25, 0.60, 0.004, 0.008};
  std::uint64_t noise_seed = 0;

  void validate() const;
};

struct World {
  int l_max = 16384;
  int abstention_cost = 40;
  int cost_noise = 64;
  std::uint64_t noise_seed = 0;
  std::vector<SynthQuery> queries;
};

/// What a policy committed to for one rollout. A fold invests the fixed
/// abstention cost; a solve invests the declared budget fraction.
struct PolicyDecision {
  int solvability_bucket = 0;
  int budget_bucket = 0;
  bool fold = false;
  double declared_solvability = 0.0;
  double declared_budget = 0.0;
  double invested_budget = 0.0;  // fraction of l_max actually spent
  // Behavior-policy probabilities of the three sampled steps, for ratios.
  double prob_solvability = 1.0;
  double prob_budget = 1.0;
  double prob_commit = 1.0;
};

World generate_world(const WorldConfig& cfg, std::uint64_t seed);

/// Success probability when investing a budget fraction of l_max:
/// s_max * logistic(steepness * (budget*l_max - c_req)); exactly 0 when
/// s_max is 0.
double success_probability(const SynthQuery& q, double invested_budget,
                           int l_max);

/// Materializes one rollout for a decision. Folds produce an abstained
/// record at the fixed abstention cost; attempts draw Bernoulli correctness
/// and realize min(invested, l_max) tokens plus bounded noise.
RolloutRecord sample_rollout(const World& world, const SynthQuery& q,
                             const PolicyDecision& decision, int group_index,
                             std::mt19937_64& rng);

/// Deterministic per-(seed, query, index) substream so concurrent sampling
/// keeps the rollout stream reproducible.
std::mt19937_64 substream(std::uint64_t seed, const std::string& query_id,
                          int index);

struct VanillaStats {
  std::string query_id;
  QueryClass class_label = QueryClass::Easy;
  double success_rate = 0.0;  // observed over k maximal-budget attempts
  double mean_cost = 0.0;
  QueryClass regime = QueryClass::Easy;  // by 16/16, 1..15/16, 0/16 counts
};

/// Simulates a maximal-budget always-attempt policy k times per query and
/// partitions queries into regimes by observed success counts.
std::vector<VanillaStats> vanilla_reference(const World& world, int k,
                                            std::uint64_t seed);

}  // namespace foldcall
