#include "foldcall/synthworld.hpp"

#include <cmath>
#include <stdexcept>

#include "foldcall/response.hpp"

namespace foldcall {

namespace {

double unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double draw_range(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * unit_double(rng);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

const char* to_string(QueryClass c) {
  switch (c) {
    case QueryClass::Easy: return "Easy";
    case QueryClass::Worthy: return "Worthy";
    case QueryClass::Unsolvable: return "Unsolvable";
  }
  return "?";
}

std::optional<QueryClass> query_class_from_string(const std::string& s) {
  if (s == "Easy") return QueryClass::Easy;
  if (s == "Worthy") return QueryClass::Worthy;
  if (s == "Unsolvable") return QueryClass::Unsolvable;
  return std::nullopt;
}

void WorldConfig::validate() const {
  if (query_count < 1)
    throw std::invalid_argument("world config: query_count must be positive");
  if (l_max < 1)
    throw std::invalid_argument("world config: l_max must be positive");
  if (abstention_cost < 0 || abstention_cost > l_max)
    throw std::invalid_argument(
        "world config: abstention_cost outside [0, l_max]");
  if (cost_noise < 0)
    throw std::invalid_argument("world config: cost_noise must be >= 0");
  const double sum = weight_easy + weight_worthy + weight_unsolvable;
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("world config: class weights must sum to 1");
  if (weight_unsolvable < 0.2)
    throw std::invalid_argument(
        "world config: unsolvable weight must be at least 0.2");
  if (easy.s_max_lo < 0.95 || easy.s_max_hi > 1.0)
    throw std::invalid_argument(
        "world config: easy s_max range must lie in [0.95, 1]");
  if (easy.c_req_frac_hi > 0.25)
    throw std::invalid_argument(
        "world config: easy c_req must stay within a quarter of l_max");
  const bool worthy_by_rate =
      worthy.s_max_lo > 0.0 && worthy.s_max_hi < 0.95;
  const bool worthy_by_cost = worthy.c_req_frac_lo > 0.5;
  if (!worthy_by_rate && !worthy_by_cost)
    throw std::invalid_argument(
        "world config: worthy ranges must bound s_max below 0.95 or require "
        "more than half of l_max");
}

World generate_world(const WorldConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  World world;
  world.l_max = cfg.l_max;
  world.abstention_cost = cfg.abstention_cost;
  world.cost_noise = cfg.cost_noise;
  world.noise_seed = cfg.noise_seed != 0 ? cfg.noise_seed : seed;
  std::mt19937_64 rng(splitmix64(seed));

  world.queries.reserve(cfg.query_count);
  for (int i = 0; i < cfg.query_count; ++i) {
    SynthQuery q;
    char id[16];
    std::snprintf(id, sizeof id, "q%04d", i);
    q.query_id = id;
    q.answer = std::to_string(1000 + (i * 37) % 9000);

    const double u = unit_double(rng);
    if (u < cfg.weight_easy) {
      q.class_label = QueryClass::Easy;
      q.s_max = draw_range(rng, cfg.easy.s_max_lo, cfg.easy.s_max_hi);
      q.c_req = static_cast<int>(
          draw_range(rng, cfg.easy.c_req_frac_lo, cfg.easy.c_req_frac_hi) *
          cfg.l_max);
      q.steepness =
          draw_range(rng, cfg.easy.steepness_lo, cfg.easy.steepness_hi);
    } else if (u < cfg.weight_easy + cfg.weight_worthy) {
      q.class_label = QueryClass::Worthy;
      q.s_max = draw_range(rng, cfg.worthy.s_max_lo, cfg.worthy.s_max_hi);
      q.c_req = static_cast<int>(
          draw_range(rng, cfg.worthy.c_req_frac_lo, cfg.worthy.c_req_frac_hi) *
          cfg.l_max);
      q.steepness =
          draw_range(rng, cfg.worthy.steepness_lo, cfg.worthy.steepness_hi);
    } else {
      q.class_label = QueryClass::Unsolvable;
      q.s_max = 0.0;
      q.c_req = cfg.l_max / 2;
      q.steepness = cfg.worthy.steepness_lo;
    }
    world.queries.push_back(std::move(q));
  }
  return world;
}

double success_probability(const SynthQuery& q, double invested_budget,
                           int l_max) {
  if (invested_budget < 0.0 || invested_budget > 1.0)
    throw std::invalid_argument("success_probability: budget outside [0,1]");
  if (q.s_max == 0.0) return 0.0;
  const double x = q.steepness * (invested_budget * l_max - q.c_req);
  return q.s_max / (1.0 + std::exp(-x));
}

RolloutRecord sample_rollout(const World& world, const SynthQuery& q,
                             const PolicyDecision& decision, int group_index,
                             std::mt19937_64& rng) {
  RolloutRecord rec;
  rec.query_id = q.query_id;
  rec.group_index = group_index;
  rec.format_valid = true;
  rec.predicted_solvability = decision.declared_solvability;
  rec.predicted_budget = decision.declared_budget;

  if (decision.fold) {
    rec.abstained = true;
    rec.correct = Correctness::NotApplicable;
    rec.think_tokens = world.abstention_cost;
    rec.answer_text = kUnsolvableSentinel;
    return rec;
  }

  const double p = success_probability(q, decision.invested_budget,
                                       world.l_max);
  const bool correct = unit_double(rng) < p;
  const auto invested = static_cast<long long>(
      std::llround(decision.invested_budget * world.l_max));
  long long cost = std::min<long long>(invested, world.l_max);
  if (world.cost_noise > 0) {
    const auto span = static_cast<long long>(2 * world.cost_noise + 1);
    cost += static_cast<long long>(rng() % span) - world.cost_noise;
  }
  rec.think_tokens =
      static_cast<int>(std::clamp<long long>(cost, 0, world.l_max));
  rec.abstained = false;
  rec.correct = correct ? Correctness::Correct : Correctness::Incorrect;
  rec.answer_text = correct ? q.answer : "no_answer_found";
  return rec;
}

std::mt19937_64 substream(std::uint64_t seed, const std::string& query_id,
                          int index) {
  const std::uint64_t mixed =
      splitmix64(seed ^ splitmix64(fnv1a(query_id) +
                                   0x51ed270b * static_cast<std::uint64_t>(
                                                    index + 1)));
  return std::mt19937_64(mixed);
}

std::vector<VanillaStats> vanilla_reference(const World& world, int k,
                                            std::uint64_t seed) {
  if (k < 1)
    throw std::invalid_argument("vanilla_reference: k must be at least 1");
  PolicyDecision full_budget;
  full_budget.fold = false;
  full_budget.declared_solvability = 1.0;
  full_budget.declared_budget = 1.0;
  full_budget.invested_budget = 1.0;

  std::vector<VanillaStats> stats;
  stats.reserve(world.queries.size());
  for (const auto& q : world.queries) {
    VanillaStats s;
    s.query_id = q.query_id;
    s.class_label = q.class_label;
    int correct = 0;
    double total_cost = 0.0;
    for (int i = 0; i < k; ++i) {
      auto rng = substream(seed, q.query_id, i);
      const auto rec = sample_rollout(world, q, full_budget, i, rng);
      if (rec.is_correct()) ++correct;
      total_cost += rec.think_tokens;
    }
    s.success_rate = static_cast<double>(correct) / k;
    s.mean_cost = total_cost / k;
    s.regime = correct == k   ? QueryClass::Easy
               : correct == 0 ? QueryClass::Unsolvable
                              : QueryClass::Worthy;
    stats.push_back(std::move(s));
  }
  return stats;
}

}  // namespace foldcall
