#include "foldcall/coldstart.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "foldcall/response.hpp"

namespace foldcall {

namespace {

double round_two_decimals(double v) { return std::round(v * 100.0) / 100.0; }

// Bounded draw with explicit arithmetic so subsampling is reproducible
// independent of the standard library's distribution internals.
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % n);
}

const RolloutRecord* pick_short_solve(const std::vector<RolloutRecord>& rs) {
  const RolloutRecord* best = nullptr;
  for (const auto& r : rs) {
    if (!r.is_correct() || r.abstained) continue;
    if (!best || r.think_tokens < best->think_tokens ||
        (r.think_tokens == best->think_tokens &&
         r.group_index < best->group_index))
      best = &r;
  }
  return best;
}

const RolloutRecord* pick_hero_call(const std::vector<RolloutRecord>& rs,
                                    int target_cost) {
  const RolloutRecord* best = nullptr;
  for (const auto& r : rs) {
    if (!r.is_correct() || r.abstained) continue;
    if (!best) {
      best = &r;
      continue;
    }
    const int d_new = std::abs(r.think_tokens - target_cost);
    const int d_old = std::abs(best->think_tokens - target_cost);
    if (d_new < d_old ||
        (d_new == d_old && r.think_tokens < best->think_tokens) ||
        (d_new == d_old && r.think_tokens == best->think_tokens &&
         r.group_index < best->group_index))
      best = &r;
  }
  return best;
}

Demonstration make_solvable_demo(const ProfiledQuery& q,
                                 const RolloutRecord& retained,
                                 BehaviorLabel label) {
  StructuredResponse target;
  target.predicted_solvability = round_two_decimals(q.profile.success_rate);
  target.predicted_budget = round_two_decimals(*q.profile.budget_target);
  target.think_text = "Retained reasoning trace (" +
                      std::to_string(retained.think_tokens) +
                      " think tokens).";
  target.final_answer = retained.answer_text;

  Demonstration demo;
  demo.query_id = q.profile.query_id;
  demo.behavior_label = label;
  demo.target_text = serialize_response(target);
  demo.source_cost = retained.think_tokens;
  return demo;
}

}  // namespace

const char* to_string(BehaviorLabel label) {
  switch (label) {
    case BehaviorLabel::ShortSolve: return "ShortSolve";
    case BehaviorLabel::HeroCall: return "HeroCall";
    case BehaviorLabel::NiceFold: return "NiceFold";
  }
  return "?";
}

std::optional<BehaviorLabel> behavior_label_from_string(const std::string& s) {
  if (s == "ShortSolve") return BehaviorLabel::ShortSolve;
  if (s == "HeroCall") return BehaviorLabel::HeroCall;
  if (s == "NiceFold") return BehaviorLabel::NiceFold;
  return std::nullopt;
}

double split_threshold(std::span<const double> efficient_costs, double rho) {
  if (efficient_costs.empty())
    throw std::invalid_argument("split_threshold: empty cost list");
  if (rho <= 0.0 || rho > 1.0)
    throw std::invalid_argument("split_threshold: rho must lie in (0,1]");
  std::vector<double> sorted(efficient_costs.begin(), efficient_costs.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();
  auto rank = static_cast<std::size_t>(
      std::ceil(rho * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return sorted[rank - 1];
}

std::vector<Demonstration> construct(std::span<const ProfiledQuery> pool,
                                     double rho, const RewardConfig& cfg) {
  std::vector<double> solvable_costs;
  for (const auto& q : pool) {
    if (q.profile.success_rate >= cfg.eps_abs) {
      if (!q.profile.efficient_cost)
        throw std::runtime_error("coldstart: solvable profile " +
                                 q.profile.query_id +
                                 " lacks an efficient cost");
      solvable_costs.push_back(static_cast<double>(*q.profile.efficient_cost));
    }
  }
  const double q_split =
      solvable_costs.empty() ? 0.0 : split_threshold(solvable_costs, rho);

  std::vector<Demonstration> demos;
  demos.reserve(pool.size());
  for (const auto& q : pool) {
    if (q.profile.success_rate < cfg.eps_abs) {
      Demonstration demo;
      demo.query_id = q.profile.query_id;
      demo.behavior_label = BehaviorLabel::NiceFold;
      demo.target_text = serialize_response(fold_response());
      demo.source_cost = 0;
      demos.push_back(std::move(demo));
      continue;
    }

    const int c_star = *q.profile.efficient_cost;
    const bool short_solve = static_cast<double>(c_star) <= q_split;
    const RolloutRecord* retained =
        short_solve ? pick_short_solve(q.rollouts)
                    : pick_hero_call(q.rollouts, c_star);
    if (!retained)
      throw std::runtime_error("coldstart: solvable query " +
                               q.profile.query_id +
                               " has no correct rollouts");
    demos.push_back(make_solvable_demo(
        q, *retained,
        short_solve ? BehaviorLabel::ShortSolve : BehaviorLabel::HeroCall));
  }
  return demos;
}

std::vector<Demonstration> balance(const std::vector<Demonstration>& demos,
                                   const std::map<BehaviorLabel, int>& caps,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::set<std::size_t> dropped;
  for (const auto& [label, cap] : caps) {
    if (cap < 0) throw std::invalid_argument("balance: negative cap");
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < demos.size(); ++i)
      if (demos[i].behavior_label == label) members.push_back(i);
    if (static_cast<std::size_t>(cap) > members.size())
      throw std::invalid_argument("balance: cap exceeds availability for " +
                                  std::string(to_string(label)));
    // Partial Fisher-Yates: the first `cap` entries are the retained sample.
    for (std::size_t i = 0; i < static_cast<std::size_t>(cap); ++i) {
      const auto j = i + uniform_index(rng, members.size() - i);
      std::swap(members[i], members[j]);
    }
    for (std::size_t i = cap; i < members.size(); ++i)
      dropped.insert(members[i]);
  }
  std::vector<Demonstration> kept;
  kept.reserve(demos.size() - dropped.size());
  for (std::size_t i = 0; i < demos.size(); ++i)
    if (!dropped.count(i)) kept.push_back(demos[i]);
  return kept;
}

ColdstartSummary summarize(std::span<const Demonstration> demos) {
  ColdstartSummary s;
  for (const auto& d : demos) {
    s.counts[d.behavior_label] += 1;
    s.mean_think_tokens[d.behavior_label] += d.source_cost;
  }
  for (auto& [label, total] : s.mean_think_tokens)
    total /= s.counts[label];
  return s;
}

}  // namespace foldcall
