#include "foldcall/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace foldcall {

const char* to_string(Correctness c) {
  switch (c) {
    case Correctness::Incorrect: return "incorrect";
    case Correctness::Correct: return "correct";
    case Correctness::NotApplicable: return "not_applicable";
  }
  return "?";
}

void validate_record(const RolloutRecord& r, int l_max) {
  if (r.group_index < 0)
    throw std::invalid_argument("record " + r.query_id +
                                ": negative group_index");
  if (r.think_tokens < 0)
    throw std::invalid_argument("record " + r.query_id +
                                ": negative think_tokens");
  if (r.think_tokens > l_max)
    throw std::invalid_argument("record " + r.query_id +
                                ": think_tokens exceeds l_max");
  if (r.abstained && r.correct != Correctness::NotApplicable)
    throw std::invalid_argument("record " + r.query_id +
                                ": abstained record must not carry a grade");
  if (!r.format_valid &&
      (r.predicted_solvability.has_value() || r.predicted_budget.has_value()))
    throw std::invalid_argument(
        "record " + r.query_id +
        ": format-invalid record cannot carry estimates");
  for (const auto& v : {r.predicted_solvability, r.predicted_budget}) {
    if (v && (*v < 0.0 || *v > 1.0 || !std::isfinite(*v)))
      throw std::invalid_argument("record " + r.query_id +
                                  ": estimate outside [0,1]");
  }
}

void validate_profile(const GroupProfile& p, int l_max) {
  if (p.k_rollouts < 1)
    throw std::invalid_argument("profile " + p.query_id + ": k_rollouts < 1");
  if (p.success_rate < 0.0 || p.success_rate > 1.0)
    throw std::invalid_argument("profile " + p.query_id +
                                ": success_rate outside [0,1]");
  const double scaled = p.success_rate * p.k_rollouts;
  if (std::abs(scaled - std::round(scaled)) > 1e-9 ||
      static_cast<std::size_t>(std::llround(scaled)) !=
          p.correct_costs.size())
    throw std::invalid_argument(
        "profile " + p.query_id +
        ": success_rate * k must equal the correct-cost count");
  if (!std::is_sorted(p.correct_costs.begin(), p.correct_costs.end()))
    throw std::invalid_argument("profile " + p.query_id +
                                ": correct_costs not sorted");
  if (p.efficient_cost.has_value() != (p.success_rate > 0.0))
    throw std::invalid_argument(
        "profile " + p.query_id +
        ": efficient_cost present iff success_rate > 0");
  if (p.efficient_cost.has_value() != p.budget_target.has_value())
    throw std::invalid_argument(
        "profile " + p.query_id +
        ": efficient_cost and budget_target must be present together");
  if (p.efficient_cost) {
    const double mean =
        std::accumulate(p.correct_costs.begin(), p.correct_costs.end(), 0.0) /
        static_cast<double>(p.correct_costs.size());
    // Half-up integer rounding can land up to 0.5 above the raw mean.
    if (*p.efficient_cost < p.correct_costs.front() ||
        *p.efficient_cost > mean + 0.5)
      throw std::invalid_argument(
          "profile " + p.query_id +
          ": efficient_cost outside [min, mean] of correct costs");
    if (std::abs(*p.budget_target -
                 static_cast<double>(*p.efficient_cost) / l_max) > 1e-12)
      throw std::invalid_argument("profile " + p.query_id +
                                  ": budget_target != efficient_cost / l_max");
  }
}

}  // namespace foldcall
