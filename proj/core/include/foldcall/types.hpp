#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace foldcall {

/// Outcome of grading one sampled trajectory. Abstentions are never graded,
/// so they carry NotApplicable rather than a correctness bit.
enum class Correctness { Incorrect, Correct, NotApplicable };

/// One sampled trajectory for a query: grading outcome, cost, and the
/// pre-reasoning estimates parsed from the structured response.
struct RolloutRecord {
  std::string query_id;
  int group_index = 0;
  Correctness correct = Correctness::Incorrect;
  bool abstained = false;
  int think_tokens = 0;
  std::optional<double> predicted_solvability;
  std::optional<double> predicted_budget;
  bool format_valid = true;
  std::string answer_text;

  bool is_correct() const { return correct == Correctness::Correct; }
};

/// Per-query statistics derived from a group of K rollouts.
/// efficient_cost and budget_target are present iff success_rate > 0.
struct GroupProfile {
  std::string query_id;
  int k_rollouts = 0;
  double success_rate = 0.0;
  std::vector<int> correct_costs;  // sorted ascending
  std::optional<int> efficient_cost;
  std::optional<double> budget_target;
};

/// Throws std::invalid_argument when the record breaks an invariant.
/// l_max bounds think_tokens; pass the active config's value.
void validate_record(const RolloutRecord& r, int l_max);

/// Throws std::invalid_argument when the profile is internally inconsistent
/// (count/rate mismatch, efficient cost outside its admissible band, ...).
void validate_profile(const GroupProfile& p, int l_max);

const char* to_string(Correctness c);

}  // namespace foldcall
