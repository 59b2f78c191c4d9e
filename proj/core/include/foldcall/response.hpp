#pragma once

#include <optional>
#include <string>

#include "foldcall/types.hpp"

namespace foldcall {

/// The abstention sentinel used in place of a boxed literal answer.
inline constexpr const char* kUnsolvableSentinel = "<Unsolvable>";

/// The fixed think sentence of an abstention target.
inline constexpr const char* kFoldThinkSentence =
    "This query is beyond my current reliable capability.";

/// A parsed structured response: predict block, think block, boxed answer.
struct StructuredResponse {
  double predicted_solvability = 0.0;  // in [0,1]
  double predicted_budget = 0.0;       // in [0,1]
  std::string think_text;
  std::string final_answer;  // boxed literal, or kUnsolvableSentinel

  bool is_abstention() const { return final_answer == kUnsolvableSentinel; }
};

/// Renders the response template:
///   <predict>
///   Solvability: s
///   Budget: b
///   </predict>
///   <think>
///   ...
///   </think>
///   \boxed{answer}
/// Reals are printed with two decimal places.
std::string serialize_response(const StructuredResponse& r);

/// Parses text into a StructuredResponse. Returns nullopt (a format
/// violation, not an error) unless all three blocks are present in order,
/// both predict fields parse as reals in [0,1], and exactly one boxed
/// answer exists. Parsing accepts any decimal precision.
std::optional<StructuredResponse> parse_response(const std::string& text);

/// Whitespace-delimited token count; the cost proxy for think blocks.
int count_tokens(const std::string& text);

/// The canned abstention response (predict 0.00/0.00, fixed think sentence).
StructuredResponse fold_response();

/// Grades raw response text into a RolloutRecord. A format violation yields
/// format_valid=false, no estimates, and the whole text counted as cost.
RolloutRecord record_from_text(const std::string& query_id, int group_index,
                               const std::string& text,
                               const std::string& expected_answer);

}  // namespace foldcall
