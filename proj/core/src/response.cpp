#include "foldcall/response.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string_view>

namespace foldcall {

namespace {

constexpr std::string_view kPredictOpen = "<predict>";
constexpr std::string_view kPredictClose = "</predict>";
constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kBoxedOpen = "\\boxed{";

std::string format_two_decimals(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Parses the first real after `label` inside `body`. Any decimal precision
// is accepted; the value must be finite and inside [0,1].
std::optional<double> parse_labeled_real(std::string_view body,
                                         std::string_view label) {
  const auto pos = body.find(label);
  if (pos == std::string_view::npos) return std::nullopt;
  const char* start = body.data() + pos + label.size();
  const char* end_of_body = body.data() + body.size();
  while (start < end_of_body &&
         std::isspace(static_cast<unsigned char>(*start)))
    ++start;
  std::string token(start, end_of_body);
  char* parse_end = nullptr;
  const double v = std::strtod(token.c_str(), &parse_end);
  if (parse_end == token.c_str()) return std::nullopt;
  if (!std::isfinite(v) || v < 0.0 || v > 1.0) return std::nullopt;
  return v;
}

// Content of the brace group starting right after `\boxed{`, honoring
// nested braces. Returns nullopt on unbalanced input.
std::optional<std::string> brace_group(std::string_view text,
                                       std::size_t open_pos) {
  int depth = 1;
  for (std::size_t i = open_pos; i < text.size(); ++i) {
    if (text[i] == '{') ++depth;
    if (text[i] == '}') {
      --depth;
      if (depth == 0) return std::string(text.substr(open_pos, i - open_pos));
    }
  }
  return std::nullopt;
}

}  // namespace

std::string serialize_response(const StructuredResponse& r) {
  std::string out;
  out.reserve(r.think_text.size() + 128);
  out += "<predict>\n";
  out += "Solvability: " + format_two_decimals(r.predicted_solvability) + "\n";
  out += "Budget: " + format_two_decimals(r.predicted_budget) + "\n";
  out += "</predict>\n";
  out += "<think>\n";
  out += r.think_text;
  out += "\n</think>\n";
  out += "\\boxed{" + r.final_answer + "}";
  return out;
}

std::optional<StructuredResponse> parse_response(const std::string& text) {
  const std::string_view sv(text);

  const auto predict_open = sv.find(kPredictOpen);
  if (predict_open == std::string_view::npos) return std::nullopt;
  const auto predict_close = sv.find(kPredictClose, predict_open);
  if (predict_close == std::string_view::npos) return std::nullopt;
  const auto predict_body = sv.substr(
      predict_open + kPredictOpen.size(),
      predict_close - predict_open - kPredictOpen.size());

  const auto solvability = parse_labeled_real(predict_body, "Solvability:");
  const auto budget = parse_labeled_real(predict_body, "Budget:");
  if (!solvability || !budget) return std::nullopt;

  const auto think_open = sv.find(kThinkOpen, predict_close);
  if (think_open == std::string_view::npos) return std::nullopt;
  const auto think_close = sv.find(kThinkClose, think_open);
  if (think_close == std::string_view::npos) return std::nullopt;
  auto think_body = sv.substr(think_open + kThinkOpen.size(),
                              think_close - think_open - kThinkOpen.size());
  if (!think_body.empty() && think_body.front() == '\n')
    think_body.remove_prefix(1);
  if (!think_body.empty() && think_body.back() == '\n')
    think_body.remove_suffix(1);

  // Exactly one boxed answer anywhere, and it must follow the think block.
  const auto first_boxed = sv.find(kBoxedOpen);
  if (first_boxed == std::string_view::npos) return std::nullopt;
  if (sv.find(kBoxedOpen, first_boxed + 1) != std::string_view::npos)
    return std::nullopt;
  if (first_boxed < think_close + kThinkClose.size()) return std::nullopt;
  const auto answer = brace_group(sv, first_boxed + kBoxedOpen.size());
  if (!answer) return std::nullopt;

  StructuredResponse r;
  r.predicted_solvability = *solvability;
  r.predicted_budget = *budget;
  r.think_text = std::string(think_body);
  r.final_answer = *answer;
  return r;
}

int count_tokens(const std::string& text) {
  int count = 0;
  bool in_token = false;
  for (const char ch : text) {
    const bool space = std::isspace(static_cast<unsigned char>(ch)) != 0;
    if (!space && !in_token) ++count;
    in_token = !space;
  }
  return count;
}

StructuredResponse fold_response() {
  StructuredResponse r;
  r.predicted_solvability = 0.0;
  r.predicted_budget = 0.0;
  r.think_text = kFoldThinkSentence;
  r.final_answer = kUnsolvableSentinel;
  return r;
}

RolloutRecord record_from_text(const std::string& query_id, int group_index,
                               const std::string& text,
                               const std::string& expected_answer) {
  RolloutRecord rec;
  rec.query_id = query_id;
  rec.group_index = group_index;

  const auto parsed = parse_response(text);
  if (!parsed) {
    rec.format_valid = false;
    rec.correct = Correctness::Incorrect;
    rec.abstained = false;
    rec.think_tokens = count_tokens(text);
    return rec;
  }

  rec.format_valid = true;
  rec.predicted_solvability = parsed->predicted_solvability;
  rec.predicted_budget = parsed->predicted_budget;
  rec.think_tokens = count_tokens(parsed->think_text);
  rec.answer_text = parsed->final_answer;
  if (parsed->is_abstention()) {
    rec.abstained = true;
    rec.correct = Correctness::NotApplicable;
  } else {
    rec.abstained = false;
    rec.correct = parsed->final_answer == expected_answer
                      ? Correctness::Correct
                      : Correctness::Incorrect;
  }
  return rec;
}

}  // namespace foldcall
