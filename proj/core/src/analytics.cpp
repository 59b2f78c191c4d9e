#include "foldcall/analytics.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace foldcall {

double accuracy_efficiency_score(double acc_method, double tok_method,
                                 double acc_vanilla, double tok_vanilla) {
  for (const double v : {acc_method, tok_method, acc_vanilla, tok_vanilla})
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument(
          "accuracy_efficiency_score: all inputs must be positive");
  return (acc_method / acc_vanilla) * (tok_vanilla / tok_method);
}

std::map<std::string, QueryClass> partition_regimes(
    std::span<const GroupProfile> vanilla_profiles, int k) {
  std::map<std::string, QueryClass> partition;
  for (const auto& p : vanilla_profiles) {
    if (p.k_rollouts != k)
      throw std::invalid_argument("partition_regimes: profile " + p.query_id +
                                  " was built from a different k");
    const auto successes =
        static_cast<int>(std::llround(p.success_rate * p.k_rollouts));
    partition[p.query_id] = successes == k   ? QueryClass::Easy
                            : successes == 0 ? QueryClass::Unsolvable
                                             : QueryClass::Worthy;
  }
  return partition;
}

std::map<QueryClass, double> regime_token_ratio(
    std::span<const RolloutRecord> method_logs,
    std::span<const RolloutRecord> vanilla_logs,
    const std::map<std::string, QueryClass>& partition) {
  struct Sums {
    double tokens = 0.0;
    int count = 0;
  };
  std::map<QueryClass, Sums> method, vanilla;
  auto accumulate = [&](std::span<const RolloutRecord> logs,
                        std::map<QueryClass, Sums>& sums) {
    for (const auto& r : logs) {
      const auto it = partition.find(r.query_id);
      if (it == partition.end())
        throw std::invalid_argument("regime_token_ratio: query " + r.query_id +
                                    " missing from the partition");
      sums[it->second].tokens += r.think_tokens;
      sums[it->second].count += 1;
    }
  };
  accumulate(method_logs, method);
  accumulate(vanilla_logs, vanilla);

  std::map<QueryClass, double> ratios;
  for (const auto& [regime, m] : method) {
    const auto it = vanilla.find(regime);
    if (it == vanilla.end() || it->second.count == 0 || m.count == 0) continue;
    const double method_mean = m.tokens / m.count;
    const double vanilla_mean = it->second.tokens / it->second.count;
    if (vanilla_mean > 0.0) ratios[regime] = method_mean / vanilla_mean;
  }
  return ratios;
}

std::vector<double> default_bucket_edges(int k) {
  std::vector<double> edges;
  edges.reserve(k + 1);
  for (int i = 0; i <= k; ++i)
    edges.push_back(static_cast<double>(i) / k);
  return edges;
}

std::vector<FoldRateBucket> fold_rate_curve(
    std::span<const RolloutRecord> method_logs,
    std::span<const GroupProfile> vanilla_profiles,
    std::span<const double> bucket_edges) {
  if (bucket_edges.size() < 2 || bucket_edges.front() != 0.0 ||
      bucket_edges.back() != 1.0)
    throw std::invalid_argument(
        "fold_rate_curve: bucket edges must partition [0,1]");
  for (std::size_t i = 1; i < bucket_edges.size(); ++i)
    if (bucket_edges[i] <= bucket_edges[i - 1])
      throw std::invalid_argument(
          "fold_rate_curve: bucket edges must be increasing");

  std::unordered_map<std::string, double> s0;
  for (const auto& p : vanilla_profiles) s0[p.query_id] = p.success_rate;

  std::vector<FoldRateBucket> buckets(bucket_edges.size() - 1);
  for (std::size_t i = 0; i + 1 < bucket_edges.size(); ++i) {
    buckets[i].lo = bucket_edges[i];
    buckets[i].hi = bucket_edges[i + 1];
  }
  std::vector<double> folds(buckets.size(), 0.0);
  for (const auto& r : method_logs) {
    const auto it = s0.find(r.query_id);
    if (it == s0.end())
      throw std::invalid_argument("fold_rate_curve: query " + r.query_id +
                                  " missing a vanilla profile");
    // Half-open buckets, except the last which owns its upper edge.
    std::size_t b = buckets.size() - 1;
    for (std::size_t i = 0; i + 1 < bucket_edges.size(); ++i) {
      if (it->second >= bucket_edges[i] && it->second < bucket_edges[i + 1]) {
        b = i;
        break;
      }
    }
    buckets[b].rollouts += 1;
    folds[b] += r.abstained ? 1.0 : 0.0;
  }
  for (std::size_t i = 0; i < buckets.size(); ++i)
    if (buckets[i].rollouts > 0)
      buckets[i].fold_rate = folds[i] / buckets[i].rollouts;
  return buckets;
}

double fold_p_value(double tau, int k) {
  if (tau <= 0.0 || tau >= 1.0)
    throw std::invalid_argument("fold_p_value: tau must lie in (0,1)");
  if (k < 1) throw std::invalid_argument("fold_p_value: k must be at least 1");
  return std::pow(1.0 - tau, k);
}

double fold_posterior(double tau, int k) {
  if (tau <= 0.0 || tau > 1.0)
    throw std::invalid_argument("fold_posterior: tau must lie in (0,1]");
  if (k < 1)
    throw std::invalid_argument("fold_posterior: k must be at least 1");
  return 1.0 - std::pow(1.0 - tau, k + 1);
}

double misroute_probability(double s, int k) {
  if (s < 0.0 || s > 1.0)
    throw std::invalid_argument("misroute_probability: s must lie in [0,1]");
  if (k < 1)
    throw std::invalid_argument("misroute_probability: k must be at least 1");
  return std::pow(1.0 - s, k);
}

LogAccuracy log_accuracy(std::span<const RolloutRecord> logs) {
  LogAccuracy out;
  if (logs.empty()) return out;
  double correct = 0.0, tokens = 0.0;
  for (const auto& r : logs) {
    // Abstentions receive no accuracy credit.
    if (r.is_correct() && !r.abstained) correct += 1.0;
    tokens += r.think_tokens;
  }
  out.rollouts = static_cast<int>(logs.size());
  out.accuracy = correct / out.rollouts;
  out.mean_tokens = tokens / out.rollouts;
  return out;
}

}  // namespace foldcall
