#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "foldcall/synthworld.hpp"
#include "foldcall/types.hpp"

namespace foldcall {

/// Relative accuracy-efficiency score against a vanilla baseline:
/// (acc_method / acc_vanilla) * (tok_vanilla / tok_method).
/// All arguments must be positive.
double accuracy_efficiency_score(double acc_method, double tok_method,
                                 double acc_vanilla, double tok_vanilla);

/// Regime by observed success count out of k: all correct -> Easy, none ->
/// Unsolvable, otherwise Worthy. Profiles built from a different k are
/// rejected.
std::map<std::string, QueryClass> partition_regimes(
    std::span<const GroupProfile> vanilla_profiles, int k);

/// Per-regime mean method think tokens over mean vanilla think tokens.
/// Regimes with no queries are absent from the result.
std::map<QueryClass, double> regime_token_ratio(
    std::span<const RolloutRecord> method_logs,
    std::span<const RolloutRecord> vanilla_logs,
    const std::map<std::string, QueryClass>& partition);

struct FoldRateBucket {
  double lo = 0.0;
  double hi = 0.0;
  int rollouts = 0;
  double fold_rate = 0.0;  // meaningful only when rollouts > 0
};

/// Fold-rate histogram of method rollouts over the vanilla success-rate
/// axis. Buckets are [lo, hi), with the last bucket closed at 1.
std::vector<FoldRateBucket> fold_rate_curve(
    std::span<const RolloutRecord> method_logs,
    std::span<const GroupProfile> vanilla_profiles,
    std::span<const double> bucket_edges);

/// Edges {0, 1/k, 2/k, ..., 1} so the zero-success bucket is isolated.
std::vector<double> default_bucket_edges(int k);

/// One-sided p-value of observing zero successes in k trials when the true
/// rate is tau: (1 - tau)^k.
double fold_p_value(double tau, int k);

/// Posterior mass below tau after 0 successes in k trials under a uniform
/// prior: 1 - (1 - tau)^(k+1).
double fold_posterior(double tau, int k);

/// Probability that a query with true rate s shows zero successes in k
/// trials: (1 - s)^k.
double misroute_probability(double s, int k);

/// Accuracy with no credit for abstentions, and the mean think-token count.
struct LogAccuracy {
  double accuracy = 0.0;
  double mean_tokens = 0.0;
  int rollouts = 0;
};
LogAccuracy log_accuracy(std::span<const RolloutRecord> logs);

}  // namespace foldcall
