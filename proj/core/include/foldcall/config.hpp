#pragma once

#include <cstdint>
#include <string>

namespace foldcall {

/// Reward hyperparameters. Defaults are the published values; the four
/// enable_* switches exist for the component-ablation runs.
struct RewardConfig {
  double delta = 0.10;         // reward for folding on a zero-success query
  double lambda_ = 0.80;       // penalty for folding on a solvable query
  double beta = 0.30;          // efficiency bonus strength
  double alpha_fail = 0.20;    // failed-attempt cost weight
  double tau = 0.20;           // solvability confidence gate for the bonus
  double eps_abs = 1.0 / 16.0; // abstention guard threshold (1/K)
  double percentile_p = 0.30;  // efficient-cost fraction
  double gamma_s = 0.10;       // solvability calibration weight
  double gamma_b = 0.20;       // budget calibration weight
  double gamma_s_prime = 0.20; // zero-return solvability weight
  double gamma_b_prime = 0.10; // zero-return budget weight
  double mu = 2.0;             // underestimation multiplier in the budget loss
  int l_max = 16384;           // maximum completion length in tokens
  double r_plus = 1.0;         // value of a correct solution

  bool enable_fold_gate = true;
  bool enable_eff = true;
  bool enable_cal_solv = true;
  bool enable_cal_bud = true;

  /// Throws std::invalid_argument if an invariant is broken
  /// (lambda > delta > 0, p in (0,1], tau in [0,1), eps_abs in (0,1], ...).
  void validate() const;
};

/// Training-loop knobs. learn_rate is the tabular-logit analog of the
/// published fine-tuning rate; it is not comparable across policy classes.
struct TrainConfig {
  int k_rollouts = 16;
  int prompt_batch = 64;
  double clip_eps = 0.0625;
  double learn_rate = 10.0;
  int steps = 1500;
  double eps_norm = 1e-6;     // advantage normalization constant
  std::uint64_t seed = 0;
  double objective_cost_weight = 0.01;  // alpha_cost, evaluator only

  void validate() const;
};

}  // namespace foldcall
