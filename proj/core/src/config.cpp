#include "foldcall/config.hpp"

#include <cmath>
#include <stdexcept>

namespace foldcall {

namespace {
void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}
}  // namespace

void RewardConfig::validate() const {
  require(delta > 0.0, "reward config: delta must be positive");
  require(lambda_ > delta, "reward config: lambda must exceed delta");
  require(percentile_p > 0.0 && percentile_p <= 1.0,
          "reward config: percentile_p must lie in (0,1]");
  require(tau >= 0.0 && tau < 1.0, "reward config: tau must lie in [0,1)");
  require(eps_abs > 0.0 && eps_abs <= 1.0,
          "reward config: eps_abs must lie in (0,1]");
  require(mu >= 1.0, "reward config: mu must be at least 1");
  require(l_max > 0, "reward config: l_max must be positive");
  require(beta >= 0.0, "reward config: beta must be non-negative");
  require(alpha_fail >= 0.0, "reward config: alpha_fail must be non-negative");
  require(gamma_s >= 0.0 && gamma_b >= 0.0 && gamma_s_prime >= 0.0 &&
              gamma_b_prime >= 0.0,
          "reward config: calibration weights must be non-negative");
  require(std::isfinite(r_plus), "reward config: r_plus must be finite");
}

void TrainConfig::validate() const {
  require(k_rollouts >= 2, "train config: k_rollouts must be at least 2");
  require(prompt_batch >= 1, "train config: prompt_batch must be positive");
  require(clip_eps > 0.0 && clip_eps < 1.0,
          "train config: clip_eps must lie in (0,1)");
  require(learn_rate > 0.0, "train config: learn_rate must be positive");
  require(steps >= 1, "train config: steps must be at least 1");
  require(eps_norm > 0.0, "train config: eps_norm must be positive");
  require(objective_cost_weight >= 0.0,
          "train config: objective_cost_weight must be non-negative");
}

}  // namespace foldcall
