#include "foldcall/version.hpp"

#include <cstdint>
#include <cstdio>

#include "foldcall/config.hpp"

namespace foldcall {

namespace {

std::uint64_t fnv1a_accumulate(std::uint64_t h, const std::string& s) {
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

std::string version_string() { return "0.1.0"; }

std::string defaults_fingerprint() {
  const RewardConfig d;
  char block[512];
  std::snprintf(block, sizeof block,
                "delta=%.6f lambda=%.6f beta=%.6f alpha_fail=%.6f tau=%.6f "
                "eps_abs=%.6f p=%.6f gamma_s=%.6f gamma_b=%.6f "
                "gamma_s'=%.6f gamma_b'=%.6f mu=%.6f l_max=%d r_plus=%.6f",
                d.delta, d.lambda_, d.beta, d.alpha_fail, d.tau, d.eps_abs,
                d.percentile_p, d.gamma_s, d.gamma_b, d.gamma_s_prime,
                d.gamma_b_prime, d.mu, d.l_max, d.r_plus);
  const std::uint64_t h =
      fnv1a_accumulate(1469598103934665603ULL, std::string(block));
  char hex[32];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(h));
  return hex;
}

}  // namespace foldcall
