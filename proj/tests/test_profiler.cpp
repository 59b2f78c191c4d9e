#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "foldcall/profiler.hpp"

using namespace foldcall;

namespace {

RolloutRecord make_record(const std::string& id, int idx, Correctness c,
                          bool abstained, int tokens) {
  RolloutRecord r;
  r.query_id = id;
  r.group_index = idx;
  r.correct = c;
  r.abstained = abstained;
  r.think_tokens = tokens;
  r.predicted_solvability = 0.5;
  r.predicted_budget = 0.5;
  return r;
}

// Independent re-derivation of the profile with plain double arithmetic.
GroupProfile naive_profile(const std::vector<RolloutRecord>& group,
                           const RewardConfig& cfg) {
  GroupProfile p;
  p.query_id = group.front().query_id;
  p.k_rollouts = static_cast<int>(group.size());
  int correct = 0;
  for (const auto& r : group) {
    if (r.correct == Correctness::Correct && !r.abstained) {
      ++correct;
      p.correct_costs.push_back(r.think_tokens);
    }
  }
  std::sort(p.correct_costs.begin(), p.correct_costs.end());
  p.success_rate = static_cast<double>(correct) / group.size();
  if (correct > 0) {
    const auto n = static_cast<double>(p.correct_costs.size());
    const auto m = static_cast<std::size_t>(
        std::max(1.0, std::ceil(cfg.percentile_p * n)));
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) sum += p.correct_costs[i];
    p.efficient_cost = static_cast<int>(std::floor(sum / m + 0.5));
    p.budget_target = static_cast<double>(*p.efficient_cost) / cfg.l_max;
  }
  return p;
}

std::vector<RolloutRecord> random_group(std::mt19937_64& rng, int k,
                                        int l_max) {
  std::vector<RolloutRecord> group;
  for (int i = 0; i < k; ++i) {
    const int kind = static_cast<int>(rng() % 4);
    const int tokens = static_cast<int>(rng() % (l_max + 1));
    if (kind == 0)
      group.push_back(
          make_record("q", i, Correctness::NotApplicable, true, 40));
    else if (kind == 1)
      group.push_back(make_record("q", i, Correctness::Correct, false, tokens));
    else
      group.push_back(
          make_record("q", i, Correctness::Incorrect, false, tokens));
  }
  return group;
}

}  // namespace

TEST_CASE("group success rate counts only graded-correct records") {
  std::vector<RolloutRecord> group;
  for (int i = 0; i < 16; ++i)
    group.push_back(make_record("q", i, i < 4 ? Correctness::Correct
                                              : Correctness::Incorrect,
                                false, 100));
  CHECK(group_success_rate(group) == doctest::Approx(0.25));

  for (auto& r : group) r.correct = Correctness::Incorrect;
  CHECK(group_success_rate(group) == doctest::Approx(0.0));

  for (auto& r : group) r.correct = Correctness::Correct;
  CHECK(group_success_rate(group) == doctest::Approx(1.0));

  CHECK_THROWS_AS(group_success_rate({}), std::invalid_argument);

  auto mixed = group;
  mixed[3].query_id = "other";
  CHECK_THROWS_AS(group_success_rate(mixed), std::invalid_argument);
}

TEST_CASE("efficient cost examples") {
  const std::vector<int> costs{100, 200, 300, 400};
  CHECK(efficient_cost(costs, 0.30) == 150);  // m = 2, mean(100, 200)
  CHECK(efficient_cost(std::vector<int>{5000}, 0.01) == 5000);
  CHECK(efficient_cost(std::vector<int>{5000}, 1.0) == 5000);
  CHECK(efficient_cost(std::vector<int>{10, 10, 10}, 1.0) == 10);
  CHECK_THROWS_AS(efficient_cost({}, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(efficient_cost(costs, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(efficient_cost(costs, 1.5), std::invalid_argument);
}

TEST_CASE("efficient cost rounds half-up") {
  CHECK(efficient_cost(std::vector<int>{1, 2}, 1.0) == 2);     // mean 1.5
  CHECK(efficient_cost(std::vector<int>{1, 2, 4}, 1.0) == 2);  // mean 2.33
}

TEST_CASE("efficient cost is monotone in p and stays in the cost band") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 30);
    std::vector<int> costs(n);
    for (auto& c : costs) c = static_cast<int>(rng() % 16384);
    int prev = 0;
    for (const double p : {0.1, 0.3, 0.5, 0.8, 1.0}) {
      const int c = efficient_cost(costs, p);
      CHECK(c >= prev);
      prev = c;
      const double mean =
          std::accumulate(costs.begin(), costs.end(), 0.0) / costs.size();
      CHECK(c >= *std::min_element(costs.begin(), costs.end()));
      CHECK(static_cast<double>(c) <= mean + 0.5);
    }
  }
}

TEST_CASE("build profile example") {
  std::vector<RolloutRecord> group;
  group.push_back(make_record("q", 0, Correctness::Correct, false, 8192));
  group.push_back(make_record("q", 1, Correctness::Correct, false, 4096));
  for (int i = 2; i < 16; ++i)
    group.push_back(make_record("q", i, Correctness::Incorrect, false, 9000));

  RewardConfig cfg;
  const auto profile = build_profile(group, cfg);
  CHECK(profile.success_rate == doctest::Approx(0.125));
  CHECK(profile.correct_costs == std::vector<int>{4096, 8192});
  REQUIRE(profile.efficient_cost.has_value());
  CHECK(*profile.efficient_cost == 4096);  // m = ceil(0.3 * 2) = 1
  CHECK(*profile.budget_target == doctest::Approx(0.25));
  CHECK_NOTHROW(validate_profile(profile, cfg.l_max));
}

TEST_CASE("all-failure group has no efficient cost") {
  std::vector<RolloutRecord> group;
  for (int i = 0; i < 8; ++i)
    group.push_back(make_record("q", i, Correctness::Incorrect, false, 500));
  RewardConfig cfg;
  const auto profile = build_profile(group, cfg);
  CHECK(profile.success_rate == 0.0);
  CHECK(!profile.efficient_cost.has_value());
  CHECK(!profile.budget_target.has_value());
  CHECK_NOTHROW(validate_profile(profile, cfg.l_max));
}

TEST_CASE("abstentions stay out of the correct set even if graded") {
  std::vector<RolloutRecord> group;
  group.push_back(make_record("q", 0, Correctness::Correct, false, 100));
  // A hostile log could mark an abstention correct; the profile ignores it.
  auto abstain = make_record("q", 1, Correctness::Correct, true, 40);
  group.push_back(abstain);
  RewardConfig cfg;
  const auto profile = build_profile(group, cfg);
  CHECK(profile.correct_costs == std::vector<int>{100});
  CHECK(profile.success_rate == doctest::Approx(0.5));
}

TEST_CASE("profile equals naive recomputation and is permutation-invariant") {
  std::mt19937_64 rng(123);
  RewardConfig cfg;
  for (int trial = 0; trial < 2000; ++trial) {
    const int k = 2 + static_cast<int>(rng() % 31);
    cfg.percentile_p = 0.1 + 0.9 * static_cast<double>(rng() % 10) / 9.0;
    auto group = random_group(rng, k, cfg.l_max);

    const auto profile = build_profile(group, cfg);
    const auto naive = naive_profile(group, cfg);
    CHECK(profile.success_rate == doctest::Approx(naive.success_rate));
    CHECK(profile.correct_costs == naive.correct_costs);
    CHECK(profile.efficient_cost == naive.efficient_cost);
    if (profile.budget_target)
      CHECK(*profile.budget_target == doctest::Approx(*naive.budget_target));
    else
      CHECK(!naive.budget_target.has_value());

    const double scaled = profile.success_rate * k;
    CHECK(std::abs(scaled - std::round(scaled)) < 1e-9);

    std::shuffle(group.begin(), group.end(), rng);
    const auto shuffled = build_profile(group, cfg);
    CHECK(shuffled.success_rate == profile.success_rate);
    CHECK(shuffled.correct_costs == profile.correct_costs);
    CHECK(shuffled.efficient_cost == profile.efficient_cost);
  }
}
