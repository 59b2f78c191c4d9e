#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "foldcall/coldstart.hpp"
#include "foldcall/profiler.hpp"
#include "foldcall/response.hpp"

using namespace foldcall;

namespace {

RolloutRecord correct_record(const std::string& id, int idx, int tokens) {
  RolloutRecord r;
  r.query_id = id;
  r.group_index = idx;
  r.correct = Correctness::Correct;
  r.think_tokens = tokens;
  r.predicted_solvability = 0.5;
  r.predicted_budget = 0.5;
  r.answer_text = std::to_string(1000 + idx);
  return r;
}

RolloutRecord failed_record(const std::string& id, int idx, int tokens) {
  auto r = correct_record(id, idx, tokens);
  r.correct = Correctness::Incorrect;
  r.answer_text = "no_answer_found";
  return r;
}

ProfiledQuery make_query(const std::string& id,
                         std::vector<RolloutRecord> rollouts,
                         const RewardConfig& cfg) {
  ProfiledQuery q;
  q.rollouts = std::move(rollouts);
  q.profile = build_profile(q.rollouts, cfg);
  return q;
}

std::vector<ProfiledQuery> random_pool(std::mt19937_64& rng, int n,
                                       const RewardConfig& cfg) {
  std::vector<ProfiledQuery> pool;
  for (int i = 0; i < n; ++i) {
    const std::string id = "q" + std::to_string(i);
    std::vector<RolloutRecord> rollouts;
    const int kind = static_cast<int>(rng() % 3);
    for (int k = 0; k < 16; ++k) {
      const int tokens = 100 + static_cast<int>(rng() % 12000);
      const bool correct =
          kind == 0 ? false : (kind == 1 ? k < 3 : (rng() % 2 == 0));
      rollouts.push_back(correct ? correct_record(id, k, tokens)
                                 : failed_record(id, k, tokens));
    }
    // Guarantee at least one correct rollout for the solvable kinds.
    if (kind != 0) rollouts[0] = correct_record(id, 0, 5000);
    pool.push_back(make_query(id, std::move(rollouts), cfg));
  }
  return pool;
}

}  // namespace

TEST_CASE("split threshold nearest-rank rule") {
  const std::vector<double> costs{100, 200, 300, 400};
  CHECK(split_threshold(costs, 0.5) == doctest::Approx(200));
  CHECK(split_threshold(std::vector<double>{777}, 0.3) ==
        doctest::Approx(777));
  CHECK(split_threshold(std::vector<double>{1, 2, 3}, 1.0) ==
        doctest::Approx(3));
  CHECK(split_threshold(std::vector<double>{1, 2, 3}, 0.34) ==
        doctest::Approx(2));
  CHECK_THROWS_AS(split_threshold({}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(split_threshold(costs, 0.0), std::invalid_argument);
}

TEST_CASE("zero-success queries fold with the frozen target") {
  RewardConfig cfg;
  std::vector<RolloutRecord> rollouts;
  for (int k = 0; k < 16; ++k)
    rollouts.push_back(failed_record("q0", k, 9000));
  const std::vector<ProfiledQuery> pool{
      make_query("q0", std::move(rollouts), cfg)};

  const auto demos = construct(pool, 0.5, cfg);
  REQUIRE(demos.size() == 1);
  CHECK(demos[0].behavior_label == BehaviorLabel::NiceFold);
  CHECK(demos[0].source_cost == 0);
  CHECK(demos[0].target_text == serialize_response(fold_response()));
}

TEST_CASE("short solve retains the shortest correct trace") {
  RewardConfig cfg;
  // One cheap query and one expensive query so the median split lands
  // between their efficient costs.
  std::vector<RolloutRecord> cheap;
  cheap.push_back(correct_record("cheap", 0, 4100));
  cheap.push_back(correct_record("cheap", 1, 3900));
  for (int k = 2; k < 16; ++k) cheap.push_back(failed_record("cheap", k, 8000));

  std::vector<RolloutRecord> dear;
  dear.push_back(correct_record("dear", 0, 5200));
  dear.push_back(correct_record("dear", 1, 6100));
  dear.push_back(correct_record("dear", 2, 8000));
  for (int k = 3; k < 16; ++k) dear.push_back(failed_record("dear", k, 9000));

  std::vector<ProfiledQuery> pool;
  pool.push_back(make_query("cheap", std::move(cheap), cfg));
  pool.push_back(make_query("dear", std::move(dear), cfg));

  const auto demos = construct(pool, 0.5, cfg);
  REQUIRE(demos.size() == 2);

  CHECK(demos[0].behavior_label == BehaviorLabel::ShortSolve);
  CHECK(demos[0].source_cost == 3900);
  const auto parsed = parse_response(demos[0].target_text);
  REQUIRE(parsed.has_value());
  CHECK(parsed->predicted_solvability ==
        doctest::Approx(0.13));  // 2/16 quantized
  CHECK(parsed->final_answer == pool[0].rollouts[1].answer_text);

  // ĉ* = 5200 for the dear query (m = 1 of 3): above the median split.
  CHECK(demos[1].behavior_label == BehaviorLabel::HeroCall);
}

TEST_CASE("hero call retains the trace closest to the efficient cost") {
  RewardConfig cfg;
  cfg.percentile_p = 1.0;  // force ĉ* = mean(5200, 6100, 8000) = 6433
  std::vector<RolloutRecord> cheap;
  cheap.push_back(correct_record("cheap", 0, 100));
  for (int k = 1; k < 16; ++k) cheap.push_back(failed_record("cheap", k, 500));

  std::vector<RolloutRecord> dear;
  dear.push_back(correct_record("dear", 0, 5200));
  dear.push_back(correct_record("dear", 1, 6100));
  dear.push_back(correct_record("dear", 2, 8000));
  for (int k = 3; k < 16; ++k) dear.push_back(failed_record("dear", k, 9000));

  std::vector<ProfiledQuery> pool;
  pool.push_back(make_query("cheap", std::move(cheap), cfg));
  pool.push_back(make_query("dear", std::move(dear), cfg));

  const auto demos = construct(pool, 0.5, cfg);
  CHECK(demos[1].behavior_label == BehaviorLabel::HeroCall);
  CHECK(demos[1].source_cost == 6100);
}

TEST_CASE("solvable query without correct rollouts is a data error") {
  RewardConfig cfg;
  ProfiledQuery q;
  q.profile.query_id = "q";
  q.profile.k_rollouts = 16;
  q.profile.success_rate = 0.25;
  q.profile.efficient_cost = 1000;
  q.profile.budget_target = 1000.0 / 16384;
  const std::vector<ProfiledQuery> pool{q};
  CHECK_THROWS_AS(construct(pool, 0.5, cfg), std::runtime_error);
}

TEST_CASE("partition is exhaustive, exclusive, and split-consistent") {
  RewardConfig cfg;
  std::mt19937_64 rng(31);
  const auto pool = random_pool(rng, 60, cfg);
  const double rho = 0.5;
  const auto demos = construct(pool, rho, cfg);

  REQUIRE(demos.size() == pool.size());
  std::set<std::string> seen;
  for (const auto& d : demos) CHECK(seen.insert(d.query_id).second);

  std::vector<double> solvable_costs;
  for (const auto& q : pool)
    if (q.profile.success_rate >= cfg.eps_abs)
      solvable_costs.push_back(
          static_cast<double>(*q.profile.efficient_cost));
  const double q_split = split_threshold(solvable_costs, rho);

  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto& q = pool[i];
    const auto& d = demos[i];
    if (q.profile.success_rate < cfg.eps_abs) {
      CHECK(d.behavior_label == BehaviorLabel::NiceFold);
    } else {
      CHECK(d.behavior_label != BehaviorLabel::NiceFold);
      if (d.behavior_label == BehaviorLabel::ShortSolve)
        CHECK(static_cast<double>(*q.profile.efficient_cost) <= q_split);
      else
        CHECK(static_cast<double>(*q.profile.efficient_cost) > q_split);
    }
    // Every emitted target survives a parse round-trip.
    const auto parsed = parse_response(d.target_text);
    REQUIRE(parsed.has_value());
    CHECK(parse_response(serialize_response(*parsed)).has_value());
  }
}

TEST_CASE("balance subsamples per label deterministically") {
  RewardConfig cfg;
  std::mt19937_64 rng(17);
  const auto pool = random_pool(rng, 40, cfg);
  const auto demos = construct(pool, 0.5, cfg);

  CHECK(balance(demos, {}, 1).size() == demos.size());

  const auto summary = summarize(demos);
  const int short_count = summary.counts.at(BehaviorLabel::ShortSolve);
  REQUIRE(short_count >= 3);

  std::map<BehaviorLabel, int> caps{{BehaviorLabel::ShortSolve, 2}};
  const auto once = balance(demos, caps, 42);
  const auto twice = balance(demos, caps, 42);
  REQUIRE(once.size() == twice.size());
  for (std::size_t i = 0; i < once.size(); ++i)
    CHECK(once[i].query_id == twice[i].query_id);

  const auto capped_summary = summarize(once);
  CHECK(capped_summary.counts.at(BehaviorLabel::ShortSolve) == 2);
  CHECK(capped_summary.counts.at(BehaviorLabel::HeroCall) ==
        summary.counts.at(BehaviorLabel::HeroCall));

  caps[BehaviorLabel::ShortSolve] = short_count + 1;
  CHECK_THROWS_AS(balance(demos, caps, 42), std::invalid_argument);
}
