#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "foldcall/synthworld.hpp"

using namespace foldcall;

namespace {

SynthQuery make_query(double s_max, int c_req, double steepness) {
  SynthQuery q;
  q.query_id = "q";
  q.class_label = s_max == 0.0 ? QueryClass::Unsolvable : QueryClass::Worthy;
  q.s_max = s_max;
  q.c_req = c_req;
  q.steepness = steepness;
  q.answer = "42";
  return q;
}

PolicyDecision attempt(double budget) {
  PolicyDecision d;
  d.fold = false;
  d.declared_solvability = 0.5;
  d.declared_budget = budget;
  d.invested_budget = budget;
  return d;
}

}  // namespace

TEST_CASE("success probability") {
  const int l_max = 16384;
  const auto unsolvable = make_query(0.0, 1000, 0.01);
  for (const double b : {0.0, 0.3, 1.0})
    CHECK(success_probability(unsolvable, b, l_max) == 0.0);

  const auto q = make_query(0.8, 4096, 0.004);
  CHECK(success_probability(q, 4096.0 / l_max, l_max) ==
        doctest::Approx(0.4));

  const auto sharp = make_query(0.8, 4096, 1e6);
  CHECK(success_probability(sharp, 1.0, l_max) == doctest::Approx(0.8));
  CHECK(success_probability(sharp, 0.0, l_max) ==
        doctest::Approx(0.0).epsilon(1e-9));

  CHECK_THROWS_AS(success_probability(q, 1.5, l_max), std::invalid_argument);
}

TEST_CASE("fold rollouts abstain at the fixed cost") {
  World world;
  world.l_max = 16384;
  world.abstention_cost = 40;
  world.cost_noise = 64;
  const auto q = make_query(0.7, 2000, 0.005);

  PolicyDecision fold;
  fold.fold = true;
  fold.declared_solvability = 0.1;
  fold.declared_budget = 0.1;
  std::mt19937_64 rng(3);
  const auto rec = sample_rollout(world, q, fold, 0, rng);
  CHECK(rec.abstained);
  CHECK(rec.correct == Correctness::NotApplicable);
  CHECK(rec.think_tokens == 40);
  CHECK(rec.answer_text == "<Unsolvable>");
  CHECK(*rec.predicted_solvability == doctest::Approx(0.1));
  CHECK_NOTHROW(validate_record(rec, world.l_max));
}

TEST_CASE("attempts on a zero-ceiling query never succeed") {
  World world;
  world.l_max = 16384;
  const auto q = make_query(0.0, 2000, 0.005);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 300; ++i) {
    const auto rec = sample_rollout(world, q, attempt(1.0), i, rng);
    CHECK(rec.correct == Correctness::Incorrect);
    CHECK_NOTHROW(validate_record(rec, world.l_max));
  }
}

TEST_CASE("empirical success rate matches the curve within 3 sigma") {
  World world;
  world.l_max = 16384;
  world.cost_noise = 64;
  std::mt19937_64 rng(5);
  for (const double budget : {0.2, 0.5, 0.9}) {
    const auto q = make_query(0.6, 6000, 0.0012);
    const double p = success_probability(q, budget, world.l_max);
    const int n = 100000;
    int hits = 0;
    for (int i = 0; i < n; ++i)
      hits += sample_rollout(world, q, attempt(budget), i, rng).is_correct();
    const double observed = static_cast<double>(hits) / n;
    const double sigma = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(observed - p) <= 3.0 * sigma + 1e-9);
  }
}

TEST_CASE("attempt cost is the invested budget plus bounded noise") {
  World world;
  world.l_max = 16384;
  world.cost_noise = 64;
  const auto q = make_query(0.9, 2000, 0.005);
  std::mt19937_64 rng(6);
  for (int i = 0; i < 2000; ++i) {
    const auto rec = sample_rollout(world, q, attempt(0.5), i, rng);
    CHECK(rec.think_tokens >= 8192 - 64);
    CHECK(rec.think_tokens <= 8192 + 64);
  }
  // At the top the cost clamps to l_max.
  for (int i = 0; i < 500; ++i) {
    const auto rec = sample_rollout(world, q, attempt(1.0), i, rng);
    CHECK(rec.think_tokens <= world.l_max);
  }
}

TEST_CASE("world generation respects class invariants and determinism") {
  WorldConfig cfg;
  cfg.query_count = 400;
  const auto world = generate_world(cfg, 11);
  const auto again = generate_world(cfg, 11);
  REQUIRE(world.queries.size() == 400);

  int unsolvable = 0;
  for (std::size_t i = 0; i < world.queries.size(); ++i) {
    const auto& q = world.queries[i];
    CHECK(q.query_id == again.queries[i].query_id);
    CHECK(q.s_max == again.queries[i].s_max);
    switch (q.class_label) {
      case QueryClass::Easy:
        CHECK(q.s_max >= 0.95);
        CHECK(q.c_req <= cfg.l_max / 4);
        break;
      case QueryClass::Worthy:
        CHECK(q.s_max > 0.0);
        CHECK(q.s_max < 0.95);
        break;
      case QueryClass::Unsolvable:
        CHECK(q.s_max == 0.0);
        ++unsolvable;
        break;
    }
  }
  CHECK(unsolvable > 0);

  WorldConfig bad = cfg;
  bad.weight_unsolvable = 0.1;
  bad.weight_worthy = 0.55;
  CHECK_THROWS_AS(generate_world(bad, 1), std::invalid_argument);
}

TEST_CASE("vanilla reference regimes") {
  World world;
  world.l_max = 16384;
  world.cost_noise = 64;
  world.queries.push_back(make_query(0.0, 8000, 0.004));
  world.queries[0].query_id = "dead";
  world.queries.push_back(make_query(1.0, 500, 0.05));
  world.queries[1].query_id = "free";
  world.queries[1].class_label = QueryClass::Easy;
  world.queries.push_back(make_query(0.5, 4000, 0.004));
  world.queries[2].query_id = "mid";

  const auto stats = vanilla_reference(world, 16, 21);
  REQUIRE(stats.size() == 3);
  CHECK(stats[0].success_rate == 0.0);
  CHECK(stats[0].regime == QueryClass::Unsolvable);
  CHECK(stats[1].success_rate == 1.0);
  CHECK(stats[1].regime == QueryClass::Easy);
  CHECK(std::abs(stats[2].success_rate - 0.5) <=
        3.0 * std::sqrt(0.25 / 16.0));
  CHECK(stats[2].regime == QueryClass::Worthy);
  CHECK(stats[0].mean_cost > 16000);

  // Identical seeds give the identical reference.
  const auto repeat = vanilla_reference(world, 16, 21);
  for (std::size_t i = 0; i < stats.size(); ++i) {
    CHECK(stats[i].success_rate == repeat[i].success_rate);
    CHECK(stats[i].mean_cost == repeat[i].mean_cost);
  }
}

TEST_CASE("observed regimes agree with class labels at 90 percent") {
  WorldConfig cfg;
  cfg.query_count = 600;
  const auto world = generate_world(cfg, 33);
  const auto stats = vanilla_reference(world, 16, 34);
  int agree = 0;
  for (const auto& s : stats) agree += s.regime == s.class_label;
  CHECK(static_cast<double>(agree) / stats.size() >= 0.90);
}
