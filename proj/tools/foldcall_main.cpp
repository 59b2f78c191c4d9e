// Command-line front end: profiling, reward scoring, cold-start
// construction, synthetic-world generation and rollout, GRPO training,
// evaluation, fold statistics, and report generation over JSON/JSONL file
// contracts. Every subcommand is deterministic in (inputs, config, seed)
// and writes outputs atomically.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "foldcall/analytics.hpp"
#include "foldcall/coldstart.hpp"
#include "foldcall/io.hpp"
#include "foldcall/profiler.hpp"
#include "foldcall/reward.hpp"
#include "foldcall/synthworld.hpp"
#include "foldcall/trainer.hpp"
#include "foldcall/version.hpp"

namespace fc = foldcall;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
};

fc::AppConfig load_app_config(const CommonOpts& opts) {
  fc::AppConfig cfg;
  if (!opts.config_path.empty()) cfg = fc::load_config(opts.config_path);
  if (opts.seed) {
    cfg.train.seed = *opts.seed;
    cfg.world.noise_seed = *opts.seed;
  }
  return cfg;
}

json class_stats_json(const fc::ClassStats& s) {
  return json{{"Easy", s.easy}, {"Worthy", s.worthy},
              {"Unsolvable", s.unsolvable}};
}

int run_profile(const CommonOpts& common, const std::string& log_path,
                const std::string& out_path) {
  const auto cfg = load_app_config(common);
  auto records = fc::read_rollout_jsonl(std::filesystem::path(log_path));
  auto groups = fc::group_by_query(std::move(records));
  if (groups.empty()) throw std::runtime_error("no rollout groups");

  std::vector<fc::GroupProfile> profiles;
  profiles.reserve(groups.size());
  for (const auto& g : groups)
    profiles.push_back(fc::build_profile(g, cfg.reward));

  std::ostringstream out;
  fc::write_profile_jsonl(out, profiles);
  fc::atomic_write(out_path, out.str());
  std::fprintf(stderr, "profiled %zu groups\n", profiles.size());
  return 0;
}

int run_reward(const CommonOpts& common, const std::string& log_path,
               const std::string& out_path,
               const std::string& advantages_path) {
  const auto cfg = load_app_config(common);
  auto records = fc::read_rollout_jsonl(std::filesystem::path(log_path));
  auto groups = fc::group_by_query(std::move(records));
  if (groups.empty()) throw std::runtime_error("no rollout groups");

  std::ostringstream breakdown_out, adv_out;
  for (const auto& g : groups) {
    const auto profile = fc::build_profile(g, cfg.reward);
    std::vector<double> totals;
    totals.reserve(g.size());
    for (const auto& r : g) {
      const auto b = fc::composite_reward(r, profile, cfg.reward);
      totals.push_back(b.total);
      breakdown_out << json{{"query_id", r.query_id},
                            {"group_index", r.group_index},
                            {"r_val", b.r_val},
                            {"r_eff", b.r_eff},
                            {"r_cal", b.r_cal},
                            {"total", b.total}}
                           .dump()
                    << '\n';
    }
    if (g.size() >= 2) {
      const auto advantages =
          fc::group_advantages(totals, cfg.train.eps_norm);
      adv_out << json{{"query_id", profile.query_id},
                      {"advantages", advantages}}
                     .dump()
              << '\n';
    }
  }
  fc::atomic_write(out_path, breakdown_out.str());
  if (!advantages_path.empty())
    fc::atomic_write(advantages_path, adv_out.str());
  return 0;
}

int run_coldstart(const CommonOpts& common, const std::string& profiles_path,
                  const std::string& log_path, double rho,
                  const std::string& out_path,
                  const std::map<std::string, int>& caps) {
  const auto cfg = load_app_config(common);
  const auto profiles =
      fc::read_profile_jsonl(std::filesystem::path(profiles_path));
  auto records = fc::read_rollout_jsonl(std::filesystem::path(log_path));
  auto groups = fc::group_by_query(std::move(records));

  std::vector<fc::ProfiledQuery> pool;
  pool.reserve(profiles.size());
  for (const auto& p : profiles) {
    fc::ProfiledQuery q;
    q.profile = p;
    for (auto& g : groups)
      if (!g.empty() && g.front().query_id == p.query_id) q.rollouts = g;
    pool.push_back(std::move(q));
  }

  auto demos = fc::construct(pool, rho, cfg.reward);
  if (!caps.empty()) {
    std::map<fc::BehaviorLabel, int> typed_caps;
    for (const auto& [name, cap] : caps) {
      const auto label = fc::behavior_label_from_string(name);
      if (!label)
        throw std::runtime_error("coldstart: unknown label '" + name + "'");
      typed_caps[*label] = cap;
    }
    demos = fc::balance(demos, typed_caps, common.seed.value_or(0));
  }

  std::ostringstream out;
  fc::write_demonstration_jsonl(out, demos);
  fc::atomic_write(out_path, out.str());

  const auto summary = fc::summarize(demos);
  std::printf("%-12s %8s %18s\n", "label", "count", "avg think tokens");
  for (const auto label :
       {fc::BehaviorLabel::ShortSolve, fc::BehaviorLabel::HeroCall,
        fc::BehaviorLabel::NiceFold}) {
    const auto it = summary.counts.find(label);
    const int count = it == summary.counts.end() ? 0 : it->second;
    const double mean =
        count > 0 ? summary.mean_think_tokens.at(label) : 0.0;
    std::printf("%-12s %8d %18.1f\n", fc::to_string(label), count, mean);
  }
  return 0;
}

int run_world_gen(const CommonOpts& common, const std::string& out_path) {
  const auto cfg = load_app_config(common);
  const auto world =
      fc::generate_world(cfg.world, common.seed.value_or(cfg.world.noise_seed));
  fc::atomic_write(out_path, fc::world_to_json(world));
  std::fprintf(stderr, "generated %zu queries\n", world.queries.size());
  return 0;
}

int run_world_rollout(const CommonOpts& common, const std::string& world_path,
                      const std::string& policy_path, int k,
                      const std::string& out_path) {
  const auto world = fc::load_world(world_path);
  const std::uint64_t seed = common.seed.value_or(world.noise_seed);
  std::vector<fc::RolloutRecord> records;
  records.reserve(world.queries.size() * k);

  if (policy_path.empty()) {
    // Maximal-budget always-attempt baseline.
    fc::PolicyDecision vanilla;
    vanilla.fold = false;
    vanilla.declared_solvability = 1.0;
    vanilla.declared_budget = 1.0;
    vanilla.invested_budget = 1.0;
    for (const auto& q : world.queries) {
      for (int i = 0; i < k; ++i) {
        auto rng = fc::substream(seed, q.query_id, i);
        records.push_back(fc::sample_rollout(world, q, vanilla, i, rng));
      }
    }
  } else {
    const auto policy = fc::load_policy(policy_path);
    if (policy.query_ids.size() != world.queries.size())
      throw std::runtime_error(
          "world rollout: policy and world query pools differ");
    for (std::size_t qi = 0; qi < world.queries.size(); ++qi) {
      if (policy.query_ids[qi] != world.queries[qi].query_id)
        throw std::runtime_error(
            "world rollout: policy and world query ids differ at index " +
            std::to_string(qi));
      for (int i = 0; i < k; ++i) {
        auto rng = fc::substream(seed, world.queries[qi].query_id, i);
        auto d = fc::sample_decision(policy, static_cast<int>(qi), rng);
        if (d.fold)
          d.invested_budget =
              static_cast<double>(world.abstention_cost) / world.l_max;
        records.push_back(
            fc::sample_rollout(world, world.queries[qi], d, i, rng));
      }
    }
  }

  std::ostringstream out;
  fc::write_rollout_jsonl(out, records);
  fc::atomic_write(out_path, out.str());
  return 0;
}

int run_train(const CommonOpts& common, const std::string& world_path,
              std::optional<int> steps, const std::string& stats_path,
              const std::string& policy_path, int s_buckets, int b_buckets) {
  auto cfg = load_app_config(common);
  if (steps) cfg.train.steps = *steps;
  const auto world = fc::load_world(world_path);

  const auto result = fc::train(world, cfg.reward, cfg.train, s_buckets,
                                b_buckets);
  if (!stats_path.empty()) {
    std::ostringstream out;
    fc::write_step_stats_jsonl(out, result.stats);
    fc::atomic_write(stats_path, out.str());
  }
  if (!policy_path.empty())
    fc::atomic_write(policy_path, fc::policy_to_json(result.policy));

  const auto& last = result.stats.back();
  std::fprintf(stderr,
               "trained %d steps: mean reward %.4f, objective %.5f, "
               "unsolvable fold rate %.3f\n",
               cfg.train.steps, last.mean_reward, last.objective,
               last.fold_rate.unsolvable);
  return 0;
}

int run_eval(const CommonOpts& common, const std::string& world_path,
             const std::string& policy_path, int k,
             const std::string& out_path) {
  const auto cfg = load_app_config(common);
  const auto world = fc::load_world(world_path);
  const auto policy = fc::load_policy(policy_path);
  const std::uint64_t seed = common.seed.value_or(cfg.train.seed);

  const auto report =
      fc::evaluate(world, policy, cfg.reward, cfg.train, k, seed);
  const auto vanilla = fc::vanilla_reference(world, k, seed);

  fc::ClassStats vanilla_cost, vanilla_count;
  for (const auto& v : vanilla) {
    vanilla_cost.at(v.class_label) += v.mean_cost;
    vanilla_count.at(v.class_label) += 1.0;
  }
  json ratios;
  for (const auto cls : {fc::QueryClass::Easy, fc::QueryClass::Worthy,
                         fc::QueryClass::Unsolvable}) {
    const double n = vanilla_count.at(cls);
    if (n > 0.0) {
      const double vanilla_mean = vanilla_cost.at(cls) / n;
      ratios[fc::to_string(cls)] = report.mean_cost.at(cls) / vanilla_mean;
    }
  }

  json j;
  j["fold_rate"] = class_stats_json(report.fold_rate);
  j["mean_cost"] = class_stats_json(report.mean_cost);
  j["mean_budget"] = class_stats_json(report.mean_budget);
  j["accuracy"] = class_stats_json(report.accuracy);
  j["overall_accuracy"] = report.overall_accuracy;
  j["overall_mean_cost"] = report.overall_mean_cost;
  j["objective"] = report.objective;
  j["cost_ratio_vs_vanilla"] = ratios;
  fc::atomic_write(out_path, j.dump(2) + "\n");
  std::printf("%s\n", j.dump(2).c_str());
  return 0;
}

int run_fold_stats(int k, const std::vector<double>& taus,
                   const std::vector<double>& misroute_rates) {
  std::printf("K = %d rollouts, zero observed successes\n", k);
  std::printf("%-6s %10s %12s %12s\n", "tau", "p_value", "confidence",
              "posterior");
  for (const double tau : taus) {
    const double p = fc::fold_p_value(tau, k);
    const double posterior = fc::fold_posterior(tau, k);
    std::printf("%-6.2f %10.4f %11.1f%% %12.4f\n", tau, p,
                100.0 * (1.0 - p), posterior);
  }
  if (!misroute_rates.empty()) {
    std::printf("\nmisroute probability (zero successes despite true rate s)\n");
    std::printf("%-6s %12s\n", "s", "probability");
    for (const double s : misroute_rates)
      std::printf("%-6.2f %12.4f\n", s, fc::misroute_probability(s, k));
  }
  return 0;
}

int run_report(const CommonOpts& common, const std::string& method_path,
               const std::string& vanilla_path, int k,
               const std::string& out_path, const std::string& csv_prefix) {
  const auto cfg = load_app_config(common);
  const auto method_logs =
      fc::read_rollout_jsonl(std::filesystem::path(method_path));
  auto vanilla_logs =
      fc::read_rollout_jsonl(std::filesystem::path(vanilla_path));

  const auto vanilla_groups = fc::group_by_query(vanilla_logs);
  std::vector<fc::GroupProfile> vanilla_profiles;
  vanilla_profiles.reserve(vanilla_groups.size());
  for (const auto& g : vanilla_groups)
    vanilla_profiles.push_back(fc::build_profile(g, cfg.reward));

  const auto partition = fc::partition_regimes(vanilla_profiles, k);
  const auto method_acc = fc::log_accuracy(method_logs);
  const auto vanilla_acc = fc::log_accuracy(vanilla_logs);
  const auto ratios =
      fc::regime_token_ratio(method_logs, vanilla_logs, partition);
  const auto edges = fc::default_bucket_edges(k);
  const auto curve = fc::fold_rate_curve(method_logs, vanilla_profiles, edges);

  json j;
  j["eta"] = fc::accuracy_efficiency_score(
      method_acc.accuracy, method_acc.mean_tokens, vanilla_acc.accuracy,
      vanilla_acc.mean_tokens);
  j["method"] = {{"accuracy", method_acc.accuracy},
                 {"mean_tokens", method_acc.mean_tokens},
                 {"rollouts", method_acc.rollouts}};
  j["vanilla"] = {{"accuracy", vanilla_acc.accuracy},
                  {"mean_tokens", vanilla_acc.mean_tokens},
                  {"rollouts", vanilla_acc.rollouts}};
  json regime_counts = json::object(), regime_ratios = json::object();
  for (const auto& [query, regime] : partition)
    regime_counts[fc::to_string(regime)] =
        regime_counts.value(fc::to_string(regime), 0) + 1;
  for (const auto& [regime, ratio] : ratios)
    regime_ratios[fc::to_string(regime)] = ratio;
  j["regime_counts"] = regime_counts;
  j["regime_token_ratio"] = regime_ratios;
  json curve_json = json::array();
  for (const auto& b : curve)
    curve_json.push_back(json{{"lo", b.lo},
                              {"hi", b.hi},
                              {"rollouts", b.rollouts},
                              {"fold_rate", b.fold_rate}});
  j["fold_rate_curve"] = std::move(curve_json);
  fc::atomic_write(out_path, j.dump(2) + "\n");

  if (!csv_prefix.empty()) {
    std::ostringstream ratio_csv;
    ratio_csv << "regime,token_ratio\n";
    for (const auto& [regime, ratio] : ratios)
      ratio_csv << fc::to_string(regime) << ',' << ratio << '\n';
    fc::atomic_write(csv_prefix + "regime_ratios.csv", ratio_csv.str());

    std::ostringstream curve_csv;
    curve_csv << "lo,hi,rollouts,fold_rate\n";
    for (const auto& b : curve)
      curve_csv << b.lo << ',' << b.hi << ',' << b.rollouts << ','
                << b.fold_rate << '\n';
    fc::atomic_write(csv_prefix + "fold_curve.csv", curve_csv.str());
  }
  std::printf("%s\n", j.dump(2).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"solvability-aware compute investment toolkit"};
  app.require_subcommand(1);

  std::ostringstream version;
  version << "foldcall " << fc::version_string()
          << " (defaults fingerprint " << fc::defaults_fingerprint() << ")";
  app.set_version_flag("--version", version.str());

  CommonOpts common;
  std::string log_path, out_path, advantages_path, profiles_path;
  std::string world_path, policy_path, stats_path;
  std::string method_path, vanilla_path, csv_prefix;
  double rho = 0.5;
  int k = 16;
  std::optional<int> steps;
  int s_buckets = 8, b_buckets = 8;
  std::map<std::string, int> caps;
  std::vector<double> taus{0.10, 0.15, 0.20, 0.25};
  std::vector<double> misroute_rates{0.30};

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", common.config_path, "JSON config path");
    cmd->add_option("--seed", common.seed, "seed override");
  };

  auto* profile_cmd =
      app.add_subcommand("profile", "group statistics from a rollout log");
  add_common(profile_cmd);
  profile_cmd->add_option("--log", log_path, "rollout JSONL")->required();
  profile_cmd->add_option("--out", out_path, "profile JSONL")->required();

  auto* reward_cmd =
      app.add_subcommand("reward", "per-record reward breakdowns");
  add_common(reward_cmd);
  reward_cmd->add_option("--log", log_path, "rollout JSONL")->required();
  reward_cmd->add_option("--out", out_path, "breakdown JSONL")->required();
  reward_cmd->add_option("--advantages-out", advantages_path,
                         "per-group advantage JSONL");

  auto* coldstart_cmd = app.add_subcommand(
      "coldstart", "demonstration construction from profiled rollouts");
  add_common(coldstart_cmd);
  coldstart_cmd->add_option("--profiles", profiles_path, "profile JSONL")
      ->required();
  coldstart_cmd->add_option("--log", log_path, "rollout JSONL")->required();
  coldstart_cmd->add_option("--rho", rho, "split quantile")
      ->capture_default_str();
  coldstart_cmd->add_option("--out", out_path, "demonstration JSONL")
      ->required();
  coldstart_cmd->add_option("--cap", caps,
                            "per-label subsample cap, e.g. --cap NiceFold 10");

  auto* world_cmd = app.add_subcommand("world", "synthetic query world");
  world_cmd->require_subcommand(1);
  auto* gen_cmd = world_cmd->add_subcommand("gen", "generate a world");
  add_common(gen_cmd);
  gen_cmd->add_option("--out", out_path, "world JSON")->required();
  auto* rollout_cmd =
      world_cmd->add_subcommand("rollout", "emit a rollout log");
  add_common(rollout_cmd);
  rollout_cmd->add_option("--world", world_path, "world JSON")->required();
  rollout_cmd->add_option("--policy", policy_path,
                          "policy JSON (default: always-attempt baseline)");
  rollout_cmd->add_option("--k", k, "rollouts per query")
      ->capture_default_str();
  rollout_cmd->add_option("--out", out_path, "rollout JSONL")->required();

  auto* train_cmd = app.add_subcommand("train", "GRPO training loop");
  add_common(train_cmd);
  train_cmd->add_option("--world", world_path, "world JSON")->required();
  train_cmd->add_option("--steps", steps, "step-count override");
  train_cmd->add_option("--stats-out", stats_path, "step stats JSONL");
  train_cmd->add_option("--policy-out", policy_path, "final policy JSON");
  train_cmd->add_option("--solvability-buckets", s_buckets, "")
      ->capture_default_str();
  train_cmd->add_option("--budget-buckets", b_buckets, "")
      ->capture_default_str();

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a trained policy");
  add_common(eval_cmd);
  eval_cmd->add_option("--world", world_path, "world JSON")->required();
  eval_cmd->add_option("--policy", policy_path, "policy JSON")->required();
  eval_cmd->add_option("--k", k, "rollouts per query")->capture_default_str();
  eval_cmd->add_option("--out", out_path, "report JSON")->required();

  auto* fold_stats_cmd = app.add_subcommand(
      "fold-stats", "zero-success confidence table for K rollouts");
  fold_stats_cmd->add_option("--k", k, "rollouts per query")
      ->capture_default_str();
  fold_stats_cmd->add_option("--tau", taus, "thresholds")->delimiter(',');
  fold_stats_cmd->add_option("--misroute-s", misroute_rates,
                             "true rates for the misroute table")
      ->delimiter(',');

  auto* report_cmd =
      app.add_subcommand("report", "method-vs-vanilla diagnostics");
  add_common(report_cmd);
  report_cmd->add_option("--method-log", method_path, "method rollout JSONL")
      ->required();
  report_cmd
      ->add_option("--vanilla-log", vanilla_path, "vanilla rollout JSONL")
      ->required();
  report_cmd->add_option("--k", k, "rollouts per query in the vanilla log")
      ->capture_default_str();
  report_cmd->add_option("--out", out_path, "report JSON")->required();
  report_cmd->add_option("--csv-prefix", csv_prefix, "CSV output prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (profile_cmd->parsed()) return run_profile(common, log_path, out_path);
    if (reward_cmd->parsed())
      return run_reward(common, log_path, out_path, advantages_path);
    if (coldstart_cmd->parsed())
      return run_coldstart(common, profiles_path, log_path, rho, out_path,
                           caps);
    if (world_cmd->parsed()) {
      if (gen_cmd->parsed()) return run_world_gen(common, out_path);
      if (rollout_cmd->parsed())
        return run_world_rollout(common, world_path, policy_path, k,
                                 out_path);
    }
    if (train_cmd->parsed())
      return run_train(common, world_path, steps, stats_path, policy_path,
                       s_buckets, b_buckets);
    if (eval_cmd->parsed())
      return run_eval(common, world_path, policy_path, k, out_path);
    if (fold_stats_cmd->parsed())
      return run_fold_stats(k, taus, misroute_rates);
    if (report_cmd->parsed())
      return run_report(common, method_path, vanilla_path, k, out_path,
                        csv_prefix);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
