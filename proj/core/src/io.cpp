#include "foldcall/io.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace foldcall {

using nlohmann::json;

namespace {

[[noreturn]] void line_error(const std::string& context, std::size_t line,
                             const std::string& what) {
  throw std::runtime_error(context + ": line " + std::to_string(line) + ": " +
                           what);
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& context) {
  for (const auto& [key, value] : obj.items())
    if (!known.count(key))
      throw std::runtime_error(context + ": unknown key '" + key + "'");
}

json record_to_json(const RolloutRecord& r) {
  json j;
  j["query_id"] = r.query_id;
  j["group_index"] = r.group_index;
  if (r.correct == Correctness::NotApplicable)
    j["correct"] = nullptr;
  else
    j["correct"] = r.correct == Correctness::Correct;
  j["abstained"] = r.abstained;
  j["think_tokens"] = r.think_tokens;
  if (r.predicted_solvability)
    j["predicted_solvability"] = *r.predicted_solvability;
  if (r.predicted_budget) j["predicted_budget"] = *r.predicted_budget;
  j["format_valid"] = r.format_valid;
  j["answer_text"] = r.answer_text;
  return j;
}

RolloutRecord record_from_json(const json& j) {
  reject_unknown_keys(j,
                      {"query_id", "group_index", "correct", "abstained",
                       "think_tokens", "predicted_solvability",
                       "predicted_budget", "format_valid", "answer_text"},
                      "rollout record");
  RolloutRecord r;
  r.query_id = j.at("query_id").get<std::string>();
  r.group_index = j.at("group_index").get<int>();
  const auto& correct = j.at("correct");
  r.correct = correct.is_null()            ? Correctness::NotApplicable
              : correct.get<bool>()        ? Correctness::Correct
                                           : Correctness::Incorrect;
  r.abstained = j.at("abstained").get<bool>();
  r.think_tokens = j.at("think_tokens").get<int>();
  if (j.contains("predicted_solvability") &&
      !j["predicted_solvability"].is_null())
    r.predicted_solvability = j["predicted_solvability"].get<double>();
  if (j.contains("predicted_budget") && !j["predicted_budget"].is_null())
    r.predicted_budget = j["predicted_budget"].get<double>();
  r.format_valid = j.at("format_valid").get<bool>();
  r.answer_text = j.value("answer_text", std::string());
  return r;
}

json profile_to_json(const GroupProfile& p) {
  json j;
  j["query_id"] = p.query_id;
  j["k_rollouts"] = p.k_rollouts;
  j["success_rate"] = p.success_rate;
  j["correct_costs"] = p.correct_costs;
  if (p.efficient_cost) j["efficient_cost"] = *p.efficient_cost;
  if (p.budget_target) j["budget_target"] = *p.budget_target;
  return j;
}

GroupProfile profile_from_json(const json& j) {
  reject_unknown_keys(j,
                      {"query_id", "k_rollouts", "success_rate",
                       "correct_costs", "efficient_cost", "budget_target"},
                      "group profile");
  GroupProfile p;
  p.query_id = j.at("query_id").get<std::string>();
  p.k_rollouts = j.at("k_rollouts").get<int>();
  p.success_rate = j.at("success_rate").get<double>();
  p.correct_costs = j.at("correct_costs").get<std::vector<int>>();
  if (j.contains("efficient_cost") && !j["efficient_cost"].is_null())
    p.efficient_cost = j["efficient_cost"].get<int>();
  if (j.contains("budget_target") && !j["budget_target"].is_null())
    p.budget_target = j["budget_target"].get<double>();
  return p;
}

template <typename T, typename FromJson>
std::vector<T> read_jsonl(std::istream& in, const std::string& context,
                          FromJson&& from_json) {
  std::vector<T> out;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      line_error(context, line_number, e.what());
    }
    try {
      out.push_back(from_json(j));
    } catch (const std::exception& e) {
      line_error(context, line_number, e.what());
    }
  }
  return out;
}

void read_range(const json& j, double& lo, double& hi) {
  if (!j.is_array() || j.size() != 2)
    throw std::runtime_error("expected a [lo, hi] pair");
  lo = j[0].get<double>();
  hi = j[1].get<double>();
}

void parse_class_ranges(const json& j, ClassRanges& r,
                        const std::string& context) {
  reject_unknown_keys(j, {"s_max", "c_req_frac", "steepness"}, context);
  if (j.contains("s_max")) read_range(j["s_max"], r.s_max_lo, r.s_max_hi);
  if (j.contains("c_req_frac"))
    read_range(j["c_req_frac"], r.c_req_frac_lo, r.c_req_frac_hi);
  if (j.contains("steepness"))
    read_range(j["steepness"], r.steepness_lo, r.steepness_hi);
}

json class_stats_to_json(const ClassStats& s) {
  return json{{"Easy", s.easy}, {"Worthy", s.worthy},
              {"Unsolvable", s.unsolvable}};
}

}  // namespace

AppConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("config: ") + e.what());
  }
  reject_unknown_keys(root, {"reward", "train", "world"}, "config");

  AppConfig cfg;
  if (root.contains("reward")) {
    const auto& r = root["reward"];
    reject_unknown_keys(
        r,
        {"delta", "lambda", "beta", "alpha_fail", "tau", "eps_abs",
         "percentile_p", "gamma_s", "gamma_b", "gamma_s_prime",
         "gamma_b_prime", "mu", "l_max", "r_plus", "enable_fold_gate",
         "enable_eff", "enable_cal_solv", "enable_cal_bud"},
        "config.reward");
    auto& c = cfg.reward;
    c.delta = r.value("delta", c.delta);
    c.lambda_ = r.value("lambda", c.lambda_);
    c.beta = r.value("beta", c.beta);
    c.alpha_fail = r.value("alpha_fail", c.alpha_fail);
    c.tau = r.value("tau", c.tau);
    c.eps_abs = r.value("eps_abs", c.eps_abs);
    c.percentile_p = r.value("percentile_p", c.percentile_p);
    c.gamma_s = r.value("gamma_s", c.gamma_s);
    c.gamma_b = r.value("gamma_b", c.gamma_b);
    c.gamma_s_prime = r.value("gamma_s_prime", c.gamma_s_prime);
    c.gamma_b_prime = r.value("gamma_b_prime", c.gamma_b_prime);
    c.mu = r.value("mu", c.mu);
    c.l_max = r.value("l_max", c.l_max);
    c.r_plus = r.value("r_plus", c.r_plus);
    c.enable_fold_gate = r.value("enable_fold_gate", c.enable_fold_gate);
    c.enable_eff = r.value("enable_eff", c.enable_eff);
    c.enable_cal_solv = r.value("enable_cal_solv", c.enable_cal_solv);
    c.enable_cal_bud = r.value("enable_cal_bud", c.enable_cal_bud);
  }
  if (root.contains("train")) {
    const auto& t = root["train"];
    reject_unknown_keys(t,
                        {"k_rollouts", "prompt_batch", "clip_eps",
                         "learn_rate", "steps", "eps_norm", "seed",
                         "objective_cost_weight"},
                        "config.train");
    auto& c = cfg.train;
    c.k_rollouts = t.value("k_rollouts", c.k_rollouts);
    c.prompt_batch = t.value("prompt_batch", c.prompt_batch);
    c.clip_eps = t.value("clip_eps", c.clip_eps);
    c.learn_rate = t.value("learn_rate", c.learn_rate);
    c.steps = t.value("steps", c.steps);
    c.eps_norm = t.value("eps_norm", c.eps_norm);
    c.seed = t.value("seed", c.seed);
    c.objective_cost_weight =
        t.value("objective_cost_weight", c.objective_cost_weight);
  }
  if (root.contains("world")) {
    const auto& w = root["world"];
    reject_unknown_keys(w,
                        {"query_count", "l_max", "abstention_cost",
                         "cost_noise", "class_weights", "easy", "worthy",
                         "noise_seed"},
                        "config.world");
    auto& c = cfg.world;
    c.query_count = w.value("query_count", c.query_count);
    c.l_max = w.value("l_max", c.l_max);
    c.abstention_cost = w.value("abstention_cost", c.abstention_cost);
    c.cost_noise = w.value("cost_noise", c.cost_noise);
    c.noise_seed = w.value("noise_seed", c.noise_seed);
    if (w.contains("class_weights")) {
      const auto& cw = w["class_weights"];
      reject_unknown_keys(cw, {"Easy", "Worthy", "Unsolvable"},
                          "config.world.class_weights");
      c.weight_easy = cw.value("Easy", c.weight_easy);
      c.weight_worthy = cw.value("Worthy", c.weight_worthy);
      c.weight_unsolvable = cw.value("Unsolvable", c.weight_unsolvable);
    }
    if (w.contains("easy"))
      parse_class_ranges(w["easy"], c.easy, "config.world.easy");
    if (w.contains("worthy"))
      parse_class_ranges(w["worthy"], c.worthy, "config.world.worthy");
  }
  // The world section may legitimately relax l_max; keep reward in sync
  // unless the reward section pinned its own value.
  if (root.contains("world") && root["world"].contains("l_max") &&
      (!root.contains("reward") || !root["reward"].contains("l_max")))
    cfg.reward.l_max = cfg.world.l_max;
  return cfg;
}

AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("config: cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::vector<RolloutRecord> read_rollout_jsonl(std::istream& in) {
  return read_jsonl<RolloutRecord>(in, "rollout log", record_from_json);
}

std::vector<RolloutRecord> read_rollout_jsonl(
    const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in)
    throw std::runtime_error("rollout log: cannot open " + p.string());
  return read_rollout_jsonl(in);
}

void write_rollout_jsonl(std::ostream& out,
                         std::span<const RolloutRecord> records) {
  for (const auto& r : records) out << record_to_json(r).dump() << '\n';
}

std::vector<GroupProfile> read_profile_jsonl(std::istream& in) {
  return read_jsonl<GroupProfile>(in, "profile log", profile_from_json);
}

std::vector<GroupProfile> read_profile_jsonl(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in)
    throw std::runtime_error("profile log: cannot open " + p.string());
  return read_profile_jsonl(in);
}

void write_profile_jsonl(std::ostream& out,
                         std::span<const GroupProfile> profiles) {
  for (const auto& p : profiles) out << profile_to_json(p).dump() << '\n';
}

void write_demonstration_jsonl(std::ostream& out,
                               std::span<const Demonstration> demos) {
  for (const auto& d : demos) {
    json j;
    j["query_id"] = d.query_id;
    j["behavior_label"] = to_string(d.behavior_label);
    j["target_text"] = d.target_text;
    j["source_cost"] = d.source_cost;
    out << j.dump() << '\n';
  }
}

std::vector<Demonstration> read_demonstration_jsonl(std::istream& in) {
  return read_jsonl<Demonstration>(
      in, "demonstration log", [](const json& j) {
        reject_unknown_keys(
            j, {"query_id", "behavior_label", "target_text", "source_cost"},
            "demonstration");
        Demonstration d;
        d.query_id = j.at("query_id").get<std::string>();
        const auto label = behavior_label_from_string(
            j.at("behavior_label").get<std::string>());
        if (!label) throw std::runtime_error("unknown behavior label");
        d.behavior_label = *label;
        d.target_text = j.at("target_text").get<std::string>();
        d.source_cost = j.at("source_cost").get<int>();
        return d;
      });
}

void write_step_stats_jsonl(std::ostream& out,
                            std::span<const StepStats> stats) {
  for (const auto& s : stats) {
    json j;
    j["step"] = s.step;
    j["mean_reward"] = s.mean_reward;
    j["objective"] = s.objective;
    j["accuracy"] = s.accuracy;
    j["fold_rate"] = class_stats_to_json(s.fold_rate);
    j["mean_budget"] = class_stats_to_json(s.mean_budget);
    j["mean_cost"] = class_stats_to_json(s.mean_cost);
    out << j.dump() << '\n';
  }
}

std::string world_to_json(const World& world) {
  json j;
  j["l_max"] = world.l_max;
  j["abstention_cost"] = world.abstention_cost;
  j["cost_noise"] = world.cost_noise;
  j["noise_seed"] = world.noise_seed;
  json queries = json::array();
  for (const auto& q : world.queries) {
    queries.push_back(json{{"query_id", q.query_id},
                           {"class_label", to_string(q.class_label)},
                           {"s_max", q.s_max},
                           {"c_req", q.c_req},
                           {"steepness", q.steepness},
                           {"answer", q.answer}});
  }
  j["queries"] = std::move(queries);
  return j.dump(2) + "\n";
}

World world_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("world: ") + e.what());
  }
  reject_unknown_keys(
      j, {"l_max", "abstention_cost", "cost_noise", "noise_seed", "queries"},
      "world");
  World world;
  world.l_max = j.at("l_max").get<int>();
  world.abstention_cost = j.at("abstention_cost").get<int>();
  world.cost_noise = j.value("cost_noise", world.cost_noise);
  world.noise_seed = j.value("noise_seed", world.noise_seed);
  for (const auto& q : j.at("queries")) {
    reject_unknown_keys(q,
                        {"query_id", "class_label", "s_max", "c_req",
                         "steepness", "answer"},
                        "world query");
    SynthQuery sq;
    sq.query_id = q.at("query_id").get<std::string>();
    const auto cls =
        query_class_from_string(q.at("class_label").get<std::string>());
    if (!cls) throw std::runtime_error("world: unknown class label");
    sq.class_label = *cls;
    sq.s_max = q.at("s_max").get<double>();
    sq.c_req = q.at("c_req").get<int>();
    sq.steepness = q.at("steepness").get<double>();
    sq.answer = q.at("answer").get<std::string>();
    world.queries.push_back(std::move(sq));
  }
  return world;
}

World load_world(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("world: cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return world_from_json(buffer.str());
}

std::string policy_to_json(const PolicyParams& policy) {
  json j;
  j["solvability_buckets"] = policy.solvability_buckets;
  j["budget_buckets"] = policy.budget_buckets;
  json entries = json::array();
  for (std::size_t i = 0; i < policy.query_ids.size(); ++i) {
    entries.push_back(json{{"query_id", policy.query_ids[i]},
                           {"solvability_logits", policy.heads[i].solvability},
                           {"budget_logits", policy.heads[i].budget},
                           {"commit_logits", policy.heads[i].commit}});
  }
  j["entries"] = std::move(entries);
  return j.dump(2) + "\n";
}

PolicyParams policy_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("policy: ") + e.what());
  }
  reject_unknown_keys(j, {"solvability_buckets", "budget_buckets", "entries"},
                      "policy");
  PolicyParams p;
  p.solvability_buckets = j.at("solvability_buckets").get<int>();
  p.budget_buckets = j.at("budget_buckets").get<int>();
  for (const auto& e : j.at("entries")) {
    reject_unknown_keys(e,
                        {"query_id", "solvability_logits", "budget_logits",
                         "commit_logits"},
                        "policy entry");
    p.query_ids.push_back(e.at("query_id").get<std::string>());
    HeadLogits h;
    h.solvability = e.at("solvability_logits").get<std::vector<double>>();
    h.budget = e.at("budget_logits").get<std::vector<double>>();
    h.commit = e.at("commit_logits").get<std::vector<double>>();
    p.heads.push_back(std::move(h));
  }
  p.validate();
  return p;
}

PolicyParams load_policy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("policy: cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return policy_from_json(buffer.str());
}

std::vector<std::vector<RolloutRecord>> group_by_query(
    std::vector<RolloutRecord> records) {
  std::vector<std::vector<RolloutRecord>> groups;
  std::unordered_map<std::string, std::size_t> index;
  for (auto& r : records) {
    const auto [it, inserted] = index.try_emplace(r.query_id, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(std::move(r));
  }
  return groups;
}

void atomic_write(const std::filesystem::path& path,
                  const std::string& contents) {
  const auto parent = path.parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw std::runtime_error("atomic_write: cannot open " + tmp);
    out << contents;
    if (!out)
      throw std::runtime_error("atomic_write: short write to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace foldcall
