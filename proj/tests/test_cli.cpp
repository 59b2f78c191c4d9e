#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(FOLDCALL_BIN) + " " + args + " 2>&1";
  std::array<char, 4096> buffer{};
  RunResult result;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  while (std::fgets(buffer.data(), buffer.size(), pipe))
    result.output += buffer.data();
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

fs::path scratch_dir() {
  const auto dir = fs::temp_directory_path() / "foldcall_cli_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("version prints the defaults fingerprint") {
  const auto r = run("--version");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("foldcall") != std::string::npos);
  CHECK(r.output.find("fingerprint") != std::string::npos);
}

TEST_CASE("unknown subcommand exits with usage status") {
  const auto r = run("frobnicate");
  CHECK(r.exit_code == 2);
}

TEST_CASE("fold-stats prints the confidence table") {
  const auto r = run("fold-stats --k 16 --tau 0.10,0.15,0.20,0.25");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("0.1853") != std::string::npos);
  CHECK(r.output.find("0.0743") != std::string::npos);
  CHECK(r.output.find("0.0281") != std::string::npos);
  CHECK(r.output.find("0.0100") != std::string::npos);
  CHECK(r.output.find("0.9775") != std::string::npos);  // posterior at 0.20
  CHECK(r.output.find("0.0033") != std::string::npos);  // misroute at 0.30
}

TEST_CASE("profile rejects an empty log") {
  const auto dir = scratch_dir();
  const auto log = dir / "empty.jsonl";
  std::ofstream(log).close();
  const auto r = run("profile --log " + log.string() + " --out " +
                     (dir / "p.jsonl").string());
  CHECK(r.exit_code != 0);
  CHECK(r.output.find("no rollout groups") != std::string::npos);
}

TEST_CASE("malformed jsonl reports the line number") {
  const auto dir = scratch_dir();
  const auto log = dir / "bad.jsonl";
  {
    std::ofstream out(log);
    out << R"({"query_id":"q","group_index":0,"correct":true,)"
        << R"("abstained":false,"think_tokens":10,"format_valid":true,)"
        << R"("answer_text":"1"})" << "\n";
    out << "this is not json\n";
  }
  const auto r = run("profile --log " + log.string() + " --out " +
                     (dir / "p.jsonl").string());
  CHECK(r.exit_code != 0);
  CHECK(r.output.find("line 2") != std::string::npos);
}

TEST_CASE("world gen, rollout, profile, reward, coldstart pipeline") {
  const auto dir = scratch_dir();
  const auto config = dir / "config.json";
  {
    std::ofstream out(config);
    out << R"({"world": {"query_count": 24}})";
  }
  const auto world = dir / "world.json";
  auto r = run("world gen --config " + config.string() +
               " --seed 5 --out " + world.string());
  REQUIRE(r.exit_code == 0);

  const auto log = dir / "log.jsonl";
  r = run("world rollout --world " + world.string() + " --k 16 --seed 5 " +
          "--out " + log.string());
  REQUIRE(r.exit_code == 0);

  // Determinism: a second run is byte-identical.
  const auto log2 = dir / "log2.jsonl";
  r = run("world rollout --world " + world.string() + " --k 16 --seed 5 " +
          "--out " + log2.string());
  REQUIRE(r.exit_code == 0);
  CHECK(slurp(log) == slurp(log2));

  const auto profiles = dir / "profiles.jsonl";
  r = run("profile --log " + log.string() + " --out " + profiles.string());
  REQUIRE(r.exit_code == 0);
  CHECK(fs::file_size(profiles) > 0);

  const auto breakdowns = dir / "breakdowns.jsonl";
  const auto advantages = dir / "advantages.jsonl";
  r = run("reward --log " + log.string() + " --out " + breakdowns.string() +
          " --advantages-out " + advantages.string());
  REQUIRE(r.exit_code == 0);
  CHECK(fs::file_size(breakdowns) > 0);
  CHECK(fs::file_size(advantages) > 0);

  const auto demos = dir / "demos.jsonl";
  r = run("coldstart --profiles " + profiles.string() + " --log " +
          log.string() + " --rho 0.5 --seed 1 --out " + demos.string());
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("NiceFold") != std::string::npos);
  CHECK(fs::file_size(demos) > 0);

  // Inputs are never mutated.
  const auto before = slurp(log);
  r = run("report --method-log " + log.string() + " --vanilla-log " +
          log.string() + " --k 16 --out " + (dir / "report.json").string());
  REQUIRE(r.exit_code == 0);
  CHECK(slurp(log) == before);
  CHECK(r.output.find("\"eta\": 1.0") != std::string::npos);
}

TEST_CASE("train and eval smoke test") {
  const auto dir = scratch_dir();
  const auto config = dir / "config.json";
  {
    std::ofstream out(config);
    out << R"({"world": {"query_count": 16},
               "train": {"steps": 8, "prompt_batch": 8, "seed": 3}})";
  }
  const auto world = dir / "world.json";
  auto r = run("world gen --config " + config.string() + " --seed 3 --out " +
               world.string());
  REQUIRE(r.exit_code == 0);

  const auto stats = dir / "stats.jsonl";
  const auto policy = dir / "policy.json";
  r = run("train --world " + world.string() + " --config " + config.string() +
          " --stats-out " + stats.string() + " --policy-out " +
          policy.string());
  REQUIRE(r.exit_code == 0);
  CHECK(fs::file_size(stats) > 0);

  const auto report = dir / "eval.json";
  r = run("eval --world " + world.string() + " --policy " + policy.string() +
          " --config " + config.string() + " --k 8 --out " + report.string());
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("fold_rate") != std::string::npos);
  CHECK(r.output.find("cost_ratio_vs_vanilla") != std::string::npos);
}
