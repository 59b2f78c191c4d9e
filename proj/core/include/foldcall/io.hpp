#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "foldcall/coldstart.hpp"
#include "foldcall/config.hpp"
#include "foldcall/synthworld.hpp"
#include "foldcall/trainer.hpp"
#include "foldcall/types.hpp"

namespace foldcall {

/// Combined configuration document. Absent fields keep their defaults.
struct AppConfig {
  RewardConfig reward;
  TrainConfig train;
  WorldConfig world;
};

/// Parses a JSON config with optional "reward", "train", and "world"
/// sections. Unknown keys are an error; missing ones keep defaults.
AppConfig parse_config(const std::string& json_text);
AppConfig load_config(const std::filesystem::path& path);

// JSONL record streams. Readers throw std::runtime_error naming the
// offending line number on malformed input.
std::vector<RolloutRecord> read_rollout_jsonl(std::istream& in);
std::vector<RolloutRecord> read_rollout_jsonl(const std::filesystem::path& p);
void write_rollout_jsonl(std::ostream& out,
                         std::span<const RolloutRecord> records);

std::vector<GroupProfile> read_profile_jsonl(std::istream& in);
std::vector<GroupProfile> read_profile_jsonl(const std::filesystem::path& p);
void write_profile_jsonl(std::ostream& out,
                         std::span<const GroupProfile> profiles);

void write_demonstration_jsonl(std::ostream& out,
                               std::span<const Demonstration> demos);
std::vector<Demonstration> read_demonstration_jsonl(std::istream& in);

void write_step_stats_jsonl(std::ostream& out,
                            std::span<const StepStats> stats);

std::string world_to_json(const World& world);
World world_from_json(const std::string& text);
World load_world(const std::filesystem::path& path);

std::string policy_to_json(const PolicyParams& policy);
PolicyParams policy_from_json(const std::string& text);
PolicyParams load_policy(const std::filesystem::path& path);

/// Groups records by query_id, preserving first-appearance order.
std::vector<std::vector<RolloutRecord>> group_by_query(
    std::vector<RolloutRecord> records);

/// Writes via a temp file in the same directory plus an atomic rename.
void atomic_write(const std::filesystem::path& path,
                  const std::string& contents);

}  // namespace foldcall
