#pragma once

// Flat key=value run configuration. Every key has a default; unknown keys
// are rejected. Command-line overrides use the same key names.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "incgraph/engine.hpp"
#include "incgraph/graphmat.hpp"

namespace incgraph {

enum class Task { FutureItem, NextInteraction };
enum class RestartKind { Monitor, Time, Count, None };

struct SplitSpec {
  double train = 0.8;
  double valid = 0.1;
  double test = 0.1;
};

struct RunConfig {
  Task task = Task::NextInteraction;
  std::string dataset;

  double alpha = 2.0;
  double gamma = 0.5;
  std::array<Index, 6> ranks{1, 0, 0, 0, 0, 0};
  PathWeights path_weights;
  double beta1 = 1.0;
  bool decay = true;

  RestartKind restart = RestartKind::Monitor;
  double restart_threshold = 35.0;
  double restart_interval = 0.0;
  std::uint64_t restart_count = 0;

  std::size_t a = 1;
  std::size_t b = 1;
  double lambda = 0.0;
  /// false scores with the user's current embedding row only.
  bool pattern_modeller = true;

  SplitSpec split;
  std::string eval_split = "test";
  std::size_t top_k = 10;
  /// "auto" = exclude seen items for future-item only.
  std::string exclude_seen = "auto";
  std::string group_by;  // "", "cold_start" or "user_attr:<col>"

  std::string time_origin = "first";  // first | raw
  bool clamp_out_of_order = false;
  bool online_updates = true;
  bool predict_from_stage_start = false;

  std::size_t study_intervals = 100;
  std::size_t study_max_delta = 10;
  std::vector<double> study_fractions{0.06, 0.08, 0.10};

  std::uint64_t seed = 0;
  std::string trace;
};

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string doc;
};

/// All keys with their defaults and one-line descriptions.
const std::vector<ConfigKey>& config_keys();

/// Applies one key=value; throws ConfigError naming the field on failure.
void set_config_value(RunConfig& cfg, const std::string& key,
                      const std::string& value);

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Re-validates every module constraint; throws ConfigError.
void validate(const RunConfig& cfg);

/// Canonical key=value dump (sorted keys), stable across runs.
std::string to_text(const RunConfig& cfg);

EngineConfig engine_config(const RunConfig& cfg);
RestartPolicy restart_policy(const RunConfig& cfg);
bool excludes_seen(const RunConfig& cfg);

std::string task_name(Task t);

}  // namespace incgraph
