#pragma once

// Grid search over config keys. Points are scored on the validation split;
// the winner is re-run on the test split.
//
// Search-space file: one key per line, candidate values separated by
// whitespace, e.g.
//   beta1 = 15 30 60
//   alpha = 1.0 2.0

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "incgraph/config.hpp"
#include "incgraph/events.hpp"
#include "incgraph/report.hpp"

namespace incgraph {

struct SearchSpace {
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;

  std::size_t size() const;
};

SearchSpace parse_search_space(const std::string& text);
SearchSpace load_search_space(const std::filesystem::path& path);

using Assignment = std::vector<std::pair<std::string, std::string>>;

/// Cartesian product in file order; the last axis varies fastest.
std::vector<Assignment> grid_points(const SearchSpace& space);

std::string assignment_text(const Assignment& a);

struct LeaderboardEntry {
  std::size_t index;
  Assignment assignment;
  double objective;
};

struct TuneResult {
  RunConfig best;
  std::size_t best_index = 0;
  std::vector<LeaderboardEntry> leaderboard;  // grid order
  EvalReport final_report;                    // best config on the test split
};

/// `objective` names a report metric; empty picks the task's headline
/// metric. Ties keep the earliest point. `jobs` bounds worker threads.
TuneResult grid_search(const RunConfig& base, const Dataset& data,
                       const SearchSpace& space, const std::string& objective,
                       std::size_t jobs);

/// Leaderboard and final metrics as one report.
EvalReport tune_report(const TuneResult& result, const RunConfig& base);

}  // namespace incgraph
