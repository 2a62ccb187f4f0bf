#pragma once

// Chronological splits, ranking metrics and the Last-k baseline.

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "incgraph/config.hpp"
#include "incgraph/events.hpp"

namespace incgraph {

struct SplitEvents {
  std::vector<EventRecord> train;
  std::vector<EventRecord> valid;
  std::vector<EventRecord> test;
};

/// Contiguous split on interaction counts; boundaries are
/// floor(cumulative fraction * N). Input order is kept, so ties stay stable.
SplitEvents chronological_split(std::span<const EventRecord> events,
                                const SplitSpec& spec);

/// Mean over users with non-empty truth of |top ∩ truth| / |truth|.
/// `top` is truncated to k. Users missing from `top` score 0.
double recall_at_k(const std::unordered_map<std::string, std::vector<std::string>>& top,
                   const std::unordered_map<std::string, std::vector<std::string>>& truth,
                   std::size_t k);

struct RankSummary {
  double mrr = 0.0;
  double hit = 0.0;
  std::size_t count = 0;
};

/// Ranks are 1-based; 0 marks a miss (the truth was not ranked at all).
/// Throws InputError on an empty input.
RankSummary mrr_and_hit(std::span<const std::size_t> ranks, std::size_t k);

double pearson(std::span<const double> x, std::span<const double> y);
/// Pearson on average ranks (ties share the mean rank).
double spearman(std::span<const double> x, std::span<const double> y);

/// Replays train then eval events; before each eval event the user's k most
/// recent distinct items (most recent first) form the prediction list.
/// Returns the 1-based rank of the truth in that list, 0 when absent.
std::vector<std::size_t> last_k_ranks(std::span<const EventRecord> history,
                                      std::span<const EventRecord> eval,
                                      std::size_t k);

}  // namespace incgraph
