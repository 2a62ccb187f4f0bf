#pragma once

// Parameter-free preference model on top of engine embeddings: a harmonic
// average of recent user embeddings (long-term), a weight-free
// self-attention + attention pass over decayed recent item embeddings
// (short-term), their convex fusion, and item ranking.

#include <cstddef>
#include <deque>
#include <functional>
#include <optional>
#include <unordered_set>
#include <vector>

#include "incgraph/linalg.hpp"

namespace incgraph {

struct RecentItem {
  Index item;
  double timestamp;
};

/// Per-user memory. Both lists are most-recent-first and bounded.
class UserHistory {
 public:
  UserHistory(std::size_t max_snapshots, std::size_t max_items);

  /// Records an interaction and the user's embedding right after it.
  void record(Index item, double timestamp, VectorXd user_embedding);
  void record_item(Index item, double timestamp);
  void record_snapshot(VectorXd user_embedding);

  const std::deque<VectorXd>& snapshots() const { return snapshots_; }
  const std::deque<RecentItem>& recent_items() const { return items_; }
  bool empty() const { return snapshots_.empty() && items_.empty(); }

 private:
  std::size_t max_snapshots_;
  std::size_t max_items_;
  std::deque<VectorXd> snapshots_;
  std::deque<RecentItem> items_;
};

struct PreferenceVector {
  VectorXd e_long;
  VectorXd e_short;
  VectorXd e;
  double lambda = 0.0;
};

/// sum_{r=1..a} e_u^(r) / r over the available snapshots; `fallback` (the
/// user's current embedding row) when there are none.
VectorXd long_term(const std::deque<VectorXd>& snapshots, std::size_t a,
                   const VectorXd& fallback);

/// S' = (S^T S / sqrt k) S^T, e_short = S'^T (S' e_long / sqrt k), with the
/// decayed item embeddings as the k x b columns of S. Zero when b = 0.
VectorXd short_term(const MatrixXd& decayed_items, const VectorXd& e_long);

PreferenceVector fuse(VectorXd e_short, VectorXd e_long, double lambda);

/// Stacks the current embeddings of the recent items (most recent first),
/// each scaled by weight(timestamp), into a k x b matrix.
MatrixXd decayed_item_matrix(const std::deque<RecentItem>& items, std::size_t b,
                             const MatrixXd& item_emb,
                             const std::function<double(double)>& weight);

struct ScoredItem {
  Index item;
  double score;
};

/// Scores item_emb * e scaled by `multipliers` (deg^alpha, empty = 1),
/// sorted descending with ties by ascending index, excluded items removed.
std::vector<ScoredItem> score_items(const MatrixXd& item_emb, const VectorXd& e,
                                    const VectorXd& multipliers,
                                    const std::unordered_set<Index>* exclude = nullptr);

/// Top-k item indices, same ordering rules as score_items.
std::vector<Index> top_k_items(const MatrixXd& item_emb, const VectorXd& e,
                               const VectorXd& multipliers, std::size_t k,
                               const std::unordered_set<Index>* exclude = nullptr);

/// 1-based rank of `target` under the score_items ordering.
std::size_t rank_of(const MatrixXd& item_emb, const VectorXd& e,
                    const VectorXd& multipliers, Index target,
                    const std::unordered_set<Index>* exclude = nullptr);

struct PreferenceParams {
  std::size_t a = 1;
  std::size_t b = 1;
  double lambda = 0.0;
};

/// Full pipeline for one user: long-term, short-term, fusion.
PreferenceVector user_preference(const UserHistory* history,
                                 const VectorXd& current_row,
                                 const MatrixXd& item_emb,
                                 const std::function<double(double)>& weight,
                                 const PreferenceParams& params);

}  // namespace incgraph
