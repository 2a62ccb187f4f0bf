#include "incgraph/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "incgraph/errors.hpp"
#include "incgraph/kernels.hpp"

namespace incgraph {

UserHistory::UserHistory(std::size_t max_snapshots, std::size_t max_items)
    : max_snapshots_(max_snapshots), max_items_(max_items) {}

void UserHistory::record(Index item, double timestamp, VectorXd user_embedding) {
  record_snapshot(std::move(user_embedding));
  record_item(item, timestamp);
}

void UserHistory::record_item(Index item, double timestamp) {
  if (max_items_ == 0) return;
  items_.push_front({item, timestamp});
  if (items_.size() > max_items_) items_.pop_back();
}

void UserHistory::record_snapshot(VectorXd user_embedding) {
  if (max_snapshots_ == 0) return;
  snapshots_.push_front(std::move(user_embedding));
  if (snapshots_.size() > max_snapshots_) snapshots_.pop_back();
}

VectorXd long_term(const std::deque<VectorXd>& snapshots, std::size_t a,
                   const VectorXd& fallback) {
  if (snapshots.empty() || a == 0) return fallback;
  const std::size_t count = std::min(a, snapshots.size());
  VectorXd out = VectorXd::Zero(snapshots.front().size());
  for (std::size_t r = 0; r < count; ++r) {
    if (snapshots[r].size() != out.size()) {
      throw DimensionError("long_term: snapshot widths differ");
    }
    out += snapshots[r] / static_cast<double>(r + 1);
  }
  return out;
}

VectorXd short_term(const MatrixXd& decayed_items, const VectorXd& e_long) {
  const Index k = decayed_items.rows();
  if (decayed_items.cols() == 0) return VectorXd::Zero(e_long.size());
  if (k != e_long.size()) {
    throw DimensionError("short_term: item embedding width " + std::to_string(k) +
                         " differs from e_long width " +
                         std::to_string(e_long.size()));
  }
  const double root_k = std::sqrt(static_cast<double>(k));
  const MatrixXd& s = decayed_items;
  const MatrixXd attn = (s.transpose() * s) / root_k;     // b x b
  const MatrixXd s_prime = attn * s.transpose();          // b x k
  const VectorXd weights = (s_prime * e_long) / root_k;   // b
  return s_prime.transpose() * weights;
}

PreferenceVector fuse(VectorXd e_short, VectorXd e_long, double lambda) {
  if (e_short.size() != e_long.size()) {
    throw DimensionError("fuse: width mismatch");
  }
  PreferenceVector p;
  p.e = lambda * e_short + (1.0 - lambda) * e_long;
  p.e_short = std::move(e_short);
  p.e_long = std::move(e_long);
  p.lambda = lambda;
  return p;
}

MatrixXd decayed_item_matrix(const std::deque<RecentItem>& items, std::size_t b,
                             const MatrixXd& item_emb,
                             const std::function<double(double)>& weight) {
  const std::size_t count = std::min(b, items.size());
  MatrixXd s(item_emb.cols(), static_cast<Index>(count));
  for (std::size_t c = 0; c < count; ++c) {
    const auto& it = items[c];
    s.col(static_cast<Index>(c)) =
        item_emb.row(it.item).transpose() * weight(it.timestamp);
  }
  return s;
}

namespace {

VectorXd checked_scores(const MatrixXd& item_emb, const VectorXd& e,
                        const VectorXd& multipliers) {
  if (item_emb.cols() != e.size()) {
    throw DimensionError("score_items: preference width " + std::to_string(e.size()) +
                         " differs from item embedding width " +
                         std::to_string(item_emb.cols()));
  }
  return kernels::score_rows(item_emb, e, multipliers);
}

bool ranks_before(const VectorXd& scores, Index a, Index b) {
  return scores(a) > scores(b) || (scores(a) == scores(b) && a < b);
}

bool excluded(const std::unordered_set<Index>* exclude, Index i) {
  return exclude && exclude->count(i);
}

}  // namespace

std::vector<ScoredItem> score_items(const MatrixXd& item_emb, const VectorXd& e,
                                    const VectorXd& multipliers,
                                    const std::unordered_set<Index>* exclude) {
  const VectorXd scores = checked_scores(item_emb, e, multipliers);
  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(scores.size()));
  for (Index i = 0; i < scores.size(); ++i) {
    if (!excluded(exclude, i)) order.push_back(i);
  }
  std::sort(order.begin(), order.end(),
            [&](Index a, Index b) { return ranks_before(scores, a, b); });
  std::vector<ScoredItem> out;
  out.reserve(order.size());
  for (Index i : order) out.push_back({i, scores(i)});
  return out;
}

std::vector<Index> top_k_items(const MatrixXd& item_emb, const VectorXd& e,
                               const VectorXd& multipliers, std::size_t k,
                               const std::unordered_set<Index>* exclude) {
  const VectorXd scores = checked_scores(item_emb, e, multipliers);
  std::vector<Index> order;
  for (Index i = 0; i < scores.size(); ++i) {
    if (!excluded(exclude, i)) order.push_back(i);
  }
  const std::size_t keep = std::min(k, order.size());
  auto cmp = [&](Index a, Index b) { return ranks_before(scores, a, b); };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep),
                    order.end(), cmp);
  order.resize(keep);
  return order;
}

std::size_t rank_of(const MatrixXd& item_emb, const VectorXd& e,
                    const VectorXd& multipliers, Index target,
                    const std::unordered_set<Index>* exclude) {
  const VectorXd scores = checked_scores(item_emb, e, multipliers);
  if (target < 0 || target >= scores.size()) {
    throw DimensionError("rank_of: target item out of range");
  }
  std::size_t rank = 1;
  for (Index i = 0; i < scores.size(); ++i) {
    if (i != target && !excluded(exclude, i) && ranks_before(scores, i, target)) ++rank;
  }
  return rank;
}

PreferenceVector user_preference(const UserHistory* history,
                                 const VectorXd& current_row,
                                 const MatrixXd& item_emb,
                                 const std::function<double(double)>& weight,
                                 const PreferenceParams& params) {
  if (!history) {
    return fuse(VectorXd::Zero(current_row.size()), current_row, params.lambda);
  }
  VectorXd e_long = long_term(history->snapshots(), params.a, current_row);
  VectorXd e_short = VectorXd::Zero(e_long.size());
  if (params.lambda != 0.0) {
    const MatrixXd s =
        decayed_item_matrix(history->recent_items(), params.b, item_emb, weight);
    e_short = short_term(s, e_long);
  }
  return fuse(std::move(e_short), std::move(e_long), params.lambda);
}

}  // namespace incgraph
