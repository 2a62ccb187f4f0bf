#include "incgraph/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <unordered_set>

#include "incgraph/errors.hpp"

namespace incgraph {

SplitEvents chronological_split(std::span<const EventRecord> events,
                                const SplitSpec& spec) {
  if (!(spec.train > 0.0) || spec.valid < 0.0 || spec.test < 0.0 ||
      spec.train + spec.valid + spec.test > 1.0 + 1e-9) {
    throw ConfigError("split fractions must be positive and sum to <= 1");
  }
  const double n = static_cast<double>(events.size());
  auto cut = [&](double frac) {
    return std::min(events.size(), static_cast<std::size_t>(std::floor(frac * n + 1e-9)));
  };
  const std::size_t a = cut(spec.train);
  const std::size_t b = cut(spec.train + spec.valid);
  const std::size_t c = cut(spec.train + spec.valid + spec.test);
  SplitEvents out;
  out.train.assign(events.begin(), events.begin() + static_cast<std::ptrdiff_t>(a));
  out.valid.assign(events.begin() + static_cast<std::ptrdiff_t>(a),
                   events.begin() + static_cast<std::ptrdiff_t>(b));
  out.test.assign(events.begin() + static_cast<std::ptrdiff_t>(b),
                  events.begin() + static_cast<std::ptrdiff_t>(c));
  return out;
}

double recall_at_k(const std::unordered_map<std::string, std::vector<std::string>>& top,
                   const std::unordered_map<std::string, std::vector<std::string>>& truth,
                   std::size_t k) {
  double total = 0.0;
  std::size_t users = 0;
  for (const auto& [user, items] : truth) {
    const std::unordered_set<std::string> want(items.begin(), items.end());
    if (want.empty()) continue;
    ++users;
    auto it = top.find(user);
    if (it == top.end()) continue;
    std::unordered_set<std::string> got;
    const std::size_t limit = std::min(k, it->second.size());
    for (std::size_t j = 0; j < limit; ++j) {
      if (want.count(it->second[j])) got.insert(it->second[j]);
    }
    total += static_cast<double>(got.size()) / static_cast<double>(want.size());
  }
  if (users == 0) throw InputError("recall_at_k: no user has ground truth");
  return total / static_cast<double>(users);
}

RankSummary mrr_and_hit(std::span<const std::size_t> ranks, std::size_t k) {
  if (ranks.empty()) throw InputError("mrr_and_hit: no ranks to summarize");
  RankSummary s;
  s.count = ranks.size();
  for (std::size_t r : ranks) {
    if (r == 0) continue;
    s.mrr += 1.0 / static_cast<double>(r);
    if (r <= k) s.hit += 1.0;
  }
  s.mrr /= static_cast<double>(ranks.size());
  s.hit /= static_cast<double>(ranks.size());
  return s;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InputError("pearson: need two equally sized samples of length >= 2");
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    sxy += (x[j] - mx) * (y[j] - my);
    sxx += (x[j] - mx) * (x[j] - mx);
    syy += (y[j] - my) * (y[j] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t j = 0;
  while (j < order.size()) {
    std::size_t end = j;
    while (end + 1 < order.size() && v[order[end + 1]] == v[order[j]]) ++end;
    const double mean = 0.5 * static_cast<double>(j + end) + 1.0;
    for (std::size_t r = j; r <= end; ++r) ranks[order[r]] = mean;
    j = end + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

std::vector<std::size_t> last_k_ranks(std::span<const EventRecord> history,
                                      std::span<const EventRecord> eval,
                                      std::size_t k) {
  std::unordered_map<std::string, std::deque<std::string>> recent;
  auto push = [&](const EventRecord& e) {
    auto& q = recent[e.user_id];
    auto it = std::find(q.begin(), q.end(), e.item_id);
    if (it != q.end()) q.erase(it);
    q.push_front(e.item_id);
    if (q.size() > k) q.pop_back();
  };
  for (const auto& e : history) push(e);
  std::vector<std::size_t> ranks;
  ranks.reserve(eval.size());
  for (const auto& e : eval) {
    std::size_t rank = 0;
    auto it = recent.find(e.user_id);
    if (it != recent.end()) {
      const auto& q = it->second;
      for (std::size_t j = 0; j < q.size(); ++j) {
        if (q[j] == e.item_id) {
          rank = j + 1;
          break;
        }
      }
    }
    ranks.push_back(rank);
    push(e);
  }
  return ranks;
}

}  // namespace incgraph
