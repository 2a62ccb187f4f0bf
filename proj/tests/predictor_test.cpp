#include <gtest/gtest.h>

#include <cmath>

#include "incgraph/errors.hpp"
#include "incgraph/predictor.hpp"
#include "support/oracles.hpp"

using namespace incgraph;

namespace {

// Direct evaluation of the two-step attention with explicit loops.
VectorXd attention_oracle(const MatrixXd& s, const VectorXd& e) {
  const Index k = s.rows(), b = s.cols();
  const double rk = std::sqrt(static_cast<double>(k));
  MatrixXd gram(b, b);
  for (Index x = 0; x < b; ++x)
    for (Index y = 0; y < b; ++y) {
      double acc = 0;
      for (Index r = 0; r < k; ++r) acc += s(r, x) * s(r, y);
      gram(x, y) = acc / rk;
    }
  MatrixXd sp = MatrixXd::Zero(b, k);  // b x k
  for (Index x = 0; x < b; ++x)
    for (Index r = 0; r < k; ++r)
      for (Index y = 0; y < b; ++y) sp(x, r) += gram(x, y) * s(r, y);
  VectorXd w = VectorXd::Zero(b);
  for (Index x = 0; x < b; ++x)
    for (Index r = 0; r < k; ++r) w(x) += sp(x, r) * e(r) / rk;
  VectorXd out = VectorXd::Zero(k);
  for (Index r = 0; r < k; ++r)
    for (Index x = 0; x < b; ++x) out(r) += sp(x, r) * w(x);
  return out;
}

}  // namespace

TEST(LongTerm, Examples) {
  std::deque<VectorXd> snaps{VectorXd::Unit(3, 0), VectorXd::Unit(3, 1), VectorXd::Unit(3, 2)};
  EXPECT_EQ(long_term(snaps, 1, VectorXd::Zero(3)), VectorXd::Unit(3, 0));
  EXPECT_TRUE(long_term(snaps, 2, VectorXd::Zero(3)).isApprox(
      VectorXd::Unit(3, 0) + 0.5 * VectorXd::Unit(3, 1)));
  const VectorXd three = long_term(snaps, 3, VectorXd::Zero(3));
  EXPECT_NEAR(three(0), 1.0, 1e-15);
  EXPECT_NEAR(three(1), 0.5, 1e-15);
  EXPECT_NEAR(three(2), 1.0 / 3.0, 1e-15);
  // Fewer snapshots than a: sum over what is there.
  EXPECT_TRUE(long_term(snaps, 10, VectorXd::Zero(3)).isApprox(three));
  const VectorXd fallback = VectorXd::Constant(3, 7.0);
  EXPECT_EQ(long_term({}, 3, fallback), fallback);
}

TEST(ShortTerm, ClosedFormSingleItem) {
  const VectorXd v = 2.0 * VectorXd::Unit(4, 0);
  const VectorXd got = short_term(v, VectorXd::Unit(4, 0));
  EXPECT_TRUE(got.isApprox(8.0 * VectorXd::Unit(4, 0)));
  oracle::Rng rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const VectorXd w = rng.vector(5), e = rng.vector(5);
    const double k = 5;
    const VectorXd want = w * std::pow(w.norm(), 4) * w.dot(e) / std::pow(k, 1.5);
    EXPECT_LT((short_term(w, e) - want).norm(), 1e-10 * (1 + want.norm()));
  }
}

TEST(ShortTerm, MatchesDirectEvaluation) {
  oracle::Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const MatrixXd s = rng.matrix(6, 3);
    const VectorXd e = rng.vector(6);
    EXPECT_LT((short_term(s, e) - attention_oracle(s, e)).norm(), 1e-10);
  }
}

TEST(ShortTerm, DegenerateInputs) {
  EXPECT_EQ(short_term(MatrixXd::Zero(4, 2), VectorXd::Ones(4)).norm(), 0.0);
  EXPECT_EQ(short_term(MatrixXd(4, 0), VectorXd::Ones(4)).norm(), 0.0);
  EXPECT_NEAR(short_term(VectorXd::Unit(3, 0), VectorXd::Unit(3, 1)).norm(), 0.0, 1e-15);
  EXPECT_THROW(short_term(MatrixXd::Ones(3, 2), VectorXd::Ones(4)), DimensionError);
}

TEST(Fuse, Endpoints) {
  oracle::Rng rng(43);
  const VectorXd s = rng.vector(4), l = rng.vector(4);
  EXPECT_EQ(fuse(s, l, 0.0).e, l);
  EXPECT_EQ(fuse(s, l, 1.0).e, s);
  const auto p = fuse(s, l, 0.74);
  for (Index j = 0; j < 4; ++j) EXPECT_NEAR(p.e(j), 0.74 * s(j) + 0.26 * l(j), 1e-12);
  EXPECT_THROW(fuse(VectorXd::Ones(3), l, 0.5), DimensionError);
}

TEST(ScoreItems, TiesAndSimpleCases) {
  const MatrixXd emb = MatrixXd::Identity(4, 4);
  const auto zero = score_items(emb, VectorXd::Zero(4), VectorXd());
  for (Index j = 0; j < 4; ++j) EXPECT_EQ(zero[static_cast<std::size_t>(j)].item, j);
  const auto third = score_items(emb, VectorXd::Unit(4, 2), VectorXd::Ones(4));
  EXPECT_EQ(third.front().item, 2);
  EXPECT_THROW(score_items(emb, VectorXd::Ones(3), VectorXd()), DimensionError);
}

TEST(ScoreItems, DegreeMultipliersMatchBruteForce) {
  oracle::Rng rng(44);
  const MatrixXd emb = rng.matrix(4, 3);
  const VectorXd e = rng.vector(3);
  VectorXd deg(4);
  deg << 1, 2, 3, 4;  // alpha = 1 => multipliers are the degrees
  std::vector<double> scores;
  for (Index j = 0; j < 4; ++j) scores.push_back(emb.row(j).dot(e) * deg(j));
  const auto want = oracle::brute_force_ranking(scores);
  const auto got = score_items(emb, e, deg);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(got[j].item, want[j]);
  EXPECT_EQ(top_k_items(emb, e, deg, 2), (std::vector<Index>{want[0], want[1]}));
  EXPECT_EQ(rank_of(emb, e, deg, want[2]), 3u);
}

TEST(ScoreItems, Exclusion) {
  const MatrixXd emb = MatrixXd::Identity(3, 3);
  const std::unordered_set<Index> ex{0};
  const auto got = score_items(emb, VectorXd::Unit(3, 0), VectorXd(), &ex);
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0].item, 1);
}

TEST(UserHistory, BoundedMostRecentFirst) {
  UserHistory h(2, 3);
  for (int j = 0; j < 5; ++j) h.record(j, j, VectorXd::Constant(1, j));
  ASSERT_EQ(h.snapshots().size(), 2u);
  EXPECT_EQ(h.snapshots()[0](0), 4.0);
  ASSERT_EQ(h.recent_items().size(), 3u);
  EXPECT_EQ(h.recent_items()[0].item, 4);
  EXPECT_EQ(h.recent_items()[2].item, 2);
}

TEST(UserPreference, Pipeline) {
  oracle::Rng rng(45);
  const MatrixXd items = rng.matrix(5, 3);
  UserHistory h(2, 2);
  h.record(1, 1.0, rng.vector(3));
  h.record(3, 2.0, rng.vector(3));
  auto weight = [](double t) { return 0.5 * t; };
  const auto p = user_preference(&h, rng.vector(3), items, weight, {2, 2, 0.3});
  const VectorXd e_long = h.snapshots()[0] + 0.5 * h.snapshots()[1];
  MatrixXd s(3, 2);
  s.col(0) = items.row(3).transpose() * 1.0;
  s.col(1) = items.row(1).transpose() * 0.5;
  const VectorXd e_short = attention_oracle(s, e_long);
  EXPECT_LT((p.e - (0.3 * e_short + 0.7 * e_long)).norm(), 1e-10);

  const VectorXd row = rng.vector(3);
  EXPECT_EQ(user_preference(nullptr, row, items, weight, {2, 2, 0.3}).e_long, row);
}
