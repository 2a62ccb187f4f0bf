#include <gtest/gtest.h>

#include <cmath>

#include "incgraph/errors.hpp"
#include "incgraph/graphmat.hpp"
#include "support/oracles.hpp"

using namespace incgraph;

namespace {

SparseMatrix sparse(const MatrixXd& a) { return a.sparseView(); }

DegreeScalers scalers(std::vector<double> u, std::vector<double> i, double alpha) {
  DegreeScalers s;
  s.user_deg = Eigen::Map<VectorXd>(u.data(), static_cast<Index>(u.size()));
  s.item_deg = Eigen::Map<VectorXd>(i.data(), static_cast<Index>(i.size()));
  s.alpha = alpha;
  return s;
}

// U S^gamma with explicit loops.
MatrixXd powered(const MatrixXd& basis, const VectorXd& s, double gamma) {
  MatrixXd out = basis;
  for (Index c = 0; c < basis.cols(); ++c) {
    const double f = s(c) == 0.0 ? 0.0 : std::pow(s(c), gamma);
    for (Index r = 0; r < basis.rows(); ++r) out(r, c) = basis(r, c) * f;
  }
  return out;
}

TableFactorizations factorize(const MatrixXd& r, const MatrixXd& g, const MatrixXd& h,
                              std::array<Index, 6> k) {
  const DerivedMatrices d = derive_matrices(sparse(r), sparse(g), sparse(h));
  return {truncated_svd(r, k[0]),
          truncated_svd(g, k[1]),
          truncated_svd(h, k[2]),
          truncated_svd(MatrixXd(d.user_attr_item), k[3]),
          truncated_svd(MatrixXd(d.user_item_attr), k[4]),
          truncated_svd(MatrixXd(d.user_attr_item_attr), k[5])};
}

DegreeScalers unit_scalers(const TableFactorizations& f) {
  return {VectorXd::Ones(f.users()), VectorXd::Ones(f.items()), 0.0};
}

}  // namespace

TEST(Normalize, Examples) {
  MatrixXd r(2, 2);
  r << 1, 1, 0, 2;
  const SparseMatrix rs = sparse(r);
  EXPECT_TRUE(MatrixXd(normalize(rs, DegreeScalers::from_matrix(rs, 0.0))).isApprox(r));

  const MatrixXd one = MatrixXd::Constant(1, 1, 4.0);
  const auto s1 = DegreeScalers::from_matrix(sparse(one), 2.0);
  EXPECT_DOUBLE_EQ(MatrixXd(normalize(sparse(one), s1))(0, 0), 0.015625);
  EXPECT_DOUBLE_EQ(denormalize(MatrixXd::Constant(1, 1, 0.015625), s1)(0, 0), 4.0);

  const MatrixXd got = MatrixXd(normalize(rs, DegreeScalers::from_matrix(rs, 1.0)));
  EXPECT_NEAR(got(0, 0), 0.5, 1e-12);
  EXPECT_NEAR(got(0, 1), 1.0 / 6.0, 1e-12);
  EXPECT_NEAR(got(1, 0), 0.0, 1e-12);
  EXPECT_NEAR(got(1, 1), 1.0 / 3.0, 1e-12);
  EXPECT_EQ(normalize(rs, DegreeScalers::from_matrix(rs, 1.0)).nonZeros(), rs.nonZeros());
}

TEST(Normalize, DegreesClampedToOne) {
  MatrixXd r = MatrixXd::Zero(2, 2);
  r(0, 0) = 0.25;
  const auto s = DegreeScalers::from_matrix(sparse(r), 1.0);
  EXPECT_EQ(s.user_deg(0), 1.0);
  EXPECT_EQ(s.user_deg(1), 1.0);
  EXPECT_EQ(s.item_deg(1), 1.0);
}

TEST(Normalize, ShapeMismatch) {
  const auto s = scalers({1, 1}, {1}, 1.0);
  EXPECT_THROW(normalize(sparse(MatrixXd::Ones(2, 2)), s), DimensionError);
  EXPECT_THROW(denormalize(MatrixXd::Ones(2, 2), s), DimensionError);
}

TEST(FrequencyEmbed, Examples) {
  oracle::Rng rng(21);
  const auto f = truncated_svd(rng.matrix(5, 4), 3);
  const auto half = frequency_embed(f, 0.5);
  EXPECT_LT(oracle::frobenius(half.left * half.right.transpose() - oracle::materialize(f)), 1e-10);

  FactoredMatrix g;
  g.left = MatrixXd::Identity(2, 2);
  g.right = MatrixXd::Identity(2, 2);
  g.singular = VectorXd(2);
  g.singular << 4, 1;
  const auto q = frequency_embed(g, 0.25);
  EXPECT_NEAR(q.left(0, 0), std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(q.left(1, 1), 1.0, 1e-12);
  EXPECT_NEAR(std::pow(4.0, 0.5) / 4.0, 0.5, 1e-12);

  EXPECT_EQ(frequency_embed(f, 0.0).left, f.left);
}

TEST(FrequencyEmbed, ZeroSingularValue) {
  const auto z = FactoredMatrix::zeros(3, 3, 2);
  const auto e = frequency_embed(z, 0.3);
  EXPECT_EQ(e.left.norm(), 0.0);
  EXPECT_THROW(frequency_embed(z, 0.0), DegenerateInputError);
}

TEST(FrequencyEmbed, AttenuationDecreasingForSmallGamma) {
  for (double gamma : {0.1, 0.2, 0.3, 0.45}) {
    double prev = std::numeric_limits<double>::infinity();
    for (double s = 1.01; s < 100; s *= 1.3) {
      const double ratio = std::pow(s, 2 * gamma) / s;
      EXPECT_LT(ratio, prev);
      prev = ratio;
    }
  }
}

TEST(DeriveMatrices, Examples) {
  oracle::Rng rng(22);
  const MatrixXd r = rng.matrix(3, 4);
  const auto id = derive_matrices(sparse(r), sparse(MatrixXd::Identity(3, 3)),
                                  sparse(MatrixXd::Identity(4, 4)));
  EXPECT_TRUE(MatrixXd(id.user_attr_item).isApprox(r));
  EXPECT_TRUE(MatrixXd(id.user_item_attr).isApprox(r));
  EXPECT_TRUE(MatrixXd(id.user_attr_item_attr).isApprox(r));

  const auto empty = derive_matrices(sparse(r), SparseMatrix(3, 0), sparse(MatrixXd::Identity(4, 4)));
  EXPECT_EQ(empty.user_attr_item.size(), 0);
  EXPECT_EQ(empty.user_attr_item_attr.size(), 0);

  MatrixXd r2(2, 2), g(2, 1), h(2, 1);
  r2 << 1, 0, 0, 2;
  g << 1, 1;
  h << 1, 0;
  const auto d = derive_matrices(sparse(r2), sparse(g), sparse(h));
  EXPECT_EQ(MatrixXd(d.user_attr_item), (MatrixXd(1, 2) << 1, 2).finished());
  EXPECT_EQ(MatrixXd(d.user_item_attr), (MatrixXd(2, 1) << 1, 0).finished());
  EXPECT_EQ(MatrixXd(d.user_attr_item_attr)(0, 0), 1.0);

  EXPECT_THROW(derive_matrices(sparse(r2), sparse(MatrixXd::Ones(3, 1)), sparse(h)),
               DimensionError);
}

TEST(PathEmbeddings, ToyScoresMatchMaterializedPaths) {
  MatrixXd r(3, 2), g(3, 1), h(2, 1);
  r << 1, 0, 0.5, 2, 0, 1;
  g << 1, 0, 1;
  h << 0, 1;
  const auto f = factorize(r, g, h, {2, 1, 1, 1, 1, 1});
  const PathWeights w{0.7, 1.3, 2.0};
  const double gamma = 0.3;
  const auto bundle = build_path_embeddings(f, w, gamma, unit_scalers(f));

  // Paths 1-3 rebuilt from explicitly powered factors.
  auto pw = [&](const FactoredMatrix& fm) {
    return std::pair{powered(fm.left, fm.singular, gamma), powered(fm.right, fm.singular, gamma)};
  };
  const auto [eu1, ei1] = pw(f.user_item);
  const auto [eu2, eg2] = pw(f.user_attr);
  const auto [eh3i, eh3] = pw(f.item_attr);
  const auto [eg4, ei4] = pw(f.user_attr_item);
  const auto [eu5, eh5] = pw(f.user_item_attr);
  const MatrixXd want = w.user_item * w.user_item * eu1 * ei1.transpose() +
                        w.via_user_attr * w.via_user_attr * (eu2 * eg2.transpose()) *
                            (ei4 * eg4.transpose()).transpose() +
                        w.via_item_attr * w.via_item_attr * (eu5 * eh5.transpose()) *
                            (eh3i * eh3.transpose()).transpose();
  const MatrixXd got = bundle.user_emb * bundle.item_emb.transpose();
  EXPECT_LT(oracle::frobenius(got - want), 1e-10);
  EXPECT_EQ(bundle.width(), 2 + 1 + 1);
}

TEST(PathEmbeddings, ZeroWeightPathsVanish) {
  oracle::Rng rng(23);
  const MatrixXd r = rng.matrix(4, 3).cwiseAbs();
  const MatrixXd g = rng.matrix(4, 2).cwiseAbs();
  const MatrixXd h = rng.matrix(3, 2).cwiseAbs();
  const auto f = factorize(r, g, h, {2, 1, 1, 1, 1, 1});
  const auto b = build_path_embeddings(f, {1.5, 0, 0}, 0.5, unit_scalers(f));
  EXPECT_LT(oracle::frobenius(b.user_emb * b.item_emb.transpose() -
                              2.25 * oracle::materialize(f.user_item)),
            1e-10);
}

TEST(PathEmbeddings, WidthWithAttributes) {
  // m=6 users with 3 attribute columns, 4 items with 2, k1=1.
  oracle::Rng rng(24);
  const auto f = factorize(rng.matrix(6, 4).cwiseAbs(), rng.matrix(6, 3).cwiseAbs(),
                           rng.matrix(4, 2).cwiseAbs(), {1, 1, 1, 1, 1, 1});
  const auto b = build_path_embeddings(f, {1, 1, 1}, 0.5, unit_scalers(f));
  EXPECT_EQ(b.user_emb.cols(), 1 + 3 + 2);
  EXPECT_EQ(b.item_emb.cols(), 1 + 3 + 2);
  EXPECT_EQ(b.user_emb.rows(), 6);
}

TEST(PathEmbeddings, RowHelpersAgreeWithBundle) {
  oracle::Rng rng(25);
  const auto f = factorize(rng.matrix(5, 4).cwiseAbs(), rng.matrix(5, 2).cwiseAbs(),
                           rng.matrix(4, 3).cwiseAbs(), {2, 1, 2, 1, 2, 1});
  const PathWeights w{1, 0.5, 2};
  const auto b = build_path_embeddings(f, w, 0.4, unit_scalers(f));
  EXPECT_LT((item_embedding_matrix(f, w, 0.4) - b.item_emb).norm(), 1e-12);
  EXPECT_LT((user_embedding_matrix(f, w, 0.4) - b.user_emb).norm(), 1e-12);
  for (Index u = 0; u < 5; ++u) {
    EXPECT_LT((user_embedding_row(f, w, 0.4, u) - b.user_emb.row(u).transpose()).norm(), 1e-12);
  }
}

TEST(PathEmbeddings, PathsFourAndFiveFollowTheTable) {
  oracle::Rng rng(26);
  const auto f = factorize(rng.matrix(5, 4).cwiseAbs(), rng.matrix(5, 2).cwiseAbs(),
                           rng.matrix(4, 3).cwiseAbs(), {2, 2, 2, 2, 2, 2});
  const double gamma = 0.35;
  auto lp = [&](const FactoredMatrix& fm) { return powered(fm.left, fm.singular, gamma); };
  auto rp = [&](const FactoredMatrix& fm) { return powered(fm.right, fm.singular, gamma); };
  const auto p4 = path_embedding(f, 4, gamma);
  const auto p5 = path_embedding(f, 5, gamma);
  EXPECT_LT((p4.user - lp(f.user_attr) * rp(f.user_attr).transpose() * lp(f.user_attr_item_attr)).norm(), 1e-10);
  EXPECT_LT((p4.item - lp(f.item_attr) * rp(f.item_attr).transpose() * rp(f.user_attr_item_attr)).norm(), 1e-10);
  EXPECT_LT((p5.user - lp(f.user_item_attr) * rp(f.user_item_attr).transpose() * rp(f.user_attr_item_attr)).norm(), 1e-10);
  EXPECT_LT((p5.item - rp(f.user_attr_item) * lp(f.user_attr_item).transpose() * lp(f.user_attr_item_attr)).norm(), 1e-10);
  EXPECT_THROW(path_embedding(f, 6, gamma), DimensionError);
}

TEST(PathEmbeddings, InconsistentShapesRejected) {
  oracle::Rng rng(27);
  auto f = factorize(rng.matrix(5, 4).cwiseAbs(), rng.matrix(5, 2).cwiseAbs(),
                     rng.matrix(4, 3).cwiseAbs(), {2, 1, 1, 1, 1, 1});
  f.user_attr = truncated_svd(rng.matrix(6, 2), 1);
  EXPECT_THROW(build_path_embeddings(f, {1, 1, 1}, 0.5, unit_scalers(f)), DimensionError);
}
