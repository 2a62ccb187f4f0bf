#include "incgraph/graphmat.hpp"

#include <cmath>
#include <string>

#include "incgraph/errors.hpp"

namespace incgraph {

namespace {

VectorXd clamped_degrees(const VectorXd& sums) {
  return sums.cwiseMax(1.0);
}

VectorXd pow_vec(const VectorXd& v, double e) {
  return v.array().pow(e).matrix();
}

// U * diag(s^gamma) restricted to one row.
Eigen::RowVectorXd scaled_row(const MatrixXd& basis, const VectorXd& scale,
                              Index r) {
  return basis.row(r).cwiseProduct(scale.transpose());
}

VectorXd frequency_scale(const VectorXd& singular, double gamma) {
  VectorXd scale(singular.size());
  for (Index j = 0; j < singular.size(); ++j) {
    const double s = singular(j);
    if (s < 0.0) {
      throw DegenerateInputError("frequency_embed: negative singular value");
    }
    if (s == 0.0) {
      if (gamma <= 0.0) {
        throw DegenerateInputError(
            "frequency_embed: zero singular value with gamma <= 0");
      }
      scale(j) = 0.0;
    } else {
      scale(j) = std::pow(s, gamma);
    }
  }
  return scale;
}

void expect_shape(const FactoredMatrix& f, Index rows, Index cols,
                  const char* name) {
  if (f.rows() != rows || f.cols() != cols) {
    throw DimensionError(std::string("factorization ") + name + " is " +
                         std::to_string(f.rows()) + "x" +
                         std::to_string(f.cols()) + ", expected " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  }
}

}  // namespace

DegreeScalers DegreeScalers::from_matrix(const SparseMatrix& r, double alpha) {
  VectorXd rows = VectorXd::Zero(r.rows());
  VectorXd cols = VectorXd::Zero(r.cols());
  for (Index c = 0; c < r.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(r, c); it; ++it) {
      rows(it.row()) += it.value();
      cols(it.col()) += it.value();
    }
  }
  return {clamped_degrees(rows), clamped_degrees(cols), alpha};
}

VectorXd DegreeScalers::user_factors() const { return pow_vec(user_deg, -alpha); }
VectorXd DegreeScalers::item_factors() const { return pow_vec(item_deg, -alpha); }
double DegreeScalers::user_factor(Index u) const {
  return std::pow(user_deg(u), -alpha);
}
double DegreeScalers::item_factor(Index i) const {
  return std::pow(item_deg(i), -alpha);
}
VectorXd DegreeScalers::item_multipliers() const {
  return pow_vec(item_deg, alpha);
}

SparseMatrix normalize(const SparseMatrix& r, const DegreeScalers& scalers) {
  if (scalers.user_deg.size() != r.rows() ||
      scalers.item_deg.size() != r.cols()) {
    throw DimensionError("normalize: scaler lengths do not match matrix");
  }
  const VectorXd fu = scalers.user_factors();
  const VectorXd fi = scalers.item_factors();
  SparseMatrix out = r;
  for (Index c = 0; c < out.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(out, c); it; ++it) {
      it.valueRef() *= fu(it.row()) * fi(it.col());
    }
  }
  return out;
}

MatrixXd denormalize(const MatrixXd& rhat, const DegreeScalers& scalers) {
  if (scalers.user_deg.size() != rhat.rows() ||
      scalers.item_deg.size() != rhat.cols()) {
    throw DimensionError("denormalize: scaler lengths do not match matrix");
  }
  return pow_vec(scalers.user_deg, scalers.alpha).asDiagonal() * rhat *
         pow_vec(scalers.item_deg, scalers.alpha).asDiagonal();
}

FrequencyEmbedding frequency_embed(const FactoredMatrix& f, double gamma) {
  const VectorXd scale = frequency_scale(f.singular, gamma);
  return {f.left * scale.asDiagonal(), f.right * scale.asDiagonal()};
}

DerivedMatrices derive_matrices(const SparseMatrix& r, const SparseMatrix& g,
                                const SparseMatrix& h) {
  if (g.rows() != r.rows() || h.rows() != r.cols()) {
    throw DimensionError("derive_matrices: attribute matrices do not conform");
  }
  SparseMatrix gt_r = SparseMatrix(g.transpose()) * r;
  SparseMatrix r_h = r * h;
  SparseMatrix gt_r_h = gt_r * h;
  gt_r.makeCompressed();
  r_h.makeCompressed();
  gt_r_h.makeCompressed();
  return {std::move(gt_r), std::move(r_h), std::move(gt_r_h)};
}

void TableFactorizations::check_shapes() const {
  const Index m = user_item.rows();
  const Index n = user_item.cols();
  const Index p = user_attr.cols();
  const Index q = item_attr.cols();
  expect_shape(user_attr, m, p, "G");
  expect_shape(item_attr, n, q, "H");
  expect_shape(user_attr_item, p, n, "G^T R");
  expect_shape(user_item_attr, m, q, "R H");
  expect_shape(user_attr_item_attr, p, q, "G^T R H");
}

PathEmbedding path_embedding(const TableFactorizations& f, int path,
                             double gamma) {
  auto embed = [gamma](const FactoredMatrix& fm) {
    return frequency_embed(fm, gamma);
  };
  switch (path) {
    case 1: {
      auto e = embed(f.user_item);
      return {std::move(e.left), std::move(e.right)};
    }
    case 2: {
      auto g = embed(f.user_attr);
      auto gr = embed(f.user_attr_item);
      return {g.left * g.right.transpose(), gr.right * gr.left.transpose()};
    }
    case 3: {
      auto rh = embed(f.user_item_attr);
      auto h = embed(f.item_attr);
      return {rh.left * rh.right.transpose(), h.left * h.right.transpose()};
    }
    case 4: {
      auto p2 = path_embedding(f, 2, gamma);
      auto p3 = path_embedding(f, 3, gamma);
      auto grh = embed(f.user_attr_item_attr);
      return {p2.user * grh.left, p3.item * grh.right};
    }
    case 5: {
      auto p2 = path_embedding(f, 2, gamma);
      auto p3 = path_embedding(f, 3, gamma);
      auto grh = embed(f.user_attr_item_attr);
      return {p3.user * grh.right, p2.item * grh.left};
    }
    default:
      throw DimensionError("path_embedding: path must be 1..5, got " +
                           std::to_string(path));
  }
}

VectorXd user_embedding_row(const TableFactorizations& f,
                            const PathWeights& weights, double gamma, Index u) {
  const Index k1 = f.user_item.rank_budget();
  const Index p = f.user_attr_width();
  const Index q = f.item_attr_width();
  VectorXd row = VectorXd::Zero(k1 + p + q);
  if (weights.user_item != 0.0) {
    const VectorXd s = frequency_scale(f.user_item.singular, gamma);
    row.head(k1) =
        weights.user_item * scaled_row(f.user_item.left, s, u).transpose();
  }
  if (weights.via_user_attr != 0.0 && p > 0) {
    const VectorXd s = frequency_scale(f.user_attr.singular, gamma);
    const VectorXd s2 = s.cwiseProduct(s);
    row.segment(k1, p) = weights.via_user_attr * f.user_attr.right *
                         scaled_row(f.user_attr.left, s2, u).transpose();
  }
  if (weights.via_item_attr != 0.0 && q > 0) {
    const VectorXd s = frequency_scale(f.user_item_attr.singular, gamma);
    const VectorXd s2 = s.cwiseProduct(s);
    row.tail(q) = weights.via_item_attr * f.user_item_attr.right *
                  scaled_row(f.user_item_attr.left, s2, u).transpose();
  }
  return row;
}

MatrixXd item_embedding_matrix(const TableFactorizations& f,
                               const PathWeights& weights, double gamma) {
  const Index n = f.items();
  const Index k1 = f.user_item.rank_budget();
  const Index p = f.user_attr_width();
  const Index q = f.item_attr_width();
  MatrixXd out = MatrixXd::Zero(n, k1 + p + q);
  if (weights.user_item != 0.0) {
    const VectorXd s = frequency_scale(f.user_item.singular, gamma);
    out.leftCols(k1) = weights.user_item * f.user_item.right * s.asDiagonal();
  }
  if (weights.via_user_attr != 0.0 && p > 0) {
    const VectorXd s = frequency_scale(f.user_attr_item.singular, gamma);
    out.middleCols(k1, p) = weights.via_user_attr * f.user_attr_item.right *
                            s.cwiseProduct(s).asDiagonal() *
                            f.user_attr_item.left.transpose();
  }
  if (weights.via_item_attr != 0.0 && q > 0) {
    const VectorXd s = frequency_scale(f.item_attr.singular, gamma);
    out.rightCols(q) = weights.via_item_attr * f.item_attr.left *
                       s.cwiseProduct(s).asDiagonal() *
                       f.item_attr.right.transpose();
  }
  return out;
}

MatrixXd user_embedding_matrix(const TableFactorizations& f,
                               const PathWeights& weights, double gamma) {
  const Index m = f.users();
  const Index k1 = f.user_item.rank_budget();
  const Index p = f.user_attr_width();
  const Index q = f.item_attr_width();
  MatrixXd out = MatrixXd::Zero(m, k1 + p + q);
  if (weights.user_item != 0.0) {
    const VectorXd s = frequency_scale(f.user_item.singular, gamma);
    out.leftCols(k1) = weights.user_item * f.user_item.left * s.asDiagonal();
  }
  if (weights.via_user_attr != 0.0 && p > 0) {
    const VectorXd s = frequency_scale(f.user_attr.singular, gamma);
    out.middleCols(k1, p) = weights.via_user_attr * f.user_attr.left *
                            s.cwiseProduct(s).asDiagonal() *
                            f.user_attr.right.transpose();
  }
  if (weights.via_item_attr != 0.0 && q > 0) {
    const VectorXd s = frequency_scale(f.user_item_attr.singular, gamma);
    out.rightCols(q) = weights.via_item_attr * f.user_item_attr.left *
                       s.cwiseProduct(s).asDiagonal() *
                       f.user_item_attr.right.transpose();
  }
  return out;
}

EmbeddingBundle build_path_embeddings(const TableFactorizations& f,
                                      const PathWeights& weights, double gamma,
                                      DegreeScalers scalers) {
  f.check_shapes();
  if (scalers.user_deg.size() != f.users() ||
      scalers.item_deg.size() != f.items()) {
    throw DimensionError("build_path_embeddings: scalers do not match R");
  }
  EmbeddingBundle bundle;
  bundle.user_emb = user_embedding_matrix(f, weights, gamma);
  bundle.item_emb = item_embedding_matrix(f, weights, gamma);
  bundle.path_weights = weights;
  bundle.gamma = gamma;
  bundle.factorizations = f;
  bundle.scalers = std::move(scalers);
  return bundle;
}

}  // namespace incgraph
