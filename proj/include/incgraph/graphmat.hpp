#pragma once

// Degree normalization, frequency-controlled embeddings and the
// attribute-integrated path embeddings built from six co-occurrence
// factorizations:
//
//   1 user-item            R       (m x n)
//   2 user-attribute       G       (m x p)
//   3 item-attribute       H       (n x q)
//   4 user_attr-item       G^T R   (p x n)
//   5 user-item_attr       R H     (m x q)
//   6 user_attr-item_attr  G^T R H (p x q)
//
// Paths 1-3 are concatenated into the user / item embeddings; paths 4-5 are
// available through path_embedding() but never concatenated.

#include <array>
#include <utility>

#include "incgraph/linalg.hpp"

namespace incgraph {

/// Per-user and per-item degrees (row / column sums of the interaction
/// matrix, clamped to >= 1) with the normalization exponent.
struct DegreeScalers {
  VectorXd user_deg;
  VectorXd item_deg;
  double alpha = 0.0;

  static DegreeScalers from_matrix(const SparseMatrix& r, double alpha);

  /// deg^-alpha, the factor applied to rows / columns of R.
  VectorXd user_factors() const;
  VectorXd item_factors() const;
  double user_factor(Index u) const;
  double item_factor(Index i) const;

  /// deg^alpha per item: the inverse-normalization applied to item scores.
  VectorXd item_multipliers() const;
};

SparseMatrix normalize(const SparseMatrix& r, const DegreeScalers& scalers);
MatrixXd denormalize(const MatrixXd& rhat, const DegreeScalers& scalers);

struct FrequencyEmbedding {
  MatrixXd left;   // U S^gamma
  MatrixXd right;  // V S^gamma
};

/// Throws DegenerateInputError when gamma <= 0 meets a zero singular value.
FrequencyEmbedding frequency_embed(const FactoredMatrix& f, double gamma);

struct DerivedMatrices {
  SparseMatrix user_attr_item;       // G^T R   (p x n)
  SparseMatrix user_item_attr;       // R H     (m x q)
  SparseMatrix user_attr_item_attr;  // G^T R H (p x q)
};

DerivedMatrices derive_matrices(const SparseMatrix& r, const SparseMatrix& g,
                                const SparseMatrix& h);

/// The six factorizations, indexed as in the table above.
struct TableFactorizations {
  FactoredMatrix user_item;
  FactoredMatrix user_attr;
  FactoredMatrix item_attr;
  FactoredMatrix user_attr_item;
  FactoredMatrix user_item_attr;
  FactoredMatrix user_attr_item_attr;

  Index users() const { return user_item.rows(); }
  Index items() const { return user_item.cols(); }
  Index user_attr_width() const { return user_attr.cols(); }
  Index item_attr_width() const { return item_attr.cols(); }

  /// Throws DimensionError unless all six agree on m, n, p, q.
  void check_shapes() const;
};

struct PathWeights {
  double user_item = 1.0;       // alpha_1
  double via_user_attr = 0.0;   // alpha_2
  double via_item_attr = 0.0;   // alpha_3
};

struct PathEmbedding {
  MatrixXd user;
  MatrixXd item;
};

/// Unweighted user / item embedding of path 1..5.
PathEmbedding path_embedding(const TableFactorizations& f, int path,
                             double gamma);

struct EmbeddingBundle {
  MatrixXd user_emb;  // m x (k1 + p + q)
  MatrixXd item_emb;  // n x (k1 + p + q)
  PathWeights path_weights;
  double gamma = 0.5;
  TableFactorizations factorizations;
  DegreeScalers scalers;

  Index width() const { return item_emb.cols(); }
};

EmbeddingBundle build_path_embeddings(const TableFactorizations& f,
                                      const PathWeights& weights, double gamma,
                                      DegreeScalers scalers);

/// Concatenated embedding row of one user, computed without materializing
/// the full user matrix.
VectorXd user_embedding_row(const TableFactorizations& f,
                            const PathWeights& weights, double gamma, Index u);

/// Concatenated item embedding matrix (n x (k1 + p + q)).
MatrixXd item_embedding_matrix(const TableFactorizations& f,
                               const PathWeights& weights, double gamma);

/// Concatenated user embedding matrix (m x (k1 + p + q)).
MatrixXd user_embedding_matrix(const TableFactorizations& f,
                               const PathWeights& weights, double gamma);

}  // namespace incgraph
