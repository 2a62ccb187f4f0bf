#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace incgraph {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Sparse real matrix; duplicate triplets are summed on construction.
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Truncated SVD triple U * diag(s) * V^T of an m x n matrix.
///
/// `left` is m x k and `right` is n x k with orthonormal columns right after
/// an offline factorization; `singular` holds k non-negative values sorted
/// non-increasing. k is the rank budget and may exceed the true rank, in
/// which case trailing singular values are zero.
struct FactoredMatrix {
  MatrixXd left;
  VectorXd singular;
  MatrixXd right;

  Index rows() const { return left.rows(); }
  Index cols() const { return right.rows(); }
  Index rank_budget() const { return singular.size(); }

  MatrixXd reconstruct() const;

  /// Factorization of the m x n zero matrix with budget k: identity-column
  /// bases and zero singular values. Requires k <= min(m, n).
  static FactoredMatrix zeros(Index m, Index n, Index k);
};

/// Best rank-k factorization. Column signs are canonicalized so the
/// largest-magnitude entry of each left column is positive.
/// Throws DimensionError if k > min(m, n) and DegenerateInputError for an
/// all-zero matrix.
FactoredMatrix truncated_svd(const SparseMatrix& a, Index k);
FactoredMatrix truncated_svd(const MatrixXd& a, Index k);

/// Full SVD of a small square matrix (the Brand core K). Throws InputError
/// on non-finite entries.
FactoredMatrix small_full_svd(const MatrixXd& k);

/// Factorization of F + w * u * i^T truncated back to F's rank budget.
/// Components of u (resp. i) already inside span(left) (resp. span(right))
/// leave a residual below 1e-12, which is treated as exactly zero.
FactoredMatrix brand_update(const FactoredMatrix& f, const VectorXd& u,
                            const VectorXd& i, double w);

/// U^T U_ref and V^T V_ref of a live factorization against a fixed
/// reference (the monitor's stage snapshot).
struct CrossGram {
  MatrixXd left;
  MatrixXd right;
};

CrossGram cross_grams(const FactoredMatrix& live, const FactoredMatrix& ref);

/// brand_update that also advances `gram` (the cross-Gram of `f` against
/// `ref`) in O(k^3 + (m + n) k) instead of recomputing it.
FactoredMatrix brand_update(const FactoredMatrix& f, const VectorXd& u,
                            const VectorXd& i, double w,
                            const FactoredMatrix& ref, CrossGram& gram);

/// Zero-pads the bases to new_m / new_n rows. Padding both sides of a
/// CrossGram leaves it unchanged.
FactoredMatrix extend_dims(const FactoredMatrix& f, Index new_m, Index new_n);

/// ||U1 S1 V1^T - U2 S2 V2^T||_F without materializing either matrix.
double factored_frobenius_distance(const FactoredMatrix& a,
                                   const FactoredMatrix& b);

/// Same distance from a precomputed cross_grams(a, b).
double factored_frobenius_distance(const FactoredMatrix& a,
                                   const FactoredMatrix& b,
                                   const CrossGram& gram);

/// Sign convention used by truncated_svd; exposed for tests and tools.
void canonicalize_signs(FactoredMatrix& f);

}  // namespace incgraph
