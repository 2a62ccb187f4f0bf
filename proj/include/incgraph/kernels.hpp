#pragma once

// Dense data-parallel kernels used on the per-event hot path.
//
// Every kernel exists twice: `serial` is a plain loop reference kept for
// testing, `parallel` splits rows across OpenMP threads and hands each chunk
// to Eigen. The unqualified functions in `incgraph::kernels` dispatch to the
// parallel variant. Results of the two agree to 1e-10 relative.

#include <Eigen/Dense>

namespace incgraph::kernels {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace serial {

/// out = basis * rotation.topRows(k) + extra * rotation.row(k), where k is
/// basis.cols(). `rotation` is (k+1) x r.
MatrixXd rotate_basis(const MatrixXd& basis, const VectorXd& extra,
                      const Eigen::Ref<const MatrixXd>& rotation);

/// a^T b for tall a (m x ka) and b (m x kb).
MatrixXd cross_gram(const MatrixXd& a, const MatrixXd& b);

/// out_j = (rows_j . query) * multipliers_j; empty multipliers means 1.
VectorXd score_rows(const MatrixXd& rows, const VectorXd& query,
                    const VectorXd& multipliers);

}  // namespace serial

namespace parallel {

MatrixXd rotate_basis(const MatrixXd& basis, const VectorXd& extra,
                      const Eigen::Ref<const MatrixXd>& rotation);
MatrixXd cross_gram(const MatrixXd& a, const MatrixXd& b);
VectorXd score_rows(const MatrixXd& rows, const VectorXd& query,
                    const VectorXd& multipliers);

}  // namespace parallel

inline MatrixXd rotate_basis(const MatrixXd& basis, const VectorXd& extra,
                             const Eigen::Ref<const MatrixXd>& rotation) {
  return parallel::rotate_basis(basis, extra, rotation);
}

inline MatrixXd cross_gram(const MatrixXd& a, const MatrixXd& b) {
  return parallel::cross_gram(a, b);
}

inline VectorXd score_rows(const MatrixXd& rows, const VectorXd& query,
                           const VectorXd& multipliers) {
  return parallel::score_rows(rows, query, multipliers);
}

/// Number of OpenMP threads the parallel kernels will use.
int thread_count();

}  // namespace incgraph::kernels
