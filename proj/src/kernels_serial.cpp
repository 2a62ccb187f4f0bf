#include "incgraph/kernels.hpp"

#include "incgraph/errors.hpp"

namespace incgraph::kernels::serial {

MatrixXd rotate_basis(const MatrixXd& basis, const VectorXd& extra,
                      const Eigen::Ref<const MatrixXd>& rotation) {
  const Index m = basis.rows();
  const Index k = basis.cols();
  const Index r = rotation.cols();
  if (extra.size() != m || rotation.rows() != k + 1) {
    throw DimensionError("rotate_basis: operand shapes do not conform");
  }
  MatrixXd out(m, r);
  for (Index row = 0; row < m; ++row) {
    for (Index c = 0; c < r; ++c) {
      double acc = extra(row) * rotation(k, c);
      for (Index j = 0; j < k; ++j) acc += basis(row, j) * rotation(j, c);
      out(row, c) = acc;
    }
  }
  return out;
}

MatrixXd cross_gram(const MatrixXd& a, const MatrixXd& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("cross_gram: row counts differ");
  }
  MatrixXd out = MatrixXd::Zero(a.cols(), b.cols());
  for (Index row = 0; row < a.rows(); ++row) {
    for (Index i = 0; i < a.cols(); ++i) {
      const double ai = a(row, i);
      if (ai == 0.0) continue;
      for (Index j = 0; j < b.cols(); ++j) out(i, j) += ai * b(row, j);
    }
  }
  return out;
}

VectorXd score_rows(const MatrixXd& rows, const VectorXd& query,
                    const VectorXd& multipliers) {
  if (rows.cols() != query.size() ||
      (multipliers.size() != 0 && multipliers.size() != rows.rows())) {
    throw DimensionError("score_rows: operand shapes do not conform");
  }
  VectorXd out(rows.rows());
  for (Index row = 0; row < rows.rows(); ++row) {
    double acc = 0.0;
    for (Index j = 0; j < rows.cols(); ++j) acc += rows(row, j) * query(j);
    out(row) = multipliers.size() == 0 ? acc : acc * multipliers(row);
  }
  return out;
}

}  // namespace incgraph::kernels::serial
