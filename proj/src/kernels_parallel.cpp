#include <omp.h>

#include <algorithm>
#include <vector>

#include "incgraph/errors.hpp"
#include "incgraph/kernels.hpp"

namespace incgraph::kernels {

namespace {

// Fixed chunking keeps reductions in the same order regardless of how many
// threads pick up the chunks.
constexpr Index kRowChunk = 512;

Index chunk_count(Index rows) { return (rows + kRowChunk - 1) / kRowChunk; }

}  // namespace

int thread_count() { return omp_get_max_threads(); }

namespace parallel {

MatrixXd rotate_basis(const MatrixXd& basis, const VectorXd& extra,
                      const Eigen::Ref<const MatrixXd>& rotation) {
  const Index m = basis.rows();
  const Index k = basis.cols();
  if (extra.size() != m || rotation.rows() != k + 1) {
    throw DimensionError("rotate_basis: operand shapes do not conform");
  }
  MatrixXd out(m, rotation.cols());
  const Index chunks = chunk_count(m);
#pragma omp parallel for schedule(static)
  for (Index c = 0; c < chunks; ++c) {
    const Index r0 = c * kRowChunk;
    const Index len = std::min(kRowChunk, m - r0);
    out.middleRows(r0, len).noalias() =
        basis.middleRows(r0, len) * rotation.topRows(k);
    out.middleRows(r0, len).noalias() +=
        extra.segment(r0, len) * rotation.row(k);
  }
  return out;
}

MatrixXd cross_gram(const MatrixXd& a, const MatrixXd& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("cross_gram: row counts differ");
  }
  const Index chunks = chunk_count(a.rows());
  if (chunks <= 1) return a.transpose() * b;
  std::vector<MatrixXd> partial(static_cast<std::size_t>(chunks));
#pragma omp parallel for schedule(static)
  for (Index c = 0; c < chunks; ++c) {
    const Index r0 = c * kRowChunk;
    const Index len = std::min(kRowChunk, a.rows() - r0);
    partial[static_cast<std::size_t>(c)].noalias() =
        a.middleRows(r0, len).transpose() * b.middleRows(r0, len);
  }
  MatrixXd out = std::move(partial.front());
  for (std::size_t c = 1; c < partial.size(); ++c) out += partial[c];
  return out;
}

VectorXd score_rows(const MatrixXd& rows, const VectorXd& query,
                    const VectorXd& multipliers) {
  if (rows.cols() != query.size() ||
      (multipliers.size() != 0 && multipliers.size() != rows.rows())) {
    throw DimensionError("score_rows: operand shapes do not conform");
  }
  VectorXd out(rows.rows());
  const Index chunks = chunk_count(rows.rows());
#pragma omp parallel for schedule(static)
  for (Index c = 0; c < chunks; ++c) {
    const Index r0 = c * kRowChunk;
    const Index len = std::min(kRowChunk, rows.rows() - r0);
    out.segment(r0, len).noalias() = rows.middleRows(r0, len) * query;
    if (multipliers.size() != 0) {
      out.segment(r0, len).array() *= multipliers.segment(r0, len).array();
    }
  }
  return out;
}

}  // namespace parallel
}  // namespace incgraph::kernels
