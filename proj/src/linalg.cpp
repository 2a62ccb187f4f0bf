#include "incgraph/linalg.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <string>

#include "incgraph/errors.hpp"
#include "incgraph/kernels.hpp"

#ifdef INCGRAPH_HAVE_LAPACKE
#include <lapacke.h>
#endif

namespace incgraph {

namespace {

constexpr double kResidualFloor = 1e-12;

void require_finite(const MatrixXd& a, const char* what) {
  if (!a.allFinite()) {
    throw InputError(std::string(what) + ": non-finite entries");
  }
}

// Dense SVD, thin or full. LAPACK's divide-and-conquer driver when it is
// linked in, Eigen's otherwise.
FactoredMatrix dense_svd(const MatrixXd& a, bool full) {
#ifdef INCGRAPH_HAVE_LAPACKE
  const Index m = a.rows(), n = a.cols(), r = std::min(m, n);
  MatrixXd work = a;
  const Index ucols = full ? m : r, vtrows = full ? n : r;
  MatrixXd u(m, ucols), vt(vtrows, n);
  VectorXd s(r);
  const lapack_int info = LAPACKE_dgesdd(
      LAPACK_COL_MAJOR, full ? 'A' : 'S', static_cast<lapack_int>(m),
      static_cast<lapack_int>(n), work.data(), static_cast<lapack_int>(m), s.data(),
      u.data(), static_cast<lapack_int>(m), vt.data(), static_cast<lapack_int>(vtrows));
  if (info == 0) return {std::move(u), std::move(s), vt.transpose()};
  // dgesdd occasionally fails to converge; fall through to Eigen.
#endif
  Eigen::BDCSVD<MatrixXd> svd(a, full ? (Eigen::ComputeFullU | Eigen::ComputeFullV)
                                      : (Eigen::ComputeThinU | Eigen::ComputeThinV));
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

// One Brand step up to the rotation: the normalized residuals and the SVD
// of the (k+1) x (k+1) core.
struct BrandStep {
  VectorXd resid_u;
  VectorXd resid_i;
  FactoredMatrix rot;
};

BrandStep brand_step(const FactoredMatrix& f, const VectorXd& u,
                     const VectorXd& i, double w) {
  const Index k = f.rank_budget();
  BrandStep st;
  const VectorXd proj_u = f.left.transpose() * u;
  const VectorXd proj_i = f.right.transpose() * i;
  st.resid_u = u - f.left * proj_u;
  st.resid_i = i - f.right * proj_i;
  double norm_u = st.resid_u.norm();
  double norm_i = st.resid_i.norm();
  if (norm_u < kResidualFloor) {
    st.resid_u.setZero();
    norm_u = 0.0;
  } else {
    st.resid_u /= norm_u;
  }
  if (norm_i < kResidualFloor) {
    st.resid_i.setZero();
    norm_i = 0.0;
  } else {
    st.resid_i /= norm_i;
  }

  VectorXd a(k + 1);
  VectorXd b(k + 1);
  a << proj_u, norm_u;
  b << proj_i, norm_i;
  MatrixXd core = MatrixXd::Zero(k + 1, k + 1);
  core.topLeftCorner(k, k).diagonal() = f.singular;
  core.noalias() += w * a * b.transpose();
  st.rot = small_full_svd(core);
  return st;
}

void check_update(const FactoredMatrix& f, const VectorXd& u, const VectorXd& i,
                  double w) {
  if (u.size() != f.rows() || i.size() != f.cols()) {
    throw DimensionError("brand_update: update vectors do not match " +
                         std::to_string(f.rows()) + "x" +
                         std::to_string(f.cols()));
  }
  if (!std::isfinite(w) || !u.allFinite() || !i.allFinite()) {
    throw InputError("brand_update: non-finite update");
  }
}

}  // namespace

MatrixXd FactoredMatrix::reconstruct() const {
  return left * singular.asDiagonal() * right.transpose();
}

FactoredMatrix FactoredMatrix::zeros(Index m, Index n, Index k) {
  if (k < 0 || k > std::min(m, n)) {
    throw DimensionError("FactoredMatrix::zeros: rank budget " +
                         std::to_string(k) + " exceeds min(" +
                         std::to_string(m) + ", " + std::to_string(n) + ")");
  }
  return {MatrixXd::Identity(m, k), VectorXd::Zero(k),
          MatrixXd::Identity(n, k)};
}

void canonicalize_signs(FactoredMatrix& f) {
  for (Index j = 0; j < f.left.cols(); ++j) {
    Index best = 0;
    double best_abs = -1.0;
    for (Index r = 0; r < f.left.rows(); ++r) {
      const double v = std::abs(f.left(r, j));
      if (v > best_abs) {
        best_abs = v;
        best = r;
      }
    }
    if (best_abs > 0.0 && f.left(best, j) < 0.0) {
      f.left.col(j) *= -1.0;
      f.right.col(j) *= -1.0;
    }
  }
}

FactoredMatrix truncated_svd(const MatrixXd& a, Index k) {
  const Index m = a.rows();
  const Index n = a.cols();
  if (k < 0 || k > std::min(m, n)) {
    throw DimensionError("truncated_svd: k=" + std::to_string(k) +
                         " exceeds min(" + std::to_string(m) + ", " +
                         std::to_string(n) + ")");
  }
  require_finite(a, "truncated_svd");
  if (a.isZero(0.0)) {
    throw DegenerateInputError("truncated_svd: all-zero matrix");
  }
  if (k == 0) {
    return {MatrixXd(m, 0), VectorXd(0), MatrixXd(n, 0)};
  }
  const FactoredMatrix full = dense_svd(a, false);
  FactoredMatrix f{full.left.leftCols(k), full.singular.head(k),
                   full.right.leftCols(k)};
  canonicalize_signs(f);
  return f;
}

FactoredMatrix truncated_svd(const SparseMatrix& a, Index k) {
  return truncated_svd(MatrixXd(a), k);
}

FactoredMatrix small_full_svd(const MatrixXd& k) {
  require_finite(k, "small_full_svd");
  return dense_svd(k, true);
}

FactoredMatrix brand_update(const FactoredMatrix& f, const VectorXd& u,
                            const VectorXd& i, double w) {
  check_update(f, u, i, w);
  const Index k = f.rank_budget();
  if (w == 0.0 || k == 0) return f;
  const BrandStep st = brand_step(f, u, i, w);
  return {kernels::rotate_basis(f.left, st.resid_u, st.rot.left.leftCols(k)),
          st.rot.singular.head(k),
          kernels::rotate_basis(f.right, st.resid_i, st.rot.right.leftCols(k))};
}

CrossGram cross_grams(const FactoredMatrix& live, const FactoredMatrix& ref) {
  if (live.rows() != ref.rows() || live.cols() != ref.cols()) {
    throw DimensionError("cross_grams: shapes differ");
  }
  return {kernels::cross_gram(live.left, ref.left),
          kernels::cross_gram(live.right, ref.right)};
}

FactoredMatrix brand_update(const FactoredMatrix& f, const VectorXd& u,
                            const VectorXd& i, double w,
                            const FactoredMatrix& ref, CrossGram& gram) {
  check_update(f, u, i, w);
  if (ref.rows() != f.rows() || ref.cols() != f.cols() ||
      gram.left.rows() != f.rank_budget() ||
      gram.left.cols() != ref.rank_budget()) {
    throw DimensionError("brand_update: reference does not match");
  }
  const Index k = f.rank_budget();
  if (w == 0.0 || k == 0) return f;
  const BrandStep st = brand_step(f, u, i, w);
  // New basis is [U p] Q, so its Gram with the reference is Q^T [G; p^T U_ref].
  auto advance = [k](MatrixXd& g, const MatrixXd& q, const VectorXd& p,
                     const MatrixXd& ref_basis) {
    MatrixXd stacked(k + 1, g.cols());
    stacked.topRows(k) = g;
    stacked.row(k).noalias() = (ref_basis.transpose() * p).transpose();
    g.noalias() = q.transpose() * stacked;
  };
  advance(gram.left, st.rot.left.leftCols(k), st.resid_u, ref.left);
  advance(gram.right, st.rot.right.leftCols(k), st.resid_i, ref.right);
  return {kernels::rotate_basis(f.left, st.resid_u, st.rot.left.leftCols(k)),
          st.rot.singular.head(k),
          kernels::rotate_basis(f.right, st.resid_i, st.rot.right.leftCols(k))};
}

FactoredMatrix extend_dims(const FactoredMatrix& f, Index new_m, Index new_n) {
  if (new_m < f.rows() || new_n < f.cols()) {
    throw DimensionError("extend_dims: cannot shrink " +
                         std::to_string(f.rows()) + "x" +
                         std::to_string(f.cols()) + " to " +
                         std::to_string(new_m) + "x" + std::to_string(new_n));
  }
  FactoredMatrix out = f;
  if (new_m > f.rows()) {
    out.left.conservativeResize(new_m, Eigen::NoChange);
    out.left.bottomRows(new_m - f.rows()).setZero();
  }
  if (new_n > f.cols()) {
    out.right.conservativeResize(new_n, Eigen::NoChange);
    out.right.bottomRows(new_n - f.cols()).setZero();
  }
  return out;
}

double factored_frobenius_distance(const FactoredMatrix& a,
                                   const FactoredMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("factored_frobenius_distance: shapes " +
                         std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " and " +
                         std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()) + " differ");
  }
  return factored_frobenius_distance(a, b, cross_grams(a, b));
}

double factored_frobenius_distance(const FactoredMatrix& a,
                                   const FactoredMatrix& b,
                                   const CrossGram& gram) {
  if (gram.left.rows() != a.rank_budget() || gram.left.cols() != b.rank_budget() ||
      gram.right.rows() != a.rank_budget() || gram.right.cols() != b.rank_budget()) {
    throw DimensionError("factored_frobenius_distance: cross-Gram shape mismatch");
  }
  // ||A-B||^2 = ||A||^2 + ||B||^2 - 2 tr(A^T B), with
  // tr(A^T B) = sum_ij s1_i s2_j (U1^T U2)_ij (V1^T V2)_ij.
  const double cross =
      (a.singular.asDiagonal() *
       gram.left.cwiseProduct(gram.right) * b.singular.asDiagonal())
          .sum();
  const double sq =
      a.singular.squaredNorm() + b.singular.squaredNorm() - 2.0 * cross;
  return std::sqrt(std::max(sq, 0.0));
}

}  // namespace incgraph
