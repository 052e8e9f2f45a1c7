#include "dense_linalg.hpp"

#include <lapacke.h>

// Some OpenBLAS builds export LAPACKE under a symbol prefix.
#ifdef SWARMFORM_LAPACKE_PREFIX
#define SWARMFORM_CAT2(a, b) a##b
#define SWARMFORM_CAT(a, b) SWARMFORM_CAT2(a, b)
#define SWARMFORM_LAPACKE(fn) SWARMFORM_CAT(SWARMFORM_LAPACKE_PREFIX, LAPACKE_##fn)
#else
#define SWARMFORM_LAPACKE(fn) LAPACKE_##fn
#endif

namespace swarmform::detail {

bool PivotedCholesky::compute(Eigen::MatrixXd G, double rel_tol) {
  const auto m = static_cast<lapack_int>(G.rows());
  perm.assign(static_cast<std::size_t>(m), 0);
  rank = 0;
  if (m == 0) {
    factor = std::move(G);
    return true;
  }
  const double tol = rel_tol * G.diagonal().maxCoeff();
  std::vector<lapack_int> piv(static_cast<std::size_t>(m));
  lapack_int r = 0;
  const lapack_int info = SWARMFORM_LAPACKE(dpstrf)(LAPACK_COL_MAJOR, 'L', m, G.data(), m, piv.data(), &r, tol);
  if (info < 0) return false;
  rank = static_cast<int>(r);
  for (std::size_t i = 0; i < piv.size(); ++i) perm[i] = static_cast<int>(piv[i]) - 1;
  factor = std::move(G);
  return true;
}

void cholesky_solve_in_place(const Eigen::MatrixXd& factor, int rank, Eigen::VectorXd& rhs) {
  if (rank == 0) return;
  const auto r = static_cast<Eigen::Index>(rank);
  const auto L = factor.topLeftCorner(r, r).triangularView<Eigen::Lower>();
  L.solveInPlace(rhs);
  L.transpose().solveInPlace(rhs);
}

bool symmetric_eigen(Eigen::MatrixXd& A, Eigen::VectorXd& eigenvalues) {
  const auto n = static_cast<lapack_int>(A.rows());
  eigenvalues.resize(A.rows());
  if (n == 0) return true;
  return SWARMFORM_LAPACKE(dsyevd)(LAPACK_COL_MAJOR, 'V', 'L', n, A.data(), n, eigenvalues.data()) == 0;
}

bool project_psd(const Eigen::MatrixXd& W, Eigen::MatrixXd& S, Eigen::MatrixXd& work, Eigen::VectorXd& w) {
  work = W;
  if (!symmetric_eigen(work, w)) return false;
  Eigen::Index first = 0;
  while (first < w.size() && w(first) <= 0.0) ++first;
  const Eigen::Index cnt = w.size() - first;
  if (cnt == 0) {
    S.setZero(W.rows(), W.cols());
    return true;
  }
  auto V = work.rightCols(cnt);
  Eigen::MatrixXd Vs = V * w.tail(cnt).cwiseSqrt().asDiagonal();
  S.noalias() = Vs * Vs.transpose();
  return true;
}

}  // namespace swarmform::detail
