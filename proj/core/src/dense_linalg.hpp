#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace swarmform::detail {

// Rank-revealing Cholesky P^T G P = L L^T computed in place (lower triangle).
struct PivotedCholesky {
  Eigen::MatrixXd factor;
  // 0-based permutation; the first `rank` entries are the kept rows.
  std::vector<int> perm;
  int rank = 0;

  // Returns false when G is not positive semidefinite enough to factor.
  bool compute(Eigen::MatrixXd G, double rel_tol);
};

// Solves G_KK x = rhs in place using the leading rank x rank block of a
// PivotedCholesky factor; rhs is ordered like perm.
void cholesky_solve_in_place(const Eigen::MatrixXd& factor, int rank, Eigen::VectorXd& rhs);

// Full symmetric eigendecomposition: A is overwritten by eigenvectors,
// eigenvalues ascending. Returns false on LAPACK failure.
bool symmetric_eigen(Eigen::MatrixXd& A, Eigen::VectorXd& eigenvalues);

// S = V max(w, 0) V^T for symmetric W. Returns false on failure.
bool project_psd(const Eigen::MatrixXd& W, Eigen::MatrixXd& S, Eigen::MatrixXd& work, Eigen::VectorXd& w);

}  // namespace swarmform::detail
