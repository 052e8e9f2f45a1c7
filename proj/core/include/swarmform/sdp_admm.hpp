#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace swarmform {

// Scalar linear functional sum_t w_t * L(a_t, b_t) on the symmetric matrix
// L = R Z R^T. The right-hand side is always zero.
struct LiftedTerm {
  Eigen::Index a = 0;
  Eigen::Index b = 0;
  double w = 1.0;
};
using LiftedRow = std::vector<LiftedTerm>;

// The reformulated problem before assembly: variable Z (k x k) enters through
// L = R Z R^T, with zero-constraints on entries of L and tr Z = traceTarget.
struct SdpConstraints {
  Eigen::MatrixXd R;
  std::vector<LiftedRow> lifted;
  double traceTarget = 0.0;
};

struct AssembleOptions {
  // Throw DependentConstraintsError instead of pruning dependent rows.
  bool strict = false;
  double rankTolerance = 1e-10;
};

// min <C,X> s.t. A(X) = b, X PSD, X = [[gamma I, I],[I, Z]] of size 2k.
// Rows are ordered: equal diagonal chain (k-1), zero top-left off-diagonals
// (k(k-1)/2), coupling block equal to I (k^2), lifted rows, trace row.
class AdmmProblem {
 public:
  static AdmmProblem assemble(const SdpConstraints& cons, const AssembleOptions& opts = {});

  AdmmProblem(AdmmProblem&&) noexcept;
  AdmmProblem& operator=(AdmmProblem&&) noexcept;
  ~AdmmProblem();

  Eigen::Index k() const { return k_; }
  Eigen::Index dim() const { return 2 * k_; }
  std::size_t rows() const;
  std::size_t structure_rows() const;
  std::size_t lifted_rows() const { return lifted_.size(); }
  double trace_target() const { return trace_; }
  const Eigen::MatrixXd& R() const { return R_; }
  const Eigen::VectorXd& b() const { return b_; }
  const Eigen::MatrixXd& C() const { return C_; }

  // Global row indices dropped as linearly dependent.
  const std::vector<std::size_t>& dropped_rows() const { return dropped_; }
  // False when the dropped rows are not implied by the kept ones, i.e. the
  // affine constraints have no solution.
  bool consistent() const { return consistent_; }
  double consistency_residual() const { return consistency_residual_; }

  Eigen::VectorXd apply(const Eigen::MatrixXd& X) const;
  Eigen::MatrixXd adjoint(const Eigen::VectorXd& y) const;
  // A solution of (A A^*) y = r. For r in the range of A the image
  // adjoint(y) does not depend on which solution is returned.
  Eigen::VectorXd solve_gram(const Eigen::VectorXd& r) const;

 private:
  AdmmProblem();
  struct StructureOp;
  struct LiftedOp;

  Eigen::Index k_ = 0;
  double trace_ = 0.0;
  Eigen::MatrixXd R_;
  std::vector<LiftedRow> lifted_;
  Eigen::VectorXd b_;
  Eigen::MatrixXd C_;
  std::unique_ptr<StructureOp> structure_;
  std::unique_ptr<LiftedOp> liftedOp_;
  std::vector<std::size_t> dropped_;
  bool consistent_ = true;
  double consistency_residual_ = 0.0;
};

struct AdmmOptions {
  double mu = 1.0;
  std::size_t maxIter = 20000;
  double tolPrimal = 1e-7;
  double tolDual = 1e-7;
  bool adaptMu = true;
  std::size_t adaptEvery = 1;
  bool warmStart = true;
  // Stop early when the best primal residual improved by less than
  // stallImprovement (relative) over the last stallWindow iterations.
  std::size_t stallMinIter = 2000;
  std::size_t stallWindow = 1000;
  double stallImprovement = 0.05;
  bool keepHistory = false;
};

struct AdmmState {
  Eigen::MatrixXd X;
  Eigen::MatrixXd S;
  Eigen::VectorXd y;
  Eigen::MatrixXd W;
  double mu = 1.0;
  std::size_t iteration = 0;
  double primalResidual = 0.0;
  double dualResidual = 0.0;
  std::vector<double> primalHistory;
  std::vector<double> dualHistory;
};

enum class AdmmStatus { Converged, MaxIterations, Stalled, Infeasible };

std::string to_string(AdmmStatus s);

struct AdmmResult {
  Eigen::MatrixXd X;
  Eigen::MatrixXd Z;
  double gamma = 0.0;
  double objective = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  AdmmStatus status = AdmmStatus::MaxIterations;
  double primalResidual = 0.0;
  double dualResidual = 0.0;
  double mu = 0.0;
  std::vector<double> primalHistory;
  std::vector<double> dualHistory;
};

AdmmState admm_initial_state(const AdmmProblem& problem, const AdmmOptions& opts);
// One update of y, W, S, X; refreshes the residuals in the state.
void admm_iterate(const AdmmProblem& problem, AdmmState& state);
AdmmResult admm_solve(const AdmmProblem& problem, const AdmmOptions& opts = {});

}  // namespace swarmform
