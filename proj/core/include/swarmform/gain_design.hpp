#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "swarmform/formation.hpp"
#include "swarmform/sdp_admm.hpp"

namespace swarmform {

// Standard: M = [z | 1]. Planar (all z equal): M = [1], complement n-1.
enum class ZMode { Standard, Planar };

struct ZSubproblem {
  ZMode mode = ZMode::Standard;
  Eigen::MatrixXd M;
  Eigen::MatrixXd R;
  std::vector<Edge> nonNeighborPairs;
  double traceTarget = 0.0;

  Eigen::Index k() const { return R.cols(); }
};

struct XYSubproblem {
  Eigen::MatrixXd M;
  Eigen::MatrixXd R;
  std::vector<Edge> nonNeighborPairs;
  std::vector<Edge> neighborPairs;
  double traceTarget = 0.0;

  Eigen::Index k() const { return R.cols(); }
};

// Orthonormal basis of the orthogonal complement of col(M). Throws
// PreconditionError if M is column rank deficient.
Eigen::MatrixXd orthogonal_complement(const Eigen::MatrixXd& M);

// traceTarget <= 0 selects the complement dimension k.
ZSubproblem build_z_subproblem(const FormationSpec& spec, ZMode mode = ZMode::Standard, double traceTarget = 0.0);
XYSubproblem build_xy_subproblem(const FormationSpec& spec, double traceTarget = 0.0);

SdpConstraints sdp_constraints(const ZSubproblem& sub);
SdpConstraints sdp_constraints(const XYSubproblem& sub);

AdmmProblem assemble_admm(const ZSubproblem& sub, const AssembleOptions& opts = {});
AdmmProblem assemble_admm(const XYSubproblem& sub, const AssembleOptions& opts = {});

struct OracleSolution {
  Eigen::MatrixXd Z;
  Eigen::MatrixXd B;
  double gamma = 0.0;
  // <C, X*> of the reformulated problem, k^2 / traceTarget.
  double objective = 0.0;
  // Smallest eigenvalue of Z*, equal to every nonzero eigenvalue of -B*.
  double lambda = 0.0;
};

// Closed form for complete graphs; throws PreconditionError otherwise.
OracleSolution complete_graph_oracle(const ZSubproblem& sub);
OracleSolution complete_graph_oracle(const XYSubproblem& sub);

// B = -R Z R^T.
Eigen::MatrixXd lift(const Eigen::MatrixXd& R, const Eigen::MatrixXd& Z);

struct RecoverOptions {
  double structureTol = 1e-4;
  // Least-squares correction of the edge gains onto A N = 0.
  bool polish = true;
};

GainMatrix recover_gains(const Eigen::MatrixXd& zSolution, const ZSubproblem& zsub,
                         const Eigen::MatrixXd& xySolution, const XYSubproblem& xysub, const FormationSpec& spec,
                         const RecoverOptions& opts = {});

struct GainReport {
  double maxNullResidual = 0.0;
  double lambdaMaxRestricted = 0.0;
  double symmetryError = 0.0;
  double normInf = 0.0;
  bool ok = false;
};

struct VerifyOptions {
  double epsStab = 1e-8;
  // Null residual bound relative to max(1, ||A||_inf).
  double nullTol = 1e-6;
};

GainReport verify_gain(const GainMatrix& A, const NullBasis& basis, const VerifyOptions& opts = {});

struct DesignOptions {
  AdmmOptions admm;
  AssembleOptions assemble;
  RecoverOptions recover;
  VerifyOptions verify;
  double traceTarget = 0.0;
};

struct DesignResult {
  ZMode zMode = ZMode::Standard;
  AdmmResult z;
  AdmmResult xy;
  std::size_t zRows = 0;
  std::size_t xyRows = 0;
  std::size_t zDropped = 0;
  std::size_t xyDropped = 0;
  // Populated only when both subproblems converged.
  GainMatrix gains;
  GainReport report;
  bool solved = false;
  bool ok = false;
};

DesignResult design_gains(const FormationSpec& spec, const DesignOptions& opts = {});

}  // namespace swarmform
