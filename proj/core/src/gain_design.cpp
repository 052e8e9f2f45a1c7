#include "swarmform/gain_design.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "swarmform/error.hpp"

namespace swarmform {

Eigen::MatrixXd orthogonal_complement(const Eigen::MatrixXd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullU);
  const Eigen::VectorXd& s = svd.singularValues();
  const double tol = 1e-9 * std::max(1.0, s.size() ? s(0) : 0.0);
  const auto rank = (s.array() > tol).count();
  if (rank < M.cols()) {
    throw PreconditionError("matrix has rank " + std::to_string(rank) + " < " + std::to_string(M.cols()));
  }
  return svd.matrixU().rightCols(M.rows() - rank);
}

namespace {

void split_pairs(const Graph& g, std::vector<Edge>& non, std::vector<Edge>* nbr) {
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = i + 1; j < g.size(); ++j) {
      if (!g.adjacent(i, j))
        non.push_back({i, j});
      else if (nbr)
        nbr->push_back({i, j});
    }
  }
}

double pick_trace(double requested, Eigen::Index k) {
  return requested > 0.0 ? requested : static_cast<double>(k);
}

Eigen::MatrixXd projector_complement(const Eigen::MatrixXd& M) {
  const Eigen::Index n = M.rows();
  const Eigen::MatrixXd G = M.transpose() * M;
  return Eigen::MatrixXd::Identity(n, n) - M * G.ldlt().solve(M.transpose());
}

OracleSolution oracle(const Eigen::MatrixXd& M, Eigen::Index k, double t, bool complete) {
  if (!complete) throw PreconditionError("closed-form oracle requires a complete formation graph");
  OracleSolution o;
  const double s = t / static_cast<double>(k);
  o.Z = s * Eigen::MatrixXd::Identity(k, k);
  o.B = -s * projector_complement(M);
  o.gamma = 1.0 / s;
  o.objective = static_cast<double>(k) * o.gamma;
  o.lambda = s;
  return o;
}

}  // namespace

ZSubproblem build_z_subproblem(const FormationSpec& spec, ZMode mode, double traceTarget) {
  const auto n = static_cast<Eigen::Index>(spec.size());
  ZSubproblem sub;
  sub.mode = mode;
  if (mode == ZMode::Standard) {
    if (all_z_equal(spec.points)) {
      throw PlanarFormationError("all z-coordinates are equal; use the planar z-subproblem");
    }
    sub.M.resize(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      sub.M(i, 0) = spec.points[static_cast<std::size_t>(i)].z();
      sub.M(i, 1) = 1.0;
    }
  } else {
    sub.M = Eigen::MatrixXd::Ones(n, 1);
  }
  try {
    sub.R = orthogonal_complement(sub.M);
  } catch (const PreconditionError&) {
    throw PlanarFormationError("z-subproblem matrix M is rank deficient");
  }
  split_pairs(spec.graph, sub.nonNeighborPairs, nullptr);
  sub.traceTarget = pick_trace(traceTarget, sub.k());
  return sub;
}

XYSubproblem build_xy_subproblem(const FormationSpec& spec, double traceTarget) {
  const auto n = static_cast<Eigen::Index>(spec.size());
  XYSubproblem sub;
  sub.M = Eigen::MatrixXd::Zero(2 * n, 4);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3& p = spec.points[static_cast<std::size_t>(i)];
    sub.M.row(2 * i) << p.x(), -p.y(), 1.0, 0.0;
    sub.M.row(2 * i + 1) << p.y(), p.x(), 0.0, 1.0;
  }
  try {
    sub.R = orthogonal_complement(sub.M);
  } catch (const PreconditionError&) {
    throw DegenerateFormationError("x-y projections of the formation points coincide");
  }
  split_pairs(spec.graph, sub.nonNeighborPairs, &sub.neighborPairs);
  sub.traceTarget = pick_trace(traceTarget, sub.k());
  return sub;
}

SdpConstraints sdp_constraints(const ZSubproblem& sub) {
  SdpConstraints c;
  c.R = sub.R;
  c.traceTarget = sub.traceTarget;
  for (const auto& e : sub.nonNeighborPairs) {
    c.lifted.push_back({{static_cast<Eigen::Index>(e.first), static_cast<Eigen::Index>(e.second), 1.0}});
  }
  return c;
}

SdpConstraints sdp_constraints(const XYSubproblem& sub) {
  SdpConstraints c;
  c.R = sub.R;
  c.traceTarget = sub.traceTarget;
  // Pairs in lexicographic order: four zero rows per non-neighbor block, two
  // structure rows per neighbor block.
  std::vector<std::pair<Edge, bool>> pairs;
  for (const auto& e : sub.nonNeighborPairs) pairs.push_back({e, false});
  for (const auto& e : sub.neighborPairs) pairs.push_back({e, true});
  std::sort(pairs.begin(), pairs.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
  for (const auto& [e, neighbor] : pairs) {
    const auto a = static_cast<Eigen::Index>(2 * e.first);
    const auto b = static_cast<Eigen::Index>(2 * e.second);
    if (neighbor) {
      c.lifted.push_back({{a, b, 1.0}, {a + 1, b + 1, -1.0}});
      c.lifted.push_back({{a, b + 1, 1.0}, {a + 1, b, 1.0}});
    } else {
      for (Eigen::Index p = 0; p < 2; ++p)
        for (Eigen::Index q = 0; q < 2; ++q) c.lifted.push_back({{a + p, b + q, 1.0}});
    }
  }
  return c;
}

AdmmProblem assemble_admm(const ZSubproblem& sub, const AssembleOptions& opts) {
  return AdmmProblem::assemble(sdp_constraints(sub), opts);
}

AdmmProblem assemble_admm(const XYSubproblem& sub, const AssembleOptions& opts) {
  return AdmmProblem::assemble(sdp_constraints(sub), opts);
}

OracleSolution complete_graph_oracle(const ZSubproblem& sub) {
  return oracle(sub.M, sub.k(), sub.traceTarget, sub.nonNeighborPairs.empty());
}

OracleSolution complete_graph_oracle(const XYSubproblem& sub) {
  return oracle(sub.M, sub.k(), sub.traceTarget, sub.nonNeighborPairs.empty());
}

Eigen::MatrixXd lift(const Eigen::MatrixXd& R, const Eigen::MatrixXd& Z) {
  const Eigen::MatrixXd Zs = 0.5 * (Z + Z.transpose());
  return -(R * Zs * R.transpose());
}

namespace {

// Minimum-norm correction of v so that K v = 0.
void project_onto_kernel(const Eigen::MatrixXd& K, Eigen::VectorXd& v) {
  if (K.size() == 0 || v.size() == 0) return;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(K);
  v -= cod.solve(K * v);
}

}  // namespace

GainMatrix recover_gains(const Eigen::MatrixXd& zSolution, const ZSubproblem& zsub,
                         const Eigen::MatrixXd& xySolution, const XYSubproblem& xysub, const FormationSpec& spec,
                         const RecoverOptions& opts) {
  const std::size_t n = spec.size();
  if (zsub.R.rows() != static_cast<Eigen::Index>(n) || xysub.R.rows() != static_cast<Eigen::Index>(2 * n) ||
      zSolution.rows() != zsub.k() || xySolution.rows() != xysub.k()) {
    throw PreconditionError("subproblem dimensions do not match the formation");
  }
  const Eigen::MatrixXd Bz = lift(zsub.R, zSolution);
  const Eigen::MatrixXd Bxy = lift(xysub.R, xySolution);
  const double scale = std::max({1.0, Bz.cwiseAbs().maxCoeff(), Bxy.cwiseAbs().maxCoeff()});
  const double tol = opts.structureTol * scale;

  const auto& edges = spec.graph.edges();
  const auto m = static_cast<Eigen::Index>(edges.size());
  Eigen::VectorXd c(m), ab(2 * m);
  for (Eigen::Index e = 0; e < m; ++e) {
    const auto i = static_cast<Eigen::Index>(edges[static_cast<std::size_t>(e)].first);
    const auto j = static_cast<Eigen::Index>(edges[static_cast<std::size_t>(e)].second);
    c(e) = Bz(i, j);
    const Eigen::Matrix2d D = Bxy.block<2, 2>(2 * i, 2 * j);
    const double diagGap = std::abs(D(0, 0) - D(1, 1));
    const double skewGap = std::abs(D(0, 1) + D(1, 0));
    if (diagGap > tol || skewGap > tol) {
      throw GainQualityError("block (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                             ") violates the scaled-rotation structure by " +
                             std::to_string(std::max(diagGap, skewGap)));
    }
    ab(2 * e) = 0.5 * (D(0, 0) + D(1, 1));
    ab(2 * e + 1) = 0.5 * (D(1, 0) - D(0, 1));
  }
  for (const auto& pr : zsub.nonNeighborPairs) {
    const auto i = static_cast<Eigen::Index>(pr.first);
    const auto j = static_cast<Eigen::Index>(pr.second);
    const double zv = std::abs(Bz(i, j));
    const double xyv = Bxy.block<2, 2>(2 * i, 2 * j).cwiseAbs().maxCoeff();
    if (std::max(zv, xyv) > tol) {
      throw GainQualityError("non-neighbor block (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                             ") is nonzero: " + std::to_string(std::max(zv, xyv)));
    }
  }

  if (opts.polish) {
    const auto nn = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd Kz = Eigen::MatrixXd::Zero(nn, m);
    // Rows 2n.. keep the diagonal blocks symmetric: the skew parts of each
    // vertex's edge blocks must cancel.
    Eigen::MatrixXd Kxy = Eigen::MatrixXd::Zero(3 * nn, 2 * m);
    for (Eigen::Index e = 0; e < m; ++e) {
      const auto i = static_cast<Eigen::Index>(edges[static_cast<std::size_t>(e)].first);
      const auto j = static_cast<Eigen::Index>(edges[static_cast<std::size_t>(e)].second);
      const Vec3 d = spec.points[static_cast<std::size_t>(j)] - spec.points[static_cast<std::size_t>(i)];
      if (zsub.mode == ZMode::Standard) {
        Kz(i, e) = d.z();
        Kz(j, e) = -d.z();
      }
      Kxy(2 * i, 2 * e) = d.x();
      Kxy(2 * i + 1, 2 * e) = d.y();
      Kxy(2 * i, 2 * e + 1) = -d.y();
      Kxy(2 * i + 1, 2 * e + 1) = d.x();
      Kxy(2 * j, 2 * e) = -d.x();
      Kxy(2 * j + 1, 2 * e) = -d.y();
      Kxy(2 * j, 2 * e + 1) = -d.y();
      Kxy(2 * j + 1, 2 * e + 1) = d.x();
      Kxy(2 * nn + i, 2 * e + 1) = 1.0;
      Kxy(2 * nn + j, 2 * e + 1) = -1.0;
    }
    if (zsub.mode == ZMode::Standard) project_onto_kernel(Kz, c);
    project_onto_kernel(Kxy, ab);
  }

  GainMatrix A(n);
  for (Eigen::Index e = 0; e < m; ++e) {
    const auto& edge = edges[static_cast<std::size_t>(e)];
    A.set(edge.first, edge.second, GainBlock{ab(2 * e), ab(2 * e + 1), c(e)});
  }
  return A;
}

GainReport verify_gain(const GainMatrix& A, const NullBasis& basis, const VerifyOptions& opts) {
  const Eigen::MatrixXd D = A.dense();
  if (D.rows() != basis.N.rows()) throw PreconditionError("gain matrix and null basis dimensions differ");
  GainReport r;
  r.normInf = D.cwiseAbs().rowwise().sum().maxCoeff();
  r.symmetryError = (D - D.transpose()).cwiseAbs().maxCoeff();
  r.maxNullResidual = (D * basis.N).cwiseAbs().maxCoeff();
  if (basis.Q.cols() > 0) {
    const Eigen::MatrixXd H = basis.Q.transpose() * D * basis.Q;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (H + H.transpose()), Eigen::EigenvaluesOnly);
    r.lambdaMaxRestricted = es.eigenvalues().maxCoeff();
  }
  r.ok = r.lambdaMaxRestricted < -opts.epsStab && r.maxNullResidual <= opts.nullTol * std::max(1.0, r.normInf);
  return r;
}

DesignResult design_gains(const FormationSpec& spec, const DesignOptions& opts) {
  spec.validate();
  const NullBasis basis = build_null_basis(spec);
  DesignResult out;
  out.zMode = basis.planar ? ZMode::Planar : ZMode::Standard;
  const ZSubproblem zsub = build_z_subproblem(spec, out.zMode, opts.traceTarget);
  const XYSubproblem xysub = build_xy_subproblem(spec, opts.traceTarget);
  {
    const AdmmProblem zp = assemble_admm(zsub, opts.assemble);
    out.zRows = zp.rows();
    out.zDropped = zp.dropped_rows().size();
    out.z = admm_solve(zp, opts.admm);
  }
  {
    const AdmmProblem xyp = assemble_admm(xysub, opts.assemble);
    out.xyRows = xyp.rows();
    out.xyDropped = xyp.dropped_rows().size();
    out.xy = admm_solve(xyp, opts.admm);
  }
  out.solved = out.z.converged && out.xy.converged;
  if (!out.solved) return out;
  out.gains = recover_gains(out.z.Z, zsub, out.xy.Z, xysub, spec, opts.recover);
  out.report = verify_gain(out.gains, basis, opts.verify);
  out.ok = out.report.ok;
  return out;
}

}  // namespace swarmform
