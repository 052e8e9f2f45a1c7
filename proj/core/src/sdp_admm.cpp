#include "swarmform/sdp_admm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "dense_linalg.hpp"
#include "swarmform/error.hpp"

namespace swarmform {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

// Column-major lower-triangle index into the scaled half-vector.
Eigen::Index svec_index(Eigen::Index d, Eigen::Index i, Eigen::Index j) {
  if (i < j) std::swap(i, j);
  return j * d - j * (j - 1) / 2 + (i - j);
}

Eigen::VectorXd svec(const Eigen::MatrixXd& X) {
  const Eigen::Index d = X.rows();
  Eigen::VectorXd v(d * (d + 1) / 2);
  Eigen::Index p = 0;
  for (Eigen::Index j = 0; j < d; ++j) {
    v(p++) = X(j, j);
    for (Eigen::Index i = j + 1; i < d; ++i) v(p++) = kSqrt2 * X(i, j);
  }
  return v;
}

void smat_add(const Eigen::VectorXd& v, Eigen::MatrixXd& X) {
  const Eigen::Index d = X.rows();
  Eigen::Index p = 0;
  for (Eigen::Index j = 0; j < d; ++j) {
    X(j, j) += v(p++);
    for (Eigen::Index i = j + 1; i < d; ++i) {
      const double x = v(p++) / kSqrt2;
      X(i, j) += x;
      X(j, i) += x;
    }
  }
}

}  // namespace

struct AdmmProblem::StructureOp {
  Eigen::SparseMatrix<double> A;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> gram;
};

// Lifted rows plus the trace row act on Z only, through F_r with
// <F_r, R Z R^T>. Their Gram is tr(F_r P F_s P) with P = R R^T. When R has
// orthonormal columns, P = I - U U^T and the Gram splits into
//   G0 + W diag(sigma) W^T,  G0_rs = <F_r, F_s>,
// where W stacks vec(F_r U) (sigma = -2) and vec(U^T F_r U) (sigma = 1).
// G0 is sparse and W has p q + q^2 columns, so solves go through Woodbury.
struct AdmmProblem::LiftedOp {
  bool lowRank = false;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> g0;
  Eigen::SparseMatrix<double> W;
  Eigen::SparseMatrix<double> G0invW;
  Eigen::MatrixXd Tpinv;

  // Dense fallback: pivoted Cholesky of the explicit Gram.
  Eigen::MatrixXd factor;
  std::vector<int> perm;
  int rank = 0;

  bool factor_low_rank(const SdpConstraints& cons, std::size_t ms, const AssembleOptions& opts,
                       std::vector<std::size_t>& dropped);
  void factor_dense(const SdpConstraints& cons, std::size_t ms, const AssembleOptions& opts,
                    std::vector<std::size_t>& dropped);
  Eigen::VectorXd solve(const Eigen::VectorXd& r) const;
};

bool AdmmProblem::LiftedOp::factor_low_rank(const SdpConstraints& cons, std::size_t ms, const AssembleOptions& opts,
                                           std::vector<std::size_t>& dropped) {
  const Eigen::MatrixXd& R = cons.R;
  const Eigen::Index p = R.rows();
  const Eigen::Index k = R.cols();
  const Eigen::Index q = p - k;
  if ((R.transpose() * R - Eigen::MatrixXd::Identity(k, k)).lpNorm<Eigen::Infinity>() > 1e-10) return false;

  Eigen::MatrixXd U(p, q);
  if (q > 0) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(R);
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(p, p);
    U = Q.rightCols(q);
  }

  const auto& L = cons.lifted;
  const auto m = static_cast<Eigen::Index>(L.size() + 1);
  const Eigen::Index s = p * q + q * q;
  std::vector<Eigen::Triplet<double>> ft;
  std::vector<Eigen::Triplet<double>> wt;
  auto add_term = [&](Eigen::Index r, Eigen::Index a, Eigen::Index b, double w) {
    if (a == b) {
      ft.emplace_back(r, a + p * a, w);
    } else {
      ft.emplace_back(r, a + p * b, 0.5 * w);
      ft.emplace_back(r, b + p * a, 0.5 * w);
    }
    for (Eigen::Index c = 0; c < q; ++c) {
      // (F U)(a, c) and (F U)(b, c).
      wt.emplace_back(r, a + p * c, 0.5 * w * U(b, c));
      wt.emplace_back(r, b + p * c, 0.5 * w * U(a, c));
    }
    for (Eigen::Index c2 = 0; c2 < q; ++c2) {
      for (Eigen::Index c1 = 0; c1 < q; ++c1) {
        const double h = 0.5 * w * (U(a, c1) * U(b, c2) + U(b, c1) * U(a, c2));
        if (h != 0.0) wt.emplace_back(r, p * q + c1 + q * c2, h);
      }
    }
  };
  for (std::size_t r = 0; r < L.size(); ++r) {
    for (const auto& t : L[r]) add_term(static_cast<Eigen::Index>(r), t.a, t.b, t.w);
  }
  for (Eigen::Index i = 0; i < p; ++i) ft.emplace_back(m - 1, i + p * i, 1.0);
  for (Eigen::Index c = 0; c < q; ++c) {
    for (Eigen::Index i = 0; i < p; ++i) wt.emplace_back(m - 1, i + p * c, U(i, c));
    wt.emplace_back(m - 1, p * q + c + q * c, 1.0);
  }

  Eigen::SparseMatrix<double> F(m, p * p);
  F.setFromTriplets(ft.begin(), ft.end());
  const Eigen::SparseMatrix<double> G0 = F * F.transpose();
  g0.compute(G0);
  if (g0.info() != Eigen::Success) return false;
  const Eigen::VectorXd D = g0.vectorD();
  if (D.size() == 0 || !(D.minCoeff() > 1e-12 * std::max(1.0, D.maxCoeff()))) return false;

  W.resize(m, s);
  W.setFromTriplets(wt.begin(), wt.end());
  W.prune(0.0);
  G0invW = g0.solve(W);

  Eigen::MatrixXd T = Eigen::MatrixXd(W.transpose() * G0invW);
  T = 0.5 * (T + T.transpose()).eval();
  for (Eigen::Index c = 0; c < s; ++c) T(c, c) += c < p * q ? -0.5 : 1.0;
  Eigen::VectorXd lam;
  Eigen::MatrixXd V = T;
  if (!detail::symmetric_eigen(V, lam)) return false;
  const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
  std::vector<Eigen::Index> nullIdx;
  Tpinv = Eigen::MatrixXd::Zero(s, s);
  Eigen::VectorXd inv(s);
  Eigen::Index nz = 0;
  for (Eigen::Index i = 0; i < s; ++i) {
    if (std::abs(lam(i)) <= opts.rankTolerance * 1e2 * scale) {
      nullIdx.push_back(i);
    } else {
      inv(nz++) = 1.0 / lam(i);
    }
  }
  if (nz > 0) {
    Eigen::MatrixXd Vk(s, nz);
    Eigen::Index c = 0;
    for (Eigen::Index i = 0; i < s; ++i) {
      if (std::abs(lam(i)) > opts.rankTolerance * 1e2 * scale) Vk.col(c++) = V.col(i);
    }
    Tpinv.noalias() = Vk * inv.head(nz).asDiagonal() * Vk.transpose();
  }

  if (!nullIdx.empty()) {
    // Null vectors of the Gram are G0^{-1} W u for u in the null space of T;
    // column pivoting on them picks one dependent row per null direction.
    Eigen::MatrixXd Un(s, static_cast<Eigen::Index>(nullIdx.size()));
    for (std::size_t i = 0; i < nullIdx.size(); ++i) Un.col(static_cast<Eigen::Index>(i)) = V.col(nullIdx[i]);
    const Eigen::MatrixXd Nv = G0invW * Un;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Nv.transpose());
    for (std::size_t i = 0; i < nullIdx.size(); ++i) {
      dropped.push_back(ms + static_cast<std::size_t>(qr.colsPermutation().indices()(static_cast<Eigen::Index>(i))));
    }
  }
  lowRank = true;
  return true;
}

void AdmmProblem::LiftedOp::factor_dense(const SdpConstraints& cons, std::size_t ms, const AssembleOptions& opts,
                                         std::vector<std::size_t>& dropped) {
  const Eigen::MatrixXd P = cons.R * cons.R.transpose();
  const auto m = static_cast<Eigen::Index>(cons.lifted.size() + 1);
  Eigen::MatrixXd GL(m, m);
  const auto& L = cons.lifted;
  for (Eigen::Index s = 0; s + 1 < m; ++s) {
    const auto& rs = L[static_cast<std::size_t>(s)];
    for (Eigen::Index r = s; r + 1 < m; ++r) {
      const auto& rr = L[static_cast<std::size_t>(r)];
      double g = 0.0;
      for (const auto& t : rr)
        for (const auto& u : rs) g += t.w * u.w * 0.5 * (P(t.a, u.a) * P(t.b, u.b) + P(t.a, u.b) * P(t.b, u.a));
      GL(r, s) = g;
    }
    double g = 0.0;
    for (const auto& u : rs) g += u.w * P(u.a, u.b);
    GL(m - 1, s) = g;
  }
  // The trace row is <I, Z> on the k x k variable.
  GL(m - 1, m - 1) = static_cast<double>(cons.R.cols());

  detail::PivotedCholesky chol;
  if (!chol.compute(std::move(GL), opts.rankTolerance)) {
    throw NumericalFailureError("pivoted Cholesky of constraint Gram matrix failed", 0);
  }
  factor = std::move(chol.factor);
  perm = std::move(chol.perm);
  rank = chol.rank;
  for (std::size_t i = static_cast<std::size_t>(rank); i < perm.size(); ++i)
    dropped.push_back(ms + static_cast<std::size_t>(perm[i]));
}

Eigen::VectorXd AdmmProblem::LiftedOp::solve(const Eigen::VectorXd& r) const {
  if (lowRank) {
    const Eigen::VectorXd t = g0.solve(r);
    const Eigen::VectorXd u = Tpinv * (W.transpose() * t);
    return t - G0invW * u;
  }
  Eigen::VectorXd y = Eigen::VectorXd::Zero(r.size());
  Eigen::VectorXd tmp(rank);
  for (int i = 0; i < rank; ++i) tmp(i) = r(perm[static_cast<std::size_t>(i)]);
  detail::cholesky_solve_in_place(factor, rank, tmp);
  for (int i = 0; i < rank; ++i) y(perm[static_cast<std::size_t>(i)]) = tmp(i);
  return y;
}

AdmmProblem::AdmmProblem() = default;
AdmmProblem::AdmmProblem(AdmmProblem&&) noexcept = default;
AdmmProblem& AdmmProblem::operator=(AdmmProblem&&) noexcept = default;
AdmmProblem::~AdmmProblem() = default;

std::size_t AdmmProblem::structure_rows() const { return static_cast<std::size_t>(structure_->A.rows()); }

std::size_t AdmmProblem::rows() const { return structure_rows() + lifted_.size() + 1; }

AdmmProblem AdmmProblem::assemble(const SdpConstraints& cons, const AssembleOptions& opts) {
  const Eigen::Index k = cons.R.cols();
  if (k < 1) throw PreconditionError("complement dimension must be positive");
  if (!(cons.traceTarget > 0.0)) throw PreconditionError("trace target must be positive");
  const Eigen::Index p = cons.R.rows();
  for (const auto& row : cons.lifted) {
    for (const auto& t : row) {
      if (t.a < 0 || t.b < 0 || t.a >= p || t.b >= p) throw PreconditionError("lifted row index out of range");
    }
  }

  AdmmProblem prob;
  prob.k_ = k;
  prob.trace_ = cons.traceTarget;
  prob.R_ = cons.R;
  prob.lifted_ = cons.lifted;
  const Eigen::Index d = 2 * k;

  // Structure rows on X.
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<double> rhs;
  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i + 1 < k; ++i, ++row) {
    trip.emplace_back(row, svec_index(d, i, i), 1.0);
    trip.emplace_back(row, svec_index(d, i + 1, i + 1), -1.0);
    rhs.push_back(0.0);
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = j + 1; i < k; ++i, ++row) {
      trip.emplace_back(row, svec_index(d, i, j), 1.0 / kSqrt2);
      rhs.push_back(0.0);
    }
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j, ++row) {
      trip.emplace_back(row, svec_index(d, k + j, i), 1.0 / kSqrt2);
      rhs.push_back(i == j ? 1.0 : 0.0);
    }
  }
  prob.structure_ = std::make_unique<StructureOp>();
  prob.structure_->A.resize(row, d * (d + 1) / 2);
  prob.structure_->A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseMatrix<double> G = prob.structure_->A * prob.structure_->A.transpose();
  prob.structure_->gram.compute(G);
  if (prob.structure_->gram.info() != Eigen::Success) {
    throw NumericalFailureError("factorization of structure Gram matrix failed", 0);
  }

  const std::size_t ms = static_cast<std::size_t>(row);
  const std::size_t mL = cons.lifted.size() + 1;
  prob.b_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ms + mL));
  for (std::size_t i = 0; i < ms; ++i) prob.b_(static_cast<Eigen::Index>(i)) = rhs[i];
  prob.b_(prob.b_.size() - 1) = cons.traceTarget;

  prob.C_ = Eigen::MatrixXd::Zero(d, d);
  prob.C_.topLeftCorner(k, k).setIdentity();

  prob.liftedOp_ = std::make_unique<LiftedOp>();
  if (!prob.liftedOp_->factor_low_rank(cons, ms, opts, prob.dropped_)) {
    prob.liftedOp_->factor_dense(cons, ms, opts, prob.dropped_);
  }
  std::sort(prob.dropped_.begin(), prob.dropped_.end());

  if (opts.strict && !prob.dropped_.empty()) {
    std::string list;
    for (auto r : prob.dropped_) list += (list.empty() ? "" : ",") + std::to_string(r);
    throw DependentConstraintsError("linearly dependent constraint rows: " + list, prob.dropped_);
  }

  if (!prob.dropped_.empty()) {
    // Dependent rows must be implied by the others for b to be attainable.
    const Eigen::VectorXd y = prob.solve_gram(prob.b_);
    const Eigen::VectorXd res = prob.apply(prob.adjoint(y)) - prob.b_;
    prob.consistency_residual_ = res.lpNorm<Eigen::Infinity>() / (1.0 + prob.b_.norm());
    prob.consistent_ = prob.consistency_residual_ <= 1e-6;
  }
  return prob;
}

Eigen::VectorXd AdmmProblem::apply(const Eigen::MatrixXd& X) const {
  const auto ms = static_cast<Eigen::Index>(structure_rows());
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows()));
  out.head(ms) = structure_->A * svec(X);
  const auto Z = X.bottomRightCorner(k_, k_);
  const Eigen::MatrixXd Lm = R_ * Z * R_.transpose();
  for (std::size_t r = 0; r < lifted_.size(); ++r) {
    double v = 0.0;
    for (const auto& t : lifted_[r]) v += t.w * 0.5 * (Lm(t.a, t.b) + Lm(t.b, t.a));
    out(ms + static_cast<Eigen::Index>(r)) = v;
  }
  out(out.size() - 1) = Z.trace();
  return out;
}

Eigen::MatrixXd AdmmProblem::adjoint(const Eigen::VectorXd& y) const {
  const auto ms = static_cast<Eigen::Index>(structure_rows());
  const Eigen::Index d = dim();
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(d, d);
  smat_add(structure_->A.transpose() * y.head(ms), X);
  const Eigen::Index p = R_.rows();
  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(p, p);
  for (std::size_t r = 0; r < lifted_.size(); ++r) {
    const double yr = y(ms + static_cast<Eigen::Index>(r));
    if (yr == 0.0) continue;
    for (const auto& t : lifted_[r]) {
      Y(t.a, t.b) += 0.5 * yr * t.w;
      Y(t.b, t.a) += 0.5 * yr * t.w;
    }
  }
  auto Zb = X.bottomRightCorner(k_, k_);
  Zb.noalias() += R_.transpose() * Y * R_;
  Zb.diagonal().array() += y(y.size() - 1);
  return X;
}

Eigen::VectorXd AdmmProblem::solve_gram(const Eigen::VectorXd& r) const {
  const auto ms = static_cast<Eigen::Index>(structure_rows());
  Eigen::VectorXd y(r.size());
  y.head(ms) = structure_->gram.solve(r.head(ms));
  y.tail(r.size() - ms) = liftedOp_->solve(r.tail(r.size() - ms));
  return y;
}

std::string to_string(AdmmStatus s) {
  switch (s) {
    case AdmmStatus::Converged:
      return "converged";
    case AdmmStatus::MaxIterations:
      return "max-iterations";
    case AdmmStatus::Stalled:
      return "stalled";
    case AdmmStatus::Infeasible:
      return "infeasible";
  }
  return "unknown";
}

AdmmState admm_initial_state(const AdmmProblem& problem, const AdmmOptions& opts) {
  if (!(opts.mu > 0.0) || !std::isfinite(opts.mu)) throw PreconditionError("ADMM penalty mu must be positive");
  const Eigen::Index k = problem.k();
  const Eigen::Index d = problem.dim();
  AdmmState st;
  st.mu = opts.mu;
  st.X = Eigen::MatrixXd::Zero(d, d);
  st.S = Eigen::MatrixXd::Zero(d, d);
  st.W = Eigen::MatrixXd::Zero(d, d);
  st.y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(problem.rows()));
  if (opts.warmStart) {
    // Complementary pair that is optimal when no lifted rows bind.
    const double r = static_cast<double>(k) / problem.trace_target();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(k, k);
    st.X << r * I, I, I, I / r;
    st.S << I, -r * I, -r * I, r * r * I;
  }
  return st;
}

void admm_iterate(const AdmmProblem& problem, AdmmState& st) {
  const Eigen::MatrixXd& C = problem.C();
  const double mu = st.mu;
  const Eigen::VectorXd rhs = problem.apply(C - st.S - mu * st.X) + mu * problem.b();
  st.y = problem.solve_gram(rhs);
  const Eigen::MatrixXd AT = problem.adjoint(st.y);
  st.W = C - AT - mu * st.X;
  Eigen::MatrixXd work;
  Eigen::VectorXd w;
  ++st.iteration;
  if (!st.W.allFinite() || !detail::project_psd(st.W, st.S, work, w)) {
    throw NumericalFailureError("non-finite iterate in ADMM at iteration " + std::to_string(st.iteration),
                                st.iteration);
  }
  st.X = (st.S - st.W) / mu;
  st.primalResidual = (problem.apply(st.X) - problem.b()).norm() / (1.0 + problem.b().norm());
  st.dualResidual = (AT + st.S - C).norm() / (1.0 + C.norm());
  if (!std::isfinite(st.primalResidual) || !std::isfinite(st.dualResidual)) {
    throw NumericalFailureError("non-finite residual in ADMM at iteration " + std::to_string(st.iteration),
                                st.iteration);
  }
}

AdmmResult admm_solve(const AdmmProblem& problem, const AdmmOptions& opts) {
  AdmmState st = admm_initial_state(problem, opts);
  AdmmResult res;
  res.status = AdmmStatus::MaxIterations;
  if (!problem.consistent()) {
    res.status = AdmmStatus::Infeasible;
  } else {
    double best = std::numeric_limits<double>::infinity();
    double bestAtWindowStart = best;
    for (std::size_t it = 0; it < opts.maxIter; ++it) {
      admm_iterate(problem, st);
      if (opts.keepHistory) {
        st.primalHistory.push_back(st.primalResidual);
        st.dualHistory.push_back(st.dualResidual);
      }
      if (st.primalResidual <= opts.tolPrimal && st.dualResidual <= opts.tolDual) {
        res.status = AdmmStatus::Converged;
        break;
      }
      best = std::min(best, st.primalResidual);
      if (opts.stallWindow > 0 && st.iteration % opts.stallWindow == 0) {
        if (st.iteration >= opts.stallMinIter && best > (1.0 - opts.stallImprovement) * bestAtWindowStart) {
          res.status = AdmmStatus::Stalled;
          break;
        }
        bestAtWindowStart = best;
      }
      if (opts.adaptMu && opts.adaptEvery > 0 && st.iteration % opts.adaptEvery == 0) {
        if (st.primalResidual > 10.0 * st.dualResidual)
          st.mu *= 2.0;
        else if (st.dualResidual > 10.0 * st.primalResidual)
          st.mu /= 2.0;
      }
    }
  }
  const Eigen::Index k = problem.k();
  res.converged = res.status == AdmmStatus::Converged;
  res.iterations = st.iteration;
  res.X = st.X;
  res.Z = st.X.bottomRightCorner(k, k);
  res.gamma = st.X.topLeftCorner(k, k).diagonal().mean();
  res.objective = (problem.C().cwiseProduct(st.X)).sum();
  res.primalResidual = st.primalResidual;
  res.dualResidual = st.dualResidual;
  res.mu = st.mu;
  res.primalHistory = std::move(st.primalHistory);
  res.dualHistory = std::move(st.dualHistory);
  return res;
}

}  // namespace swarmform
