#include "swarmform/formation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "swarmform/error.hpp"

namespace swarmform {

FormationSpec FormationSpec::make(std::string name, std::vector<Vec3> points,
                                  const std::vector<Edge>& edges) {
  const std::size_t n = points.size();
  if (n < 3) throw InvalidFormationError("formation needs at least 3 points, got " + std::to_string(n));
  FormationSpec spec;
  spec.name = std::move(name);
  spec.points = std::move(points);
  spec.graph = Graph(n);
  for (const auto& e : edges) {
    try {
      spec.graph.add_edge(e.first, e.second);
    } catch (const PreconditionError& err) {
      throw InvalidFormationError(err.what());
    }
  }
  spec.validate();
  return spec;
}

void FormationSpec::validate() const {
  const std::size_t n = points.size();
  if (n < 3) throw InvalidFormationError("formation needs at least 3 points, got " + std::to_string(n));
  if (graph.size() != n) {
    throw InvalidFormationError("graph has " + std::to_string(graph.size()) + " vertices but formation has " +
                                std::to_string(n) + " points");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!points[i].allFinite()) throw InvalidFormationError("point " + std::to_string(i + 1) + " is not finite");
    for (std::size_t j = i + 1; j < n; ++j) {
      if ((points[i] - points[j]).norm() <= 0.0) {
        throw InvalidFormationError("points " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                                    " coincide");
      }
    }
  }
  if (!graph.is_connected()) throw InvalidFormationError("formation graph is disconnected");
}

std::size_t graph_diameter(const FormationSpec& spec) { return graph_diameter(spec.graph); }

Mat3 GainBlock::matrix() const {
  Mat3 m;
  m << a, -b, 0.0, b, a, 0.0, 0.0, 0.0, c;
  return m;
}

void GainMatrix::set(std::size_t i, std::size_t j, const GainBlock& block) {
  if (i == j || i >= n_ || j >= n_) throw PreconditionError("invalid gain block index");
  if (i < j)
    blocks_[{i, j}] = block;
  else
    blocks_[{j, i}] = block.transposed();
}

bool GainMatrix::has_block(std::size_t i, std::size_t j) const {
  if (i == j) return true;
  return blocks_.count({std::min(i, j), std::max(i, j)}) != 0;
}

GainBlock GainMatrix::block(std::size_t i, std::size_t j) const {
  if (i == j) {
    GainBlock sum;
    for (std::size_t k = 0; k < n_; ++k)
      if (k != i) sum = sum + block(i, k);
    return -sum;
  }
  auto it = blocks_.find({std::min(i, j), std::max(i, j)});
  if (it == blocks_.end()) return {};
  return i < j ? it->second : it->second.transposed();
}

Eigen::MatrixXd GainMatrix::dense() const {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3 * n_, 3 * n_);
  for (const auto& [key, blk] : blocks_) {
    const auto [i, j] = key;
    const Mat3 m = blk.matrix();
    A.block<3, 3>(3 * i, 3 * j) = m;
    A.block<3, 3>(3 * j, 3 * i) = m.transpose();
    A.block<3, 3>(3 * i, 3 * i) -= m;
    A.block<3, 3>(3 * j, 3 * j) -= m.transpose();
  }
  return A;
}

Eigen::MatrixXd null_basis_matrix(const std::vector<Vec3>& points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd N = Eigen::MatrixXd::Zero(3 * n, 6);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3& p = points[static_cast<std::size_t>(i)];
    const Eigen::Index r = 3 * i;
    N(r, 0) = p.x();
    N(r + 1, 0) = p.y();
    N(r, 1) = -p.y();
    N(r + 1, 1) = p.x();
    N(r + 2, 2) = p.z();
    N(r, 3) = 1.0;
    N(r + 1, 4) = 1.0;
    N(r + 2, 5) = 1.0;
  }
  return N;
}

bool all_z_equal(const std::vector<Vec3>& points, double tol) {
  return std::all_of(points.begin(), points.end(),
                     [&](const Vec3& p) { return std::abs(p.z() - points.front().z()) <= tol; });
}

NullBasis build_null_basis(const std::vector<Vec3>& points) {
  if (points.size() < 2) throw PreconditionError("null basis needs at least 2 points");
  NullBasis nb;
  nb.N = null_basis_matrix(points);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(nb.N, Eigen::ComputeFullU);
  const Eigen::VectorXd& s = svd.singularValues();
  const double tol = 1e-9 * std::max(1.0, s(0));
  nb.rank = static_cast<std::size_t>((s.array() > tol).count());
  nb.planar = all_z_equal(points);
  const std::size_t expected = nb.planar ? 5 : 6;
  if (nb.rank < expected) {
    throw DegenerateFormationError("null basis has rank " + std::to_string(nb.rank) + ", expected " +
                                   std::to_string(expected));
  }
  const auto r = static_cast<Eigen::Index>(nb.rank);
  nb.Q = svd.matrixU().rightCols(nb.N.rows() - r);
  return nb;
}

NullBasis build_null_basis(const FormationSpec& spec) { return build_null_basis(spec.points); }

Eigen::VectorXd stack(const std::vector<Vec3>& points) {
  Eigen::VectorXd q(3 * static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) q.segment<3>(3 * static_cast<Eigen::Index>(i)) = points[i];
  return q;
}

}  // namespace swarmform
