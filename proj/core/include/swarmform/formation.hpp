#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "swarmform/geometry.hpp"
#include "swarmform/graph.hpp"

namespace swarmform {

// Desired 3D points plus the formation graph. Construct through make() so the
// invariants are checked once; afterwards the value is immutable by convention.
struct FormationSpec {
  std::string name;
  std::vector<Vec3> points;
  Graph graph;

  std::size_t size() const { return points.size(); }

  // Throws InvalidFormationError on n < 3, bad edges, disconnected graph or
  // coincident points.
  static FormationSpec make(std::string name, std::vector<Vec3> points,
                            const std::vector<Edge>& edges);
  void validate() const;
};

std::size_t graph_diameter(const FormationSpec& spec);

// Scaled z-rotation [[a,-b,0],[b,a,0],[0,0,c]].
struct GainBlock {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  Mat3 matrix() const;
  GainBlock transposed() const { return {a, -b, c}; }
  Vec3 apply(const Vec3& v) const { return {a * v.x() - b * v.y(), b * v.x() + a * v.y(), c * v.z()}; }
  GainBlock operator+(const GainBlock& o) const { return {a + o.a, b + o.b, c + o.c}; }
  GainBlock operator-() const { return {-a, -b, -c}; }

  friend bool operator==(const GainBlock&, const GainBlock&) = default;
};

// Block gain matrix. Off-diagonal blocks are stored once per edge (i<j);
// block (j,i) is the transpose and diagonals are minus the row sums.
class GainMatrix {
 public:
  GainMatrix() = default;
  explicit GainMatrix(std::size_t n) : n_(n) {}

  std::size_t size() const { return n_; }

  // Sets A_ij (and implicitly A_ji = A_ijᵀ). Requires i != j.
  void set(std::size_t i, std::size_t j, const GainBlock& block);
  // A_ij for i != j (zero block if absent), or the implied diagonal for i == j.
  GainBlock block(std::size_t i, std::size_t j) const;
  bool has_block(std::size_t i, std::size_t j) const;

  // Stored blocks keyed by (i,j) with i < j.
  const std::map<std::pair<std::size_t, std::size_t>, GainBlock>& blocks() const { return blocks_; }

  Eigen::MatrixXd dense() const;

 private:
  std::size_t n_ = 0;
  std::map<std::pair<std::size_t, std::size_t>, GainBlock> blocks_;
};

// N (3n x 6, columns px, py, pz, ex, ey, ez) and its orthonormal complement Q.
struct NullBasis {
  Eigen::MatrixXd N;
  Eigen::MatrixXd Q;
  std::size_t rank = 0;
  // All z equal: the pz column is zero and Q has 3n-5 columns.
  bool planar = false;
};

Eigen::MatrixXd null_basis_matrix(const std::vector<Vec3>& points);
NullBasis build_null_basis(const std::vector<Vec3>& points);
NullBasis build_null_basis(const FormationSpec& spec);

// Stacks points into a 3n vector (x1,y1,z1,x2,...).
Eigen::VectorXd stack(const std::vector<Vec3>& points);

bool all_z_equal(const std::vector<Vec3>& points, double tol = 1e-12);

}  // namespace swarmform
