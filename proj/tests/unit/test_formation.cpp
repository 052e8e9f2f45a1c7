#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "swarmform/error.hpp"
#include "swarmform/formation.hpp"
#include "swarmform/graph.hpp"

using namespace swarmform;

namespace {

std::vector<Vec3> square_pyramid() {
  return {{0, 0, 0}, {2, 0, 0}, {2, 2, 0}, {0, 2, 0}, {1, 1, 1.5}};
}

}  // namespace

TEST(Graph, CompleteGraphHasAllPairs) {
  const Graph g = Graph::complete(5);
  EXPECT_EQ(g.edge_count(), 10u);
  EXPECT_TRUE(g.is_complete());
  EXPECT_TRUE(g.non_edges().empty());
  EXPECT_EQ(graph_diameter(g), 1u);
}

TEST(Graph, RejectsSelfLoopsDuplicatesAndRange) {
  Graph g(3);
  g.add_edge(0, 1);
  EXPECT_THROW(g.add_edge(1, 0), PreconditionError);
  EXPECT_THROW(g.add_edge(2, 2), PreconditionError);
  EXPECT_THROW(g.add_edge(0, 3), PreconditionError);
}

TEST(Graph, NonEdgesAreLexicographic) {
  const Graph g(4, {{0, 1}, {1, 2}, {2, 3}});
  const auto ne = g.non_edges();
  ASSERT_EQ(ne.size(), 3u);
  EXPECT_EQ(ne[0], (Edge{0, 2}));
  EXPECT_EQ(ne[1], (Edge{0, 3}));
  EXPECT_EQ(ne[2], (Edge{1, 3}));
}

TEST(Graph, DiameterMatchesFloydWarshall) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 15;
    const Graph g(n, oracles::random_connected_edges(n, 0.15, rng));
    ASSERT_TRUE(g.is_connected());
    EXPECT_EQ(graph_diameter(g), oracles::floyd_warshall_diameter(g)) << "trial " << trial;
  }
}

TEST(Graph, PathDiameterAndDisconnected) {
  EXPECT_EQ(graph_diameter(Graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}})), 4u);
  EXPECT_THROW(graph_diameter(Graph(4, {{0, 1}, {2, 3}})), DisconnectedGraphError);
}

TEST(FormationSpec, ValidatesInvariants) {
  EXPECT_THROW(FormationSpec::make("two", {{0, 0, 0}, {1, 0, 0}}, {{0, 1}}), InvalidFormationError);
  EXPECT_THROW(FormationSpec::make("loop", square_pyramid(), {{0, 0}}), InvalidFormationError);
  EXPECT_THROW(FormationSpec::make("dup", square_pyramid(), {{0, 1}, {1, 0}, {1, 2}, {2, 3}, {3, 4}}),
               InvalidFormationError);
  EXPECT_THROW(FormationSpec::make("split", square_pyramid(), {{0, 1}, {2, 3}, {3, 4}}), InvalidFormationError);
  auto coincident = square_pyramid();
  coincident[4] = coincident[0];
  EXPECT_THROW(FormationSpec::make("same", coincident, Graph::complete(5).edges()), InvalidFormationError);
  EXPECT_NO_THROW(FormationSpec::make("ok", square_pyramid(), Graph::complete(5).edges()));
}

TEST(GainBlock, MatrixAndTranspose) {
  const GainBlock g{0.5, -1.5, 2.0};
  Mat3 expected;
  expected << 0.5, 1.5, 0, -1.5, 0.5, 0, 0, 0, 2.0;
  EXPECT_TRUE(g.matrix().isApprox(expected));
  EXPECT_TRUE(g.transposed().matrix().isApprox(expected.transpose()));
  const Vec3 v(1, 2, 3);
  EXPECT_TRUE(g.apply(v).isApprox(expected * v));
}

TEST(GainBlock, CommutesWithZRotation) {
  const GainBlock g{0.3, 0.7, -1.1};
  const Mat3 R = rot_z(0.83);
  EXPECT_LT((g.matrix() * R - R * g.matrix()).norm(), 1e-14);
}

TEST(GainMatrix, DiagonalIsMinusRowSum) {
  GainMatrix A(3);
  A.set(0, 1, {1, 0.5, 2});
  A.set(2, 1, {0.2, 0.1, 1});
  const auto D = oracles::dense_from_blocks(A);
  EXPECT_TRUE(A.dense().isApprox(D));
  // Off-diagonal blocks are mirrored; the diagonal has a skew part here.
  EXPECT_TRUE((D.block<3, 3>(3, 0).isApprox(D.block<3, 3>(0, 3).transpose())));
  EXPECT_GT((D - D.transpose()).cwiseAbs().maxCoeff(), 0.1);
  for (int r = 0; r < 9; ++r)
    for (int c = 0; c < 3; ++c) {
      double s = 0;
      for (int j = 0; j < 3; ++j) s += D(r, 3 * j + c);
      EXPECT_NEAR(s, 0.0, 1e-14);
    }
  EXPECT_FALSE(A.has_block(0, 2));
  EXPECT_THROW(A.set(1, 1, {}), PreconditionError);
}

TEST(GainMatrix, SymmetricWhenSkewPartsCancel) {
  GainMatrix A(3);
  A.set(0, 1, {1, 0.5, 2});
  A.set(2, 1, {0.2, -0.5, 1});
  A.set(0, 2, {0.3, -0.5, 0.7});
  const auto D = A.dense();
  EXPECT_LT((D - D.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_TRUE(A.has_block(0, 2));
}

TEST(NullBasis, StandardFormation) {
  const auto pts = square_pyramid();
  const NullBasis nb = build_null_basis(pts);
  EXPECT_EQ(nb.rank, 6u);
  EXPECT_FALSE(nb.planar);
  ASSERT_EQ(nb.Q.cols(), 15 - 6);
  EXPECT_LT((nb.Q.transpose() * nb.Q - Eigen::MatrixXd::Identity(9, 9)).norm(), 1e-12);
  EXPECT_LT((nb.Q.transpose() * nb.N).norm(), 1e-12);
  // The points themselves are in col(N).
  EXPECT_LT((nb.Q.transpose() * stack(pts)).norm(), 1e-12);
}

TEST(NullBasis, PlanarFormationLosesZScale) {
  const std::vector<Vec3> pts{{0, 0, 1}, {1, 0, 1}, {0, 1, 1}, {1, 1.5, 1}};
  const NullBasis nb = build_null_basis(pts);
  EXPECT_TRUE(nb.planar);
  EXPECT_EQ(nb.rank, 5u);
  EXPECT_EQ(nb.Q.cols(), 12 - 5);
}

TEST(NullBasis, CollinearXYIsDegenerate) {
  const std::vector<Vec3> pts{{0, 0, 0}, {0, 0, 1}, {0, 0, 2}};
  EXPECT_THROW(build_null_basis(pts), DegenerateFormationError);
}

TEST(Geometry, WrapAngleRange) {
  EXPECT_NEAR(wrap_angle(3 * std::numbers::pi), std::numbers::pi, 1e-12);
  EXPECT_NEAR(wrap_angle(-std::numbers::pi), std::numbers::pi, 1e-12);
  EXPECT_NEAR(wrap_angle(0.5), 0.5, 1e-15);
  EXPECT_TRUE(rotate_z(Vec3(1, 0, 2), std::numbers::pi / 2).isApprox(Vec3(0, 1, 2)));
}
