#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace swarmform {

// Undirected edge, stored with first < second.
struct Edge {
  std::size_t first = 0;
  std::size_t second = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

Edge make_edge(std::size_t i, std::size_t j);

// Simple undirected graph on vertices 0..n-1 with an adjacency matrix for
// O(1) lookups and sorted neighbor lists for iteration.
class Graph {
 public:
  Graph() = default;
  explicit Graph(std::size_t n);
  Graph(std::size_t n, const std::vector<Edge>& edges);

  static Graph complete(std::size_t n);

  // Throws PreconditionError on self-loops, duplicates or out-of-range ids.
  void add_edge(std::size_t i, std::size_t j);

  std::size_t size() const { return n_; }
  std::size_t edge_count() const { return edges_.size(); }
  bool adjacent(std::size_t i, std::size_t j) const { return adj_[i * n_ + j] != 0; }
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return nbrs_[i]; }
  const std::vector<Edge>& edges() const { return edges_; }
  bool is_complete() const { return edges_.size() == n_ * (n_ - 1) / 2; }

  // Unordered pairs {i,j}, i<j, that are not edges, lexicographic order.
  std::vector<Edge> non_edges() const;

  bool is_connected() const;

  // Hop distances from `source`; unreachable vertices get SIZE_MAX.
  std::vector<std::size_t> hop_distances(std::size_t source) const;

 private:
  std::size_t n_ = 0;
  std::vector<char> adj_;
  std::vector<std::vector<std::size_t>> nbrs_;
  std::vector<Edge> edges_;
};

// Exact hop diameter (BFS from every vertex). Throws DisconnectedGraphError.
std::size_t graph_diameter(const Graph& g);

}  // namespace swarmform
