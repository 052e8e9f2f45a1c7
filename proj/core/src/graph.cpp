#include "swarmform/graph.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <string>

#include "swarmform/error.hpp"

namespace swarmform {

Edge make_edge(std::size_t i, std::size_t j) { return i < j ? Edge{i, j} : Edge{j, i}; }

Graph::Graph(std::size_t n) : n_(n), adj_(n * n, 0), nbrs_(n) {}

Graph::Graph(std::size_t n, const std::vector<Edge>& edges) : Graph(n) {
  for (const auto& e : edges) add_edge(e.first, e.second);
}

Graph Graph::complete(std::size_t n) {
  Graph g(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) g.add_edge(i, j);
  return g;
}

void Graph::add_edge(std::size_t i, std::size_t j) {
  if (i >= n_ || j >= n_) {
    throw PreconditionError("edge (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                            ") references a vertex outside 1.." + std::to_string(n_));
  }
  if (i == j) throw PreconditionError("self-loop on vertex " + std::to_string(i + 1));
  if (adjacent(i, j)) {
    throw PreconditionError("duplicate edge (" + std::to_string(i + 1) + "," +
                            std::to_string(j + 1) + ")");
  }
  adj_[i * n_ + j] = adj_[j * n_ + i] = 1;
  nbrs_[i].insert(std::lower_bound(nbrs_[i].begin(), nbrs_[i].end(), j), j);
  nbrs_[j].insert(std::lower_bound(nbrs_[j].begin(), nbrs_[j].end(), i), i);
  const Edge e = make_edge(i, j);
  edges_.insert(std::lower_bound(edges_.begin(), edges_.end(), e), e);
}

std::vector<Edge> Graph::non_edges() const {
  std::vector<Edge> out;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j)
      if (!adjacent(i, j)) out.push_back({i, j});
  return out;
}

std::vector<std::size_t> Graph::hop_distances(std::size_t source) const {
  constexpr auto unreached = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> dist(n_, unreached);
  std::deque<std::size_t> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t v : nbrs_[u]) {
      if (dist[v] == unreached) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

bool Graph::is_connected() const {
  if (n_ == 0) return true;
  const auto dist = hop_distances(0);
  return std::none_of(dist.begin(), dist.end(),
                      [](std::size_t d) { return d == std::numeric_limits<std::size_t>::max(); });
}

std::size_t graph_diameter(const Graph& g) {
  std::size_t diameter = 0;
  for (std::size_t s = 0; s < g.size(); ++s) {
    for (std::size_t d : g.hop_distances(s)) {
      if (d == std::numeric_limits<std::size_t>::max())
        throw DisconnectedGraphError("graph is disconnected; diameter undefined");
      diameter = std::max(diameter, d);
    }
  }
  return diameter;
}

}  // namespace swarmform
