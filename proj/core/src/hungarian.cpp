#include <cmath>
#include <limits>
#include <vector>

#include "swarmform/assignment.hpp"
#include "swarmform/error.hpp"

namespace swarmform {

// Shortest augmenting path with row/column potentials.
HungarianResult hungarian_min_cost(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw PreconditionError("assignment matrix must be square");
  if (!a.allFinite()) throw PreconditionError("assignment matrix must be finite");
  const auto n = static_cast<std::size_t>(a.rows());
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  HungarianResult r;
  r.sigma.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) r.sigma[p[j] - 1] = j - 1;
  for (std::size_t i = 0; i < n; ++i) r.total += a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r.sigma[i]));
  return r;
}

HungarianResult hungarian_oracle(const Eigen::MatrixXd& scores) {
  HungarianResult r = hungarian_min_cost(-scores);
  r.total = -r.total;
  return r;
}

}  // namespace swarmform
