#pragma once

// Reference implementations used only by tests. They share no code with the library kernels.

#include <cstdint>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include "mck/apsp.hpp"
#include "mck/graph.hpp"
#include "mck/matrix.hpp"

namespace oracle {

/// Plain i-j-k triple loop with a local accumulator.
inline mck::MatrixXd triple_loop(const mck::MatrixXd& a, const mck::MatrixXd& b) {
  const auto n = a.rows();
  mck::MatrixXd c(n, n);
  for (mck::Index i = 0; i < n; ++i) {
    for (mck::Index j = 0; j < n; ++j) {
      double s = 0;
      for (mck::Index k = 0; k < n; ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  }
  return c;
}

/// Hop distances by repeated edge relaxation (Bellman-Ford with unit weights), O(n * m).
inline std::vector<std::uint32_t> hop_distances(const mck::Graph& g, mck::Vertex source) {
  const std::size_t n = g.vertex_count();
  std::vector<std::uint32_t> d(n, mck::kUnreached);
  d[source] = 0;
  for (std::size_t pass = 0; pass + 1 < n; ++pass) {
    bool changed = false;
    for (mck::Vertex u = 0; u < n; ++u) {
      if (d[u] == mck::kUnreached) continue;
      for (mck::Vertex v : g.successors(u)) {
        if (d[u] + 1 < d[v]) {
          d[v] = d[u] + 1;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  return d;
}

/// Dijkstra from every source over the non-infinite off-diagonal entries (non-negative weights).
inline mck::DistanceMatrix<double> dijkstra_all_pairs(const mck::DistanceMatrix<double>& w) {
  const auto n = w.rows();
  const double inf = std::numeric_limits<double>::infinity();
  mck::DistanceMatrix<double> out = mck::DistanceMatrix<double>::Constant(n, n, inf);
  for (mck::Index s = 0; s < n; ++s) {
    std::vector<double> d(static_cast<std::size_t>(n), inf);
    using Item = std::pair<double, mck::Index>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    d[s] = 0;
    pq.push({0, s});
    while (!pq.empty()) {
      auto [du, u] = pq.top();
      pq.pop();
      if (du > d[u]) continue;
      for (mck::Index v = 0; v < n; ++v) {
        if (v == u || w(u, v) == inf) continue;
        if (du + w(u, v) < d[v]) {
          d[v] = du + w(u, v);
          pq.push({d[v], v});
        }
      }
    }
    for (mck::Index v = 0; v < n; ++v) out(s, v) = d[v];
  }
  return out;
}

}  // namespace oracle
