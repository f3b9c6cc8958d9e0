#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "mck/graph.hpp"

namespace mck {

Graph graph_from_edges(std::size_t vertex_count, std::span<const std::pair<Vertex, Vertex>> edges) {
  if (vertex_count < 1) throw std::invalid_argument("graph needs at least one vertex");
  for (const auto& [u, v] : edges) {
    if (u >= vertex_count || v >= vertex_count) throw std::out_of_range("vertex id out of range");
  }

  // Stable bucket by source, then drop repeats per source with a stamp array.
  std::vector<std::size_t> start(vertex_count + 1, 0);
  for (const auto& e : edges) ++start[e.first + 1];
  for (std::size_t v = 0; v < vertex_count; ++v) start[v + 1] += start[v];
  std::vector<Vertex> bucketed(edges.size());
  {
    std::vector<std::size_t> cursor(start.begin(), start.end() - 1);
    for (const auto& [u, v] : edges) bucketed[cursor[u]++] = v;
  }

  Graph g;
  g.offsets_.assign(vertex_count + 1, 0);
  g.targets_.reserve(edges.size());
  std::vector<std::size_t> stamp(vertex_count, 0);
  for (std::size_t u = 0; u < vertex_count; ++u) {
    for (std::size_t i = start[u]; i < start[u + 1]; ++i) {
      const Vertex v = bucketed[i];
      if (stamp[v] == u + 1) continue;
      stamp[v] = u + 1;
      g.targets_.push_back(v);
    }
    g.offsets_[u + 1] = g.targets_.size();
  }
  return g;
}

namespace {

std::pair<std::size_t, std::size_t> read_header(std::istream& in) {
  long long n = 0, m = 0;
  if (!(in >> n >> m)) throw std::runtime_error("graph: bad header, expected \"n m\"");
  if (n < 1 || m < 0) throw std::runtime_error("graph: bad header values");
  return {static_cast<std::size_t>(n), static_cast<std::size_t>(m)};
}

Vertex read_vertex(std::istream& in, std::size_t n) {
  long long x = -1;
  if (!(in >> x)) throw std::runtime_error("graph: truncated edge list");
  if (x < 0 || static_cast<std::size_t>(x) >= n) throw std::out_of_range("vertex id out of range");
  return static_cast<Vertex>(x);
}

}  // namespace

Graph read_graph(std::istream& in) {
  const auto [n, m] = read_header(in);
  std::vector<std::pair<Vertex, Vertex>> edges;
  edges.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Vertex u = read_vertex(in, n);
    const Vertex v = read_vertex(in, n);
    edges.emplace_back(u, v);
  }
  return graph_from_edges(n, edges);
}

void write_graph(std::ostream& out, const Graph& g) {
  out << g.vertex_count() << ' ' << g.edge_count() << '\n';
  for (Vertex u = 0; u < g.vertex_count(); ++u) {
    for (Vertex v : g.successors(u)) out << u << ' ' << v << '\n';
  }
}

std::pair<std::size_t, std::vector<WeightedEdge>> read_weighted_edges(std::istream& in) {
  const auto [n, m] = read_header(in);
  std::vector<WeightedEdge> edges;
  edges.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    WeightedEdge e;
    e.u = read_vertex(in, n);
    e.v = read_vertex(in, n);
    if (!(in >> e.w)) throw std::runtime_error("graph: missing edge weight");
    edges.push_back(e);
  }
  return {n, std::move(edges)};
}

void write_weighted_edges(std::ostream& out, std::size_t n, std::span<const WeightedEdge> edges) {
  const auto old = out.precision(17);
  out << n << ' ' << edges.size() << '\n';
  for (const auto& e : edges) out << e.u << ' ' << e.v << ' ' << e.w << '\n';
  out.precision(old);
}

}  // namespace mck
