#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mck {

using Vertex = std::uint32_t;

/// Directed graph in compressed adjacency form. Successor lists keep insertion order.
/// Undirected graphs are stored with both arcs.
class Graph {
 public:
  Graph() = default;

  std::size_t vertex_count() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t edge_count() const { return targets_.size(); }

  std::span<const Vertex> successors(Vertex v) const {
    return {targets_.data() + offsets_[v], targets_.data() + offsets_[v + 1]};
  }

  friend Graph graph_from_edges(std::size_t vertex_count,
                                std::span<const std::pair<Vertex, Vertex>> edges);

 private:
  std::vector<std::size_t> offsets_;
  std::vector<Vertex> targets_;
};

/// Builds the adjacency in input order; repeated arcs after the first are dropped.
/// Throws std::out_of_range("vertex id out of range") for any id >= vertex_count.
Graph graph_from_edges(std::size_t vertex_count, std::span<const std::pair<Vertex, Vertex>> edges);

inline Graph graph_from_edges(std::size_t vertex_count,
                              std::initializer_list<std::pair<Vertex, Vertex>> edges) {
  return graph_from_edges(vertex_count, std::span<const std::pair<Vertex, Vertex>>(edges.begin(), edges.size()));
}

struct WeightedEdge {
  Vertex u = 0;
  Vertex v = 0;
  double w = 0;
};

/// "n m" header followed by m lines "u v".
Graph read_graph(std::istream& in);
void write_graph(std::ostream& out, const Graph& g);

/// "n m" header followed by m lines "u v w".
std::pair<std::size_t, std::vector<WeightedEdge>> read_weighted_edges(std::istream& in);
void write_weighted_edges(std::ostream& out, std::size_t n, std::span<const WeightedEdge> edges);

inline constexpr std::uint32_t kUnreached = std::numeric_limits<std::uint32_t>::max();

struct BfsResult {
  Vertex source = 0;
  std::vector<std::uint32_t> level;  // hop count, or kUnreached
  std::optional<Vertex> found;
};

using VertexPredicate = std::function<bool(Vertex)>;

/// Instrumentation filled in by bfs_parallel when requested.
struct BfsTrace {
  std::vector<std::uint32_t> claims;          // successful claims per vertex
  std::vector<std::vector<Vertex>> frontiers;  // frontier of each level, in concatenation order
  std::uint64_t early_expansions = 0;          // expansions that began before their level settled
};

/// Queue-based BFS. With a target predicate the search stops at the first matching vertex
/// dequeued; vertices not yet reached at that point stay kUnreached.
BfsResult bfs_seq(const Graph& g, Vertex source, const VertexPredicate& target = {});

/// Level-synchronous BFS on a fixed team of `threads` workers with a barrier after every
/// level. Vertices are claimed by atomic test-and-set, so each is enqueued exactly once.
/// With a target predicate, the smallest matching id of the first level containing a match
/// is returned.
BfsResult bfs_parallel(const Graph& g, Vertex source, int threads,
                       const VertexPredicate& target = {}, BfsTrace* trace = nullptr);

}  // namespace mck
