#include <algorithm>
#include <atomic>
#include <barrier>
#include <deque>
#include <memory>
#include <stdexcept>
#include <thread>

#include "mck/graph.hpp"

namespace mck {

namespace {

void require_source(const Graph& g, Vertex source) {
  if (source >= g.vertex_count()) throw std::out_of_range("source vertex out of range");
}

}  // namespace

BfsResult bfs_seq(const Graph& g, Vertex source, const VertexPredicate& target) {
  require_source(g, source);
  BfsResult r;
  r.source = source;
  r.level.assign(g.vertex_count(), kUnreached);
  r.level[source] = 0;

  std::deque<Vertex> queue{source};
  while (!queue.empty()) {
    const Vertex u = queue.front();
    queue.pop_front();
    if (target && target(u)) {
      r.found = u;
      return r;
    }
    for (Vertex v : g.successors(u)) {
      if (r.level[v] != kUnreached) continue;
      r.level[v] = r.level[u] + 1;
      queue.push_back(v);
    }
  }
  return r;
}

BfsResult bfs_parallel(const Graph& g, Vertex source, int threads, const VertexPredicate& target,
                       BfsTrace* trace) {
  require_source(g, source);
  if (threads < 1) throw std::invalid_argument("threads must be at least 1");

  const std::size_t n = g.vertex_count();
  BfsResult r;
  r.source = source;
  r.level.assign(n, kUnreached);

  auto visited = std::make_unique<std::atomic<bool>[]>(n);
  std::unique_ptr<std::atomic<std::uint32_t>[]> claims;
  if (trace) claims = std::make_unique<std::atomic<std::uint32_t>[]>(n);

  visited[source].store(true, std::memory_order_relaxed);
  r.level[source] = 0;
  if (claims) claims[source].store(1, std::memory_order_relaxed);

  const auto workers = static_cast<std::size_t>(threads);
  std::vector<Vertex> frontier{source};
  std::vector<std::vector<Vertex>> next(workers);
  std::uint32_t depth = 0;
  std::atomic<std::uint32_t> settled{0};  // levels whose membership is final
  std::atomic<std::uint64_t> early{0};
  bool done = false;

  auto examine = [&] {
    if (trace && !frontier.empty()) trace->frontiers.push_back(frontier);
    if (target) {
      std::optional<Vertex> best;
      for (Vertex v : frontier) {
        if (target(v) && (!best || v < *best)) best = v;
      }
      if (best) {
        r.found = best;
        done = true;
      }
    }
    if (frontier.empty()) done = true;
  };

  // Runs on one thread once every worker has finished the current level.
  auto synchronize = [&]() noexcept {
    frontier.clear();
    for (auto& part : next) {
      frontier.insert(frontier.end(), part.begin(), part.end());
      part.clear();
    }
    ++depth;
    settled.store(depth, std::memory_order_release);
    examine();
  };

  examine();
  std::barrier sync(static_cast<std::ptrdiff_t>(workers), synchronize);

  auto expand = [&](std::size_t w) {
    while (!done) {
      if (settled.load(std::memory_order_acquire) != depth) early.fetch_add(1);
      const std::size_t begin = frontier.size() * w / workers;
      const std::size_t end = frontier.size() * (w + 1) / workers;
      auto& out = next[w];
      for (std::size_t i = begin; i < end; ++i) {
        for (Vertex v : g.successors(frontier[i])) {
          if (visited[v].load(std::memory_order_relaxed)) continue;
          if (visited[v].exchange(true, std::memory_order_acq_rel)) continue;
          r.level[v] = depth + 1;
          if (claims) claims[v].fetch_add(1, std::memory_order_relaxed);
          out.push_back(v);
        }
      }
      sync.arrive_and_wait();
    }
  };

  {
    std::vector<std::jthread> team;
    team.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) team.emplace_back(expand, w);
    expand(0);
  }

  if (trace) {
    trace->claims.resize(n);
    for (std::size_t v = 0; v < n; ++v) trace->claims[v] = claims[v].load();
    trace->early_expansions = early.load();
  }
  return r;
}

}  // namespace mck
