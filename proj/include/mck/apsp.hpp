#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <tuple>
#include <type_traits>
#include <vector>

#include "mck/graph.hpp"
#include "mck/matrix.hpp"

namespace mck {

/// n x n shortest-path weights; absent arcs hold kInfinity<Scalar>.
template <typename Scalar>
using DistanceMatrix = Matrix<Scalar>;

/// Square sub-block of a DistanceMatrix. Views may alias each other.
template <typename Scalar>
using BlockView = Eigen::Map<Matrix<Scalar>, 0, Eigen::OuterStride<>>;

template <typename Scalar>
inline constexpr Scalar kInfinity = std::numeric_limits<Scalar>::has_infinity
                                        ? std::numeric_limits<Scalar>::infinity()
                                        : std::numeric_limits<Scalar>::max();

inline constexpr Index kDefaultBaseBlockOrder = 64;

struct FwConfig {
  Index base_block_order = kDefaultBaseBlockOrder;
};

/// Saturating path concatenation: infinity absorbs any finite weight.
template <typename Scalar>
constexpr Scalar path_add(Scalar a, Scalar b) {
  if constexpr (std::numeric_limits<Scalar>::has_infinity) {
    return a + b;
  } else {
    constexpr Scalar inf = kInfinity<Scalar>;
    if (a == inf || b == inf) return inf;
    if (b > 0 && a > inf - b) return inf;
    return a + b;
  }
}

template <typename Scalar>
BlockView<Scalar> whole_view(DistanceMatrix<Scalar>& d) {
  return BlockView<Scalar>(d.data(), d.rows(), d.cols(), Eigen::OuterStride<>(d.outerStride()));
}

/// In-place min-plus update over block-local indices, k outermost:
/// a(i, j) = min(a(i, j), b(i, k) + c(k, j)). Aliased views see values as they are updated.
template <typename Scalar>
void fwi_kernel(BlockView<Scalar> a, BlockView<Scalar> b, BlockView<Scalar> c) {
  const Index n = a.rows();
  if (a.cols() != n || b.rows() != n || b.cols() != n || c.rows() != n || c.cols() != n)
    throw std::invalid_argument("order mismatch");
  for (Index k = 0; k < n; ++k) {
    for (Index i = 0; i < n; ++i) {
      Scalar* ai = &a(i, 0);
      const Scalar& bik = b(i, k);
      const Scalar* ck = &c(k, 0);
      for (Index j = 0; j < n; ++j) {
        const Scalar via = path_add(bik, ck[j]);
        if (via < ai[j]) ai[j] = via;
      }
    }
  }
}

namespace detail {

template <typename Scalar>
void require_distance_input(const DistanceMatrix<Scalar>& w) {
  require_square(w);
  for (Index i = 0; i < w.rows(); ++i) {
    if (w(i, i) != Scalar(0)) throw std::invalid_argument("distance matrix diagonal must be zero");
  }
}

template <typename Scalar>
void check_negative_cycle(const DistanceMatrix<Scalar>& d) {
  for (Index i = 0; i < d.rows(); ++i) {
    if (d(i, i) < Scalar(0)) throw std::runtime_error("negative cycle");
  }
}

template <typename Scalar>
BlockView<Scalar> quadrant(const BlockView<Scalar>& v, Index bi, Index bj) {
  const Index h = v.rows() / 2;
  return BlockView<Scalar>(const_cast<Scalar*>(&v(bi * h, bj * h)), h, h,
                           Eigen::OuterStride<>(v.outerStride()));
}

struct NoObserver {
  template <typename View>
  void operator()(const View&, const View&, const View&) const {}
};

template <typename Scalar, typename Observer>
void fw_rec(BlockView<Scalar> a, BlockView<Scalar> b, BlockView<Scalar> c, Index base,
            Observer& observe) {
  if (a.rows() <= base || a.rows() == 1) {
    observe(a, b, c);
    fwi_kernel<Scalar>(a, b, c);
    return;
  }
  auto q = [](const BlockView<Scalar>& v, int id) { return quadrant<Scalar>(v, id / 10 - 1, id % 10 - 1); };
  // Fixed dependency order: every call reads blocks written by the ones before it.
  static constexpr int order[8][3] = {
      {11, 11, 11}, {12, 11, 12}, {21, 21, 11}, {22, 21, 12},
      {22, 22, 22}, {21, 22, 21}, {12, 12, 22}, {11, 12, 21},
  };
  for (const auto& call : order) {
    fw_rec<Scalar>(q(a, call[0]), q(b, call[1]), q(c, call[2]), base, observe);
  }
}

template <typename Scalar>
DistanceMatrix<Scalar> pad_distances(const DistanceMatrix<Scalar>& w) {
  const Index n = w.rows();
  const Index p = next_pow2(n);
  DistanceMatrix<Scalar> d = DistanceMatrix<Scalar>::Constant(p, p, kInfinity<Scalar>);
  d.diagonal().setZero();
  d.topLeftCorner(n, n) = w;
  return d;
}

template <typename Scalar, typename Observer>
DistanceMatrix<Scalar> fw_recursive_observed(const DistanceMatrix<Scalar>& w, const FwConfig& cfg,
                                             Observer& observe) {
  require_distance_input(w);
  if (cfg.base_block_order < 1) throw std::invalid_argument("base block order must be at least 1");
  DistanceMatrix<Scalar> d = pad_distances(w);
  auto v = whole_view(d);
  fw_rec<Scalar>(v, v, v, cfg.base_block_order, observe);
  DistanceMatrix<Scalar> out = d.topLeftCorner(w.rows(), w.rows());
  check_negative_cycle(out);
  return out;
}

// Counts, per kernel invocation, the distinct blocks it touches that the previous invocation
// did not touch.
class TouchCounter {
 public:
  using BlockId = std::tuple<std::intptr_t, Index>;

  void touch(std::vector<BlockId> blocks) {
    std::sort(blocks.begin(), blocks.end());
    blocks.erase(std::unique(blocks.begin(), blocks.end()), blocks.end());
    for (const auto& b : blocks) {
      if (!std::binary_search(previous_.begin(), previous_.end(), b)) ++count_;
    }
    previous_ = std::move(blocks);
  }
  std::uint64_t count() const { return count_; }

 private:
  std::vector<BlockId> previous_;
  std::uint64_t count_ = 0;
};

}  // namespace detail

/// Classic triple loop over the whole matrix (one fwi_kernel call on the full view).
/// Throws std::runtime_error("negative cycle") when any diagonal entry ends negative.
template <typename Scalar>
DistanceMatrix<Scalar> fw_iterative(const DistanceMatrix<Scalar>& w) {
  detail::require_distance_input(w);
  DistanceMatrix<Scalar> d = w;
  auto v = whole_view(d);
  fwi_kernel<Scalar>(v, v, v);
  detail::check_negative_cycle(d);
  return d;
}

/// Cache-oblivious recursive Floyd-Warshall. The input is padded to a power-of-two order with
/// isolated vertices; blocks of order <= cfg.base_block_order go to fwi_kernel.
template <typename Scalar>
DistanceMatrix<Scalar> fw_recursive(const DistanceMatrix<Scalar>& w, const FwConfig& cfg = {}) {
  detail::NoObserver none;
  return detail::fw_recursive_observed(w, cfg, none);
}

/// Working-set change count of an instrumented fw_recursive run: for each base-case
/// invocation, the number of its distinct blocks absent from the preceding invocation.
template <typename Scalar>
std::uint64_t count_block_touches(const DistanceMatrix<Scalar>& w, const FwConfig& cfg = {}) {
  detail::TouchCounter counter;
  auto observe = [&](const BlockView<Scalar>& a, const BlockView<Scalar>& b, const BlockView<Scalar>& c) {
    auto id = [](const BlockView<Scalar>& v) {
      return detail::TouchCounter::BlockId{reinterpret_cast<std::intptr_t>(v.data()), v.rows()};
    };
    counter.touch({id(a), id(b), id(c)});
  };
  try {
    detail::fw_recursive_observed(w, cfg, observe);
  } catch (const std::runtime_error&) {
    // a negative cycle does not change the access pattern
  }
  return counter.count();
}

/// The same proxy for the full-matrix sweep, measured on a grid of tile_order tiles: each
/// (k, tile) step of the i-j sweep touches its own tile plus the tiles holding row k and
/// column k segments.
inline std::uint64_t count_block_touches_iterative(Index n, Index tile_order) {
  if (n < 1 || tile_order < 1) throw std::invalid_argument("order must be at least 1");
  const Index tiles = (n + tile_order - 1) / tile_order;
  detail::TouchCounter counter;
  auto id = [tiles](Index r, Index c) {
    return detail::TouchCounter::BlockId{static_cast<std::intptr_t>(r * tiles + c), 0};
  };
  for (Index k = 0; k < n; ++k) {
    const Index kt = k / tile_order;
    for (Index it = 0; it < tiles; ++it) {
      for (Index jt = 0; jt < tiles; ++jt) counter.touch({id(it, jt), id(it, kt), id(kt, jt)});
    }
  }
  return counter.count();
}

/// Builds the weight matrix: zero diagonal, kInfinity for absent arcs, the lightest arc for
/// parallel arcs. Non-negative self-loops are ignored.
template <typename Scalar>
DistanceMatrix<Scalar> distance_matrix_from_edges(std::size_t n, std::span<const WeightedEdge> edges) {
  if (n < 1) throw std::invalid_argument("graph needs at least one vertex");
  DistanceMatrix<Scalar> d = DistanceMatrix<Scalar>::Constant(static_cast<Index>(n), static_cast<Index>(n),
                                                              kInfinity<Scalar>);
  d.diagonal().setZero();
  for (const auto& e : edges) {
    if (e.u >= n || e.v >= n) throw std::out_of_range("vertex id out of range");
    const auto w = static_cast<Scalar>(e.w);
    if (e.u == e.v) {
      if (w < Scalar(0)) throw std::runtime_error("negative cycle");
      continue;
    }
    d(e.u, e.v) = std::min(d(e.u, e.v), w);
  }
  return d;
}

}  // namespace mck
