#pragma once

#include <algorithm>
#include <thread>
#include <utility>
#include <vector>

#include "mck/matrix.hpp"

namespace mck {

inline constexpr Index kDefaultStrassenCutoff = 64;
inline constexpr Index kDefaultBlockedCutoff = 64;

namespace detail {

template <typename Scalar>
using ConstRef = Eigen::Ref<const Matrix<Scalar>, 0, Eigen::OuterStride<>>;
template <typename Scalar>
using MutRef = Eigen::Ref<Matrix<Scalar>, 0, Eigen::OuterStride<>>;

// c(i, j) += sum_k a(i, k) * b(k, j) over rows [row_begin, row_end), with k ascending for every
// element. The i-k-j order keeps row-major access while preserving that per-element order.
template <typename Scalar>
void accumulate_rows(const ConstRef<Scalar>& a, const ConstRef<Scalar>& b, MutRef<Scalar> c,
                     Index row_begin, Index row_end) {
  const Index n = a.cols();
  const Index m = b.cols();
  for (Index i = row_begin; i < row_end; ++i) {
    Scalar* ci = c.data() + i * c.outerStride();
    for (Index k = 0; k < n; ++k) {
      const Scalar aik = a(i, k);
      const Scalar* bk = b.data() + k * b.outerStride();
      for (Index j = 0; j < m; ++j) ci[j] = ci[j] + aik * bk[j];
    }
  }
}

template <typename Scalar>
MulStats accumulate(const ConstRef<Scalar>& a, const ConstRef<Scalar>& b, MutRef<Scalar> c) {
  accumulate_rows<Scalar>(a, b, c, 0, a.rows());
  const auto n = static_cast<std::uint64_t>(a.rows());
  return {n * n * n, n * n * n};
}

template <typename Scalar>
void blocked_rec(const ConstRef<Scalar>& a, const ConstRef<Scalar>& b, MutRef<Scalar> c,
                 Index cutoff, int threads) {
  const Index n = a.rows();
  if (n <= cutoff || n == 1) {
    accumulate<Scalar>(a, b, c);
    return;
  }
  const Index h = n / 2;
  // Each quadrant of C is written by exactly one task; its two products run in order so the
  // k-summation order matches the naive kernel.
  auto quadrant = [&](Index bi, Index bj, int budget) {
    auto cq = c.block(bi * h, bj * h, h, h);
    blocked_rec<Scalar>(a.block(bi * h, 0, h, h), b.block(0, bj * h, h, h), cq, cutoff, budget);
    blocked_rec<Scalar>(a.block(bi * h, h, h, h), b.block(h, bj * h, h, h), cq, cutoff, budget);
  };
  if (threads <= 1) {
    for (Index q = 0; q < 4; ++q) quadrant(q / 2, q % 2, 1);
    return;
  }
  const int sub = std::max(1, threads / 4);
  std::vector<std::jthread> workers;
  workers.reserve(3);
  for (Index q = 1; q < 4; ++q) workers.emplace_back([&, q] { quadrant(q / 2, q % 2, sub); });
  quadrant(0, 0, sub);
}

template <typename Scalar>
Matrix<Scalar> strassen_rec(const ConstRef<Scalar>& a, const ConstRef<Scalar>& b, Index cutoff,
                            MulStats& stats) {
  const Index n = a.rows();
  Matrix<Scalar> c = Matrix<Scalar>::Zero(n, n);
  if (n <= cutoff || n == 1) {
    stats += accumulate<Scalar>(a, b, c);
    return c;
  }
  const Index h = n / 2;
  const auto a11 = a.topLeftCorner(h, h), a12 = a.topRightCorner(h, h);
  const auto a21 = a.bottomLeftCorner(h, h), a22 = a.bottomRightCorner(h, h);
  const auto b11 = b.topLeftCorner(h, h), b12 = b.topRightCorner(h, h);
  const auto b21 = b.bottomLeftCorner(h, h), b22 = b.bottomRightCorner(h, h);

  auto mul = [&](const Matrix<Scalar>& x, const Matrix<Scalar>& y) {
    return strassen_rec<Scalar>(x, y, cutoff, stats);
  };
  const Matrix<Scalar> p1 = mul(a11 + a22, b11 + b22);
  const Matrix<Scalar> p2 = mul(a21 + a22, b11);
  const Matrix<Scalar> p3 = mul(a11, b12 - b22);
  const Matrix<Scalar> p4 = mul(a22, b21 - b11);
  const Matrix<Scalar> p5 = mul(a11 + a12, b22);
  const Matrix<Scalar> p6 = mul(a21 - a11, b11 + b12);
  const Matrix<Scalar> p7 = mul(a12 - a22, b21 + b22);

  c.topLeftCorner(h, h) = p1 + p4 - p5 + p7;
  c.topRightCorner(h, h) = p3 + p5;
  c.bottomLeftCorner(h, h) = p2 + p4;
  c.bottomRightCorner(h, h) = p1 + p3 - p2 + p6;

  // 10 operand sums/differences feeding the products, 8 in the combinations.
  const auto hh = static_cast<std::uint64_t>(h) * static_cast<std::uint64_t>(h);
  stats.scalar_additions += 18 * hh;
  return c;
}

}  // namespace detail

/// Textbook triple loop. Records exactly n^3 multiplications.
template <typename DerivedA, typename DerivedB>
std::pair<Matrix<typename DerivedA::Scalar>, MulStats> matmul_naive(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  require_same_order(a, b);
  const Matrix<Scalar> ea = a, eb = b;
  Matrix<Scalar> c = Matrix<Scalar>::Zero(ea.rows(), ea.rows());
  const MulStats stats = detail::accumulate<Scalar>(ea, eb, c);
  return {std::move(c), stats};
}

/// Row-partitioned parallel product: one contiguous row range per worker. The per-element
/// summation order is the naive kernel's, so the result is bitwise identical to matmul_naive.
template <typename DerivedA, typename DerivedB>
Matrix<typename DerivedA::Scalar> matmul_parallel(const Eigen::MatrixBase<DerivedA>& a,
                                                  const Eigen::MatrixBase<DerivedB>& b,
                                                  int threads) {
  using Scalar = typename DerivedA::Scalar;
  require_same_order(a, b);
  if (threads < 1) throw std::invalid_argument("threads must be at least 1");
  const Matrix<Scalar> ea = a, eb = b;
  const Index n = ea.rows();
  Matrix<Scalar> c = Matrix<Scalar>::Zero(n, n);
  const Index workers = std::min<Index>(threads, n);
  const detail::ConstRef<Scalar> ra(ea), rb(eb);
  detail::MutRef<Scalar> rc(c);
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (Index w = 0; w < workers; ++w) {
      const Index begin = n * w / workers;
      const Index end = n * (w + 1) / workers;
      pool.emplace_back([&, begin, end] { detail::accumulate_rows<Scalar>(ra, rb, rc, begin, end); });
    }
  }
  return c;
}

/// Recursive 2x2 block product on the power-of-two padded operands. The four output quadrants
/// are computed concurrently while the thread budget allows; below `cutoff` the naive kernel
/// runs.
template <typename DerivedA, typename DerivedB>
Matrix<typename DerivedA::Scalar> matmul_blocked(const Eigen::MatrixBase<DerivedA>& a,
                                                 const Eigen::MatrixBase<DerivedB>& b,
                                                 int threads, Index cutoff = kDefaultBlockedCutoff) {
  using Scalar = typename DerivedA::Scalar;
  require_same_order(a, b);
  if (threads < 1) throw std::invalid_argument("threads must be at least 1");
  if (cutoff < 1) throw std::invalid_argument("cutoff must be at least 1");
  const Index n = a.rows();
  const Matrix<Scalar> pa = pad_pow2(a), pb = pad_pow2(b);
  Matrix<Scalar> c = Matrix<Scalar>::Zero(pa.rows(), pa.rows());
  detail::blocked_rec<Scalar>(pa, pb, c, cutoff, threads);
  return crop(c, n);
}

/// Strassen's seven-product recursion on the power-of-two padded operands.
/// With cutoff 1 and n = 2^k the multiplication count is exactly 7^k.
template <typename DerivedA, typename DerivedB>
std::pair<Matrix<typename DerivedA::Scalar>, MulStats> matmul_strassen(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
    Index cutoff = kDefaultStrassenCutoff) {
  using Scalar = typename DerivedA::Scalar;
  require_same_order(a, b);
  if (cutoff < 1) throw std::invalid_argument("cutoff must be at least 1");
  const Index n = a.rows();
  const Matrix<Scalar> pa = pad_pow2(a), pb = pad_pow2(b);
  MulStats stats;
  Matrix<Scalar> c = detail::strassen_rec<Scalar>(pa, pb, cutoff, stats);
  return {crop(c, n), stats};
}

}  // namespace mck
