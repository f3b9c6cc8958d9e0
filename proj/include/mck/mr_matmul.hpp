#pragma once

#include <cstring>
#include <string>
#include <type_traits>
#include <vector>

#include "mck/mapreduce.hpp"
#include "mck/matmul.hpp"

namespace mck {

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 3; i >= 0; --i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint32_t get_u32(std::string_view in, std::size_t at) {
  if (in.size() < at + 4) throw std::runtime_error("mr_matmul: truncated record");
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) v = (v << 8) | static_cast<unsigned char>(in[at + i]);
  return v;
}

// Output block (row, col) of the grid; big-endian so byte order equals numeric order.
inline std::string block_key(std::uint32_t row, std::uint32_t col) {
  std::string k;
  put_u32(k, row);
  put_u32(k, col);
  return k;
}

template <typename Scalar>
std::string encode_block(const Matrix<Scalar>& m) {
  std::string out(static_cast<std::size_t>(m.size()) * sizeof(Scalar), '\0');
  std::memcpy(out.data(), m.data(), out.size());
  return out;
}

template <typename Scalar>
Matrix<Scalar> decode_block(std::string_view bytes, Index order) {
  if (bytes.size() != static_cast<std::size_t>(order * order) * sizeof(Scalar))
    throw std::runtime_error("mr_matmul: bad block payload");
  Matrix<Scalar> m(order, order);
  std::memcpy(m.data(), bytes.data(), bytes.size());
  return m;
}

inline bool is_pow4(std::size_t r) {
  if (r == 0) return false;
  while (r % 4 == 0) r /= 4;
  return r == 1;
}

}  // namespace detail

/// A matrix product expressed as a MapReduce job. The operands are zero-padded to a multiple
/// of the grid side g = sqrt(reducers) and cut into g x g blocks; each input split is one block
/// of A or B. Map sends A(I, K) to every output block (I, J) of its block row and B(K, J) to
/// every output block of its block column. Output block (I, J) is owned by reduce task
/// I * g + J, which accumulates A(I, K) * B(K, J) for K ascending.
template <typename Scalar>
struct MrMatmulPlan {
  static_assert(std::is_trivially_copyable_v<Scalar>);

  mr::Job job;
  std::vector<mr::Bytes> splits;
  std::size_t reducers = 1;
  std::uint32_t grid = 1;
  Index n = 0;
  Index block_order = 0;

  template <typename DerivedA, typename DerivedB>
  MrMatmulPlan(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b, std::size_t r)
      : reducers(r) {
    require_same_order(a, b);
    if (!detail::is_pow4(r)) throw std::invalid_argument("reducers must be a power of four");
    while (static_cast<std::size_t>(grid) * grid < r) ++grid;
    n = a.rows();
    block_order = (n + grid - 1) / grid;
    const Index padded = block_order * grid;
    Matrix<Scalar> pa = Matrix<Scalar>::Zero(padded, padded), pb = Matrix<Scalar>::Zero(padded, padded);
    pa.topLeftCorner(n, n) = a;
    pb.topLeftCorner(n, n) = b;

    // split: tag, block row, block col, payload
    for (char tag : {'A', 'B'}) {
      const Matrix<Scalar>& src = tag == 'A' ? pa : pb;
      for (std::uint32_t row = 0; row < grid; ++row) {
        for (std::uint32_t col = 0; col < grid; ++col) {
          std::string s(1, tag);
          detail::put_u32(s, row);
          detail::put_u32(s, col);
          s += detail::encode_block<Scalar>(src.block(row * block_order, col * block_order, block_order, block_order));
          splits.push_back(std::move(s));
        }
      }
    }

    const std::uint32_t g = grid;
    const Index order = block_order;
    job.map = [g](std::string_view split) {
      const char tag = split.at(0);
      const std::uint32_t row = detail::get_u32(split, 1), col = detail::get_u32(split, 5);
      const std::string_view payload = split.substr(9);
      std::vector<mr::KeyValue> out;
      out.reserve(g);
      for (std::uint32_t other = 0; other < g; ++other) {
        // A(row, k=col) feeds (row, other); B(k=row, col) feeds (other, col). Values carry k.
        std::string value(1, tag);
        detail::put_u32(value, tag == 'A' ? col : row);
        value.append(payload);
        out.push_back({tag == 'A' ? detail::block_key(row, other) : detail::block_key(other, col), std::move(value)});
      }
      return out;
    };
    job.reduce = [g, order](std::string_view key, std::span<const mr::Bytes> values) {
      // values are byte-sorted: every A block by k, then every B block by k
      if (values.size() != 2 * static_cast<std::size_t>(g)) throw std::runtime_error("mr_matmul: incomplete block group");
      Matrix<Scalar> c = Matrix<Scalar>::Zero(order, order);
      for (std::uint32_t k = 0; k < g; ++k) {
        const auto& av = values[k];
        const auto& bv = values[g + k];
        if (av[0] != 'A' || bv[0] != 'B' || detail::get_u32(av, 1) != k || detail::get_u32(bv, 1) != k)
          throw std::runtime_error("mr_matmul: malformed block group");
        const Matrix<Scalar> ak = detail::decode_block<Scalar>(std::string_view(av).substr(5), order);
        const Matrix<Scalar> bk = detail::decode_block<Scalar>(std::string_view(bv).substr(5), order);
        detail::accumulate<Scalar>(ak, bk, c);
      }
      return std::vector<mr::KeyValue>{{std::string(key), detail::encode_block<Scalar>(c)}};
    };
    job.partition = [g](std::string_view key, std::size_t) -> std::size_t {
      return static_cast<std::size_t>(detail::get_u32(key, 0)) * g + detail::get_u32(key, 4);
    };
  }

  /// Job configuration with the reducer count this plan was built for.
  mr::JobConfig configure(mr::JobConfig cfg) const {
    cfg.num_reduce_tasks = reducers;
    return cfg;
  }

  /// Reassembles the n x n product from the job output.
  Matrix<Scalar> assemble(std::span<const mr::KeyValue> output) const {
    if (output.size() != reducers) throw std::runtime_error("mr_matmul: missing output blocks");
    const Index padded = block_order * grid;
    Matrix<Scalar> c(padded, padded);
    for (const auto& kv : output) {
      const std::uint32_t row = detail::get_u32(kv.key, 0), col = detail::get_u32(kv.key, 4);
      c.block(row * block_order, col * block_order, block_order, block_order) =
          detail::decode_block<Scalar>(kv.value, block_order);
    }
    return crop(c, n);
  }
};

/// Block-grid matrix product on the MapReduce engine; see MrMatmulPlan.
template <typename DerivedA, typename DerivedB>
Matrix<typename DerivedA::Scalar> mr_matmul(const Eigen::MatrixBase<DerivedA>& a,
                                            const Eigen::MatrixBase<DerivedB>& b,
                                            std::size_t reducers, const mr::JobConfig& cfg,
                                            mr::JobReport* report = nullptr) {
  const MrMatmulPlan<typename DerivedA::Scalar> plan(a, b, reducers);
  mr::JobResult result = mr::run_job(plan.job, plan.splits, plan.configure(cfg));
  if (report) *report = result.report;
  return plan.assemble(result.output);
}

}  // namespace mck
