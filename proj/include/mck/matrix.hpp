#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace mck {

using Index = Eigen::Index;

/// Dense square matrix, row-major. All multiplication kernels operate on this type.
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using MatrixXd = Matrix<double>;

/// Exact event counts for one kernel run.
struct MulStats {
  std::uint64_t scalar_multiplications = 0;
  std::uint64_t scalar_additions = 0;

  MulStats& operator+=(const MulStats& o) {
    scalar_multiplications += o.scalar_multiplications;
    scalar_additions += o.scalar_additions;
    return *this;
  }
};

inline bool is_pow2(Index n) { return n > 0 && (n & (n - 1)) == 0; }

inline Index next_pow2(Index n) {
  Index p = 1;
  while (p < n) p <<= 1;
  return p;
}

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("matrix must be square");
  if (m.rows() < 1) throw std::invalid_argument("matrix order must be at least 1");
}

template <typename DerivedA, typename DerivedB>
void require_same_order(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  require_square(a);
  require_square(b);
  if (a.rows() != b.rows()) throw std::invalid_argument("order mismatch");
}

/// Zero-pads to the next power-of-two order. The top-left block is `m`.
template <typename Derived>
Matrix<typename Derived::Scalar> pad_pow2(const Eigen::MatrixBase<Derived>& m) {
  require_square(m);
  const Index n = m.rows();
  const Index p = next_pow2(n);
  Matrix<typename Derived::Scalar> out = Matrix<typename Derived::Scalar>::Zero(p, p);
  out.topLeftCorner(n, n) = m;
  return out;
}

template <typename Derived>
Matrix<typename Derived::Scalar> crop(const Eigen::MatrixBase<Derived>& m, Index n) {
  if (n < 1 || n > m.rows() || n > m.cols()) throw std::invalid_argument("crop order out of range");
  return m.topLeftCorner(n, n);
}

/// Text format: first line is the order n, then n rows of n whitespace-separated values.
MatrixXd read_matrix(std::istream& in);
void write_matrix(std::ostream& out, const MatrixXd& m);

MatrixXd load_matrix(const std::string& path);
void save_matrix(const std::string& path, const MatrixXd& m);

}  // namespace mck
