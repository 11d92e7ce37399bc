// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace rcp {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;

/// Tensor extents, one entry per mode.
using Shape = std::vector<Index>;

namespace detail {

inline void check(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

}  // namespace detail

/// Number of elements spanned by a shape. Throws on overflow or on a
/// non-positive extent.
inline Index shape_size(const Shape& shape) {
  Index total = 1;
  for (Index e : shape) {
    detail::check(e >= 1, "shape: every extent must be at least 1");
    detail::check(total <= std::numeric_limits<Index>::max() / e,
                  "shape: element count overflows Index");
    total *= e;
  }
  return total;
}

inline std::string shape_string(const Shape& shape, char sep = 'x') {
  std::string out;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += sep;
    out += std::to_string(shape[i]);
  }
  return out;
}

/// Orthonormal basis attached to one tensor mode. Modes that were left
/// uncompressed carry an identity tag instead of an explicit matrix.
template <typename Scalar>
struct ModeBasis {
  Matrix<Scalar> q;         ///< dim x l with orthonormal columns; empty when identity
  bool identity = false;    ///< true when the mode was not compressed
  Index dim = 0;            ///< ambient extent of the mode
  bool rank_warning = false;  ///< QR saw a collapsed diagonal while orthonormalizing

  static ModeBasis Identity(Index extent) {
    ModeBasis b;
    b.identity = true;
    b.dim = extent;
    return b;
  }

  Index rows() const { return identity ? dim : q.rows(); }
  Index cols() const { return identity ? dim : q.cols(); }
};

using ModeBasisXd = ModeBasis<double>;

}  // namespace rcp
