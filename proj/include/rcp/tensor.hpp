// SPDX-License-Identifier: MIT
#pragma once

#include <cmath>
#include <initializer_list>
#include <type_traits>
#include <utility>
#include <vector>

#include "rcp/types.hpp"

namespace rcp {

/// Dense N-way tensor. Values are stored flat in row-major order (the last
/// index varies fastest). Matricization follows the convention where the
/// column index of the mode-n fiber at multi-index (i_1, ..., i_N) is
/// sum_{k != n} i_k * prod_{m != n, m < k} I_m, i.e. lower modes vary
/// fastest along the columns.
template <typename Scalar>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(Shape shape) : shape_(std::move(shape)) {
    detail::check(!shape_.empty(), "Tensor: order must be at least 1");
    values_ = Vector<Scalar>::Zero(shape_size(shape_));
  }

  Tensor(Shape shape, Vector<Scalar> values)
      : shape_(std::move(shape)), values_(std::move(values)) {
    detail::check(!shape_.empty(), "Tensor: order must be at least 1");
    detail::check(values_.size() == shape_size(shape_),
                  "Tensor: value count does not match the shape");
  }

  /// Builds a tensor from external data, rejecting non-finite entries.
  static Tensor from_values(Shape shape, Vector<Scalar> values) {
    Tensor t(std::move(shape), std::move(values));
    detail::check(t.all_finite(), "Tensor: values must be finite");
    return t;
  }

  Index order() const { return static_cast<Index>(shape_.size()); }
  const Shape& shape() const { return shape_; }

  Index extent(Index mode) const {
    detail::check(mode >= 0 && mode < order(), "Tensor: mode index out of range");
    return shape_[static_cast<std::size_t>(mode)];
  }

  Index size() const { return values_.size(); }

  Vector<Scalar>& values() { return values_; }
  const Vector<Scalar>& values() const { return values_; }
  Scalar* data() { return values_.data(); }
  const Scalar* data() const { return values_.data(); }

  template <typename... Ix>
  Scalar operator()(Ix... ix) const {
    return values_[flat_index({static_cast<Index>(ix)...})];
  }

  template <typename... Ix>
  Scalar& operator()(Ix... ix) {
    return values_[flat_index({static_cast<Index>(ix)...})];
  }

  Scalar norm() const { return values_.norm(); }
  Scalar squared_norm() const { return values_.squaredNorm(); }
  bool all_finite() const { return values_.allFinite(); }

  Tensor& operator+=(const Tensor& other) {
    detail::check(shape_ == other.shape_, "Tensor: shape mismatch");
    values_ += other.values_;
    return *this;
  }

  Tensor& operator-=(const Tensor& other) {
    detail::check(shape_ == other.shape_, "Tensor: shape mismatch");
    values_ -= other.values_;
    return *this;
  }

  Tensor& operator*=(Scalar s) {
    values_ *= s;
    return *this;
  }

  friend Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
  friend Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }

 private:
  Index flat_index(std::initializer_list<Index> ix) const {
    detail::check(static_cast<Index>(ix.size()) == order(),
                  "Tensor: wrong number of indices");
    Index flat = 0;
    std::size_t k = 0;
    for (Index i : ix) {
      detail::check(i >= 0 && i < shape_[k], "Tensor: index out of range");
      flat = flat * shape_[k] + i;
      ++k;
    }
    return flat;
  }

  Shape shape_;
  Vector<Scalar> values_;
};

using TensorXd = Tensor<double>;

namespace detail {

/// For the index block `ext` (listed in mode order), maps the rank of each
/// multi-index under row-major enumeration (last entry fastest) to its rank
/// under first-entry-fastest enumeration.
inline std::vector<Index> rowmajor_to_colmajor(const std::vector<Index>& ext) {
  Index total = 1;
  for (Index e : ext) total *= e;
  std::vector<Index> map(static_cast<std::size_t>(total));
  const int k = static_cast<int>(ext.size());
  std::vector<Index> stride(ext.size()), digit(ext.size(), 0);
  Index s = 1;
  for (int m = 0; m < k; ++m) {
    stride[static_cast<std::size_t>(m)] = s;
    s *= ext[static_cast<std::size_t>(m)];
  }
  Index rank = 0;
  for (Index i = 0; i < total; ++i) {
    map[static_cast<std::size_t>(i)] = rank;
    for (int m = k - 1; m >= 0; --m) {
      const auto mm = static_cast<std::size_t>(m);
      if (++digit[mm] < ext[mm]) {
        rank += stride[mm];
        break;
      }
      digit[mm] = 0;
      rank -= (ext[mm] - 1) * stride[mm];
    }
  }
  return map;
}

struct UnfoldGeometry {
  Index extent = 0;
  Index left = 1;   // combinations of modes below the unfold mode
  Index right = 1;  // combinations of modes above the unfold mode
  std::vector<Index> low_map;
  std::vector<Index> high_map;
};

inline UnfoldGeometry unfold_geometry(const Shape& shape, Index mode) {
  check(mode >= 0 && mode < static_cast<Index>(shape.size()),
        "unfold: mode index out of range");
  UnfoldGeometry g;
  const auto m = static_cast<std::size_t>(mode);
  g.extent = shape[m];
  std::vector<Index> low(shape.begin(), shape.begin() + m);
  std::vector<Index> high(shape.begin() + m + 1, shape.end());
  for (Index e : low) g.left *= e;
  for (Index e : high) g.right *= e;
  g.low_map = rowmajor_to_colmajor(low);
  g.high_map = rowmajor_to_colmajor(high);
  return g;
}

}  // namespace detail

/// Mode-n matricization: an extent(mode) x (size / extent(mode)) matrix
/// whose columns are the mode-n fibers in canonical order.
template <typename Scalar>
Matrix<Scalar> unfold(const Tensor<Scalar>& t, Index mode) {
  const auto g = detail::unfold_geometry(t.shape(), mode);
  Matrix<Scalar> m(g.extent, g.left * g.right);
  const Scalar* src = t.data();
  for (Index l = 0; l < g.left; ++l) {
    const Index base = g.low_map[static_cast<std::size_t>(l)];
    for (Index i = 0; i < g.extent; ++i)
      for (Index r = 0; r < g.right; ++r)
        m(i, base + g.left * g.high_map[static_cast<std::size_t>(r)]) = *src++;
  }
  return m;
}

/// Inverse of unfold for the given mode and shape. Accepts any Eigen
/// expression; plain matrices bind without a copy.
template <typename DerivedM>
Tensor<typename DerivedM::Scalar> fold(const Eigen::MatrixBase<DerivedM>& m_in,
                                       Index mode, const Shape& shape) {
  using Scalar = typename DerivedM::Scalar;
  const auto& m = m_in.derived().eval();
  const auto g = detail::unfold_geometry(shape, mode);
  detail::check(m.rows() == g.extent && m.cols() == g.left * g.right,
                "fold: matrix dimensions do not match the target shape");
  Tensor<Scalar> t(shape);
  Scalar* dst = t.data();
  for (Index l = 0; l < g.left; ++l) {
    const Index base = g.low_map[static_cast<std::size_t>(l)];
    for (Index i = 0; i < g.extent; ++i)
      for (Index r = 0; r < g.right; ++r)
        *dst++ = m(i, base + g.left * g.high_map[static_cast<std::size_t>(r)]);
  }
  return t;
}

/// Mode-n product t x_n m: contracts the mode-n fibers with the rows of m.
template <typename Scalar, typename DerivedM>
Tensor<Scalar> mode_product(const Tensor<Scalar>& t,
                            const Eigen::MatrixBase<DerivedM>& m_in, Index mode) {
  static_assert(std::is_same_v<typename DerivedM::Scalar, Scalar>,
                "mode_product: scalar types must match");
  const auto& m = m_in.derived().eval();
  detail::check(mode >= 0 && mode < t.order(), "mode_product: mode index out of range");
  detail::check(m.cols() == t.extent(mode),
                "mode_product: matrix columns must match the mode extent");
  Shape out_shape = t.shape();
  out_shape[static_cast<std::size_t>(mode)] = m.rows();
  return fold((m * unfold(t, mode)).eval(), mode, out_shape);
}

/// Column-wise Kronecker product of two matrices with equal column counts.
template <typename DerivedA, typename DerivedB>
Matrix<typename DerivedA::Scalar> khatri_rao(const Eigen::MatrixBase<DerivedA>& a_in,
                                             const Eigen::MatrixBase<DerivedB>& b_in) {
  using Scalar = typename DerivedA::Scalar;
  static_assert(std::is_same_v<typename DerivedB::Scalar, Scalar>,
                "khatri_rao: scalar types must match");
  const auto& a = a_in.derived().eval();
  const auto& b = b_in.derived().eval();
  detail::check(a.cols() == b.cols(), "khatri_rao: column counts must match");
  Matrix<Scalar> out(a.rows() * b.rows(), a.cols());
  for (Index r = 0; r < a.cols(); ++r)
    for (Index i = 0; i < a.rows(); ++i)
      out.col(r).segment(i * b.rows(), b.rows()) = a(i, r) * b.col(r);
  return out;
}

/// Elementwise product of two equally sized matrices.
template <typename DerivedA, typename DerivedB>
Matrix<typename DerivedA::Scalar> hadamard(const Eigen::MatrixBase<DerivedA>& a,
                                           const Eigen::MatrixBase<DerivedB>& b) {
  static_assert(std::is_same_v<typename DerivedA::Scalar, typename DerivedB::Scalar>,
                "hadamard: scalar types must match");
  detail::check(a.rows() == b.rows() && a.cols() == b.cols(),
                "hadamard: dimensions must match");
  return a.cwiseProduct(b);
}

/// Frobenius inner product of two equally shaped tensors.
template <typename Scalar>
Scalar inner(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  detail::check(a.shape() == b.shape(), "inner: shapes must match");
  return a.values().dot(b.values());
}

}  // namespace rcp
