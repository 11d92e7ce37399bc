// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "rcp/tensor.hpp"
#include "rcp/types.hpp"

namespace rcp {

/// Rank-R model sum_r weights(r) * outer(factors[0].col(r), ..., factors[N-1].col(r)).
template <typename Scalar>
struct Kruskal {
  Vector<Scalar> weights;               ///< R entries
  std::vector<Matrix<Scalar>> factors;  ///< N matrices of extent(n) x R

  Index rank() const { return weights.size(); }
  Index order() const { return static_cast<Index>(factors.size()); }

  Shape shape() const {
    Shape s;
    s.reserve(factors.size());
    for (const auto& f : factors) s.push_back(f.rows());
    return s;
  }
};

using KruskalXd = Kruskal<double>;

namespace detail {

template <typename Scalar>
void validate_model(const Kruskal<Scalar>& k) {
  check(!k.factors.empty(), "Kruskal: order must be at least 1");
  check(k.weights.size() >= 1, "Kruskal: rank must be at least 1");
  for (const auto& f : k.factors) {
    check(f.cols() == k.weights.size(),
          "Kruskal: every factor must have one column per component");
    check(f.rows() >= 1, "Kruskal: factor extents must be at least 1");
  }
}

}  // namespace detail

/// Khatri-Rao chain over every factor except `skip`, highest mode first, so
/// that column r lists the outer-product entries of component r in the same
/// order as the canonical mode-`skip` matricization columns.
template <typename Scalar>
Matrix<Scalar> khatri_rao_all_but(const std::vector<Matrix<Scalar>>& factors,
                                  Index skip) {
  detail::check(skip >= 0 && skip < static_cast<Index>(factors.size()),
                "khatri_rao_all_but: mode index out of range");
  const Index r = factors[static_cast<std::size_t>(skip)].cols();
  Matrix<Scalar> out = Matrix<Scalar>::Ones(1, r);
  for (Index n = static_cast<Index>(factors.size()) - 1; n >= 0; --n) {
    if (n == skip) continue;
    out = khatri_rao(out, factors[static_cast<std::size_t>(n)]);
  }
  return out;
}

/// Hadamard product of the factor Gram matrices of every mode except `skip`
/// (pass -1 to include all modes).
template <typename Scalar>
Matrix<Scalar> gram_hadamard_all_but(const std::vector<Matrix<Scalar>>& factors,
                                     Index skip) {
  detail::check(!factors.empty(), "gram_hadamard_all_but: no factors");
  const Index r = factors[0].cols();
  Matrix<Scalar> out = Matrix<Scalar>::Ones(r, r);
  for (Index n = 0; n < static_cast<Index>(factors.size()); ++n) {
    if (n == skip) continue;
    const auto& f = factors[static_cast<std::size_t>(n)];
    out = out.cwiseProduct((f.transpose() * f).eval()).eval();
  }
  return out;
}

/// Squared Frobenius norm of the model, from factor algebra alone.
template <typename Scalar>
Scalar squared_norm(const Kruskal<Scalar>& k) {
  detail::validate_model(k);
  const Matrix<Scalar> g = gram_hadamard_all_but(k.factors, -1);
  const Scalar v = k.weights.dot(g * k.weights);
  return std::max(v, Scalar(0));
}

/// Frobenius inner product of a dense tensor with the model, without
/// materializing the model.
template <typename Scalar>
Scalar inner(const Tensor<Scalar>& x, const Kruskal<Scalar>& k) {
  detail::validate_model(k);
  detail::check(x.shape() == k.shape(), "inner: shapes must match");
  const Matrix<Scalar> w = unfold(x, 0) * khatri_rao_all_but(k.factors, 0);
  return (w.cwiseProduct(k.factors[0]).colwise().sum().transpose().array() *
          k.weights.array())
      .sum();
}

/// Dense tensor represented by the model.
template <typename Scalar>
Tensor<Scalar> reconstruct(const Kruskal<Scalar>& k) {
  detail::validate_model(k);
  const Matrix<Scalar> m = k.factors[0] * k.weights.asDiagonal() *
                           khatri_rao_all_but(k.factors, 0).transpose();
  return fold(m, 0, k.shape());
}

/// Canonical form: unit-norm columns, non-negative weights sorted in
/// non-increasing order, and (for order >= 2) the largest-magnitude entry of
/// each first-factor column non-negative. Zero columns become the first
/// standard basis vector with weight zero. Already-canonical input is
/// returned unchanged.
template <typename Scalar>
Kruskal<Scalar> normalize(Kruskal<Scalar> k) {
  detail::validate_model(k);
  const Index r = k.rank();
  const Index n = k.order();
  const Scalar skip_window = Scalar(32) * Eigen::NumTraits<Scalar>::epsilon();

  for (Index j = 0; j < r; ++j) {
    for (Index m = 0; m < n; ++m) {
      auto col = k.factors[static_cast<std::size_t>(m)].col(j);
      const Scalar nrm = col.norm();
      if (nrm == Scalar(0)) {
        col.setZero();
        col(0) = Scalar(1);
        k.weights(j) = Scalar(0);
      } else if (std::abs(nrm - Scalar(1)) > skip_window) {
        col /= nrm;
        k.weights(j) *= nrm;
      }
    }
    if (k.weights(j) < Scalar(0)) {
      k.weights(j) = -k.weights(j);
      k.factors[0].col(j) = -k.factors[0].col(j);
    }
    if (n >= 2) {
      auto lead = k.factors[0].col(j);
      Index at = 0;
      lead.cwiseAbs().maxCoeff(&at);
      if (lead(at) < Scalar(0)) {
        lead = -lead;
        k.factors[1].col(j) = -k.factors[1].col(j);
      }
    }
  }

  std::vector<Index> order(static_cast<std::size_t>(r));
  std::iota(order.begin(), order.end(), Index(0));
  const auto& lead = k.factors[0];
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (k.weights(a) != k.weights(b)) return k.weights(a) > k.weights(b);
    for (Index i = 0; i < lead.rows(); ++i)
      if (lead(i, a) != lead(i, b)) return lead(i, a) < lead(i, b);
    return false;
  });

  bool is_identity = true;
  for (Index j = 0; j < r; ++j)
    if (order[static_cast<std::size_t>(j)] != j) is_identity = false;
  if (is_identity) return k;

  Kruskal<Scalar> out = k;
  for (Index j = 0; j < r; ++j) {
    const Index src = order[static_cast<std::size_t>(j)];
    out.weights(j) = k.weights(src);
    for (Index m = 0; m < n; ++m)
      out.factors[static_cast<std::size_t>(m)].col(j) =
          k.factors[static_cast<std::size_t>(m)].col(src);
  }
  return out;
}

/// Convergence functional rho = 1 - (||x||^2 + ||k||^2 - 2<k, x>) / ||x||^2,
/// computed from factor algebra without materializing the model.
template <typename Scalar>
Scalar fit(const Tensor<Scalar>& x, const Kruskal<Scalar>& k) {
  const Scalar nx2 = x.squared_norm();
  detail::check(nx2 > Scalar(0), "fit: tensor norm must be positive");
  return Scalar(1) - (nx2 + squared_norm(k) - Scalar(2) * inner(x, k)) / nx2;
}

/// ||x - reconstruct(k)||_F / ||x||_F.
template <typename Scalar>
Scalar relative_error(const Tensor<Scalar>& x, const Kruskal<Scalar>& k) {
  detail::check(x.shape() == k.shape(), "relative_error: shapes must match");
  const Scalar nx = x.norm();
  detail::check(nx > Scalar(0), "relative_error: tensor norm must be positive");
  return (x.values() - reconstruct(k).values()).norm() / nx;
}

/// Maps a model of a compressed tensor back to the ambient space by applying
/// the per-mode bases, then renormalizes to canonical form.
template <typename Scalar>
Kruskal<Scalar> recover(const Kruskal<Scalar>& k,
                        const std::vector<ModeBasis<Scalar>>& bases) {
  detail::validate_model(k);
  detail::check(static_cast<Index>(bases.size()) == k.order(),
                "recover: need exactly one basis per mode");
  Kruskal<Scalar> out;
  out.weights = k.weights;
  out.factors.resize(bases.size());
  for (std::size_t m = 0; m < bases.size(); ++m) {
    const auto& basis = bases[m];
    if (basis.identity) {
      detail::check(basis.dim == k.factors[m].rows(),
                    "recover: identity basis extent mismatch");
      out.factors[m] = k.factors[m];
    } else {
      detail::check(basis.q.cols() == k.factors[m].rows(),
                    "recover: basis columns must match the compressed extent");
      out.factors[m] = basis.q * k.factors[m];
    }
  }
  return normalize(std::move(out));
}

}  // namespace rcp
