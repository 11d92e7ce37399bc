// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "rcp/random.hpp"
#include "rcp/tensor.hpp"
#include "rcp/types.hpp"

namespace rcp {

enum class RandomDistribution { gaussian, uniform };

/// How to re-orthogonalize the sample matrix between power iterations.
/// The pivoted-LU factor is the default; QR costs more but is available
/// for comparison.
enum class PowerStabilizer { lu, qr };

struct CompressConfig {
  Index target_rank = 0;     ///< k; decompose() fills it in when left at 0
  Index oversampling = 10;   ///< p
  int power_iterations = 2;  ///< q
  /// Modes to compress (0-based). Disengaged means all modes; an empty list
  /// means none.
  std::optional<std::vector<Index>> modes;
  RandomDistribution distribution = RandomDistribution::gaussian;
  PowerStabilizer stabilizer = PowerStabilizer::lu;
  std::uint64_t seed = 0;
};

template <typename Scalar>
struct CompressionResult {
  Tensor<Scalar> compressed;
  std::vector<ModeBasis<Scalar>> bases;  ///< one per mode, identity-tagged when skipped
};

using CompressionResultXd = CompressionResult<double>;

namespace detail {

/// Permuted unit-lower-trapezoidal factor of a pivoted LU; spans the same
/// leading column space as m but with entries bounded by 1.
template <typename Scalar>
Matrix<Scalar> plu_basis(const Matrix<Scalar>& m) {
  Eigen::FullPivLU<Matrix<Scalar>> lu(m);
  const Index r = std::min(m.rows(), m.cols());
  Matrix<Scalar> l = Matrix<Scalar>::Zero(m.rows(), r);
  for (Index j = 0; j < r; ++j) {
    l(j, j) = Scalar(1);
    const Index below = m.rows() - j - 1;
    if (below > 0) l.col(j).tail(below) = lu.matrixLU().col(j).tail(below);
  }
  return lu.permutationP().inverse() * l;
}

template <typename Scalar>
Matrix<Scalar> thin_qr(const Matrix<Scalar>& m, bool* rank_warning = nullptr) {
  const Index r = std::min(m.rows(), m.cols());
  Eigen::HouseholderQR<Matrix<Scalar>> qr(m);
  if (rank_warning != nullptr) {
    const Vector<Scalar> diag =
        qr.matrixQR().diagonal().head(r).cwiseAbs();
    const Scalar dmax = diag.maxCoeff();
    const Scalar tol =
        Scalar(m.rows()) * Eigen::NumTraits<Scalar>::epsilon() * dmax;
    *rank_warning = (dmax == Scalar(0)) || (diag.minCoeff() <= tol);
  }
  return qr.householderQ() * Matrix<Scalar>::Identity(m.rows(), r);
}

template <typename Scalar>
Matrix<Scalar> stabilize(const Matrix<Scalar>& m, PowerStabilizer s) {
  return s == PowerStabilizer::lu ? plu_basis(m) : thin_qr(m);
}

}  // namespace detail

/// Projects each selected mode onto an orthonormal basis of its sketched
/// fiber space, shrinking the working tensor one mode at a time in
/// ascending mode order. A mode whose extent is at most target_rank +
/// oversampling is left untouched with an identity-tagged basis.
template <typename Scalar>
CompressionResult<Scalar> compress(const Tensor<Scalar>& t,
                                   const CompressConfig& cfg) {
  detail::check(cfg.target_rank >= 1, "compress: target rank must be at least 1");
  detail::check(cfg.oversampling >= 0, "compress: oversampling must be non-negative");
  detail::check(cfg.power_iterations >= 0,
                "compress: power iteration count must be non-negative");
  detail::check(t.all_finite(), "compress: input values must be finite");

  std::set<Index> selected;
  if (cfg.modes.has_value()) {
    for (Index m : *cfg.modes) {
      detail::check(m >= 0 && m < t.order(), "compress: mode index out of range");
      selected.insert(m);
    }
  } else {
    for (Index m = 0; m < t.order(); ++m) selected.insert(m);
  }

  CompressionResult<Scalar> result;
  result.bases.reserve(static_cast<std::size_t>(t.order()));
  Tensor<Scalar> b = t;

  for (Index n = 0; n < t.order(); ++n) {
    const Index extent = b.extent(n);
    const Index l = std::min(cfg.target_rank + cfg.oversampling, extent);
    if (selected.count(n) == 0 || l >= extent) {
      result.bases.push_back(ModeBasis<Scalar>::Identity(extent));
      continue;
    }

    const Matrix<Scalar> bn = unfold(b, n);
    RandomStream rs(cfg.seed, stream_id(StreamDomain::compress,
                                        static_cast<std::uint64_t>(n)));
    Matrix<Scalar> omega(bn.cols(), l);
    if (cfg.distribution == RandomDistribution::gaussian)
      rs.fill_gaussian(omega);
    else
      rs.fill_uniform(omega);

    Matrix<Scalar> y = bn * omega;
    for (int j = 0; j < cfg.power_iterations; ++j) {
      const Matrix<Scalar> q = detail::stabilize(y, cfg.stabilizer);
      const Matrix<Scalar> z =
          detail::stabilize<Scalar>((bn.transpose() * q).eval(), cfg.stabilizer);
      y = bn * z;
    }

    ModeBasis<Scalar> basis;
    basis.q = detail::thin_qr(y, &basis.rank_warning);
    basis.dim = extent;
    result.bases.push_back(std::move(basis));

    Shape next_shape = b.shape();
    next_shape[static_cast<std::size_t>(n)] = l;
    b = fold(result.bases.back().q.transpose() * bn, n, next_shape);
  }

  result.compressed = std::move(b);
  return result;
}

/// ||t - t x_1 Q_1 Q_1^T ... x_N Q_N Q_N^T||_F over the compressed modes.
template <typename Scalar>
Scalar projection_residual(const Tensor<Scalar>& t,
                           const CompressionResult<Scalar>& result) {
  detail::check(static_cast<Index>(result.bases.size()) == t.order(),
                "projection_residual: need one basis per mode");
  Tensor<Scalar> p = t;
  for (Index n = 0; n < t.order(); ++n) {
    const auto& basis = result.bases[static_cast<std::size_t>(n)];
    detail::check(basis.rows() == t.extent(n),
                  "projection_residual: basis extent mismatch");
    if (basis.identity) continue;
    const Matrix<Scalar> pn = unfold(p, n);
    p = fold(basis.q * (basis.q.transpose() * pn).eval(), n, p.shape());
  }
  return (t.values() - p.values()).norm();
}

}  // namespace rcp
