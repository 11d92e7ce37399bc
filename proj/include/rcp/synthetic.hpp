// SPDX-License-Identifier: MIT
#pragma once

#include <cmath>
#include <numbers>
#include <utility>

#include "rcp/kruskal.hpp"
#include "rcp/random.hpp"
#include "rcp/tensor.hpp"

namespace rcp {

struct NoiseSpec {
  double snr = 1.0;  ///< sample std of the signal divided by the noise std
  std::uint64_t seed = 0;
};

/// Random rank-R tensor: factors with independent standard-normal entries,
/// canonicalized. Returns the dense tensor together with its ground truth.
template <typename Scalar>
std::pair<Tensor<Scalar>, Kruskal<Scalar>> random_lowrank(const Shape& shape,
                                                          Index rank,
                                                          std::uint64_t seed) {
  detail::check(rank >= 1, "random_lowrank: rank must be at least 1");
  shape_size(shape);
  Kruskal<Scalar> truth;
  truth.weights = Vector<Scalar>::Ones(rank);
  truth.factors.reserve(shape.size());
  for (std::size_t m = 0; m < shape.size(); ++m) {
    RandomStream rs(seed, stream_id(StreamDomain::factors, m));
    Matrix<Scalar> f(shape[m], rank);
    rs.fill_gaussian(f);
    truth.factors.push_back(std::move(f));
  }
  truth = normalize(std::move(truth));
  return {reconstruct(truth), truth};
}

/// Adds white Gaussian noise with standard deviation std(t) / snr, where
/// std(t) is the sample standard deviation of the entries.
template <typename Scalar>
Tensor<Scalar> add_noise(const Tensor<Scalar>& t, const NoiseSpec& spec) {
  detail::check(spec.snr > 0, "add_noise: snr must be positive");
  detail::check(t.norm() > Scalar(0), "add_noise: tensor norm must be positive");
  const auto& v = t.values();
  const Scalar mean = v.mean();
  const Scalar sd =
      t.size() > 1
          ? std::sqrt((v.array() - mean).square().sum() / Scalar(t.size() - 1))
          : Scalar(0);
  const Scalar sigma = sd / static_cast<Scalar>(spec.snr);
  Tensor<Scalar> out = t;
  RandomStream rs(spec.seed, stream_id(StreamDomain::noise));
  for (Index i = 0; i < out.size(); ++i)
    out.values()(i) += sigma * static_cast<Scalar>(rs.normal());
  return out;
}

/// Rank-4 separable video: per component one Gaussian bump in each spatial
/// mode (centers at the quadrant midpoints, width grid / 10) and a sinusoid
/// gated onto one of four equal disjoint frame windows (2, 5, 9 and 14
/// cycles per window). The seed draws one phase per component.
template <typename Scalar>
std::pair<Tensor<Scalar>, Kruskal<Scalar>> toy_video(Index grid = 200,
                                                     Index frames = 215,
                                                     std::uint64_t seed = 0) {
  detail::check(grid >= 16, "toy_video: grid must be at least 16");
  detail::check(frames >= 16, "toy_video: frames must be at least 16");
  constexpr Index kRank = 4;
  const double centers[kRank][2] = {{0.25, 0.25}, {0.75, 0.25}, {0.25, 0.75}, {0.75, 0.75}};
  const double cycles[kRank] = {2.0, 5.0, 9.0, 14.0};
  const double width = static_cast<double>(grid) / 10.0;

  RandomStream rs(seed, stream_id(StreamDomain::phases));
  Kruskal<Scalar> truth;
  truth.weights = Vector<Scalar>::Ones(kRank);
  Matrix<Scalar> a(grid, kRank), b(grid, kRank), c(frames, kRank);
  c.setZero();
  for (Index r = 0; r < kRank; ++r) {
    const double cx = centers[r][0] * static_cast<double>(grid);
    const double cy = centers[r][1] * static_cast<double>(grid);
    for (Index i = 0; i < grid; ++i) {
      const double di = static_cast<double>(i) - cx;
      const double dj = static_cast<double>(i) - cy;
      a(i, r) = static_cast<Scalar>(std::exp(-di * di / (2.0 * width * width)));
      b(i, r) = static_cast<Scalar>(std::exp(-dj * dj / (2.0 * width * width)));
    }
    const Index begin = r * frames / kRank;
    const Index end = (r + 1) * frames / kRank;
    const double window = static_cast<double>(end - begin);
    const double phase = 2.0 * std::numbers::pi * rs.uniform01();
    for (Index f = begin; f < end; ++f) {
      const double s = static_cast<double>(f - begin) / window;
      c(f, r) = static_cast<Scalar>(
          std::sin(2.0 * std::numbers::pi * cycles[r] * s + phase));
    }
  }
  truth.factors = {std::move(a), std::move(b), std::move(c)};
  truth = normalize(std::move(truth));
  return {reconstruct(truth), truth};
}

}  // namespace rcp
