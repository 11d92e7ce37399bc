// SPDX-License-Identifier: MIT
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "rcp/types.hpp"

namespace rcp {

/// SplitMix64: a splittable 64-bit generator with a fully mixed output
/// function. Every consumer in this library draws from its own stream,
/// derived from (seed, stream id), so results do not depend on the order
/// in which independent consumers happen to run.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stream-id namespaces, one per consumer kind. A full stream id is
/// (domain << 32) | k where k is typically a mode index or a trial index.
enum class StreamDomain : std::uint64_t {
  compress = 1,   ///< sketch matrix for mode k of a compression
  init = 2,       ///< padding columns when the requested rank exceeds a mode
  factors = 3,    ///< synthetic factor matrix for mode k
  noise = 4,      ///< additive noise field
  phases = 5,     ///< temporal phases of the synthetic video
  trial = 6,      ///< per-trial seeds of repeated experiments
};

inline std::uint64_t stream_id(StreamDomain domain, std::uint64_t k = 0) {
  return (static_cast<std::uint64_t>(domain) << 32) | k;
}

/// Derives an unrelated child seed; used to hand independent sub-seeds to
/// nested consumers (e.g. one seed per trial of an experiment).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  return mix64(seed + 0x9e3779b97f4a7c15ULL * (salt + 1));
}

/// One independent random stream. Sampling is implemented on top of the raw
/// 64-bit output so that identical seeds give identical bits on every
/// platform, independent of the standard library's distributions.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t id)
      : gen_(derive_seed(seed, id)) {}

  std::uint64_t bits() { return gen_.next(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(gen_.next() >> 11) * 0x1.0p-53; }

  /// Uniform on [-1, 1].
  double uniform_sym() { return 2.0 * uniform01() - 1.0; }

  /// Standard normal via the Box-Muller transform (pairs cached).
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = static_cast<double>((gen_.next() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(theta);
    have_cached_ = true;
    return r * std::cos(theta);
  }

  /// Fills in column-major order.
  template <typename Scalar>
  void fill_gaussian(Matrix<Scalar>& m) {
    for (Index j = 0; j < m.cols(); ++j)
      for (Index i = 0; i < m.rows(); ++i) m(i, j) = static_cast<Scalar>(normal());
  }

  /// Fills in column-major order with uniform [-1, 1] entries.
  template <typename Scalar>
  void fill_uniform(Matrix<Scalar>& m) {
    for (Index j = 0; j < m.cols(); ++j)
      for (Index i = 0; i < m.rows(); ++i) m(i, j) = static_cast<Scalar>(uniform_sym());
  }

 private:
  SplitMix64 gen_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace rcp
