// SPDX-License-Identifier: MIT
#include <cmath>
#include <vector>

#include "doctest.h"
#include "rcp/compress.hpp"
#include "rcp/synthetic.hpp"
#include "support/oracles.hpp"

using namespace rcp;

namespace {

CompressConfig basic_config(Index k, std::uint64_t seed = 0) {
  CompressConfig cfg;
  cfg.target_rank = k;
  cfg.seed = seed;
  return cfg;
}

double mean_residual(const TensorXd& t, CompressConfig cfg, int seeds) {
  double sum = 0.0;
  for (int s = 0; s < seeds; ++s) {
    cfg.seed = 1000 + static_cast<std::uint64_t>(s);
    sum += projection_residual(t, compress(t, cfg));
  }
  return sum / seeds;
}

}  // namespace

TEST_CASE("exact multilinear rank input is captured to near machine precision") {
  const auto [t, truth] = random_lowrank<double>({12, 10, 14}, 3, 21);
  CompressConfig cfg = basic_config(3);
  cfg.oversampling = 3;
  const CompressionResultXd r = compress(t, cfg);
  CHECK(projection_residual(t, r) <= 1e-10 * t.norm());
  CHECK(r.compressed.shape() == Shape{6, 6, 6});
}

TEST_CASE("empty mode list is a no-op with identity bases") {
  const TensorXd t = oracle::random_tensor({5, 6, 4});
  CompressConfig cfg = basic_config(2);
  cfg.modes = std::vector<Index>{};
  const CompressionResultXd r = compress(t, cfg);
  CHECK(r.compressed.values() == t.values());
  REQUIRE(r.bases.size() == 3);
  for (const auto& b : r.bases) CHECK(b.identity);
}

TEST_CASE("same seed gives bit-identical results") {
  const TensorXd t = oracle::random_tensor({8, 9, 7});
  CompressConfig cfg = basic_config(3, 99);
  cfg.oversampling = 2;
  const CompressionResultXd a = compress(t, cfg);
  const CompressionResultXd b = compress(t, cfg);
  CHECK(a.compressed.values() == b.compressed.values());
  REQUIRE(a.bases.size() == b.bases.size());
  for (std::size_t m = 0; m < a.bases.size(); ++m) {
    CHECK(a.bases[m].identity == b.bases[m].identity);
    if (!a.bases[m].identity) CHECK(a.bases[m].q == b.bases[m].q);
  }
}

TEST_CASE("different seeds give different sketches") {
  const TensorXd t = oracle::random_tensor({8, 9, 7});
  CompressConfig c1 = basic_config(3, 1);
  c1.oversampling = 2;
  CompressConfig c2 = c1;
  c2.seed = 2;
  const CompressionResultXd a = compress(t, c1);
  const CompressionResultXd b = compress(t, c2);
  CHECK(a.compressed.values() != b.compressed.values());
}

TEST_CASE("returned bases are orthonormal") {
  const TensorXd t = oracle::random_tensor({15, 12, 18});
  for (const PowerStabilizer s : {PowerStabilizer::lu, PowerStabilizer::qr}) {
    CompressConfig cfg = basic_config(4);
    cfg.stabilizer = s;
    const CompressionResultXd r = compress(t, cfg);
    for (const auto& b : r.bases) {
      if (b.identity) continue;
      const MatrixXd gram = b.q.transpose() * b.q;
      const MatrixXd eye = MatrixXd::Identity(gram.rows(), gram.cols());
      CHECK((gram - eye).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("compressed tensor equals the joint projection of the input") {
  const TensorXd t = oracle::random_tensor({9, 11, 8});
  CompressConfig cfg = basic_config(3);
  cfg.oversampling = 2;
  const CompressionResultXd r = compress(t, cfg);
  TensorXd p = t;
  for (Index m = 0; m < t.order(); ++m)
    if (!r.bases[static_cast<std::size_t>(m)].identity)
      p = mode_product(p, r.bases[static_cast<std::size_t>(m)].q.transpose(), m);
  CHECK((p.values() - r.compressed.values()).norm() <= 1e-12 * (p.norm() + 1.0));
}

TEST_CASE("modes at or above the sketch width stay uncompressed") {
  const TensorXd t = oracle::random_tensor({4, 30, 5});
  CompressConfig cfg = basic_config(3);
  cfg.oversampling = 10;  // 3 + 10 >= 4 and >= 5
  const CompressionResultXd r = compress(t, cfg);
  CHECK(r.bases[0].identity);
  CHECK_FALSE(r.bases[1].identity);
  CHECK(r.bases[2].identity);
  CHECK(r.compressed.extent(0) == 4);
  CHECK(r.compressed.extent(1) == 13);
  CHECK(r.compressed.extent(2) == 5);
}

TEST_CASE("mode subset compresses only the requested modes") {
  const TensorXd t = oracle::random_tensor({20, 20, 20});
  CompressConfig cfg = basic_config(3);
  cfg.oversampling = 2;
  cfg.modes = std::vector<Index>{1};
  const CompressionResultXd r = compress(t, cfg);
  CHECK(r.bases[0].identity);
  CHECK_FALSE(r.bases[1].identity);
  CHECK(r.bases[2].identity);
  CHECK(r.compressed.shape() == Shape{20, 5, 20});
}

TEST_CASE("uniform sketch entries also capture an exact-rank tensor") {
  const auto [t, truth] = random_lowrank<double>({12, 12, 12}, 3, 5);
  CompressConfig cfg = basic_config(3);
  cfg.distribution = RandomDistribution::uniform;
  CHECK(projection_residual(t, compress(t, cfg)) <= 1e-10 * t.norm());
}

TEST_CASE("power iterations reduce the mean residual on noisy data") {
  const auto [clean, truth] = random_lowrank<double>({18, 18, 18}, 4, 77);
  const TensorXd noisy = add_noise(clean, NoiseSpec{2.0, 7});
  CompressConfig q0 = basic_config(4);
  q0.oversampling = 2;
  q0.power_iterations = 0;
  CompressConfig q2 = q0;
  q2.power_iterations = 2;
  CHECK(mean_residual(noisy, q2, 20) <= mean_residual(noisy, q0, 20));
}

TEST_CASE("oversampling reduces the mean residual on noisy data") {
  const auto [clean, truth] = random_lowrank<double>({18, 18, 18}, 4, 78);
  const TensorXd noisy = add_noise(clean, NoiseSpec{2.0, 8});
  CompressConfig p0 = basic_config(4);
  p0.oversampling = 0;
  p0.power_iterations = 1;
  CompressConfig p10 = p0;
  p10.oversampling = 10;
  CHECK(mean_residual(noisy, p10, 20) <= mean_residual(noisy, p0, 20));
}

TEST_CASE("projection_residual endpoints and per-mode bound") {
  const TensorXd t = oracle::random_tensor({7, 6, 8});

  CompressConfig none = basic_config(2);
  none.modes = std::vector<Index>{};
  CHECK(projection_residual(t, compress(t, none)) == 0.0);

  const CompressionResultXd r = compress(t, basic_config(2, 3));
  double per_mode_sum = 0.0;
  for (Index m = 0; m < t.order(); ++m) {
    const auto& b = r.bases[static_cast<std::size_t>(m)];
    if (b.identity) continue;
    const MatrixXd proj = MatrixXd::Identity(b.dim, b.dim) - b.q * b.q.transpose();
    per_mode_sum += mode_product(t, proj, m).norm();
  }
  CHECK(projection_residual(t, r) <= per_mode_sum + 1e-12);
}

TEST_CASE("invalid configurations are rejected") {
  const TensorXd t = oracle::random_tensor({5, 5, 5});

  CHECK_THROWS_AS(compress(t, basic_config(0)), std::invalid_argument);

  CompressConfig negative = basic_config(2);
  negative.oversampling = -1;
  CHECK_THROWS_AS(compress(t, negative), std::invalid_argument);

  CompressConfig bad_mode = basic_config(2);
  bad_mode.modes = std::vector<Index>{3};
  CHECK_THROWS_AS(compress(t, bad_mode), std::invalid_argument);

  TensorXd nan = t;
  nan.values()(0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(compress(nan, basic_config(2)), std::invalid_argument);
}
