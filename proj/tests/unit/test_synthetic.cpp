// SPDX-License-Identifier: MIT
#include <cmath>

#include "doctest.h"
#include "rcp/solve.hpp"
#include "rcp/synthetic.hpp"
#include "support/oracles.hpp"

using namespace rcp;

TEST_CASE("random_lowrank returns a tensor matching its ground truth") {
  const auto [t, truth] = random_lowrank<double>({8, 9, 7}, 3, 5);
  CHECK(t.shape() == Shape{8, 9, 7});
  CHECK(truth.rank() == 3);
  const TensorXd rebuilt = reconstruct(truth);
  CHECK((t.values() - rebuilt.values()).norm() <= 1e-12 * t.norm());
}

TEST_CASE("random_lowrank unfoldings have numerical rank at most R") {
  const auto [t, truth] = random_lowrank<double>({12, 10, 11}, 4, 9);
  for (Index mode = 0; mode < 3; ++mode) {
    const Eigen::BDCSVD<MatrixXd> svd(unfold(t, mode));
    const auto& sv = svd.singularValues();
    for (Index j = 4; j < sv.size(); ++j) CHECK(sv(j) <= 1e-10 * sv(0));
  }
}

TEST_CASE("random_lowrank is deterministic per seed") {
  const auto [a, ta] = random_lowrank<double>({6, 6, 6}, 2, 12);
  const auto [b, tb] = random_lowrank<double>({6, 6, 6}, 2, 12);
  const auto [c, tc] = random_lowrank<double>({6, 6, 6}, 2, 13);
  CHECK(a.values() == b.values());
  CHECK(ta.weights == tb.weights);
  CHECK(a.values() != c.values());
}

TEST_CASE("add_noise hits the requested signal-to-noise ratio") {
  const auto [t, truth] = random_lowrank<double>({50, 50, 40}, 3, 2);
  const TensorXd noisy = add_noise(t, NoiseSpec{2.0, 6});
  const VectorXd e = noisy.values() - t.values();

  const auto sample_std = [](const VectorXd& v) {
    const double mean = v.mean();
    return std::sqrt((v.array() - mean).square().sum() /
                     static_cast<double>(v.size() - 1));
  };
  const double ratio = sample_std(t.values()) / sample_std(e);
  CHECK(ratio == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("add_noise vanishes as the ratio grows") {
  const auto [t, truth] = random_lowrank<double>({10, 10, 10}, 2, 3);
  const TensorXd noisy = add_noise(t, NoiseSpec{1e12, 1});
  CHECK((noisy.values() - t.values()).norm() <= 1e-10 * t.norm());
}

TEST_CASE("add_noise is deterministic per seed") {
  const auto [t, truth] = random_lowrank<double>({7, 7, 7}, 2, 4);
  const TensorXd a = add_noise(t, NoiseSpec{2.0, 9});
  const TensorXd b = add_noise(t, NoiseSpec{2.0, 9});
  const TensorXd c = add_noise(t, NoiseSpec{2.0, 10});
  CHECK(a.values() == b.values());
  CHECK(a.values() != c.values());
}

TEST_CASE("add_noise validates its inputs") {
  const auto [t, truth] = random_lowrank<double>({5, 5, 5}, 1, 1);
  CHECK_THROWS_AS(add_noise(t, NoiseSpec{0.0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(add_noise(TensorXd({2, 2, 2}), NoiseSpec{2.0, 0}),
                  std::invalid_argument);
}

TEST_CASE("toy_video has the requested geometry") {
  const auto [t, truth] = toy_video<double>(32, 24, 5);
  CHECK(t.shape() == Shape{32, 32, 24});
  CHECK(truth.rank() == 4);
  const TensorXd rebuilt = reconstruct(truth);
  CHECK((t.values() - rebuilt.values()).norm() <= 1e-12 * t.norm());
}

TEST_CASE("toy_video temporal supports are pairwise disjoint") {
  const auto [t, truth] = toy_video<double>(24, 40, 11);
  const MatrixXd& c = truth.factors[2];
  for (Index r = 0; r < 4; ++r)
    for (Index s = r + 1; s < 4; ++s)
      CHECK((c.col(r).cwiseAbs().array() * c.col(s).cwiseAbs().array()).maxCoeff() ==
            0.0);
}

TEST_CASE("toy_video is deterministic per seed and sensitive to it") {
  const auto [a, ta] = toy_video<double>(20, 20, 3);
  const auto [b, tb] = toy_video<double>(20, 20, 3);
  const auto [c, tc] = toy_video<double>(20, 20, 4);
  CHECK(a.values() == b.values());
  CHECK(a.values() != c.values());
}

TEST_CASE("toy_video is recovered by CP at its true rank") {
  const auto [t, truth] = toy_video<double>(40, 32, 7);
  DecomposeConfig cfg;
  cfg.rank = 4;
  cfg.randomized = false;
  cfg.tol = 1e-10;
  const auto [model, trace] = als_solve(t, cfg);
  CHECK(trace.final_relative_error <= 1e-3);
}

TEST_CASE("toy_video rejects degenerate grids") {
  CHECK_THROWS_AS(toy_video<double>(8, 100, 0), std::invalid_argument);
  CHECK_THROWS_AS(toy_video<double>(100, 8, 0), std::invalid_argument);
}
