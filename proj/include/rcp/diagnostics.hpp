// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "rcp/compress.hpp"
#include "rcp/solve.hpp"
#include "rcp/synthetic.hpp"
#include "rcp/tensor.hpp"

namespace rcp {

/// Expected-residual bound for single-pass (no power iteration) compression
/// with per-mode sample size k + p, together with the numbers behind it.
struct BoundReport {
  std::vector<double> tail_energies;  ///< per mode: sum of sigma_j^2 for j > k
  double bound = 0.0;
  double empirical_mean = std::numeric_limits<double>::quiet_NaN();
  int trials = 0;
  Index k = 0;
  Index p = 0;
};

/// sqrt(1 + k / (p - 1)) * sqrt(sum_n sum_{j > k} sigma_{n j}^2), from the
/// singular values of every matricization. Requires k >= 2, p >= 2 and k
/// smaller than every mode extent.
template <typename Scalar>
BoundReport theorem_bound(const Tensor<Scalar>& t, Index k, Index p) {
  detail::check(k >= 2, "theorem_bound: k must be at least 2");
  detail::check(p >= 2, "theorem_bound: oversampling must be at least 2");
  for (Index m = 0; m < t.order(); ++m)
    detail::check(k < t.extent(m),
                  "theorem_bound: k must be smaller than every mode extent");
  BoundReport report;
  report.k = k;
  report.p = p;
  double total_tail = 0.0;
  for (Index m = 0; m < t.order(); ++m) {
    // One-sided Jacobi keeps noise-level trailing singular values instead of
    // deflating them to exact zeros; the tail energies of a numerically
    // low-rank tensor then reflect its actual floating-point spectrum.
    const Eigen::JacobiSVD<Matrix<Scalar>> svd(unfold(t, m));
    const auto& sv = svd.singularValues();
    double tail = 0.0;
    for (Index j = k; j < sv.size(); ++j)
      tail += static_cast<double>(sv(j)) * static_cast<double>(sv(j));
    report.tail_energies.push_back(tail);
    total_tail += tail;
  }
  report.bound = std::sqrt(1.0 + static_cast<double>(k) / static_cast<double>(p - 1)) *
                 std::sqrt(total_tail);
  return report;
}

/// Draws one random rank-R tensor and measures the mean projection residual
/// of `trials` independent single-pass compressions against the closed-form
/// bound. (The bound is a statement about the sketch average for a fixed
/// tensor, so trials vary the sketch, not the data.)
inline BoundReport validate_bound(const Shape& shape, Index rank, Index k,
                                  Index p, int trials, std::uint64_t seed) {
  detail::check(trials >= 1, "validate_bound: need at least one trial");
  const auto [dense, truth] = random_lowrank<double>(shape, rank, seed);
  BoundReport report = theorem_bound(dense, k, p);
  report.trials = trials;
  double sum = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    CompressConfig cfg;
    cfg.target_rank = k;
    cfg.oversampling = p;
    cfg.power_iterations = 0;
    cfg.seed = derive_seed(seed, stream_id(StreamDomain::trial,
                                           static_cast<std::uint64_t>(trial)));
    sum += projection_residual(dense, compress(dense, cfg));
  }
  report.empirical_mean = sum / trials;
  return report;
}

/// Storage ratio of a dense I x J x K tensor over its rank-R CP model.
inline double compression_ratio_cp(const Shape& shape, Index rank) {
  detail::check(shape.size() == 3, "compression_ratio_cp: shape must be 3-way");
  detail::check(rank >= 1, "compression_ratio_cp: rank must be at least 1");
  const double i = static_cast<double>(shape[0]);
  const double j = static_cast<double>(shape[1]);
  const double k = static_cast<double>(shape[2]);
  return i * j * k / (static_cast<double>(rank) * (i + j + k + 1.0));
}

/// Storage ratio of a dense I x J x K tensor over the rank-R SVD of its
/// (I J) x K flattening.
inline double compression_ratio_svd(const Shape& shape, Index rank) {
  detail::check(shape.size() == 3, "compression_ratio_svd: shape must be 3-way");
  detail::check(rank >= 1, "compression_ratio_svd: rank must be at least 1");
  const double i = static_cast<double>(shape[0]);
  const double j = static_cast<double>(shape[1]);
  const double k = static_cast<double>(shape[2]);
  return i * j * k / (static_cast<double>(rank) * (i * j + k + 1.0));
}

struct BenchConfig {
  Shape shape;
  Index rank = 1;
  SolveMethod method = SolveMethod::als;
  Index oversampling = 10;
  int power_iterations = 2;
  double tol = 1e-5;
  int max_iter = 500;
  std::uint64_t seed = 0;
};

struct BenchRecord {
  Shape shape;
  Index rank = 0;
  SolveMethod method = SolveMethod::als;
  bool randomized = false;
  Index oversampling = 0;
  int power_iterations = 0;
  std::uint64_t seed = 0;
  double seconds = 0.0;
  int iterations = 0;
  double error = std::numeric_limits<double>::quiet_NaN();
  double speedup = 1.0;
  bool converged = false;
};

struct BenchOptions {
  int repeat = 1;  ///< timings take the median over this many runs
  /// Runs configurations concurrently. Timings are then contended and only
  /// the error columns remain meaningful.
  bool parallel = false;
};

namespace detail {

/// Matched deterministic/randomized pair sharing the same synthetic data.
inline std::pair<BenchRecord, BenchRecord> bench_pair(const BenchConfig& bc,
                                                      int repeat) {
  const auto [dense, truth] = random_lowrank<double>(bc.shape, bc.rank, bc.seed);

  const auto run = [&](bool randomized) {
    BenchRecord rec;
    rec.shape = bc.shape;
    rec.rank = bc.rank;
    rec.method = bc.method;
    rec.randomized = randomized;
    rec.oversampling = randomized ? bc.oversampling : 0;
    rec.power_iterations = randomized ? bc.power_iterations : 0;
    rec.seed = bc.seed;
    DecomposeConfig cfg;
    cfg.rank = bc.rank;
    cfg.method = bc.method;
    cfg.randomized = randomized;
    cfg.tol = bc.tol;
    cfg.max_iter = bc.max_iter;
    cfg.seed = bc.seed;
    cfg.compress.target_rank = bc.rank;
    cfg.compress.oversampling = bc.oversampling;
    cfg.compress.power_iterations = bc.power_iterations;
    cfg.compress.seed = derive_seed(bc.seed, stream_id(StreamDomain::compress));
    std::vector<double> times;
    for (int i = 0; i < std::max(repeat, 1); ++i) {
      const auto start = std::chrono::steady_clock::now();
      try {
        const auto [model, trace] = decompose(dense, cfg);
        rec.seconds = elapsed_seconds(start);
        rec.iterations = trace.iterations;
        rec.error = trace.final_relative_error;
        rec.converged = trace.converged;
      } catch (const std::exception&) {
        rec.seconds = elapsed_seconds(start);
        rec.converged = false;
        rec.error = std::numeric_limits<double>::quiet_NaN();
        break;
      }
      times.push_back(rec.seconds);
    }
    if (!times.empty()) {
      std::sort(times.begin(), times.end());
      rec.seconds = times[times.size() / 2];
    }
    return rec;
  };

  BenchRecord det = run(false);
  BenchRecord rnd = run(true);
  det.speedup = 1.0;
  rnd.speedup = rnd.seconds > 0.0 ? det.seconds / rnd.seconds
                                  : std::numeric_limits<double>::quiet_NaN();
  return {det, rnd};
}

}  // namespace detail

/// Runs every configuration as a matched deterministic/randomized pair.
/// Failures are recorded per pair, never propagated.
inline std::vector<BenchRecord> bench_sweep(const std::vector<BenchConfig>& configs,
                                            const BenchOptions& options = {}) {
  std::vector<BenchRecord> records;
  records.reserve(configs.size() * 2);
  if (options.parallel) {
    std::vector<std::future<std::pair<BenchRecord, BenchRecord>>> futures;
    futures.reserve(configs.size());
    for (const auto& bc : configs)
      futures.push_back(std::async(std::launch::async, detail::bench_pair, bc,
                                   options.repeat));
    for (auto& f : futures) {
      auto [det, rnd] = f.get();
      records.push_back(det);
      records.push_back(rnd);
    }
  } else {
    for (const auto& bc : configs) {
      auto [det, rnd] = detail::bench_pair(bc, options.repeat);
      records.push_back(det);
      records.push_back(rnd);
    }
  }
  return records;
}

inline const char* method_name(SolveMethod m) {
  return m == SolveMethod::als ? "als" : "bcd";
}

inline void write_bench_csv(std::ostream& os, const std::vector<BenchRecord>& records) {
  os << std::setprecision(12);
  os << "shape,rank,method,randomized,p,q,seed,seconds,iterations,error,speedup,converged\n";
  for (const auto& r : records) {
    os << shape_string(r.shape) << ',' << r.rank << ',' << method_name(r.method)
       << ',' << (r.randomized ? "true" : "false") << ',' << r.oversampling << ','
       << r.power_iterations << ',' << r.seed << ',' << r.seconds << ','
       << r.iterations << ',' << r.error << ',' << r.speedup << ','
       << (r.converged ? "true" : "false") << '\n';
  }
}

}  // namespace rcp
