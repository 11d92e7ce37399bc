// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rcp/compress.hpp"
#include "rcp/kruskal.hpp"
#include "rcp/random.hpp"
#include "rcp/tensor.hpp"

namespace rcp {

enum class SolveMethod { als, bcd };
enum class InitMethod { eigenvectors, random };

struct DecomposeConfig {
  Index rank = 1;
  SolveMethod method = SolveMethod::als;
  bool randomized = true;
  CompressConfig compress;  ///< target_rank 0 inherits `rank`
  double tol = 1e-5;        ///< stop when |fit_j - fit_{j-1}| drops below this
  int max_iter = 500;
  std::uint64_t seed = 0;  ///< initialization stream
  InitMethod init = InitMethod::eigenvectors;
};

/// Per-iteration convergence record. `seconds` is the wall-clock time
/// elapsed since the solver started, measured on a monotonic clock.
struct FitTrace {
  struct Entry {
    int iteration;
    double fit;
    double seconds;
  };
  std::vector<Entry> entries;
  double final_relative_error = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  bool converged = false;
};

/// Numeric failure inside a solver; carries the iteration that produced it.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& message, int iteration)
      : std::runtime_error(message + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

/// Moore-Penrose pseudo-inverse of a symmetric positive semi-definite
/// matrix via its eigendecomposition. Eigenvalues at or below
/// rows * eps * lambda_max are treated as zero.
template <typename Scalar>
Matrix<Scalar> pinv_psd(const Matrix<Scalar>& v) {
  detail::check(v.rows() == v.cols(), "pinv_psd: matrix must be square");
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(v);
  const Vector<Scalar>& evals = es.eigenvalues();
  const Scalar lmax = std::max(evals.maxCoeff(), Scalar(0));
  const Scalar tau = Scalar(v.rows()) * Eigen::NumTraits<Scalar>::epsilon() * lmax;
  Vector<Scalar> inv = Vector<Scalar>::Zero(evals.size());
  for (Index i = 0; i < evals.size(); ++i)
    if (evals(i) > tau) inv(i) = Scalar(1) / evals(i);
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

namespace detail {

template <typename Scalar>
void canonicalize_column_signs(Matrix<Scalar>& m) {
  for (Index j = 0; j < m.cols(); ++j) {
    Index at = 0;
    m.col(j).cwiseAbs().maxCoeff(&at);
    if (m(at, j) < Scalar(0)) m.col(j) = -m.col(j);
  }
}

}  // namespace detail

/// Starting factors: mode 0 is left as zeros for the first update to fill
/// in; every other mode gets the leading R eigenvectors of the Gram matrix
/// of its matricization (or unit-norm random columns when init is random).
/// When R exceeds a mode extent, the eigenvector block is padded with
/// unit-norm random columns, orthogonalized against it where possible.
template <typename Scalar>
std::vector<Matrix<Scalar>> init_factors(const Tensor<Scalar>& t, Index rank,
                                         std::uint64_t seed,
                                         InitMethod method = InitMethod::eigenvectors) {
  detail::check(rank >= 1, "init_factors: rank must be at least 1");
  const Index n = t.order();
  std::vector<Matrix<Scalar>> factors(static_cast<std::size_t>(n));
  factors[0] = Matrix<Scalar>::Zero(t.extent(0), rank);
  for (Index mode = 1; mode < n; ++mode) {
    const Index extent = t.extent(mode);
    RandomStream rs(seed, stream_id(StreamDomain::init,
                                    static_cast<std::uint64_t>(mode)));
    Matrix<Scalar> f = Matrix<Scalar>::Zero(extent, rank);
    Index filled = 0;
    if (method == InitMethod::eigenvectors) {
      const Matrix<Scalar> xn = unfold(t, mode);
      const Matrix<Scalar> gram = xn * xn.transpose();
      Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(gram);
      filled = std::min(rank, extent);
      for (Index j = 0; j < filled; ++j)
        f.col(j) = es.eigenvectors().col(extent - 1 - j);
      detail::canonicalize_column_signs(f);
    }
    for (Index j = filled; j < rank; ++j) {
      Vector<Scalar> col(extent);
      for (Index i = 0; i < extent; ++i) col(i) = static_cast<Scalar>(rs.normal());
      const Vector<Scalar> raw = col.normalized();
      if (filled > 0 && filled < extent) {
        col -= f.leftCols(j) * (f.leftCols(j).transpose() * col).eval();
        const Scalar nrm = col.norm();
        f.col(j) = nrm > Scalar(1e-8) ? Vector<Scalar>(col / nrm) : raw;
      } else {
        f.col(j) = raw;
      }
    }
    factors[static_cast<std::size_t>(mode)] = std::move(f);
  }
  return factors;
}

namespace detail {

template <typename Scalar>
void validate_solver_input(const Tensor<Scalar>& t, const DecomposeConfig& cfg) {
  check(cfg.rank >= 1, "solve: rank must be at least 1");
  check(cfg.tol > 0, "solve: tolerance must be positive");
  check(cfg.max_iter >= 1, "solve: iteration limit must be at least 1");
  if (!t.all_finite()) throw SolverError("solve: input values are not finite", 0);
  check(t.squared_norm() > Scalar(0), "solve: tensor norm must be positive");
}

inline double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

/// Kronecker chain of one column from every factor except `skip`, highest
/// mode first, matching the canonical matricization column order.
template <typename Scalar>
Vector<Scalar> kron_column_all_but(const std::vector<Matrix<Scalar>>& factors,
                                   Index skip, Index r) {
  Vector<Scalar> z = Vector<Scalar>::Ones(1);
  for (Index m = static_cast<Index>(factors.size()) - 1; m >= 0; --m) {
    if (m == skip) continue;
    const auto& col = factors[static_cast<std::size_t>(m)].col(r);
    Vector<Scalar> next(z.size() * col.size());
    for (Index i = 0; i < z.size(); ++i)
      next.segment(i * col.size(), col.size()) = z(i) * col;
    z.swap(next);
  }
  return z;
}

/// Rank-one slice of the model: weights(r) * outer product of column r.
template <typename Scalar>
Tensor<Scalar> component_tensor(const std::vector<Matrix<Scalar>>& factors,
                                const Vector<Scalar>& weights, Index r,
                                const Shape& shape) {
  const Vector<Scalar> z = kron_column_all_but(factors, 0, r);
  const Matrix<Scalar> m =
      factors[0].col(r) * (weights(r) * z).transpose();
  return fold(m, 0, shape);
}

}  // namespace detail

/// Alternating least squares (all modes updated in ascending order each
/// iteration, factors renormalized per sweep, weights taken from the last
/// mode). Stops when the fit change drops below cfg.tol; hitting
/// cfg.max_iter returns the best model so far with converged = false.
template <typename Scalar>
std::pair<Kruskal<Scalar>, FitTrace> als_solve(const Tensor<Scalar>& t,
                                               const DecomposeConfig& cfg) {
  detail::validate_solver_input(t, cfg);
  const auto start = std::chrono::steady_clock::now();
  const Index n = t.order();
  const Index rank = cfg.rank;
  const Scalar norm_x2 = t.squared_norm();

  std::vector<Matrix<Scalar>> factors = init_factors(t, rank, cfg.seed, cfg.init);
  std::vector<Matrix<Scalar>> unfolds(static_cast<std::size_t>(n));
  std::vector<Matrix<Scalar>> grams(static_cast<std::size_t>(n));
  for (Index m = 0; m < n; ++m) {
    unfolds[static_cast<std::size_t>(m)] = unfold(t, m);
    const auto& f = factors[static_cast<std::size_t>(m)];
    grams[static_cast<std::size_t>(m)] = f.transpose() * f;
  }

  Vector<Scalar> weights = Vector<Scalar>::Ones(rank);
  FitTrace trace;
  Scalar prev_fit = Scalar(0);

  for (int it = 1; it <= cfg.max_iter; ++it) {
    Matrix<Scalar> last_mttkrp;
    for (Index mode = 0; mode < n; ++mode) {
      const auto m = static_cast<std::size_t>(mode);
      Matrix<Scalar> v = Matrix<Scalar>::Ones(rank, rank);
      for (Index k = 0; k < n; ++k)
        if (k != mode) v = v.cwiseProduct(grams[static_cast<std::size_t>(k)]).eval();
      const Matrix<Scalar> kr = khatri_rao_all_but(factors, mode);
      Matrix<Scalar> w = unfolds[m] * kr;
      Matrix<Scalar> f = w * pinv_psd(v);
      if (mode < n - 1) {
        for (Index j = 0; j < rank; ++j) {
          const Scalar nrm = f.col(j).norm();
          if (nrm > Scalar(0)) f.col(j) /= nrm;
        }
      } else {
        for (Index j = 0; j < rank; ++j) {
          const Scalar nrm = f.col(j).norm();
          weights(j) = nrm;
          if (nrm > Scalar(0)) f.col(j) /= nrm;
        }
        last_mttkrp.swap(w);
      }
      factors[m] = std::move(f);
      grams[m] = factors[m].transpose() * factors[m];
    }

    Matrix<Scalar> g = Matrix<Scalar>::Ones(rank, rank);
    for (Index k = 0; k < n; ++k)
      g = g.cwiseProduct(grams[static_cast<std::size_t>(k)]).eval();
    const Scalar model2 = std::max(weights.dot(g * weights), Scalar(0));
    const Scalar x_inner =
        (last_mttkrp.cwiseProduct(factors[static_cast<std::size_t>(n - 1)])
             .colwise()
             .sum()
             .transpose()
             .array() *
         weights.array())
            .sum();
    const Scalar fit_now = Scalar(1) - (norm_x2 + model2 - Scalar(2) * x_inner) / norm_x2;
    if (!std::isfinite(static_cast<double>(fit_now)))
      throw SolverError("als: fit became non-finite", it);

    trace.entries.push_back({it, static_cast<double>(fit_now),
                             detail::elapsed_seconds(start)});
    if (it >= 2 && std::abs(static_cast<double>(fit_now - prev_fit)) < cfg.tol) {
      trace.converged = true;
      break;
    }
    prev_fit = fit_now;
  }

  trace.iterations = static_cast<int>(trace.entries.size());
  Kruskal<Scalar> model{weights, std::move(factors)};
  model = normalize(std::move(model));
  trace.final_relative_error = static_cast<double>(relative_error(t, model));
  return {std::move(model), trace};
}

/// Block coordinate descent over rank-one components. A first pass fits the
/// components successively against the deflated residual, recomputing the
/// residual from the partial model after each component; refinement sweeps
/// then revisit each component against its leave-one-out residual until the
/// overall fit stabilizes. cfg.max_iter caps the total number of inner
/// iterations (at most 200 per component visit).
template <typename Scalar>
std::pair<Kruskal<Scalar>, FitTrace> bcd_solve(const Tensor<Scalar>& t,
                                               const DecomposeConfig& cfg) {
  detail::validate_solver_input(t, cfg);
  const auto start = std::chrono::steady_clock::now();
  const Index n = t.order();
  const Index rank = cfg.rank;
  const Scalar norm_b2 = t.squared_norm();
  constexpr int kComponentCap = 200;

  std::vector<Matrix<Scalar>> factors = init_factors(t, rank, cfg.seed, cfg.init);
  factors[0].setZero();
  Vector<Scalar> weights = Vector<Scalar>::Zero(rank);
  FitTrace trace;
  int total = 0;

  // Fits component r to the fixed residual y; returns whether the inner
  // fit-change criterion was met before the iteration cap.
  const auto update_component = [&](Index r, const Tensor<Scalar>& y) -> bool {
    const Scalar norm_y2 = y.squared_norm();
    if (norm_y2 == Scalar(0)) {
      weights(r) = Scalar(0);
      if (factors[0].col(r).norm() == Scalar(0)) {
        factors[0].col(r).setZero();
        factors[0](0, r) = Scalar(1);
      }
      return true;
    }
    std::vector<Matrix<Scalar>> unf(static_cast<std::size_t>(n));
    for (Index m = 0; m < n; ++m) unf[static_cast<std::size_t>(m)] = unfold(y, m);

    Scalar prev = Scalar(0);
    const int cap = std::min(kComponentCap, cfg.max_iter - total);
    for (int j = 1; j <= cap; ++j) {
      ++total;
      Scalar lambda_r = Scalar(0);
      Scalar w_dot_c = Scalar(0);
      for (Index mode = 0; mode < n; ++mode) {
        const Vector<Scalar> z = detail::kron_column_all_but(factors, mode, r);
        Scalar s = Scalar(1);
        for (Index m = 0; m < n; ++m)
          if (m != mode) s *= factors[static_cast<std::size_t>(m)].col(r).squaredNorm();
        const Vector<Scalar> w = unf[static_cast<std::size_t>(mode)] * z;
        Vector<Scalar> col = s > Scalar(0) ? Vector<Scalar>(w / s)
                                           : Vector<Scalar>(Vector<Scalar>::Zero(w.size()));
        const Scalar nrm = col.norm();
        if (mode < n - 1) {
          if (nrm > Scalar(0)) col /= nrm;
        } else {
          lambda_r = nrm;
          if (nrm > Scalar(0)) col /= nrm;
          w_dot_c = col.dot(w);
        }
        factors[static_cast<std::size_t>(mode)].col(r) = col;
      }
      weights(r) = lambda_r;
      const Scalar comp_fit =
          Scalar(1) -
          (norm_y2 + lambda_r * lambda_r - Scalar(2) * lambda_r * w_dot_c) / norm_y2;
      if (!std::isfinite(static_cast<double>(comp_fit)))
        throw SolverError("bcd: fit became non-finite", total);
      trace.entries.push_back({total, static_cast<double>(comp_fit),
                               detail::elapsed_seconds(start)});
      if (j >= 2 && std::abs(static_cast<double>(comp_fit - prev)) < cfg.tol)
        return true;
      prev = comp_fit;
    }
    return false;
  };

  // Deflation pass: component r against the residual of components 0..r-1.
  Tensor<Scalar> residual = t;
  for (Index r = 0; r < rank && total < cfg.max_iter; ++r) {
    update_component(r, residual);
    Kruskal<Scalar> partial;
    partial.weights = weights.head(r + 1);
    partial.factors.reserve(static_cast<std::size_t>(n));
    for (Index m = 0; m < n; ++m)
      partial.factors.push_back(factors[static_cast<std::size_t>(m)].leftCols(r + 1));
    residual = t - reconstruct(partial);
  }

  // Refinement sweeps against leave-one-out residuals.
  Scalar prev_overall = Scalar(1) - residual.squared_norm() / norm_b2;
  while (total < cfg.max_iter) {
    for (Index r = 0; r < rank && total < cfg.max_iter; ++r) {
      const Tensor<Scalar> leave_one_out =
          residual + detail::component_tensor(factors, weights, r, t.shape());
      update_component(r, leave_one_out);
      residual = leave_one_out - detail::component_tensor(factors, weights, r, t.shape());
    }
    const Scalar overall = Scalar(1) - residual.squared_norm() / norm_b2;
    if (!std::isfinite(static_cast<double>(overall)))
      throw SolverError("bcd: fit became non-finite", total);
    if (std::abs(static_cast<double>(overall - prev_overall)) < cfg.tol) {
      trace.converged = true;
      break;
    }
    prev_overall = overall;
  }

  trace.iterations = total;
  Kruskal<Scalar> model{weights, std::move(factors)};
  model = normalize(std::move(model));
  trace.final_relative_error = static_cast<double>(relative_error(t, model));
  return {std::move(model), trace};
}

/// Full pipeline: optionally compress, run the requested solver, and map
/// the model back to the ambient space. The reported final relative error
/// is always measured against the original input tensor.
template <typename Scalar>
std::pair<Kruskal<Scalar>, FitTrace> decompose(const Tensor<Scalar>& t,
                                               const DecomposeConfig& cfg) {
  const auto solve = [&](const Tensor<Scalar>& x) {
    return cfg.method == SolveMethod::als ? als_solve(x, cfg) : bcd_solve(x, cfg);
  };
  if (!cfg.randomized) return solve(t);

  CompressConfig cc = cfg.compress;
  if (cc.target_rank == 0) cc.target_rank = cfg.rank;
  detail::check(cc.target_rank == cfg.rank,
                "decompose: compression target rank must equal the CP rank");
  const CompressionResult<Scalar> reduced = compress(t, cc);
  auto [small_model, trace] = solve(reduced.compressed);
  Kruskal<Scalar> model = recover(small_model, reduced.bases);
  trace.final_relative_error = static_cast<double>(relative_error(t, model));
  return {std::move(model), trace};
}

}  // namespace rcp
