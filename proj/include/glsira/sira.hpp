#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "glsira/inner_solver.hpp"
#include "glsira/laplacian_ops.hpp"

namespace glsira {

class ExpansionBreakdown : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Scalar>
struct SiraConfig {
  Index d = 1;         // wanted eigenpairs
  Index m = 0;         // max subspace dimension; 0 picks max(30, q + 10)
  Index q = 0;         // restart size; 0 picks max(d + 5, 15)
  Index k0 = 1;        // initial subspace dimension
  Scalar eps = Scalar(1e-8);
  InnerOptions<Scalar> inner;
  TrimPolicy trim_policy = TrimPolicy::max_degree();
  std::optional<Scalar> delta;  // unset: 2 max(diag L)
  Scalar sigma0 = Scalar(0);
  std::uint64_t seed = 20170301;
  std::int64_t max_outer = 0;   // 0 picks 100 d m
  bool validate = false;        // assert kernel orthogonality of residuals

  Index restart_size() const { return q > 0 ? q : std::max<Index>(d + 5, 15); }
  Index max_dimension() const { return m > 0 ? m : std::max<Index>(30, restart_size() + 10); }
  std::int64_t outer_cap() const { return max_outer > 0 ? max_outer : 100 * d * max_dimension(); }

  /// Throws std::invalid_argument unless 1 <= d <= q < m and k0 >= 1.
  void check() const {
    const Index qq = restart_size();
    const Index mm = max_dimension();
    if (d < 1) throw std::invalid_argument("number of eigenpairs must be at least 1");
    if (!(d <= qq && qq < mm))
      throw std::invalid_argument("need d <= q < m, got d=" + std::to_string(d) + " q=" + std::to_string(qq) +
                                  " m=" + std::to_string(mm));
    if (k0 < 1 || k0 >= mm) throw std::invalid_argument("initial dimension k0 must satisfy 1 <= k0 < m");
    if (!(eps > Scalar(0))) throw std::invalid_argument("tolerance must be positive");
    if (!(inner.tol > Scalar(0))) throw std::invalid_argument("inner tolerance must be positive");
    if (inner.maxit < 1) throw std::invalid_argument("inner iteration limit must be at least 1");
    if (sigma0 < Scalar(0)) throw std::invalid_argument("initial shift must be nonnegative");
    if (delta && !(*delta > Scalar(0))) throw std::invalid_argument("deflation weight must be positive");
  }
};

/// Orthonormal search basis U (n x k, kept orthogonal to the ones vector),
/// its image W = (L + delta V V^T) U and the Rayleigh quotient H = U^T W.
/// Storage holds `capacity` columns; only the leading k are live.
template <typename Scalar>
struct SearchSubspace {
  MatrixX<Scalar> U;
  MatrixX<Scalar> W;
  MatrixX<Scalar> H;
  Index k = 0;

  auto basis() const { return U.leftCols(k); }
  auto image() const { return W.leftCols(k); }
  auto quotient() const { return H.topLeftCorner(k, k); }
  Index capacity() const { return U.cols(); }
};

template <typename Scalar>
struct RitzDecomposition {
  VectorX<Scalar> thetas;  // ascending
  MatrixX<Scalar> S;       // orthonormal eigenvectors of H, column-wise
};

template <typename Scalar>
struct ResidualInfo {
  VectorX<Scalar> r;
  Scalar theta = Scalar(0);
  VectorX<Scalar> y;
};

struct IterationRecord {
  std::int64_t sweep = 0;  // index j of the eigenpair being sought (1-based)
  std::int64_t outer = 0;  // global outer iteration counter
  std::int64_t k = 0;
  double theta1 = 0.0;
  double resnorm = 0.0;
  double sigma = 0.0;
  std::int64_t inner_iterations = 0;

  bool operator==(const IterationRecord&) const = default;
};

enum class SolveStatus { converged, max_iterations, stagnation };

template <typename Scalar>
struct EigenResult {
  std::vector<Scalar> lambdas;
  MatrixX<Scalar> vectors;        // n x c
  std::vector<Scalar> residuals;  // ||L v - lambda v|| against the undeflated L
  std::vector<IterationRecord> history;
  SolveStatus status = SolveStatus::converged;
  std::string message;
  Index trim_index = 0;
  Scalar delta = Scalar(0);
  std::int64_t outer_iterations = 0;
  std::int64_t inner_iterations = 0;
  std::int64_t inner_failures = 0;  // inner solves that missed their tolerance

  Index converged_count() const { return static_cast<Index>(lambdas.size()); }
  bool converged() const { return status == SolveStatus::converged; }
};

namespace detail {

/// Modified Gram-Schmidt against 1_n, the columns of V and the live columns of
/// U, with a second (DGKS) pass when the first one loses more than 1/sqrt(2)
/// of the norm. Returns the norm after orthogonalization.
template <typename Scalar, typename UBlock>
Scalar orthogonalize(VectorX<Scalar>& z, const UBlock& U, const MatrixX<Scalar>& V) {
  const Scalar kappa = Scalar(1) / std::sqrt(Scalar(2));
  Scalar before = z.norm();
  for (int pass = 0; pass < 2; ++pass) {
    z.array() -= z.mean();
    for (Index j = 0; j < V.cols(); ++j) z.noalias() -= V.col(j).dot(z) * V.col(j);
    for (Index j = 0; j < U.cols(); ++j) z.noalias() -= U.col(j).dot(z) * U.col(j);
    const Scalar after = z.norm();
    if (after > kappa * before) return after;
    before = after;
  }
  return z.norm();
}

template <typename Scalar>
void refresh_image(const LaplacianMatrix<Scalar>& L, const DeflationSet<Scalar>& defl, SearchSubspace<Scalar>& ss) {
  for (Index j = 0; j < ss.k; ++j) ss.W.col(j) = deflated_matvec(L, defl, ss.U.col(j));
  MatrixX<Scalar> H = ss.basis().transpose() * ss.image();
  ss.H.topLeftCorner(ss.k, ss.k) = Scalar(0.5) * (H + H.transpose());
}

}  // namespace detail

/// Random start: k0 Gaussian columns projected off 1_n (and V), orthonormalized.
template <typename Scalar, typename Rng>
SearchSubspace<Scalar> init_subspace(const LaplacianMatrix<Scalar>& L, const DeflationSet<Scalar>& defl, Index k0,
                                     Rng& rng, Index capacity = 0) {
  const Index n = L.size();
  if (k0 < 1) throw std::invalid_argument("init_subspace: k0 must be at least 1");
  capacity = std::max(capacity, k0);
  SearchSubspace<Scalar> ss;
  ss.U = MatrixX<Scalar>::Zero(n, capacity);
  ss.W = MatrixX<Scalar>::Zero(n, capacity);
  ss.H = MatrixX<Scalar>::Zero(capacity, capacity);
  std::normal_distribution<double> gauss(0.0, 1.0);
  constexpr int max_draws = 16;
  int draws = 0;
  while (ss.k < k0) {
    if (++draws > max_draws * k0) throw ExpansionBreakdown("init_subspace: could not draw an independent vector");
    VectorX<Scalar> z(n);
    for (Index t = 0; t < n; ++t) z[t] = static_cast<Scalar>(gauss(rng));
    const Scalar before = z.norm();
    const Scalar after = detail::orthogonalize(z, ss.basis(), defl.vectors);
    if (!(after > Scalar(1e-8) * before)) continue;
    ss.U.col(ss.k) = z / after;
    ++ss.k;
  }
  detail::refresh_image(L, defl, ss);
  return ss;
}

template <typename Scalar>
SearchSubspace<Scalar> init_subspace(const LaplacianMatrix<Scalar>& L, Index k0, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return init_subspace(L, DeflationSet<Scalar>(L.size(), Scalar(1)), k0, rng);
}

/// Full eigendecomposition of the small symmetric H, ascending, with each
/// eigenvector's largest-magnitude entry made positive.
template <typename Derived>
RitzDecomposition<typename Derived::Scalar> ritz_decompose(const Eigen::MatrixBase<Derived>& H) {
  using Scalar = typename Derived::Scalar;
  const MatrixX<Scalar> sym = Scalar(0.5) * (H + H.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(sym);
  RitzDecomposition<Scalar> rd{es.eigenvalues(), es.eigenvectors()};
  for (Index j = 0; j < rd.S.cols(); ++j) {
    Index at = 0;
    rd.S.col(j).cwiseAbs().maxCoeff(&at);
    if (rd.S(at, j) < Scalar(0)) rd.S.col(j) *= Scalar(-1);
  }
  return rd;
}

/// r = W s1 - theta1 U s1 together with the Ritz pair (theta1, U s1).
template <typename Scalar>
ResidualInfo<Scalar> compute_residual(const SearchSubspace<Scalar>& ss, const RitzDecomposition<Scalar>& rd) {
  ResidualInfo<Scalar> out;
  const auto s1 = rd.S.col(0);
  out.theta = rd.thetas[0];
  out.y = ss.basis() * s1;
  out.r = ss.image() * s1 - out.theta * out.y;
  return out;
}

/// Appends z (orthonormalized against U, V and 1_n) and extends W and H.
template <typename Scalar>
void expand(SearchSubspace<Scalar>& ss, VectorX<Scalar> z, const LaplacianMatrix<Scalar>& L,
            const DeflationSet<Scalar>& defl) {
  if (ss.k >= ss.capacity()) throw std::length_error("expand: subspace is at capacity");
  const Scalar before = z.norm();
  if (!(before > Scalar(0))) throw ExpansionBreakdown("expand: zero expansion vector");
  const Scalar after = detail::orthogonalize(z, ss.basis(), defl.vectors);
  if (!(after >= Scalar(1e-12) * before)) throw ExpansionBreakdown("expand: vector lies in the current subspace");
  const Index k = ss.k;
  ss.U.col(k) = z / after;
  ss.W.col(k) = deflated_matvec(L, defl, ss.U.col(k));
  const VectorX<Scalar> h = ss.U.leftCols(k + 1).transpose() * ss.W.col(k);
  ss.H.col(k).head(k + 1) = h;
  ss.H.row(k).head(k + 1) = h.transpose();
  ss.k = k + 1;
}

/// Keeps the q leading Ritz directions: U <- U S(:, 1:q), W <- W S(:, 1:q).
template <typename Scalar>
void restart(SearchSubspace<Scalar>& ss, const RitzDecomposition<Scalar>& rd, Index q) {
  if (q < 1 || q > ss.k) throw std::invalid_argument("restart: q out of range");
  const auto Sq = rd.S.leftCols(q);
  ss.U.leftCols(q) = (ss.basis() * Sq).eval();
  ss.W.leftCols(q) = (ss.image() * Sq).eval();
  ss.H.topLeftCorner(q, q) = rd.thetas.head(q).asDiagonal();
  ss.k = q;
}

/// Drops the converged leading Ritz direction: U <- U S(:, 2:k).
template <typename Scalar>
void purge(SearchSubspace<Scalar>& ss, const RitzDecomposition<Scalar>& rd) {
  const Index k = ss.k;
  if (k == 0) throw std::invalid_argument("purge: empty subspace");
  if (k == 1) {
    ss.k = 0;
    return;
  }
  const auto S = rd.S.rightCols(k - 1);
  ss.U.leftCols(k - 1) = (ss.basis() * S).eval();
  ss.W.leftCols(k - 1) = (ss.image() * S).eval();
  ss.H.topLeftCorner(k - 1, k - 1) = rd.thetas.tail(k - 1).asDiagonal();
  ss.k = k - 1;
}

/// New shift near the next Ritz value, clamped to keep L^ - sigma I
/// diagonally positive: min(0.95 theta2, 0.95 min diag L^), never negative.
template <typename Scalar>
Scalar update_shift(const RitzDecomposition<Scalar>& rd, Scalar min_trimmed_diag, Scalar current = Scalar(0)) {
  if (rd.thetas.size() < 2) return current;
  const Scalar sigma = std::min(Scalar(0.95) * rd.thetas[1], Scalar(0.95) * min_trimmed_diag);
  return std::max(sigma, Scalar(0));
}

namespace detail {

/// Copies the locked pairs into the result in ascending eigenvalue order.
/// Clustered eigenvalues can lock slightly out of order.
template <typename Scalar>
void collect(EigenResult<Scalar>& result, const DeflationSet<Scalar>& defl) {
  const std::size_t c = result.lambdas.size();
  std::vector<std::size_t> order(c);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return result.lambdas[a] < result.lambdas[b]; });
  std::vector<Scalar> lambdas(c), residuals(c);
  result.vectors.resize(defl.vectors.rows(), static_cast<Index>(c));
  for (std::size_t t = 0; t < c; ++t) {
    lambdas[t] = result.lambdas[order[t]];
    residuals[t] = result.residuals[order[t]];
    result.vectors.col(static_cast<Index>(t)) = defl.vectors.col(static_cast<Index>(order[t]));
  }
  result.lambdas = std::move(lambdas);
  result.residuals = std::move(residuals);
}

}  // namespace detail

/// Snapshot handed to an optional observer after every Ritz extraction.
template <typename Scalar>
struct IterationView {
  const SearchSubspace<Scalar>& subspace;
  const RitzDecomposition<Scalar>& ritz;
  const DeflationSet<Scalar>& deflation;
  const IterationRecord& record;
};

template <typename Scalar>
using IterationObserver = std::function<void(const IterationView<Scalar>&)>;

/// Integrated shift-invert residual Arnoldi for the d smallest positive
/// eigenpairs of a connected graph Laplacian. Each expansion solves the
/// trimmed, shifted, deflated system inexactly; converged pairs are deflated
/// to lambda + delta and purged from the search space.
template <typename Scalar>
EigenResult<Scalar> isira_solve(const LaplacianMatrix<Scalar>& L, const SiraConfig<Scalar>& cfg,
                                const IterationObserver<Scalar>& observer = {}) {
  cfg.check();
  const Index n = L.size();
  if (n < 2) throw std::invalid_argument("isira_solve: need at least two vertices");
  if (cfg.d > n - 1)
    throw std::invalid_argument("isira_solve: a connected graph on " + std::to_string(n) + " vertices has only " +
                                std::to_string(n - 1) + " positive eigenvalues");

  // The search space lives in the (n-1)-dimensional complement of 1_n.
  const Index m = std::min(cfg.max_dimension(), n - 1);
  const Index q = std::max<Index>(1, std::min(cfg.restart_size(), m - 1));
  const Index k0 = std::min(cfg.k0, m);

  EigenResult<Scalar> result;
  const TrimContext trim = select_trim_index(L, cfg.trim_policy);
  const Scalar delta = cfg.delta.value_or(choose_delta(L));
  result.trim_index = trim.index;
  result.delta = delta;

  DeflationSet<Scalar> defl(n, delta);
  ConstrainedSolver<Scalar> solver(L, trim, cfg.inner);
  std::mt19937_64 rng(cfg.seed);
  SearchSubspace<Scalar> ss = init_subspace(L, defl, k0, rng, m);
  Scalar sigma = cfg.sigma0;
  const std::int64_t cap = cfg.outer_cap();

  auto add_random_direction = [&]() -> bool {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int attempt = 0; attempt < 8; ++attempt) {
      VectorX<Scalar> z(n);
      for (Index t = 0; t < n; ++t) z[t] = static_cast<Scalar>(gauss(rng));
      try {
        expand(ss, z, L, defl);
        return true;
      } catch (const ExpansionBreakdown&) {
      }
    }
    return false;
  };

  // After a purge the kept Ritz vectors can be exact eigenvectors of larger
  // eigenvalues while a further copy of a repeated eigenvalue is missing from
  // the space entirely. A random direction plus shift-invert steps on it,
  // shifted just below the eigenvalue that was locked, favour such a copy.
  auto reseed = [&](Scalar locked) -> bool {
    const Index available = n - 1 - defl.size();
    if (ss.k >= available) return true;
    if (ss.k == m) {
      const auto rd = ritz_decompose(ss.quotient());
      restart(ss, rd, q);
    }
    if (!add_random_direction()) return false;
    const Scalar anchor = std::min(sigma, Scalar(0.95) * locked);
    for (int step = 0; step < 2 && ss.k < available && ss.k < m; ++step) {
      auto sol = solver.solve(defl, anchor, VectorX<Scalar>(ss.U.col(ss.k - 1)));
      result.inner_iterations += sol.report.iterations;
      try {
        expand(ss, std::move(sol.solution), L, defl);
      } catch (const ExpansionBreakdown&) {
        break;
      }
    }
    return true;
  };

  for (Index j = 1; j <= cfg.d; ++j) {
    bool refreshed = false;
    for (;;) {
      if (result.outer_iterations >= cap) {
        result.status = SolveStatus::max_iterations;
        result.message = "outer iteration limit " + std::to_string(cap) + " reached with " +
                         std::to_string(result.converged_count()) + " of " + std::to_string(cfg.d) +
                         " eigenpairs converged";
        detail::collect(result, defl);
        return result;
      }
      ++result.outer_iterations;

      const auto rd = ritz_decompose(ss.quotient());
      auto res = compute_residual(ss, rd);
      const Scalar rnorm = res.r.norm();

      IterationRecord rec;
      rec.sweep = j;
      rec.outer = result.outer_iterations;
      rec.k = ss.k;
      rec.theta1 = static_cast<double>(res.theta);
      rec.resnorm = static_cast<double>(rnorm);
      rec.sigma = static_cast<double>(sigma);

      if (cfg.validate && rnorm > Scalar(0)) {
        // Rounding in 1^T r grows with n and with |theta|, not with ||r||.
        const Scalar scale = std::sqrt(static_cast<Scalar>(n)) * (rnorm + std::abs(res.theta));
        const Scalar drift = std::abs(res.r.sum()) / scale;
        if (drift > Scalar(1e-10))
          throw std::logic_error("isira_solve: residual lost kernel orthogonality (" +
                                 std::to_string(static_cast<double>(drift)) + ")");
      }

      if (rnorm < cfg.eps) {
        // Accept only if the pair also satisfies the undeflated problem.
        const Scalar unit = res.y.norm();
        const VectorX<Scalar> v = res.y / unit;
        const Scalar true_res = (L.matrix * v - res.theta * v).norm();
        if (true_res < cfg.eps && res.theta > Scalar(0)) {
          result.history.push_back(rec);
          if (observer) observer({ss, rd, defl, result.history.back()});
          defl.append(res.theta, v);
          result.lambdas.push_back(res.theta);
          result.residuals.push_back(true_res);
          sigma = update_shift(rd, solver.min_trimmed_diagonal(), sigma);
          purge(ss, rd);
          if (j < cfg.d && !reseed(res.theta)) {
            result.status = SolveStatus::stagnation;
            result.message = "could not reseed the search space";
            detail::collect(result, defl);
            return result;
          }
          break;
        }
        if (!refreshed) {
          // Recompute W exactly; accumulated restart roundoff can fake convergence.
          detail::refresh_image(L, defl, ss);
          refreshed = true;
          result.history.push_back(rec);
          if (observer) observer({ss, rd, defl, result.history.back()});
          continue;
        }
        res.r = L.matrix * v - res.theta * v;
      }

      if (ss.k == m) {
        restart(ss, rd, q);
        refreshed = false;
      }

      auto sol = solver.solve(defl, sigma, res.r);
      rec.inner_iterations = sol.report.iterations;
      result.inner_iterations += sol.report.iterations;
      if (!sol.report.converged) ++result.inner_failures;
      result.history.push_back(rec);
      if (observer) observer({ss, rd, defl, result.history.back()});

      bool grown = false;
      try {
        expand(ss, std::move(sol.solution), L, defl);
        grown = true;
      } catch (const ExpansionBreakdown&) {
        grown = add_random_direction();
      }
      if (!grown) {
        result.status = SolveStatus::stagnation;
        result.message = "search space stopped growing after " + std::to_string(result.converged_count()) +
                         " converged eigenpairs";
        detail::collect(result, defl);
        return result;
      }
    }
  }
  detail::collect(result, defl);
  result.status = SolveStatus::converged;
  return result;
}

}  // namespace glsira
