#pragma once

// Dense reference algorithms for tests and small baselines. Nothing under
// isira_solve may include this header.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "glsira/laplacian.hpp"
#include "glsira/sira.hpp"

namespace glsira::oracle {

inline constexpr Index max_dense_order = 2000;

inline void check_order(Index n, const char* who) {
  if (n > max_dense_order)
    throw std::length_error(std::string(who) + ": order " + std::to_string(n) + " exceeds dense limit " +
                            std::to_string(max_dense_order));
}

/// Symmetric matrix held densely; symmetrized on construction.
template <typename Scalar>
struct DenseSymmetric {
  MatrixX<Scalar> values;

  DenseSymmetric() = default;
  template <typename Derived>
  explicit DenseSymmetric(const Eigen::MatrixBase<Derived>& a)
      : values(Scalar(0.5) * (a + a.transpose())) {}
  explicit DenseSymmetric(const LaplacianMatrix<Scalar>& L) : values(MatrixX<Scalar>(L.matrix)) {}

  Index size() const { return values.rows(); }
};

template <typename Scalar>
struct DenseEigen {
  VectorX<Scalar> values;   // ascending
  MatrixX<Scalar> vectors;  // orthonormal columns
};

/// Cyclic-by-row Jacobi rotations until the off-diagonal Frobenius norm drops
/// below 1e-12 ||A||_F. Eigenvectors get their largest entry made positive.
template <typename Scalar>
DenseEigen<Scalar> dense_eigh(const DenseSymmetric<Scalar>& A, int max_sweeps = 100) {
  const Index n = A.size();
  check_order(n, "dense_eigh");
  MatrixX<Scalar> a = A.values;
  MatrixX<Scalar> v = MatrixX<Scalar>::Identity(n, n);
  const Scalar target = Scalar(1e-12) * a.norm();

  auto off_norm = [&] {
    Scalar s(0);
    for (Index c = 0; c < n; ++c)
      for (Index r = 0; r < n; ++r)
        if (r != c) s += a(r, c) * a(r, c);
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < max_sweeps && off_norm() > target; ++sweep) {
    for (Index p = 0; p + 1 < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        if (apq == Scalar(0)) continue;
        const Scalar tau = (a(q, q) - a(p, p)) / (Scalar(2) * apq);
        const Scalar t = (tau >= Scalar(0) ? Scalar(1) : Scalar(-1)) / (std::abs(tau) + std::sqrt(Scalar(1) + tau * tau));
        const Scalar c = Scalar(1) / std::sqrt(Scalar(1) + t * t);
        const Scalar s = t * c;
        for (Index k = 0; k < n; ++k) {
          const Scalar akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const Scalar apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Index k = 0; k < n; ++k) {
          const Scalar vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) { return a(x, x) < a(y, y); });
  DenseEigen<Scalar> out{VectorX<Scalar>(n), MatrixX<Scalar>(n, n)};
  for (Index j = 0; j < n; ++j) {
    out.values[j] = a(order[j], order[j]);
    out.vectors.col(j) = v.col(order[j]);
    Index at = 0;
    out.vectors.col(j).cwiseAbs().maxCoeff(&at);
    if (out.vectors(at, j) < Scalar(0)) out.vectors.col(j) *= Scalar(-1);
  }
  return out;
}

template <typename Scalar>
DenseEigen<Scalar> dense_eigh(const LaplacianMatrix<Scalar>& L) {
  return dense_eigh(DenseSymmetric<Scalar>(L));
}

class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gaussian elimination with partial pivoting.
template <typename Derived, typename RhsDerived>
VectorX<typename Derived::Scalar> dense_solve(const Eigen::MatrixBase<Derived>& A,
                                              const Eigen::MatrixBase<RhsDerived>& b) {
  using Scalar = typename Derived::Scalar;
  check_order(A.rows(), "dense_solve");
  if (A.rows() != A.cols() || A.rows() != b.rows()) throw std::invalid_argument("dense_solve: shape mismatch");
  Eigen::PartialPivLU<MatrixX<Scalar>> lu(A.eval());
  if (!(lu.rcond() > static_cast<Scalar>(A.rows()) * std::numeric_limits<Scalar>::epsilon()))
    throw SingularMatrixError("dense_solve: matrix is singular to working precision");
  return lu.solve(b);
}

struct VerificationReport {
  std::vector<double> residuals;         // ||L v_j - lambda_j v_j||_2
  double max_residual = 0.0;
  double orthogonality_defect = 0.0;     // max |V^T V - I|
  double kernel_defect = 0.0;            // max |1^T v_j|
  std::optional<double> max_eigenvalue_error;
  bool oracle_checked = false;
  bool skipped_eigenvalue = false;
  bool ascending = true;
  bool residuals_ok = true;
};

/// Residual, orthogonality and (for small n) eigenvalue checks. The oracle
/// pass requires every positive eigenvalue up to the largest reported one to
/// be matched, multiplicities included.
template <typename Scalar>
VerificationReport verify_eigresult(const LaplacianMatrix<Scalar>& L, const EigenResult<Scalar>& result, Scalar eps,
                                    bool use_oracle = true, Scalar match_tol = Scalar(1e-6)) {
  VerificationReport rep;
  const Index c = result.converged_count();
  const Index n = L.size();
  for (Index j = 0; j < c; ++j) {
    const VectorX<Scalar> v = result.vectors.col(j);
    const Scalar lam = result.lambdas[static_cast<std::size_t>(j)];
    const double res = static_cast<double>((L.matrix * v - lam * v).norm());
    rep.residuals.push_back(res);
    rep.max_residual = std::max(rep.max_residual, res);
    rep.kernel_defect = std::max(rep.kernel_defect, static_cast<double>(std::abs(v.sum())));
    if (j > 0 && lam < result.lambdas[static_cast<std::size_t>(j - 1)]) rep.ascending = false;
  }
  rep.residuals_ok = rep.max_residual <= static_cast<double>(eps);
  if (c > 0) {
    const MatrixX<Scalar> G = result.vectors.transpose() * result.vectors - MatrixX<Scalar>::Identity(c, c);
    rep.orthogonality_defect = static_cast<double>(G.cwiseAbs().maxCoeff());
  }
  if (!use_oracle || n > max_dense_order) return rep;

  const auto eig = dense_eigh(L);
  const Scalar zero_tol = Scalar(1e-8) * std::max(Scalar(1), eig.values.cwiseAbs().maxCoeff());
  std::vector<Scalar> positive;
  for (Index j = 0; j < n; ++j)
    if (eig.values[j] > zero_tol) positive.push_back(eig.values[j]);
  rep.oracle_checked = true;
  double err = 0.0;
  for (Index j = 0; j < c; ++j) {
    if (static_cast<std::size_t>(j) >= positive.size()) {
      err = std::numeric_limits<double>::infinity();
      break;
    }
    err = std::max(err, static_cast<double>(std::abs(result.lambdas[j] - positive[j])));
  }
  rep.max_eigenvalue_error = err;
  // Sorted results that run ahead of the sorted oracle list have jumped over
  // an eigenvalue (or one copy of a repeated one).
  std::vector<Scalar> sorted(result.lambdas.begin(), result.lambdas.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t j = 0; j < sorted.size(); ++j)
    if (j >= positive.size() || sorted[j] > positive[j] + match_tol) rep.skipped_eigenvalue = true;
  return rep;
}

/// Smallest d positive eigenvalues from eig(L + tau I), dropping the shifted
/// kernel eigenvalue.
template <typename Scalar>
std::vector<Scalar> baseline_perturbed(const LaplacianMatrix<Scalar>& L, Scalar tau, Index d) {
  const Index n = L.size();
  check_order(n, "baseline_perturbed");
  if (!(tau > Scalar(0))) throw std::invalid_argument("baseline_perturbed: tau must be positive");
  if (d > n - 1) throw std::invalid_argument("baseline_perturbed: d exceeds n - 1");
  MatrixX<Scalar> A(L.matrix);
  A.diagonal().array() += tau;
  const auto eig = dense_eigh(DenseSymmetric<Scalar>(A));
  std::vector<Scalar> out;
  for (Index j = 1; j <= d; ++j) out.push_back(eig.values[j] - tau);
  return out;
}

/// L_d + [e1 1][-e1^T; 1^T] with L_d = L + e1 e1^T. The correction moves the
/// kernel eigenvalue away from zero and leaves the positive spectrum alone.
template <typename Scalar>
MatrixX<Scalar> rank_two_corrected(const LaplacianMatrix<Scalar>& L) {
  const Index n = L.size();
  check_order(n, "rank_two_corrected");
  MatrixX<Scalar> Ld(L.matrix);
  Ld(0, 0) += Scalar(1);
  MatrixX<Scalar> left = MatrixX<Scalar>::Zero(n, 2);
  MatrixX<Scalar> right = MatrixX<Scalar>::Zero(2, n);
  left(0, 0) = Scalar(1);
  left.col(1).setOnes();
  right(0, 0) = Scalar(-1);
  right.row(1).setOnes();
  return Ld + left * right;
}

/// Smallest d eigenvalues of the rank-two corrected matrix, excluding the
/// eigenpair that carries the kernel direction.
template <typename Scalar>
std::vector<Scalar> baseline_nullspace_deflated(const LaplacianMatrix<Scalar>& L, Index d) {
  const Index n = L.size();
  if (d > n - 1) throw std::invalid_argument("baseline_nullspace_deflated: d exceeds n - 1");
  const auto eig = dense_eigh(DenseSymmetric<Scalar>(rank_two_corrected(L)));
  Index kernel = 0;
  eig.vectors.colwise().sum().cwiseAbs().maxCoeff(&kernel);
  std::vector<Scalar> out;
  for (Index j = 0; j < n && static_cast<Index>(out.size()) < d; ++j)
    if (j != kernel) out.push_back(eig.values[j]);
  return out;
}

}  // namespace glsira::oracle
