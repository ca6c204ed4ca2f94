#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "glsira/laplacian_ops.hpp"

namespace glsira {

enum class PreconditionerKind { identity, jacobi, deflated };
enum class InnerSolverKind { cg, minres };
enum class ToleranceMode { relative, absolute };

class SingularCoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// Operators either expose apply(x, y) or are plain callables returning y.
template <typename Op, typename Scalar>
void apply_op(const Op& op, const VectorX<Scalar>& x, VectorX<Scalar>& y) {
  if constexpr (requires { op.apply(x, y); }) {
    op.apply(x, y);
  } else {
    y = op(x);
  }
}

}  // namespace detail

/// (M + delta V V^T)^{-1} x via Sherman-Morrison-Woodbury:
///   (I - delta M^{-1} V (I_c + delta V^T M^{-1} V)^{-1} V^T) M^{-1} x.
/// The c x c core is Cholesky-factorized once at construction.
template <typename Scalar>
class SmwInverse {
 public:
  using Apply = std::function<VectorX<Scalar>(const VectorX<Scalar>&)>;

  SmwInverse(Apply base, MatrixX<Scalar> v_hat, Scalar delta)
      : base_(std::move(base)), v_hat_(std::move(v_hat)), delta_(delta) {
    const Index c = v_hat_.cols();
    m_inv_v_.resize(v_hat_.rows(), c);
    for (Index j = 0; j < c; ++j) m_inv_v_.col(j) = base_(v_hat_.col(j));
    if (c > 0) {
      MatrixX<Scalar> core = MatrixX<Scalar>::Identity(c, c) + delta_ * (v_hat_.transpose() * m_inv_v_);
      core = (Scalar(0.5) * (core + core.transpose())).eval();
      core_.compute(core);
      if (core_.info() != Eigen::Success) throw SingularCoreError("SMW core matrix is not positive definite");
    }
  }

  Index rank() const { return v_hat_.cols(); }

  VectorX<Scalar> apply(const VectorX<Scalar>& x) const {
    VectorX<Scalar> y = base_(x);
    if (rank() > 0) {
      const VectorX<Scalar> coeff = core_.solve(v_hat_.transpose() * y);
      y.noalias() -= delta_ * (m_inv_v_ * coeff);
    }
    return y;
  }

 private:
  Apply base_;
  MatrixX<Scalar> v_hat_;
  MatrixX<Scalar> m_inv_v_;
  Scalar delta_;
  Eigen::LLT<MatrixX<Scalar>> core_;
};

template <typename Scalar, typename BaseApply>
VectorX<Scalar> smw_apply(BaseApply&& base, const MatrixX<Scalar>& v_hat, Scalar delta, const VectorX<Scalar>& x) {
  return SmwInverse<Scalar>(std::forward<BaseApply>(base), v_hat, delta).apply(x);
}

/// Approximate inverse of the trimmed system matrix.
template <typename Scalar>
class Preconditioner {
 public:
  static Preconditioner identity(Index n) {
    Preconditioner p;
    p.kind_ = PreconditionerKind::identity;
    p.n_ = n;
    return p;
  }

  static Preconditioner jacobi(VectorX<Scalar> inverse_diagonal) {
    Preconditioner p;
    p.kind_ = PreconditionerKind::jacobi;
    p.n_ = inverse_diagonal.size();
    p.inv_diag_ = std::move(inverse_diagonal);
    return p;
  }

  /// Wraps a diagonal (identity or Jacobi) base with the deflation term.
  static Preconditioner deflated(const Preconditioner& base, MatrixX<Scalar> v_hat, Scalar delta) {
    if (base.kind_ == PreconditionerKind::deflated)
      throw std::invalid_argument("Preconditioner::deflated: base must be identity or jacobi");
    Preconditioner p = base;
    p.kind_ = PreconditionerKind::deflated;
    p.smw_ = std::make_shared<const SmwInverse<Scalar>>(
        [diag = base](const VectorX<Scalar>& x) { return diag(x); }, std::move(v_hat), delta);
    return p;
  }

  PreconditionerKind kind() const { return kind_; }
  Index size() const { return n_; }
  const VectorX<Scalar>& inverse_diagonal() const { return inv_diag_; }

  void apply(const VectorX<Scalar>& x, VectorX<Scalar>& y) const {
    if (smw_) {
      y = smw_->apply(x);
    } else if (kind_ == PreconditionerKind::jacobi) {
      y = inv_diag_.cwiseProduct(x);
    } else {
      y = x;
    }
  }

  VectorX<Scalar> operator()(const VectorX<Scalar>& x) const {
    VectorX<Scalar> y;
    apply(x, y);
    return y;
  }

 private:
  PreconditionerKind kind_ = PreconditionerKind::identity;
  Index n_ = 0;
  VectorX<Scalar> inv_diag_;
  std::shared_ptr<const SmwInverse<Scalar>> smw_;
};

/// Reciprocal diagonal of L^ - sigma I. Throws when sigma reaches a diagonal
/// entry, which means the caller has to clamp the shift.
template <typename Scalar>
Preconditioner<Scalar> build_jacobi(const LaplacianMatrix<Scalar>& L, const TrimContext& trim, Scalar sigma) {
  VectorX<Scalar> d = restrict_to_trimmed(L.diag, trim);
  d.array() -= sigma;
  if (d.size() > 0 && !(d.minCoeff() > Scalar(0)))
    throw std::domain_error("build_jacobi: shift " + std::to_string(static_cast<double>(sigma)) +
                            " leaves a nonpositive diagonal entry");
  return Preconditioner<Scalar>::jacobi(d.cwiseInverse());
}

struct SolveReport {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
  std::optional<std::string> breakdown;
  InnerSolverKind solver = InnerSolverKind::cg;
  double sigma_used = 0.0;
  double rhs_deviation = 0.0;  // |1^T r| / ||r|| before projection
  bool rhs_projected = false;
};

template <typename Scalar>
struct SolveResult {
  VectorX<Scalar> solution;
  SolveReport report;
};

/// Preconditioned conjugate gradients from a zero initial guess. Stops when
/// ||b - Ax|| <= tol ||b||. A nonpositive curvature p^T A p is reported as a
/// breakdown and the current iterate is returned.
template <typename Scalar, typename Op, typename Precond>
SolveResult<Scalar> pcg(const Op& op, const VectorX<Scalar>& rhs, const Precond& M, Scalar tol, int maxit) {
  SolveResult<Scalar> out;
  out.report.solver = InnerSolverKind::cg;
  const Index n = rhs.size();
  out.solution = VectorX<Scalar>::Zero(n);
  const Scalar bnorm = rhs.norm();
  if (bnorm == Scalar(0)) {
    out.report.converged = true;
    return out;
  }
  VectorX<Scalar>& x = out.solution;
  VectorX<Scalar> r = rhs, z(n), p(n), q(n);
  detail::apply_op(M, r, z);
  Scalar rz = r.dot(z);
  p = z;
  for (int it = 1; it <= maxit; ++it) {
    detail::apply_op(op, p, q);
    const Scalar pq = p.dot(q);
    if (!(pq > Scalar(0))) {
      out.report.breakdown = "indefinite operator: p^T A p <= 0";
      break;
    }
    const Scalar alpha = rz / pq;
    x.noalias() += alpha * p;
    r.noalias() -= alpha * q;
    out.report.iterations = it;
    if (r.norm() <= tol * bnorm) break;
    detail::apply_op(M, r, z);
    const Scalar rz_next = r.dot(z);
    if (!(rz_next > Scalar(0))) {
      out.report.breakdown = "preconditioner is not positive definite";
      break;
    }
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  detail::apply_op(op, x, q);
  out.report.relative_residual = static_cast<double>((rhs - q).norm() / bnorm);
  out.report.converged = !out.report.breakdown && out.report.relative_residual <= static_cast<double>(tol);
  return out;
}

/// Preconditioned MINRES (Paige-Saunders) for symmetric, possibly indefinite
/// operators with a symmetric positive definite preconditioner.
template <typename Scalar, typename Op, typename Precond>
SolveResult<Scalar> minres(const Op& op, const VectorX<Scalar>& rhs, const Precond& M, Scalar tol, int maxit) {
  SolveResult<Scalar> out;
  out.report.solver = InnerSolverKind::minres;
  const Index n = rhs.size();
  out.solution = VectorX<Scalar>::Zero(n);
  const Scalar bnorm = rhs.norm();
  if (bnorm == Scalar(0)) {
    out.report.converged = true;
    return out;
  }
  VectorX<Scalar>& x = out.solution;
  VectorX<Scalar> r1 = rhs, r2 = rhs, y(n), v(n), w = VectorX<Scalar>::Zero(n), w1(n),
                  w2 = VectorX<Scalar>::Zero(n), ax(n);
  detail::apply_op(M, r1, y);
  Scalar beta1 = r1.dot(y);
  if (!(beta1 > Scalar(0))) {
    out.report.breakdown = "preconditioner is not positive definite";
    return out;
  }
  beta1 = std::sqrt(beta1);

  Scalar oldb(0), beta = beta1, dbar(0), epsln(0), phibar = beta1, cs(-1), sn(0);
  Scalar check_tol = tol;
  const Scalar tiny = std::numeric_limits<Scalar>::epsilon();
  auto true_relres = [&] {
    detail::apply_op(op, x, ax);
    return (rhs - ax).norm() / bnorm;
  };

  for (int it = 1; it <= maxit; ++it) {
    v = y / beta;
    detail::apply_op(op, v, y);
    if (it >= 2) y.noalias() -= (beta / oldb) * r1;
    const Scalar alfa = v.dot(y);
    y.noalias() -= (alfa / beta) * r2;
    r1.swap(r2);
    r2 = y;
    detail::apply_op(M, r2, y);
    oldb = beta;
    beta = r2.dot(y);
    if (beta < Scalar(0)) {
      out.report.breakdown = "preconditioner is not positive definite";
      break;
    }
    beta = std::sqrt(beta);

    const Scalar oldeps = epsln;
    const Scalar delta = cs * dbar + sn * alfa;
    const Scalar gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    const Scalar gamma = std::max(std::hypot(gbar, beta), tiny);
    cs = gbar / gamma;
    sn = beta / gamma;
    const Scalar phi = cs * phibar;
    phibar = sn * phibar;

    w1.swap(w2);
    w2.swap(w);
    w = (v - oldeps * w1 - delta * w2) / gamma;
    x.noalias() += phi * w;
    out.report.iterations = it;

    if (phibar <= check_tol * beta1 || beta <= tiny * beta1) {
      if (true_relres() <= tol) break;
      if (beta <= tiny * beta1) break;  // Krylov space exhausted
      check_tol *= Scalar(0.1);
    }
  }
  out.report.relative_residual = static_cast<double>(true_relres());
  out.report.converged = !out.report.breakdown && out.report.relative_residual <= static_cast<double>(tol);
  return out;
}

template <typename Scalar>
struct InnerOptions {
  Scalar tol = Scalar(1e-2);
  ToleranceMode mode = ToleranceMode::relative;
  int maxit = 500;
  InnerSolverKind solver = InnerSolverKind::cg;
  PreconditionerKind precond = PreconditionerKind::deflated;
  std::optional<bool> include_rank1;  // unset: on for n <= 1e5
  bool fallback_to_minres = true;     // retry CG breakdowns with MINRES
  Scalar sigma_safety = Scalar(0.95); // sigma <= safety * min diag(L^)

  bool rank1_for(Index n) const { return include_rank1.value_or(n <= 100000); }
};

/// Solves (L + delta V V^T - sigma I) z = r with 1^T z = 0 by trimming index
/// `trim.index`, solving the (n-1)-dimensional system iteratively and
/// enlarging the result. Operator and preconditioner are cached across calls
/// while (sigma, V) stay the same.
template <typename Scalar>
class ConstrainedSolver {
 public:
  ConstrainedSolver(const LaplacianMatrix<Scalar>& L, TrimContext trim, InnerOptions<Scalar> opts = {})
      : L_(&L), trim_(trim), opts_(opts) {
    if (trim.n != L.size()) throw std::invalid_argument("ConstrainedSolver: trim context size mismatch");
    min_trimmed_diag_ = restrict_to_trimmed(L.diag, trim).minCoeff();
  }

  const TrimContext& trim() const { return trim_; }
  const InnerOptions<Scalar>& options() const { return opts_; }
  Scalar min_trimmed_diagonal() const { return min_trimmed_diag_; }
  Scalar sigma_limit() const { return opts_.sigma_safety * min_trimmed_diag_; }

  SolveResult<Scalar> solve(const DeflationSet<Scalar>& defl, Scalar sigma, VectorX<Scalar> r) {
    const Index n = trim_.n;
    if (r.size() != n) throw std::invalid_argument("solve_constrained: rhs length mismatch");

    InnerSolverKind solver = opts_.solver;
    if (sigma > sigma_limit()) {
      sigma = sigma_limit();
      solver = InnerSolverKind::minres;
    }
    sigma = std::max(sigma, Scalar(0));

    SolveResult<Scalar> out;
    out.report.sigma_used = static_cast<double>(sigma);
    const Scalar rnorm = r.norm();
    if (rnorm == Scalar(0)) {
      out.solution = VectorX<Scalar>::Zero(n);
      out.report.converged = true;
      out.report.solver = solver;
      return out;
    }
    const Scalar drift = std::abs(r.sum()) / rnorm;
    out.report.rhs_deviation = static_cast<double>(drift);
    if (drift > Scalar(1e-8)) {
      r.array() -= r.mean();
      out.report.rhs_projected = true;
    }

    prepare(defl, sigma);
    const VectorX<Scalar> r_hat = restrict_to_trimmed(r, trim_);
    Scalar tol = opts_.tol;
    if (opts_.mode == ToleranceMode::absolute) tol = std::min(Scalar(1), opts_.tol / r_hat.norm());

    SolveResult<Scalar> inner;
    if (solver == InnerSolverKind::cg) {
      inner = pcg(*op_, r_hat, *precond_, tol, opts_.maxit);
      if (inner.report.breakdown && opts_.fallback_to_minres) {
        const int spent = inner.report.iterations;
        inner = minres(*op_, r_hat, *precond_, tol, opts_.maxit);
        inner.report.iterations += spent;
      }
    } else {
      inner = minres(*op_, r_hat, *precond_, tol, opts_.maxit);
    }
    out.solution = enlarge_solution(inner.solution, trim_);
    const auto meta = out.report;
    out.report = inner.report;
    out.report.sigma_used = meta.sigma_used;
    out.report.rhs_deviation = meta.rhs_deviation;
    out.report.rhs_projected = meta.rhs_projected;
    return out;
  }

 private:
  void prepare(const DeflationSet<Scalar>& defl, Scalar sigma) {
    if (op_ && sigma == cached_sigma_ && defl.size() == cached_rank_ && defl.delta == cached_delta_) return;
    op_ = std::make_unique<ShiftedDeflatedOperator<Scalar>>(*L_, trim_, sigma, defl, opts_.rank1_for(trim_.n));
    switch (opts_.precond) {
      case PreconditionerKind::identity:
        precond_ = std::make_unique<Preconditioner<Scalar>>(Preconditioner<Scalar>::identity(trim_.n - 1));
        break;
      case PreconditionerKind::jacobi:
        precond_ = std::make_unique<Preconditioner<Scalar>>(build_jacobi(*L_, trim_, sigma));
        break;
      case PreconditionerKind::deflated: {
        auto base = build_jacobi(*L_, trim_, sigma);
        if (defl.empty()) precond_ = std::make_unique<Preconditioner<Scalar>>(std::move(base));
        else
          precond_ = std::make_unique<Preconditioner<Scalar>>(
              Preconditioner<Scalar>::deflated(base, op_->v_hat(), defl.delta));
        break;
      }
    }
    cached_sigma_ = sigma;
    cached_rank_ = defl.size();
    cached_delta_ = defl.delta;
  }

  const LaplacianMatrix<Scalar>* L_;
  TrimContext trim_;
  InnerOptions<Scalar> opts_;
  Scalar min_trimmed_diag_ = Scalar(0);
  std::unique_ptr<ShiftedDeflatedOperator<Scalar>> op_;
  std::unique_ptr<Preconditioner<Scalar>> precond_;
  Scalar cached_sigma_ = Scalar(0);
  Index cached_rank_ = -1;
  Scalar cached_delta_ = Scalar(0);
};

template <typename Scalar>
SolveResult<Scalar> solve_constrained(const LaplacianMatrix<Scalar>& L, const DeflationSet<Scalar>& defl,
                                      Scalar sigma, const TrimContext& trim, const VectorX<Scalar>& r,
                                      const InnerOptions<Scalar>& opts = {}) {
  ConstrainedSolver<Scalar> solver(L, trim, opts);
  return solver.solve(defl, sigma, r);
}

}  // namespace glsira
