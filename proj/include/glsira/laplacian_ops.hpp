#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "glsira/laplacian.hpp"

namespace glsira {

/// Which row/column of L is removed to make the kernel vanish.
struct TrimContext {
  Index index = 0;
  Index n = 0;

  Index reduced_size() const { return n - 1; }
};

struct TrimPolicy {
  enum class Kind { max_degree, min_degree, fixed };
  Kind kind = Kind::max_degree;
  Index index = 0;

  static TrimPolicy max_degree() { return {Kind::max_degree, 0}; }
  static TrimPolicy min_degree() { return {Kind::min_degree, 0}; }
  static TrimPolicy fixed(Index i) { return {Kind::fixed, i}; }
};

/// Ties go to the smallest index.
template <typename Scalar>
TrimContext select_trim_index(const LaplacianMatrix<Scalar>& L, TrimPolicy policy = TrimPolicy::max_degree()) {
  const Index n = L.size();
  if (n < 2) throw std::invalid_argument("select_trim_index: need at least two vertices");
  Index pick = 0;
  switch (policy.kind) {
    case TrimPolicy::Kind::fixed:
      if (policy.index < 0 || policy.index >= n)
        throw std::out_of_range("select_trim_index: index " + std::to_string(policy.index) +
                                " outside [0, " + std::to_string(n) + ")");
      pick = policy.index;
      break;
    case TrimPolicy::Kind::max_degree:
      L.diag.maxCoeff(&pick);  // first maximal entry
      break;
    case TrimPolicy::Kind::min_degree:
      L.diag.minCoeff(&pick);
      break;
  }
  return {pick, n};
}

/// Deletes entry/row `trim.index`. Works for vectors and row-blocks alike.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Derived::ColsAtCompileTime> restrict_to_trimmed(
    const Eigen::MatrixBase<Derived>& v, const TrimContext& trim) {
  if (v.rows() != trim.n)
    throw std::invalid_argument("restrict_to_trimmed: expected " + std::to_string(trim.n) + " rows, got " +
                                std::to_string(v.rows()));
  const Index i = trim.index;
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Derived::ColsAtCompileTime> out(trim.n - 1, v.cols());
  out.topRows(i) = v.topRows(i);
  out.bottomRows(trim.n - 1 - i) = v.bottomRows(trim.n - 1 - i);
  return out;
}

/// Reinserts a zero at the trim index and removes the mean over n entries,
/// which yields the kernel-orthogonal solution of the untrimmed system.
template <typename Derived>
VectorX<typename Derived::Scalar> enlarge_solution(const Eigen::MatrixBase<Derived>& z_hat, const TrimContext& trim) {
  using Scalar = typename Derived::Scalar;
  if (z_hat.size() != trim.n - 1)
    throw std::invalid_argument("enlarge_solution: expected length " + std::to_string(trim.n - 1) + ", got " +
                                std::to_string(z_hat.size()));
  const Index i = trim.index;
  VectorX<Scalar> z(trim.n);
  z.head(i) = z_hat.head(i);
  z[i] = Scalar(0);
  z.tail(trim.n - 1 - i) = z_hat.tail(trim.n - 1 - i);
  z.array() -= z_hat.sum() / static_cast<Scalar>(trim.n);
  return z;
}

/// Converged eigenpairs thrown to lambda + delta by L + delta V V^T.
template <typename Scalar>
struct DeflationSet {
  std::vector<Scalar> lambdas;
  MatrixX<Scalar> vectors;  // n x c, orthonormal, orthogonal to the ones vector
  Scalar delta = Scalar(1);

  DeflationSet() = default;
  DeflationSet(Index n, Scalar delta_) : vectors(n, 0), delta(delta_) {}

  Index size() const { return vectors.cols(); }
  bool empty() const { return vectors.cols() == 0; }

  void append(Scalar lambda, const VectorX<Scalar>& v) {
    lambdas.push_back(lambda);
    vectors.conservativeResize(Eigen::NoChange, vectors.cols() + 1);
    vectors.col(vectors.cols() - 1) = v;
  }

  /// max |V^T V - I| and max |V^T 1| / sqrt(n).
  std::pair<Scalar, Scalar> defects() const {
    if (empty()) return {Scalar(0), Scalar(0)};
    const Index c = size();
    const Scalar orth = (vectors.transpose() * vectors - MatrixX<Scalar>::Identity(c, c)).cwiseAbs().maxCoeff();
    const Scalar kern = (vectors.colwise().sum()).cwiseAbs().maxCoeff() / std::sqrt(Scalar(vectors.rows()));
    return {orth, kern};
  }
};

/// y = L x + delta V (V^T x).
template <typename Scalar, typename Derived>
VectorX<Scalar> deflated_matvec(const LaplacianMatrix<Scalar>& L, const DeflationSet<Scalar>& defl,
                                const Eigen::MatrixBase<Derived>& x) {
  VectorX<Scalar> y = L.matrix * x;
  if (!defl.empty()) y.noalias() += defl.delta * (defl.vectors * (defl.vectors.transpose() * x));
  return y;
}

/// Deflation weight 2 max(diag L): a Gershgorin bound pushes deflated values
/// past the top of the spectrum.
template <typename Scalar>
Scalar choose_delta(const LaplacianMatrix<Scalar>& L) {
  if (L.size() == 0) throw std::invalid_argument("choose_delta: empty matrix");
  return Scalar(2) * L.diag.maxCoeff();
}

/// The trimmed operator ((L^ - s I) + (s/n) 1 1^T + delta V^ V^T) acting on
/// (n-1)-vectors. L^ is never materialized: row and column `trim.index` of L
/// are skipped during the matvec.
template <typename Scalar>
class ShiftedDeflatedOperator {
 public:
  ShiftedDeflatedOperator(const LaplacianMatrix<Scalar>& L, TrimContext trim, Scalar sigma,
                          const DeflationSet<Scalar>& defl, bool include_rank1)
      : L_(&L), trim_(trim), sigma_(sigma), delta_(defl.delta), include_rank1_(include_rank1) {
    if (trim.n != L.size()) throw std::invalid_argument("ShiftedDeflatedOperator: trim context size mismatch");
    if (!defl.empty()) v_hat_ = restrict_to_trimmed(defl.vectors, trim);
    else v_hat_.resize(trim.n - 1, 0);
  }

  ShiftedDeflatedOperator(const LaplacianMatrix<Scalar>& L, TrimContext trim)
      : ShiftedDeflatedOperator(L, trim, Scalar(0), DeflationSet<Scalar>(L.size(), Scalar(1)), false) {}

  Index rows() const { return trim_.n - 1; }
  Index cols() const { return trim_.n - 1; }
  Scalar sigma() const { return sigma_; }
  Scalar delta() const { return delta_; }
  bool include_rank1() const { return include_rank1_; }
  const TrimContext& trim() const { return trim_; }
  const MatrixX<Scalar>& v_hat() const { return v_hat_; }
  const LaplacianMatrix<Scalar>& laplacian() const { return *L_; }

  /// y = L^ x with the trimmed row/column masked out.
  void apply_trimmed_laplacian(const VectorX<Scalar>& x, VectorX<Scalar>& y) const {
    const auto& A = L_->matrix;
    const auto* outer = A.outerIndexPtr();
    const auto* inner = A.innerIndexPtr();
    const auto* values = A.valuePtr();
    const Index skip = trim_.index;
    const Index n = trim_.n;
    y.resize(n - 1);
    Index out = 0;
    for (Index row = 0; row < n; ++row) {
      if (row == skip) continue;
      Scalar acc(0);
      for (auto p = outer[row]; p < outer[row + 1]; ++p) {
        const Index col = inner[p];
        if (col == skip) continue;
        acc += values[p] * x[col < skip ? col : col - 1];
      }
      y[out++] = acc;
    }
  }

  void apply(const VectorX<Scalar>& x, VectorX<Scalar>& y) const {
    apply_trimmed_laplacian(x, y);
    if (sigma_ != Scalar(0)) {
      y.noalias() -= sigma_ * x;
      if (include_rank1_) y.array() += sigma_ / static_cast<Scalar>(trim_.n) * x.sum();
    }
    if (v_hat_.cols() > 0) y.noalias() += delta_ * (v_hat_ * (v_hat_.transpose() * x));
  }

  VectorX<Scalar> operator()(const VectorX<Scalar>& x) const {
    VectorX<Scalar> y;
    apply(x, y);
    return y;
  }

  /// Diagonal of L^ - s I (the rank-one and deflation terms are not included).
  VectorX<Scalar> shifted_trimmed_diagonal() const {
    VectorX<Scalar> d = restrict_to_trimmed(L_->diag, trim_);
    d.array() -= sigma_;
    return d;
  }

 private:
  const LaplacianMatrix<Scalar>* L_;
  TrimContext trim_;
  Scalar sigma_;
  Scalar delta_;
  bool include_rank1_;
  MatrixX<Scalar> v_hat_;
};

template <typename Scalar>
VectorX<Scalar> apply_trimmed(const ShiftedDeflatedOperator<Scalar>& op, const VectorX<Scalar>& x) {
  if (x.size() != op.rows()) throw std::invalid_argument("apply_trimmed: length mismatch");
  return op(x);
}

}  // namespace glsira
