#include <gtest/gtest.h>

#include <sstream>

#include "glsira/dense_oracle.hpp"
#include "glsira/laplacian.hpp"
#include "glsira/laplacian_ops.hpp"
#include "support.hpp"

namespace glsira {
namespace {

using testing::laplacian_of;
using testing::random_laplacian;

Eigen::MatrixXd dense(const LaplacianMatrix<double>& L) { return Eigen::MatrixXd(L.matrix); }

TEST(Laplacian, Triangle) {
  Eigen::Matrix3d want;
  want << 2, -1, -1, -1, 2, -1, -1, -1, 2;
  EXPECT_EQ(dense(laplacian_of({{0, 1}, {1, 2}, {0, 2}})), want);
}

TEST(Laplacian, PathP3) {
  Eigen::Matrix3d want;
  want << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  const auto L = laplacian_of(generators::path(3));
  EXPECT_EQ(dense(L), want);
  EXPECT_EQ(L.diag, Eigen::Vector3d(1, 2, 1));
  EXPECT_EQ(L.nonzeros(), 7);
}

TEST(Laplacian, AnnihilatesOnesAndIsSymmetric) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto L = random_laplacian(s, 5, 80);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(L.size());
    EXPECT_LE((L * ones).cwiseAbs().maxCoeff(), 1e-12);
    const Eigen::MatrixXd A = dense(L);
    EXPECT_EQ((A - A.transpose()).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(A.diagonal(), L.diag);
  }
}

TEST(Laplacian, WeightedEdges) {
  const auto L = laplacian<double>(build_graph(parse_edge_list("0 1 2.5\n1 2 0.5\n")));
  EXPECT_EQ(L.diag, Eigen::Vector3d(2.5, 3.0, 0.5));
  EXPECT_EQ(L.matrix.coeff(0, 1), -2.5);
}

TEST(Laplacian, ValidationRejectsDisconnected) {
  const auto g = build_graph(parse_edge_list("0 1\n2 3\n"));
  EXPECT_THROW(laplacian<double>(g, true), DisconnectedGraphError);
  EXPECT_NO_THROW(laplacian<double>(g, false));
}

TEST(Laplacian, MatrixMarketLowerTriangle) {
  std::ostringstream os;
  write_matrix_market(os, laplacian_of(generators::path(3)));
  EXPECT_EQ(os.str(),
            "%%MatrixMarket matrix coordinate real symmetric\n3 3 5\n1 1 1\n2 1 -1\n2 2 2\n3 2 -1\n3 3 1\n");
}

TEST(TrimIndex, Policies) {
  const auto p3 = laplacian_of(generators::path(3));
  EXPECT_EQ(select_trim_index(p3).index, 1);
  EXPECT_EQ(select_trim_index(laplacian_of(generators::cycle(3))).index, 0);
  EXPECT_EQ(select_trim_index(p3, TrimPolicy::fixed(2)).index, 2);
  EXPECT_EQ(select_trim_index(p3, TrimPolicy::min_degree()).index, 0);
  EXPECT_THROW(select_trim_index(p3, TrimPolicy::fixed(3)), std::out_of_range);
  EXPECT_EQ(select_trim_index(p3).reduced_size(), 2);
}

TEST(Trim, Restrict) {
  const TrimContext t1{1, 3}, t0{0, 3};
  EXPECT_EQ(restrict_to_trimmed(Eigen::VectorXd(Eigen::Vector3d(1, 0, -1)), t1), Eigen::VectorXd(Eigen::Vector2d(1, -1)));
  EXPECT_EQ(restrict_to_trimmed(Eigen::VectorXd(Eigen::Vector3d(4, 5, 6)), t0), Eigen::VectorXd(Eigen::Vector2d(5, 6)));
  EXPECT_EQ(restrict_to_trimmed(Eigen::VectorXd::Ones(3), t1), Eigen::VectorXd::Ones(2));
  Eigen::MatrixXd M(3, 2);
  M << 1, 2, 3, 4, 5, 6;
  Eigen::MatrixXd want(2, 2);
  want << 1, 2, 5, 6;
  EXPECT_EQ(restrict_to_trimmed(M, t1), want);
}

TEST(Trim, Enlarge) {
  EXPECT_TRUE(enlarge_solution(Eigen::Vector2d(1, -1), TrimContext{1, 3}).isApprox(Eigen::Vector3d(1, 0, -1)));
  const Eigen::VectorXd z = enlarge_solution(Eigen::Vector2d(1, 1), TrimContext{0, 3});
  EXPECT_TRUE(z.isApprox(Eigen::Vector3d(-2.0 / 3, 1.0 / 3, 1.0 / 3)));
  EXPECT_NEAR(z.sum(), 0.0, 1e-15);
  EXPECT_EQ(enlarge_solution(Eigen::Vector2d::Zero(), TrimContext{1, 3}), Eigen::Vector3d::Zero());
}

TEST(Trim, EnlargedSolutionSolvesUntrimmedSystem) {
  // L z* = r for the trimmed solve z^ = L^^{-1} r^ (dense solve oracle).
  const auto L = laplacian_of(generators::path(3));
  const TrimContext t{1, 3};
  const Eigen::Vector3d r(1, 0, -1);
  const Eigen::MatrixXd Lhat = restrict_to_trimmed(Eigen::MatrixXd(restrict_to_trimmed(dense(L), t).transpose()), t);
  const Eigen::VectorXd zhat = oracle::dense_solve(Lhat, restrict_to_trimmed(r, t));
  const Eigen::VectorXd z = enlarge_solution(zhat, t);
  EXPECT_LE((L * z - r).norm(), 1e-14);
}

// Trimming any vertex of a connected Laplacian leaves a positive definite
// M-matrix.
TEST(TrimProperty, TrimmedLaplacianIsPositiveDefinite) {
  for (std::uint64_t s = 0; s < 15; ++s) {
    const auto L = random_laplacian(100 + s, 4, 30);
    const Eigen::MatrixXd A = dense(L);
    for (Index i = 0; i < L.size(); ++i) {
      const TrimContext t{i, L.size()};
      const Eigen::MatrixXd Lhat = restrict_to_trimmed(Eigen::MatrixXd(restrict_to_trimmed(A, t).transpose()), t);
      const auto eig = oracle::dense_eigh(oracle::DenseSymmetric<double>(Lhat));
      EXPECT_GT(eig.values[0], 0.0);
      Eigen::MatrixXd off = Lhat;
      off.diagonal().setZero();
      EXPECT_LE(off.maxCoeff(), 0.0);
    }
  }
}

TEST(Deflation, DeltaRule) {
  EXPECT_EQ(choose_delta(laplacian_of(generators::path(3))), 4.0);
  EXPECT_EQ(choose_delta(laplacian_of(generators::complete(3))), 4.0);
  EXPECT_EQ(choose_delta(laplacian_of(generators::star(4))), 6.0);
}

TEST(Deflation, MatvecCases) {
  const auto L = laplacian_of(generators::complete(3));
  const Eigen::Vector3d x(0.3, -1.2, 2.0);
  DeflationSet<double> none(3, 4.0);
  EXPECT_EQ(deflated_matvec(L, none, x), L * x);

  const auto eig = oracle::dense_eigh(L);
  const Eigen::VectorXd v1 = eig.vectors.col(1);
  DeflationSet<double> defl(3, 4.0);
  defl.append(eig.values[1], v1);
  EXPECT_TRUE(deflated_matvec(L, defl, v1).isApprox(7.0 * v1, 1e-12));
  const Eigen::VectorXd perp = eig.vectors.col(2);
  EXPECT_TRUE(deflated_matvec(L, defl, perp).isApprox(L * perp, 1e-12));
}

// Deflating c eigenpairs moves exactly those eigenvalues up by delta.
TEST(DeflationProperty, ShiftsOnlyDeflatedEigenvalues) {
  std::mt19937_64 rng(5);
  for (std::uint64_t s = 0; s < 12; ++s) {
    const auto L = random_laplacian(300 + s, 5, 25);
    const Index n = L.size();
    const auto eig = oracle::dense_eigh(L);
    const double delta = choose_delta(L);
    const Index c = 1 + static_cast<Index>(rng() % 3);
    DeflationSet<double> defl(n, delta);
    std::vector<double> want(eig.values.data(), eig.values.data() + n);
    for (Index j = 1; j <= c; ++j) {
      defl.append(eig.values[j], eig.vectors.col(j));
      want[static_cast<std::size_t>(j)] += delta;
    }
    std::sort(want.begin(), want.end());
    Eigen::MatrixXd A = dense(L) + delta * defl.vectors * defl.vectors.transpose();
    const auto got = oracle::dense_eigh(oracle::DenseSymmetric<double>(A));
    for (Index j = 0; j < n; ++j) EXPECT_NEAR(got.values[j], want[static_cast<std::size_t>(j)], 1e-8);
  }
}

Eigen::MatrixXd assemble(const ShiftedDeflatedOperator<double>& op) {
  const Index m = op.rows();
  Eigen::MatrixXd A(m, m);
  for (Index j = 0; j < m; ++j) A.col(j) = op(Eigen::VectorXd::Unit(m, j));
  return A;
}

TEST(ShiftedOperator, P3TrimmedIsIdentity) {
  const auto L = laplacian_of(generators::path(3));
  ShiftedDeflatedOperator<double> op(L, TrimContext{1, 3});
  EXPECT_EQ(apply_trimmed(op, Eigen::VectorXd(Eigen::Vector2d(1, -1))), Eigen::Vector2d(1, -1));
  EXPECT_EQ(apply_trimmed(op, Eigen::VectorXd(Eigen::Vector2d::Zero())), Eigen::Vector2d::Zero());
  EXPECT_THROW(apply_trimmed(op, Eigen::VectorXd(Eigen::Vector3d::Zero())), std::invalid_argument);
}

TEST(ShiftedOperator, RankOneTermOnOnes) {
  const auto L = laplacian_of({{0, 1}, {1, 2}, {2, 3}, {0, 2}});
  const TrimContext t{2, 4};
  const double sigma = 0.3;
  ShiftedDeflatedOperator<double> op(L, t, sigma, DeflationSet<double>(4, 1.0), true);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(3);
  ShiftedDeflatedOperator<double> plain(L, t);
  const Eigen::VectorXd want = (plain(ones) - sigma * ones) + sigma * 3.0 / 4.0 * ones;
  EXPECT_TRUE(op(ones).isApprox(want, 1e-14));
}

// The matrix-free operator equals the dense assembly of
// (L^ - s I) + (s/n) 1 1^T + delta V^ V^T.
TEST(ShiftedOperator, MatchesDenseAssembly) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto L = random_laplacian(500 + s, 5, 30);
    const Index n = L.size();
    const auto eig = oracle::dense_eigh(L);
    DeflationSet<double> defl(n, choose_delta(L));
    defl.append(eig.values[1], eig.vectors.col(1));
    defl.append(eig.values[2], eig.vectors.col(2));
    const TrimContext t = select_trim_index(L);
    const double sigma = 0.5 * eig.values[3];
    for (bool rank1 : {false, true}) {
      ShiftedDeflatedOperator<double> op(L, t, sigma, defl, rank1);
      const Eigen::MatrixXd Lhat =
          restrict_to_trimmed(Eigen::MatrixXd(restrict_to_trimmed(dense(L), t).transpose()), t);
      const Eigen::MatrixXd Vh = restrict_to_trimmed(defl.vectors, t);
      Eigen::MatrixXd want = Lhat - sigma * Eigen::MatrixXd::Identity(n - 1, n - 1) + defl.delta * Vh * Vh.transpose();
      if (rank1) want.array() += sigma / static_cast<double>(n);
      EXPECT_LE((assemble(op) - want).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

// With the rank-one term the trimmed, deflated operator is positive definite
// exactly when sigma stays below the first undeflated eigenvalue.
TEST(ShiftedOperatorProperty, DefiniteBelowNextEigenvalue) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto L = random_laplacian(700 + s, 6, 25);
    const Index n = L.size();
    const auto eig = oracle::dense_eigh(L);
    DeflationSet<double> defl(n, choose_delta(L));
    defl.append(eig.values[1], eig.vectors.col(1));
    const TrimContext t = select_trim_index(L);
    const double next = eig.values[2];
    const auto min_eig = [&](double sigma) {
      ShiftedDeflatedOperator<double> op(L, t, sigma, defl, true);
      return oracle::dense_eigh(oracle::DenseSymmetric<double>(assemble(op))).values[0];
    };
    EXPECT_GT(min_eig(0.9 * next), 0.0);
    EXPECT_LT(min_eig(next + 0.5 * (eig.values[3] - next) + 1e-3), 0.0);
  }
}

}  // namespace
}  // namespace glsira
