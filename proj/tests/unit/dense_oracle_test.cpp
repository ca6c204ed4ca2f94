#include <gtest/gtest.h>

#include "glsira/dense_oracle.hpp"
#include "support.hpp"

namespace glsira::oracle {
namespace {

using glsira::testing::laplacian_of;

TEST(DenseEigh, DiagonalInput) {
  const auto eig = dense_eigh(DenseSymmetric<double>(Eigen::Matrix3d(Eigen::Vector3d(3, 1, 2).asDiagonal())));
  EXPECT_EQ(eig.values, Eigen::Vector3d(1, 2, 3));
  Eigen::Matrix3d perm;
  perm << 0, 0, 1, 1, 0, 0, 0, 1, 0;
  EXPECT_EQ(eig.vectors, perm);
}

TEST(DenseEigh, PathP3RootsOfCharacteristicPolynomial) {
  // det(L - x I) = -x (x - 1)(x - 3)
  const auto eig = dense_eigh(laplacian_of(generators::path(3)));
  EXPECT_NEAR(eig.values[0], 0.0, 1e-14);
  EXPECT_NEAR(eig.values[1], 1.0, 1e-14);
  EXPECT_NEAR(eig.values[2], 3.0, 1e-14);
}

TEST(DenseEigh, CompleteK3) {
  const auto eig = dense_eigh(laplacian_of(generators::complete(3)));
  EXPECT_NEAR(eig.values[0], 0.0, 1e-14);
  EXPECT_NEAR(eig.values[1], 3.0, 1e-14);
  EXPECT_NEAR(eig.values[2], 3.0, 1e-14);
}

TEST(DenseEigh, SignConventionAndOrthonormality) {
  const auto L = testing::random_laplacian(3, 20, 30);
  const auto eig = dense_eigh(L);
  const Index n = L.size();
  EXPECT_LE((eig.vectors.transpose() * eig.vectors - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((Eigen::MatrixXd(L.matrix) * eig.vectors - eig.vectors * eig.values.asDiagonal()).cwiseAbs().maxCoeff(),
            1e-10);
  for (Index j = 0; j < n; ++j) {
    Index at = 0;
    eig.vectors.col(j).cwiseAbs().maxCoeff(&at);
    EXPECT_GT(eig.vectors(at, j), 0.0);
  }
  for (Index j = 1; j < n; ++j) EXPECT_LE(eig.values[j - 1], eig.values[j]);
}

// The Jacobi oracle reproduces closed-form spectra.
TEST(DenseEigh, AnalyticSpectra) {
  auto check = [](const EdgeList& el, const std::vector<double>& want) {
    const auto eig = dense_eigh(laplacian_of(el));
    ASSERT_EQ(static_cast<std::size_t>(eig.values.size()), want.size());
    for (std::size_t j = 0; j < want.size(); ++j) EXPECT_NEAR(eig.values[static_cast<Index>(j)], want[j], 1e-10);
  };
  for (int k = 3; k <= 12; ++k) {
    check(generators::path(k), testing::path_spectrum(k));
    check(generators::cycle(k), testing::cycle_spectrum(k));
    check(generators::star(k), testing::star_spectrum(k));
    check(generators::complete(k), testing::complete_spectrum(k));
  }
  check(generators::grid(4, 6), testing::grid_spectrum(4, 6));
}

TEST(DenseEigh, SizeGuard) {
  EXPECT_THROW(check_order(2001, "test"), std::length_error);
  EXPECT_NO_THROW(check_order(2000, "test"));
}

TEST(DenseSolve, SmallSystems) {
  EXPECT_EQ(dense_solve(Eigen::Matrix3d::Identity(), Eigen::Vector3d(1, 2, 3)), Eigen::Vector3d(1, 2, 3));
  Eigen::Matrix2d A;
  A << 2, 0, 0, 4;
  EXPECT_TRUE(dense_solve(A, Eigen::Vector2d(2, 4)).isApprox(Eigen::Vector2d(1, 1)));
  EXPECT_THROW(dense_solve(Eigen::MatrixXd(laplacian_of(generators::path(3)).matrix), Eigen::Vector3d(1, 0, -1)),
               SingularMatrixError);
}

TEST(DenseSolve, TrimmedP3MatchesPcg) {
  const auto L = laplacian_of(generators::path(3));
  const TrimContext t{1, 3};
  ShiftedDeflatedOperator<double> op(L, t);
  const Eigen::VectorXd b = Eigen::Vector2d(1, -1);
  const auto it = pcg(op, b, Preconditioner<double>::identity(2), 1e-14, 10);
  Eigen::Matrix2d Lhat;
  Lhat << 1, 0, 0, 1;
  EXPECT_LE((dense_solve(Lhat, b) - it.solution).norm(), 1e-8);
}

EigenResult<double> exact_result(const LaplacianMatrix<double>& L, std::vector<Index> pick) {
  const auto eig = dense_eigh(L);
  EigenResult<double> r;
  r.vectors.resize(L.size(), static_cast<Index>(pick.size()));
  for (std::size_t j = 0; j < pick.size(); ++j) {
    r.lambdas.push_back(eig.values[pick[j]]);
    r.vectors.col(static_cast<Index>(j)) = eig.vectors.col(pick[j]);
  }
  return r;
}

TEST(Verify, ExactPairsPass) {
  const auto L = laplacian_of(generators::grid(4, 4));
  const auto rep = verify_eigresult(L, exact_result(L, {1, 2, 3}), 1e-8);
  EXPECT_LE(rep.max_residual, 1e-12);
  EXPECT_TRUE(rep.residuals_ok);
  EXPECT_TRUE(rep.oracle_checked);
  EXPECT_FALSE(rep.skipped_eigenvalue);
  EXPECT_LE(*rep.max_eigenvalue_error, 1e-12);
  EXPECT_LE(rep.kernel_defect, 1e-12);
  EXPECT_LE(rep.orthogonality_defect, 1e-12);
}

TEST(Verify, PerturbedVectorDetected) {
  const auto L = laplacian_of(generators::path(6));
  auto r = exact_result(L, {1});
  const auto eig = dense_eigh(L);
  const Eigen::VectorXd w = eig.vectors.col(4);
  r.vectors.col(0) += 1e-3 * w;
  const double want = (Eigen::MatrixXd(L.matrix) * r.vectors.col(0) - r.lambdas[0] * r.vectors.col(0)).norm();
  const auto rep = verify_eigresult(L, r, 1e-8);
  EXPECT_NEAR(rep.max_residual, want, 1e-15);
  EXPECT_NEAR(rep.max_residual, 1e-3 * (eig.values[4] - eig.values[1]), 1e-9);
  EXPECT_FALSE(rep.residuals_ok);
}

TEST(Verify, SkippedEigenvalueFlagged) {
  const auto L = laplacian_of(generators::path(3));
  const auto rep = verify_eigresult(L, exact_result(L, {2}), 1e-8);
  EXPECT_TRUE(rep.skipped_eigenvalue);
  EXPECT_TRUE(rep.residuals_ok);

  // Missing one copy of a repeated eigenvalue counts as a skip too.
  const auto C = laplacian_of(generators::cycle(6));
  EXPECT_TRUE(verify_eigresult(C, exact_result(C, {1, 3}), 1e-8).skipped_eigenvalue);
  EXPECT_FALSE(verify_eigresult(C, exact_result(C, {1, 2}), 1e-8).skipped_eigenvalue);
}

TEST(Verify, OracleSkippedAboveLimitOrOnRequest) {
  const auto L = laplacian_of(generators::path(4));
  EXPECT_FALSE(verify_eigresult(L, exact_result(L, {1}), 1e-8, false).oracle_checked);
}

TEST(Baselines, Perturbed) {
  const auto p3 = baseline_perturbed(laplacian_of(generators::path(3)), 1e-8, 2);
  ASSERT_EQ(p3.size(), 2u);
  EXPECT_NEAR(p3[0], 1.0, 1e-7);
  EXPECT_NEAR(p3[1], 3.0, 1e-7);
  const auto k3 = baseline_perturbed(laplacian_of(generators::complete(3)), 1e-8, 2);
  EXPECT_NEAR(k3[0], 3.0, 1e-7);
  EXPECT_NEAR(k3[1], 3.0, 1e-7);
  EXPECT_THROW(baseline_perturbed(laplacian_of(generators::path(3)), 0.0, 2), std::invalid_argument);
}

TEST(Baselines, ShiftRemovedExactlyOnDiagonalMatrices) {
  // No edges: L = 0 and L + tau I is diagonal.
  const auto L = laplacian_of(EdgeList{{}, 4});
  EXPECT_EQ(baseline_perturbed(L, 0.25, 2), (std::vector<double>{0.0, 0.0}));
  EXPECT_NEAR(baseline_perturbed(laplacian_of(generators::path(2)), 0.25, 1)[0], 2.0, 1e-14);
}

TEST(Baselines, NullspaceDeflated) {
  const auto L = laplacian_of(generators::path(3));
  const auto p3 = baseline_nullspace_deflated(L, 2);
  EXPECT_NEAR(p3[0], 1.0, 1e-8);
  EXPECT_NEAR(p3[1], 3.0, 1e-8);
  EXPECT_GT((rank_two_corrected(L) * Eigen::Vector3d::Ones()).norm(), 0.0);
  const auto k3 = baseline_nullspace_deflated(laplacian_of(generators::complete(3)), 2);
  EXPECT_NEAR(k3[0], 3.0, 1e-8);
  EXPECT_NEAR(k3[1], 3.0, 1e-8);
}

TEST(Baselines, AgreeWithOracleOnRandomGraphs) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto L = testing::random_laplacian(2000 + s, 5, 40);
    const Index d = std::min<Index>(5, L.size() - 2);
    const auto eig = dense_eigh(L);
    const auto a = baseline_perturbed(L, 1e-8, d);
    const auto b = baseline_nullspace_deflated(L, d);
    for (Index j = 0; j < d; ++j) {
      EXPECT_NEAR(a[static_cast<std::size_t>(j)], eig.values[j + 1], 1e-6);
      EXPECT_NEAR(b[static_cast<std::size_t>(j)], eig.values[j + 1], 1e-6);
    }
  }
}

}  // namespace
}  // namespace glsira::oracle
