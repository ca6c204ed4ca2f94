#pragma once

#include <cstdint>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "glsira/graph.hpp"

namespace glsira {

using Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

class DisconnectedGraphError : public ValidationError {
 public:
  explicit DisconnectedGraphError(std::int64_t components)
      : ValidationError("graph has " + std::to_string(components) +
                        " connected components; extract one with largest_component first"),
        components_(components) {}
  std::int64_t components() const noexcept { return components_; }

 private:
  std::int64_t components_;
};

/// Graph Laplacian L = D - A stored as compressed row-major sparse matrix.
/// Entries are mirrored at construction so symmetry is exact; the diagonal is
/// cached because trimming and preconditioning read it constantly.
template <typename Scalar>
struct LaplacianMatrix {
  using Sparse = Eigen::SparseMatrix<Scalar, Eigen::RowMajor, std::int64_t>;

  Sparse matrix;
  VectorX<Scalar> diag;

  Index size() const { return matrix.rows(); }
  std::int64_t nonzeros() const { return matrix.nonZeros(); }

  template <typename Derived>
  VectorX<Scalar> operator*(const Eigen::MatrixBase<Derived>& x) const {
    return matrix * x;
  }
};

using LaplacianMatrixd = LaplacianMatrix<double>;

/// Assembles L = D - A. With `validate` set a disconnected graph is rejected.
template <typename Scalar = double>
LaplacianMatrix<Scalar> laplacian(const Graph& g, bool validate = false) {
  if (validate) {
    const auto cc = connected_components(g);
    if (cc.count() > 1) throw DisconnectedGraphError(cc.count());
  }
  using StorageIndex = std::int64_t;
  const Index n = g.n;
  LaplacianMatrix<Scalar> L;
  L.diag = g.degrees.template cast<Scalar>();

  // Rows of the adjacency are sorted by column; splice the diagonal in place.
  std::vector<Eigen::Triplet<Scalar, StorageIndex>> trips;
  trips.reserve(static_cast<std::size_t>(g.adjacency.nonZeros() + n));
  for (Index r = 0; r < n; ++r) {
    trips.emplace_back(r, r, L.diag[r]);
    for (SparseAdjacency::InnerIterator it(g.adjacency, r); it; ++it)
      trips.emplace_back(r, it.col(), -static_cast<Scalar>(it.value()));
  }
  L.matrix.resize(n, n);
  L.matrix.setFromTriplets(trips.begin(), trips.end());
  L.matrix.makeCompressed();
  return L;
}

/// Writes the lower triangle in MatrixMarket coordinate symmetric format.
template <typename Scalar>
void write_matrix_market(std::ostream& os, const LaplacianMatrix<Scalar>& L) {
  using Sparse = typename LaplacianMatrix<Scalar>::Sparse;
  std::int64_t lower = 0;
  for (Index r = 0; r < L.size(); ++r)
    for (typename Sparse::InnerIterator it(L.matrix, r); it; ++it)
      if (it.col() <= r) ++lower;
  os << "%%MatrixMarket matrix coordinate real symmetric\n";
  os << L.size() << ' ' << L.size() << ' ' << lower << '\n';
  os << std::setprecision(17);
  for (Index r = 0; r < L.size(); ++r)
    for (typename Sparse::InnerIterator it(L.matrix, r); it; ++it)
      if (it.col() <= r) os << r + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

}  // namespace glsira
