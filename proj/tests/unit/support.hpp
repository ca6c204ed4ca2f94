#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include "glsira/generators.hpp"
#include "glsira/graph.hpp"
#include "glsira/laplacian.hpp"

namespace glsira::testing {

inline LaplacianMatrix<double> laplacian_of(const EdgeList& el) { return laplacian<double>(build_graph(el)); }

inline LaplacianMatrix<double> laplacian_of(std::vector<std::pair<VertexId, VertexId>> pairs,
                                            std::optional<VertexId> n = std::nullopt) {
  EdgeList el;
  for (auto [u, v] : pairs) el.edges.push_back({u, v, 1.0});
  el.n_declared = n;
  return laplacian_of(el);
}

inline LaplacianMatrix<double> random_laplacian(std::uint64_t seed, VertexId n_min, VertexId n_max) {
  std::mt19937_64 rng(seed);
  const VertexId n = n_min + rng() % (n_max - n_min + 1);
  return laplacian_of(generators::random_connected(n, 1.5, seed * 7 + 3));
}

// Closed-form spectra, ascending, kernel eigenvalue included.
inline std::vector<double> path_spectrum(int n) {
  std::vector<double> out;
  for (int k = 0; k < n; ++k) out.push_back(2.0 - 2.0 * std::cos(std::numbers::pi * k / n));
  return out;
}

inline std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

inline std::vector<double> cycle_spectrum(int n) {
  std::vector<double> out;
  for (int k = 0; k < n; ++k) out.push_back(2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * k / n));
  return sorted(out);
}

inline std::vector<double> star_spectrum(int n) {
  std::vector<double> out{0.0};
  for (int k = 0; k < n - 2; ++k) out.push_back(1.0);
  out.push_back(static_cast<double>(n));
  return out;
}

inline std::vector<double> complete_spectrum(int n) {
  std::vector<double> out{0.0};
  for (int k = 0; k < n - 1; ++k) out.push_back(static_cast<double>(n));
  return out;
}

inline std::vector<double> grid_spectrum(int rows, int cols) {
  const auto a = path_spectrum(rows), b = path_spectrum(cols);
  std::vector<double> out;
  for (double x : a)
    for (double y : b) out.push_back(x + y);
  return sorted(out);
}

// Smallest d positive entries of an ascending spectrum that starts with 0.
inline std::vector<double> smallest_positive(const std::vector<double>& spectrum, std::size_t d) {
  return {spectrum.begin() + 1, spectrum.begin() + 1 + static_cast<std::ptrdiff_t>(d)};
}

}  // namespace glsira::testing
