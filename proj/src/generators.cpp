#include "glsira/generators.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <unordered_set>

namespace glsira::generators {

namespace {

EdgeList with_size(EdgeList el, VertexId n) {
  el.n_declared = n;
  return el;
}

}  // namespace

EdgeList path(VertexId n) {
  EdgeList el;
  for (VertexId v = 0; v + 1 < n; ++v) el.edges.push_back({v, v + 1, 1.0});
  return with_size(std::move(el), n);
}

EdgeList cycle(VertexId n) {
  if (n < 3) throw std::invalid_argument("cycle: need at least 3 vertices");
  EdgeList el = path(n);
  el.edges.push_back({0, n - 1, 1.0});
  return el;
}

EdgeList star(VertexId n) {
  EdgeList el;
  for (VertexId v = 1; v < n; ++v) el.edges.push_back({0, v, 1.0});
  return with_size(std::move(el), n);
}

EdgeList complete(VertexId n) {
  EdgeList el;
  for (VertexId u = 0; u < n; ++u)
    for (VertexId v = u + 1; v < n; ++v) el.edges.push_back({u, v, 1.0});
  return with_size(std::move(el), n);
}

EdgeList grid(VertexId rows, VertexId cols) {
  EdgeList el;
  auto id = [cols](VertexId r, VertexId c) { return r * cols + c; };
  for (VertexId r = 0; r < rows; ++r)
    for (VertexId c = 0; c < cols; ++c) {
      if (c + 1 < cols) el.edges.push_back({id(r, c), id(r, c + 1), 1.0});
      if (r + 1 < rows) el.edges.push_back({id(r, c), id(r + 1, c), 1.0});
    }
  return with_size(std::move(el), rows * cols);
}

EdgeList erdos_renyi(VertexId n, double average_degree, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("erdos_renyi: need at least 2 vertices");
  const double max_edges = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  const auto target =
      static_cast<std::uint64_t>(std::llround(std::min(max_edges, 0.5 * static_cast<double>(n) * average_degree)));
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<VertexId> pick(0, n - 1);
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(static_cast<std::size_t>(target) * 2);
  EdgeList el;
  el.edges.reserve(static_cast<std::size_t>(target));
  while (el.edges.size() < target) {
    VertexId u = pick(rng), v = pick(rng);
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    if (!seen.insert(u * n + v).second) continue;
    el.edges.push_back({u, v, 1.0});
  }
  return with_size(std::move(el), n);
}

EdgeList random_connected(VertexId n, double factor, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("random_connected: need at least 2 vertices");
  const double p = std::min(1.0, factor * std::log(static_cast<double>(n)) / static_cast<double>(n));
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(p);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    EdgeList el;
    for (VertexId u = 0; u < n; ++u)
      for (VertexId v = u + 1; v < n; ++v)
        if (coin(rng)) el.edges.push_back({u, v, 1.0});
    el.n_declared = n;
    if (connected_components(build_graph(el)).count() == 1) return el;
  }
  throw std::runtime_error("random_connected: no connected draw; raise the density factor");
}

}  // namespace glsira::generators
