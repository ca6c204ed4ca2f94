#pragma once

#include <cstdint>

#include "glsira/graph.hpp"

// Fixture graphs for tests, demos and the CLI `generate` command.
namespace glsira::generators {

EdgeList path(VertexId n);
EdgeList cycle(VertexId n);
/// Vertex 0 joined to n - 1 leaves.
EdgeList star(VertexId n);
EdgeList complete(VertexId n);
EdgeList grid(VertexId rows, VertexId cols);

/// G(n, M) with M = round(n * average_degree / 2) distinct uniform edges.
EdgeList erdos_renyi(VertexId n, double average_degree, std::uint64_t seed);

/// G(n, p) with p = factor * ln(n) / n (clamped to 1), redrawn until connected.
EdgeList random_connected(VertexId n, double factor, std::uint64_t seed);

}  // namespace glsira::generators
