#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace glsira {

using VertexId = std::uint64_t;

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Edge {
  VertexId u = 0;
  VertexId v = 0;
  double weight = 1.0;

  bool operator==(const Edge&) const = default;
};

/// Undirected edge list. After normalization every edge has u < v, no pair
/// repeats and all weights are strictly positive.
struct EdgeList {
  std::vector<Edge> edges;
  std::optional<VertexId> n_declared;

  /// Vertex count implied by the largest id and the declared size.
  VertexId vertex_count() const;
};

/// Parses a whitespace separated "u v [w ...]" edge list. Lines starting with
/// '%' or '#' are comments; a KONECT size line "% m rows cols" sets the
/// declared vertex count. Ids are 0-based when id 0 appears, else 1-based.
/// Self-loops are dropped and duplicate pairs keep the first weight.
EdgeList parse_edge_list(std::istream& in);
EdgeList parse_edge_list(std::string_view text);

/// Drops self-loops and repeated pairs (first weight wins), orients u < v.
EdgeList normalize(EdgeList el);

using SparseAdjacency = Eigen::SparseMatrix<double, Eigen::RowMajor, std::int64_t>;

struct Graph {
  Eigen::Index n = 0;
  SparseAdjacency adjacency;  // symmetric, zero diagonal
  Eigen::VectorXd degrees;    // weighted row sums of adjacency

  std::int64_t edge_count() const { return adjacency.nonZeros() / 2; }
};

Graph build_graph(const EdgeList& el);

struct ComponentLabeling {
  std::vector<std::int64_t> labels;  // component id per vertex
  std::vector<std::int64_t> sizes;   // member count per component id

  std::int64_t count() const { return static_cast<std::int64_t>(sizes.size()); }
};

/// Component ids are assigned in order of each component's smallest vertex.
ComponentLabeling connected_components(const Graph& g);

struct InducedSubgraph {
  Graph graph;
  std::vector<VertexId> vertex_map;  // subgraph vertex -> original vertex
};

/// Induced subgraph on the largest component; ties go to the component that
/// contains the smaller vertex. Throws ValidationError on an empty graph.
InducedSubgraph largest_component(const Graph& g);

}  // namespace glsira
