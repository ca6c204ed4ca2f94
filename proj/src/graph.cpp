#include "glsira/graph.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <deque>
#include <numeric>
#include <sstream>
#include <tuple>

namespace glsira {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    if (pos >= line.size()) break;
    std::size_t end = pos;
    while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
    out.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view tok, T& value) {
  const auto* first = tok.data();
  const auto* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc{} && ptr == last;
}

// KONECT size line: "% <edges> <rows> <cols>".
std::optional<VertexId> parse_size_line(std::string_view comment) {
  const auto toks = split_ws(comment.substr(1));
  if (toks.size() != 3) return std::nullopt;
  VertexId vals[3];
  for (int k = 0; k < 3; ++k)
    if (!parse_number(toks[k], vals[k])) return std::nullopt;
  return std::max(vals[1], vals[2]);
}

}  // namespace

VertexId EdgeList::vertex_count() const {
  VertexId n = n_declared.value_or(0);
  for (const auto& e : edges) n = std::max({n, e.u + 1, e.v + 1});
  return n;
}

EdgeList normalize(EdgeList el) {
  std::vector<Edge> kept;
  kept.reserve(el.edges.size());
  for (auto e : el.edges) {
    if (e.u == e.v) continue;
    if (e.u > e.v) std::swap(e.u, e.v);
    kept.push_back(e);
  }
  // Stable sort by pair keeps the first occurrence at the front of each run.
  std::vector<std::size_t> order(kept.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(kept[a].u, kept[a].v) < std::tie(kept[b].u, kept[b].v);
  });
  std::vector<char> keep(kept.size(), 0);
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k == 0 || kept[order[k]].u != kept[order[k - 1]].u ||
        kept[order[k]].v != kept[order[k - 1]].v)
      keep[order[k]] = 1;
  }
  EdgeList out;
  out.n_declared = el.n_declared;
  out.edges.reserve(kept.size());
  for (std::size_t k = 0; k < kept.size(); ++k)
    if (keep[k]) out.edges.push_back(kept[k]);
  return out;
}

EdgeList parse_edge_list(std::istream& in) {
  EdgeList raw;
  bool saw_zero = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    const auto first = view.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) continue;
    view.remove_prefix(first);
    if (view.front() == '%' || view.front() == '#') {
      if (view.front() == '%' && !raw.n_declared)
        if (auto n = parse_size_line(view)) raw.n_declared = n;
      continue;
    }
    const auto toks = split_ws(view);
    if (toks.size() < 2) throw ParseError(lineno, "expected 'u v [w]'");
    Edge e;
    if (!parse_number(toks[0], e.u)) throw ParseError(lineno, "bad vertex id '" + std::string(toks[0]) + "'");
    if (!parse_number(toks[1], e.v)) throw ParseError(lineno, "bad vertex id '" + std::string(toks[1]) + "'");
    if (toks.size() >= 3) {
      if (!parse_number(toks[2], e.weight))
        throw ParseError(lineno, "bad weight '" + std::string(toks[2]) + "'");
      if (!(e.weight > 0.0))
        throw ValidationError("line " + std::to_string(lineno) + ": edge weight must be positive");
    }
    saw_zero = saw_zero || e.u == 0 || e.v == 0;
    raw.edges.push_back(e);
  }
  if (!saw_zero) {
    for (auto& e : raw.edges) {
      --e.u;
      --e.v;
    }
  }
  return normalize(std::move(raw));
}

EdgeList parse_edge_list(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_edge_list(in);
}

Graph build_graph(const EdgeList& el) {
  Graph g;
  g.n = static_cast<Eigen::Index>(el.vertex_count());
  std::vector<Eigen::Triplet<double, std::int64_t>> trips;
  trips.reserve(2 * el.edges.size());
  for (const auto& e : el.edges) {
    const auto u = static_cast<std::int64_t>(e.u);
    const auto v = static_cast<std::int64_t>(e.v);
    trips.emplace_back(u, v, e.weight);
    trips.emplace_back(v, u, e.weight);
  }
  g.adjacency.resize(g.n, g.n);
  g.adjacency.setFromTriplets(trips.begin(), trips.end());
  g.adjacency.makeCompressed();
  g.degrees = Eigen::VectorXd::Zero(g.n);
  for (Eigen::Index r = 0; r < g.n; ++r)
    for (SparseAdjacency::InnerIterator it(g.adjacency, r); it; ++it) g.degrees[r] += it.value();
  return g;
}

ComponentLabeling connected_components(const Graph& g) {
  ComponentLabeling out;
  out.labels.assign(static_cast<std::size_t>(g.n), -1);
  std::vector<Eigen::Index> queue;
  queue.reserve(static_cast<std::size_t>(g.n));
  for (Eigen::Index s = 0; s < g.n; ++s) {
    if (out.labels[s] >= 0) continue;
    const auto id = out.count();
    out.labels[s] = id;
    queue.clear();
    queue.push_back(s);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      for (SparseAdjacency::InnerIterator it(g.adjacency, queue[head]); it; ++it) {
        const auto nb = it.col();
        if (out.labels[nb] < 0) {
          out.labels[nb] = id;
          queue.push_back(nb);
        }
      }
    }
    out.sizes.push_back(static_cast<std::int64_t>(queue.size()));
  }
  return out;
}

InducedSubgraph largest_component(const Graph& g) {
  if (g.n == 0) throw ValidationError("largest_component: empty graph");
  const auto cc = connected_components(g);
  const auto best = std::distance(cc.sizes.begin(), std::max_element(cc.sizes.begin(), cc.sizes.end()));

  InducedSubgraph out;
  std::vector<std::int64_t> new_id(static_cast<std::size_t>(g.n), -1);
  for (Eigen::Index v = 0; v < g.n; ++v) {
    if (cc.labels[v] == best) {
      new_id[v] = static_cast<std::int64_t>(out.vertex_map.size());
      out.vertex_map.push_back(static_cast<VertexId>(v));
    }
  }
  const auto m = static_cast<Eigen::Index>(out.vertex_map.size());
  std::vector<Eigen::Triplet<double, std::int64_t>> trips;
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto v = static_cast<Eigen::Index>(out.vertex_map[k]);
    for (SparseAdjacency::InnerIterator it(g.adjacency, v); it; ++it)
      trips.emplace_back(k, new_id[it.col()], it.value());
  }
  out.graph.n = m;
  out.graph.adjacency.resize(m, m);
  out.graph.adjacency.setFromTriplets(trips.begin(), trips.end());
  out.graph.adjacency.makeCompressed();
  out.graph.degrees.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) out.graph.degrees[k] = g.degrees[static_cast<Eigen::Index>(out.vertex_map[k])];
  return out;
}

}  // namespace glsira
