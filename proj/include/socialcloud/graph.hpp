#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "types.hpp"

namespace socialcloud {

/// Undirected simple graph in CSR form. Node ids are dense [0, n) and are
/// assigned by sorting the textual labels, so a given edge list always maps
/// to the same ids regardless of line order.
class graph {
public:
  graph() = default;

  /// Build from deduplicated, loop-free undirected edges over labels already
  /// interned as [0, n). Used by the loader and by tests that synthesize
  /// graphs directly.
  graph(std::vector<std::string> labels,
        std::vector<std::pair<node_id, node_id>> edges)
      : labels_(std::move(labels)) {
    const std::size_t n = labels_.size();
    std::vector<std::uint32_t> degree(n, 0);
    for (auto [u, v] : edges) {
      if (u >= n || v >= n) throw std::invalid_argument("edge endpoint out of range");
      if (u == v) throw std::invalid_argument("self-loop in edge set");
      ++degree[u];
      ++degree[v];
    }
    offsets_.assign(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v) offsets_[v + 1] = offsets_[v] + degree[v];
    neighbors_.resize(offsets_[n]);
    std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (auto [u, v] : edges) {
      neighbors_[cursor[u]++] = v;
      neighbors_[cursor[v]++] = u;
    }
    for (std::size_t v = 0; v < n; ++v)
      std::sort(neighbors_.begin() + static_cast<std::ptrdiff_t>(offsets_[v]),
                neighbors_.begin() + static_cast<std::ptrdiff_t>(offsets_[v + 1]));
    edge_count_ = edges.size();
  }

  std::size_t node_count() const { return labels_.size(); }
  std::size_t edge_count() const { return edge_count_; }

  std::uint32_t degree(node_id v) const {
    check_node(v);
    return static_cast<std::uint32_t>(offsets_[v + 1] - offsets_[v]);
  }

  /// Neighbor ids in ascending order.
  std::span<const node_id> neighbors(node_id v) const {
    check_node(v);
    return {neighbors_.data() + offsets_[v], neighbors_.data() + offsets_[v + 1]};
  }

  const std::string& label(node_id v) const {
    check_node(v);
    return labels_[v];
  }

  const std::vector<std::string>& labels() const { return labels_; }

private:
  void check_node(node_id v) const {
    if (v >= labels_.size()) throw std::out_of_range("node id out of range");
  }

  std::vector<std::string> labels_;      // id -> label, sorted
  std::vector<std::size_t> offsets_;     // CSR row starts, size n+1
  std::vector<node_id> neighbors_;       // concatenated sorted adjacency
  std::size_t edge_count_ = 0;
};

struct graph_stats {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::uint32_t min_degree = 0;
  std::uint32_t max_degree = 0;
  double mean_degree = 0.0;
  double density = 0.0;    // 2m / (n (n-1)), 0 for n < 2
  std::size_t isolated = 0;
};

inline graph_stats compute_stats(const graph& g) {
  graph_stats s;
  s.nodes = g.node_count();
  s.edges = g.edge_count();
  if (s.nodes == 0) return s;
  s.min_degree = UINT32_MAX;
  for (node_id v = 0; v < s.nodes; ++v) {
    const std::uint32_t d = g.degree(v);
    s.min_degree = std::min(s.min_degree, d);
    s.max_degree = std::max(s.max_degree, d);
    if (d == 0) ++s.isolated;
  }
  s.mean_degree = 2.0 * static_cast<double>(s.edges) / static_cast<double>(s.nodes);
  if (s.nodes >= 2)
    s.density = 2.0 * static_cast<double>(s.edges) /
                (static_cast<double>(s.nodes) * static_cast<double>(s.nodes - 1));
  return s;
}

namespace detail {

/// Labels sort numerically when every label is a plain unsigned integer
/// (what the common public edge lists use); otherwise lexicographically.
/// Numeric ties ("007" vs "7") fall back to the string so the order stays
/// total and deterministic.
inline bool all_numeric(const std::vector<std::string>& labels) {
  for (const auto& s : labels) {
    if (s.empty() || s.size() > 19) return false;
    for (char c : s)
      if (c < '0' || c > '9') return false;
  }
  return true;
}

inline void sort_labels(std::vector<std::string>& labels) {
  if (all_numeric(labels)) {
    std::sort(labels.begin(), labels.end(), [](const std::string& a, const std::string& b) {
      const std::uint64_t na = std::stoull(a);
      const std::uint64_t nb = std::stoull(b);
      if (na != nb) return na < nb;
      return a < b;
    });
  } else {
    std::sort(labels.begin(), labels.end());
  }
}

} // namespace detail

/// Parse an undirected edge list. Each non-empty line outside '#' comments
/// holds exactly two whitespace-separated labels. Duplicate edges (either
/// orientation) collapse; self-loops are dropped as edges but still declare
/// the node, which is how isolated nodes survive a save/load round trip.
inline graph load_edge_list(std::istream& in, const std::string& origin = "<stream>") {
  std::vector<std::pair<std::string, std::string>> raw_edges;
  std::vector<std::string> raw_nodes;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string a, b, extra;
    if (!(ls >> a)) continue; // blank
    if (!(ls >> b))
      throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                               ": expected two labels, got one");
    if (ls >> extra)
      throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                               ": expected two labels, got more");
    if (a == b) {
      raw_nodes.push_back(a);
    } else {
      raw_edges.emplace_back(std::move(a), std::move(b));
    }
  }

  std::vector<std::string> labels = raw_nodes;
  for (const auto& [a, b] : raw_edges) {
    labels.push_back(a);
    labels.push_back(b);
  }
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  if (labels.empty())
    throw std::runtime_error(origin + ": no nodes found");
  detail::sort_labels(labels);

  std::unordered_map<std::string, node_id> id_of;
  id_of.reserve(labels.size() * 2);
  for (node_id v = 0; v < labels.size(); ++v) id_of.emplace(labels[v], v);

  std::vector<std::pair<node_id, node_id>> edges;
  edges.reserve(raw_edges.size());
  for (const auto& [a, b] : raw_edges) {
    node_id u = id_of.at(a);
    node_id v = id_of.at(b);
    if (u > v) std::swap(u, v);
    edges.emplace_back(u, v);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  return graph(std::move(labels), std::move(edges));
}

inline graph load_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file: " + path);
  return load_edge_list(in, path);
}

/// Inverse of load_edge_list: one line per edge with labels, ascending by
/// (u, v) id; isolated nodes appear as a self-loop line so they reload.
inline void save_edge_list(const graph& g, std::ostream& out) {
  for (node_id v = 0; v < g.node_count(); ++v) {
    if (g.degree(v) == 0) {
      out << g.label(v) << ' ' << g.label(v) << '\n';
      continue;
    }
    for (node_id w : g.neighbors(v))
      if (w > v) out << g.label(v) << ' ' << g.label(w) << '\n';
  }
}

inline void save_edge_list_file(const graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  save_edge_list(g, out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace socialcloud
