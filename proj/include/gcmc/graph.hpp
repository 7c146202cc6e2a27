#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gcmc/error.hpp"

namespace gcmc {

using LabelPair = std::pair<std::string, std::string>;

/// Finite undirected simple graph over string labels.
///
/// Vertices keep their declaration order; that order defines the dense
/// indices used everywhere else in the library. Self-adjacency is implied by
/// is_adjacent and never stored as an edge. Instances are immutable once
/// built, so a const Graph can be shared freely between threads.
class Graph {
 public:
  /// Builds and validates a graph. Edge endpoints are normalized so that the
  /// endpoint declared first comes first; the edge list is sorted by index.
  static Graph build(std::vector<std::string> labels,
                     const std::vector<LabelPair>& edges) {
    Graph g;
    if (labels.empty()) throw Error(ErrorCode::EmptyGraph, "graph needs at least one vertex");
    g.labels_ = std::move(labels);
    for (std::size_t i = 0; i < g.labels_.size(); ++i) {
      if (!g.index_.emplace(g.labels_[i], i).second)
        throw Error(ErrorCode::DuplicateLabel, g.labels_[i]);
    }
    std::vector<std::pair<std::size_t, std::size_t>> idx;
    idx.reserve(edges.size());
    for (const auto& [u, v] : edges) {
      auto iu = g.index_.find(u);
      auto iv = g.index_.find(v);
      if (iu == g.index_.end()) throw Error(ErrorCode::UnknownEndpoint, u);
      if (iv == g.index_.end()) throw Error(ErrorCode::UnknownEndpoint, v);
      if (iu->second == iv->second) throw Error(ErrorCode::SelfLoop, u);
      idx.emplace_back(std::min(iu->second, iv->second), std::max(iu->second, iv->second));
    }
    g.init_edges(std::move(idx), true);
    return g;
  }

  /// Index-based construction used by the graph algorithms themselves.
  static Graph from_indices(std::vector<std::string> labels,
                            std::vector<std::pair<std::size_t, std::size_t>> edges) {
    Graph g;
    if (labels.empty()) throw Error(ErrorCode::EmptyGraph, "graph needs at least one vertex");
    g.labels_ = std::move(labels);
    for (std::size_t i = 0; i < g.labels_.size(); ++i) {
      if (!g.index_.emplace(g.labels_[i], i).second)
        throw Error(ErrorCode::DuplicateLabel, g.labels_[i]);
    }
    for (auto& e : edges) {
      if (e.first == e.second) throw Error(ErrorCode::SelfLoop, g.labels_[e.first]);
      if (e.first > e.second) std::swap(e.first, e.second);
    }
    g.init_edges(std::move(edges), true);
    return g;
  }

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  const std::vector<std::pair<std::size_t, std::size_t>>& edges() const noexcept { return edges_; }
  std::span<const std::size_t> neighbors(std::size_t i) const { return adj_.at(i); }

  bool contains(const std::string& label) const { return index_.count(label) != 0; }

  std::size_t index_of(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) throw Error(ErrorCode::UnknownLabel, label);
    return it->second;
  }

  bool has_edge(std::size_t i, std::size_t j) const {
    const auto& nb = adj_.at(i);
    return std::binary_search(nb.begin(), nb.end(), j);
  }

  /// Adjacent-or-equal, by index.
  bool adjacent(std::size_t i, std::size_t j) const { return i == j || has_edge(i, j); }

  /// Edge list as label pairs in storage order.
  std::vector<LabelPair> edge_labels() const {
    std::vector<LabelPair> out;
    out.reserve(edges_.size());
    for (auto [i, j] : edges_) out.emplace_back(labels_[i], labels_[j]);
    return out;
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.labels_ == b.labels_ && a.edges_ == b.edges_;
  }

 private:
  void init_edges(std::vector<std::pair<std::size_t, std::size_t>> idx, bool reject_duplicates) {
    std::sort(idx.begin(), idx.end());
    auto dup = std::adjacent_find(idx.begin(), idx.end());
    if (dup != idx.end()) {
      if (reject_duplicates)
        throw Error(ErrorCode::DuplicateEdge,
                    "{" + labels_[dup->first] + "," + labels_[dup->second] + "}");
      idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    }
    edges_ = std::move(idx);
    adj_.assign(labels_.size(), {});
    for (auto [i, j] : edges_) {
      adj_[i].push_back(j);
      adj_[j].push_back(i);
    }
    for (auto& nb : adj_) std::sort(nb.begin(), nb.end());
  }

  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
  std::vector<std::vector<std::size_t>> adj_;
};

inline Graph build_graph(std::vector<std::string> labels, const std::vector<LabelPair>& edges) {
  return Graph::build(std::move(labels), edges);
}

inline bool is_adjacent(const Graph& g, const std::string& u, const std::string& v) {
  return g.adjacent(g.index_of(u), g.index_of(v));
}

/// Component id per vertex; ids are assigned in order of each component's
/// smallest vertex index.
inline std::vector<std::size_t> component_ids(const Graph& g) {
  constexpr auto unset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> comp(g.size(), unset);
  std::size_t next = 0;
  std::deque<std::size_t> queue;
  for (std::size_t s = 0; s < g.size(); ++s) {
    if (comp[s] != unset) continue;
    comp[s] = next;
    queue.push_back(s);
    while (!queue.empty()) {
      auto v = queue.front();
      queue.pop_front();
      for (auto w : g.neighbors(v)) {
        if (comp[w] == unset) {
          comp[w] = next;
          queue.push_back(w);
        }
      }
    }
    ++next;
  }
  return comp;
}

/// Partition of the labels into connected components. Each block lists its
/// labels in declaration order; blocks are ordered by their first label.
inline std::vector<std::vector<std::string>> connected_components(const Graph& g) {
  auto comp = component_ids(g);
  std::size_t count = 0;
  for (auto c : comp) count = std::max(count, c + 1);
  std::vector<std::vector<std::string>> out(count);
  for (std::size_t i = 0; i < g.size(); ++i) out[comp[i]].push_back(g.label(i));
  return out;
}

inline bool is_connected(const Graph& g) {
  auto comp = component_ids(g);
  return std::all_of(comp.begin(), comp.end(), [](std::size_t c) { return c == 0; });
}

/// G[subset]: the listed vertices in their original order plus every edge of
/// g with both endpoints inside.
template <class Range>
Graph induced_subgraph(const Graph& g, const Range& subset) {
  std::vector<char> keep(g.size(), 0);
  bool any = false;
  for (const std::string& l : subset) {
    keep[g.index_of(l)] = 1;
    any = true;
  }
  if (!any) throw Error(ErrorCode::EmptySubset, "induced subgraph of an empty vertex set");
  std::vector<std::size_t> remap(g.size(), 0);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (keep[i]) {
      remap[i] = labels.size();
      labels.push_back(g.label(i));
    }
  }
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (auto [i, j] : g.edges())
    if (keep[i] && keep[j]) edges.emplace_back(remap[i], remap[j]);
  return Graph::from_indices(std::move(labels), std::move(edges));
}

inline Graph induced_subgraph(const Graph& g, std::initializer_list<std::string> subset) {
  return induced_subgraph(g, std::vector<std::string>(subset));
}

namespace detail {

inline bool is_atom_label(const std::string& l) {
  return l.find_first_of("(),") == std::string::npos;
}

/// Accepts atoms and composites "(x,y)" whose parts are themselves valid.
inline bool is_valid_product_label(const std::string& l) {
  if (is_atom_label(l)) return !l.empty();
  if (l.size() < 5 || l.front() != '(' || l.back() != ')') return false;
  int depth = 0;
  for (std::size_t i = 1; i + 1 < l.size(); ++i) {
    char c = l[i];
    if (c == '(') ++depth;
    else if (c == ')') {
      if (--depth < 0) return false;
    } else if (c == ',' && depth == 0) {
      return is_valid_product_label(l.substr(1, i - 1)) &&
             is_valid_product_label(l.substr(i + 1, l.size() - i - 2));
    }
  }
  return false;
}

}  // namespace detail

/// Composite vertex label of a strong product.
inline std::string product_label(const std::string& a, const std::string& b) {
  return "(" + a + "," + b + ")";
}

/// Splits a composite label produced by product_label back into its parts.
inline std::pair<std::string, std::string> split_product_label(const std::string& l) {
  if (l.size() >= 5 && l.front() == '(' && l.back() == ')') {
    int depth = 0;
    for (std::size_t i = 1; i + 1 < l.size(); ++i) {
      char c = l[i];
      if (c == '(') ++depth;
      else if (c == ')') --depth;
      else if (c == ',' && depth == 0) return {l.substr(1, i - 1), l.substr(i + 1, l.size() - i - 2)};
    }
  }
  throw Error(ErrorCode::ReservedLabel, "not a composite label: " + l);
}

/// Strong product G1 ⊠ G2. Vertex (i, j) gets index i * |V2| + j, i.e. pairs
/// are enumerated lexicographically by factor index.
inline Graph strong_product(const Graph& g1, const Graph& g2) {
  for (const auto* g : {&g1, &g2})
    for (const auto& l : g->labels())
      if (!detail::is_valid_product_label(l))
        throw Error(ErrorCode::ReservedLabel, "label '" + l + "' uses reserved characters ( , )");
  const std::size_t n2 = g2.size();
  std::vector<std::string> labels;
  labels.reserve(g1.size() * n2);
  for (const auto& a : g1.labels())
    for (const auto& b : g2.labels()) labels.push_back(product_label(a, b));

  std::vector<std::pair<std::size_t, std::size_t>> edges;
  auto id = [n2](std::size_t i, std::size_t j) { return i * n2 + j; };
  // edge in G1, equal in G2
  for (auto [i, k] : g1.edges())
    for (std::size_t j = 0; j < n2; ++j) edges.emplace_back(id(i, j), id(k, j));
  // equal in G1, edge in G2
  for (std::size_t i = 0; i < g1.size(); ++i)
    for (auto [j, l] : g2.edges()) edges.emplace_back(id(i, j), id(i, l));
  // edge in both: {(i,j),(k,l)} and {(i,l),(k,j)}
  for (auto [i, k] : g1.edges())
    for (auto [j, l] : g2.edges()) {
      edges.emplace_back(id(i, j), id(k, l));
      edges.emplace_back(id(i, l), id(k, j));
    }
  return Graph::from_indices(std::move(labels), std::move(edges));
}

/// Left fold G1 ⊠ G2 ⊠ ... ⊠ Gr.
inline Graph strong_product(std::span<const Graph> factors) {
  if (factors.empty()) throw Error(ErrorCode::InvalidArgument, "strong product of zero factors");
  Graph acc = factors.front();
  for (std::size_t h = 1; h < factors.size(); ++h) acc = strong_product(acc, factors[h]);
  return acc;
}

}  // namespace gcmc
