#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gnnlogic/error.hpp"

namespace gnnlogic {

using LabelMask = std::uint32_t;
inline constexpr int kMaxProps = 30;

// Finite labeled digraph. Node order is the declaration order and is the
// iteration order everywhere else in the library.
class LabeledGraph {
 public:
  struct NodeSpec {
    std::string id;
    std::vector<std::string> labels;
  };

  LabeledGraph() = default;

  static LabeledGraph make(std::vector<std::string> pi, const std::vector<NodeSpec>& nodes,
                           const std::vector<std::pair<std::string, std::string>>& edges) {
    LabeledGraph g;
    g.set_pi(std::move(pi));
    for (const auto& n : nodes) {
      LabelMask m = 0;
      for (const auto& l : n.labels) {
        int p = g.prop_index(l);
        if (p < 0) throw invalid_error("label '" + l + "' outside declared alphabet");
        m |= LabelMask(1) << p;
      }
      g.add_node(n.id, m);
    }
    for (const auto& [u, v] : edges) {
      auto iu = g.index_.find(u);
      auto iv = g.index_.find(v);
      if (iu == g.index_.end()) throw invalid_error("undeclared node '" + u + "'");
      if (iv == g.index_.end()) throw invalid_error("undeclared node '" + v + "'");
      g.out_[iu->second].push_back(iv->second);
    }
    g.finish();
    return g;
  }

  // Fast path for generated graphs: ids are given, adjacency by index.
  static LabeledGraph from_masks(std::vector<std::string> pi, std::vector<std::string> ids,
                                 std::vector<LabelMask> labels, std::vector<std::vector<int>> out) {
    LabeledGraph g;
    g.set_pi(std::move(pi));
    if (ids.size() != labels.size() || ids.size() != out.size())
      throw invalid_error("graph arrays differ in length");
    for (std::size_t i = 0; i < ids.size(); ++i) g.add_node(ids[i], labels[i]);
    for (std::size_t i = 0; i < out.size(); ++i) {
      for (int v : out[i]) {
        if (v < 0 || v >= int(ids.size())) throw invalid_error("edge to undeclared node");
      }
      g.out_[i] = std::move(out[i]);
    }
    g.finish();
    return g;
  }

  const std::vector<std::string>& pi() const { return pi_; }
  int size() const { return int(ids_.size()); }
  const std::string& id(int v) const { return ids_.at(v); }
  const std::vector<std::string>& ids() const { return ids_; }
  LabelMask labels(int v) const { return labels_[v]; }
  bool has_label(int v, int prop) const { return (labels_[v] >> prop) & 1u; }
  const std::vector<int>& out(int v) const { return out_[v]; }

  int prop_index(const std::string& p) const {
    for (std::size_t i = 0; i < pi_.size(); ++i)
      if (pi_[i] == p) return int(i);
    return -1;
  }

  int index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw invalid_error("unknown node '" + id + "'");
    return it->second;
  }
  bool has_node(const std::string& id) const { return index_.count(id) != 0; }

  std::vector<std::string> label_names(int v) const {
    std::vector<std::string> r;
    for (std::size_t p = 0; p < pi_.size(); ++p)
      if (has_label(v, int(p))) r.push_back(pi_[p]);
    return r;
  }

  std::size_t edge_count() const {
    std::size_t c = 0;
    for (const auto& o : out_) c += o.size();
    return c;
  }

  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> r;
    for (int u = 0; u < size(); ++u)
      for (int v : out_[u]) r.emplace_back(u, v);
    return r;
  }

  // Same structure over a different alphabet; labels are remapped by name.
  LabeledGraph with_pi(const std::vector<std::string>& pi) const {
    std::vector<LabelMask> masks(labels_.size(), 0);
    for (int v = 0; v < size(); ++v) {
      for (const auto& name : label_names(v)) {
        auto it = std::find(pi.begin(), pi.end(), name);
        if (it == pi.end()) throw invalid_error("label '" + name + "' outside declared alphabet");
        masks[v] |= LabelMask(1) << (it - pi.begin());
      }
    }
    return from_masks(pi, ids_, masks, out_);
  }

 private:
  void set_pi(std::vector<std::string> pi) {
    if (pi.size() > std::size_t(kMaxProps)) throw guard_error("label alphabet larger than 30");
    for (std::size_t i = 0; i < pi.size(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (pi[i] == pi[j]) throw invalid_error("duplicate label '" + pi[i] + "' in alphabet");
    pi_ = std::move(pi);
  }

  void add_node(const std::string& id, LabelMask m) {
    if (id.empty()) throw invalid_error("empty node id");
    if (!index_.emplace(id, int(ids_.size())).second)
      throw invalid_error("duplicate node id '" + id + "'");
    if (pi_.size() < 32 && (m >> pi_.size()) != 0) throw invalid_error("label outside declared alphabet");
    ids_.push_back(id);
    labels_.push_back(m);
    out_.emplace_back();
  }

  // Edges form a set; targets are kept in node declaration order.
  void finish() {
    for (auto& o : out_) {
      std::sort(o.begin(), o.end());
      o.erase(std::unique(o.begin(), o.end()), o.end());
    }
  }

  std::vector<std::string> pi_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, int> index_;
  std::vector<LabelMask> labels_;
  std::vector<std::vector<int>> out_;
};

struct PointedGraph {
  std::shared_ptr<const LabeledGraph> graph;
  int point = 0;

  PointedGraph() = default;
  PointedGraph(std::shared_ptr<const LabeledGraph> g, int v) : graph(std::move(g)), point(v) {
    if (!graph || point < 0 || point >= graph->size()) throw invalid_error("point is not a node of the graph");
  }
  PointedGraph(const LabeledGraph& g, const std::string& id)
      : graph(std::make_shared<const LabeledGraph>(g)), point(g.index_of(id)) {}

  const std::string& point_id() const { return graph->id(point); }
};

inline std::vector<std::string> out_neighbors(const LabeledGraph& g, const std::string& v) {
  std::vector<std::string> r;
  for (int w : g.out(g.index_of(v))) r.push_back(g.id(w));
  return r;
}

// Multiset with an optional bound; stored counts are >= 1 and <= bound.
template <class T, class Compare = std::less<T>>
class BoundedMultiset {
 public:
  BoundedMultiset() = default;
  explicit BoundedMultiset(std::optional<int> bound) : bound_(bound) {}

  void add(const T& x, long long count = 1) {
    if (count <= 0) return;
    long long c = entries_[x] + count;
    if (bound_) c = std::min<long long>(c, *bound_);
    if (c <= 0) {
      entries_.erase(x);
      return;
    }
    entries_[x] = int(std::min<long long>(c, 1LL << 30));
  }

  int count(const T& x) const {
    auto it = entries_.find(x);
    return it == entries_.end() ? 0 : it->second;
  }

  long long total() const {
    long long t = 0;
    for (const auto& [x, c] : entries_) t += c;
    return t;
  }

  const std::map<T, int, Compare>& entries() const { return entries_; }
  std::optional<int> bound() const { return bound_; }
  bool empty() const { return entries_.empty(); }
  std::size_t distinct() const { return entries_.size(); }

  friend bool operator==(const BoundedMultiset& a, const BoundedMultiset& b) {
    return a.entries_ == b.entries_;
  }

 private:
  std::map<T, int, Compare> entries_;
  std::optional<int> bound_;
};

template <class T, class C>
BoundedMultiset<T, C> k_project(const BoundedMultiset<T, C>& m, int k) {
  if (k < 0) throw invalid_error("negative projection bound");
  BoundedMultiset<T, C> r{k};
  for (const auto& [x, c] : m.entries()) r.add(x, std::min(c, k));
  return r;
}

// ---------------------------------------------------------------------------
// JSON

inline LabeledGraph parse_graph(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("malformed graph JSON: ") + e.what());
  }
  try {
    std::vector<std::string> pi;
    if (j.contains("pi")) pi = j.at("pi").get<std::vector<std::string>>();
    std::vector<LabeledGraph::NodeSpec> nodes;
    for (const auto& n : j.at("nodes")) {
      LabeledGraph::NodeSpec s;
      s.id = n.at("id").get<std::string>();
      for (char c : s.id)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_'))
          throw parse_error("node id '" + s.id + "' has characters outside [A-Za-z0-9_]");
      if (n.contains("labels")) s.labels = n.at("labels").get<std::vector<std::string>>();
      nodes.push_back(std::move(s));
    }
    std::vector<std::pair<std::string, std::string>> edges;
    if (j.contains("edges")) {
      for (const auto& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 2) throw parse_error("edge must be a pair of node ids");
        edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
      }
    }
    return LabeledGraph::make(std::move(pi), nodes, edges);
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("malformed graph JSON: ") + e.what());
  } catch (const Error& e) {
    throw parse_error(e.what());
  }
}

inline nlohmann::json graph_to_json(const LabeledGraph& g) {
  nlohmann::json j;
  j["pi"] = g.pi();
  j["nodes"] = nlohmann::json::array();
  for (int v = 0; v < g.size(); ++v) j["nodes"].push_back({{"id", g.id(v)}, {"labels", g.label_names(v)}});
  j["edges"] = nlohmann::json::array();
  for (auto [u, v] : g.edges()) j["edges"].push_back({g.id(u), g.id(v)});
  return j;
}

// ---------------------------------------------------------------------------
// Enumeration and sampling

// Number of pointed graphs with 1..max_nodes nodes; saturates at UINT64_MAX.
inline std::uint64_t count_pointed_graphs(int pi_size, int max_nodes) {
  unsigned __int128 total = 0;
  const unsigned __int128 cap = ~std::uint64_t(0);
  for (int n = 1; n <= max_nodes; ++n) {
    int bits = n * n + pi_size * n;
    if (bits >= 100) return ~std::uint64_t(0);
    total += (unsigned __int128)n << bits;
    if (total > cap) return ~std::uint64_t(0);
  }
  return std::uint64_t(total);
}

inline void check_enumeration_guard(int pi_size, int max_nodes, int guard = 12) {
  if (max_nodes < 1) throw invalid_error("max_nodes must be at least 1");
  if (pi_size * max_nodes > guard || max_nodes > 5)
    throw guard_error("enumeration guard exceeded: " + std::to_string(count_pointed_graphs(pi_size, max_nodes)) +
                      " pointed graphs");
}

inline std::vector<std::string> numbered_ids(int n) {
  std::vector<std::string> ids;
  for (int i = 1; i <= n; ++i) ids.push_back(std::to_string(i));
  return ids;
}

// Calls fn(graph) for every labeled digraph with 1..max_nodes nodes, in a
// fixed order: node count, then edge mask, then label mask.
inline void for_each_graph(const std::vector<std::string>& pi, int max_nodes,
                           const std::function<void(const LabeledGraph&)>& fn, int guard = 12) {
  check_enumeration_guard(int(pi.size()), max_nodes, guard);
  const int P = int(pi.size());
  for (int n = 1; n <= max_nodes; ++n) {
    auto ids = numbered_ids(n);
    const std::uint64_t edge_masks = std::uint64_t(1) << (n * n);
    const std::uint64_t label_masks = std::uint64_t(1) << (P * n);
    for (std::uint64_t em = 0; em < edge_masks; ++em) {
      std::vector<std::vector<int>> out(n);
      for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v)
          if ((em >> (u * n + v)) & 1u) out[u].push_back(v);
      for (std::uint64_t lm = 0; lm < label_masks; ++lm) {
        std::vector<LabelMask> labels(n);
        for (int v = 0; v < n; ++v) labels[v] = LabelMask((lm >> (v * P)) & ((std::uint64_t(1) << P) - 1));
        fn(LabeledGraph::from_masks(pi, ids, labels, out));
      }
    }
  }
}

// Number of graphs visited by for_each_graph.
inline std::uint64_t count_graphs(int pi_size, int max_nodes) {
  std::uint64_t total = 0;
  for (int n = 1; n <= max_nodes; ++n) total += std::uint64_t(1) << (n * n + pi_size * n);
  return total;
}

// The index-th graph in for_each_graph order.
inline LabeledGraph graph_at(const std::vector<std::string>& pi, int max_nodes, std::uint64_t index) {
  check_enumeration_guard(int(pi.size()), max_nodes, 64);
  const int P = int(pi.size());
  for (int n = 1; n <= max_nodes; ++n) {
    const std::uint64_t block = std::uint64_t(1) << (n * n + P * n);
    if (index >= block) {
      index -= block;
      continue;
    }
    const std::uint64_t em = index >> (P * n), lm = index & ((std::uint64_t(1) << (P * n)) - 1);
    std::vector<std::vector<int>> out(n);
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v)
        if ((em >> (u * n + v)) & 1u) out[u].push_back(v);
    std::vector<LabelMask> labels(n);
    for (int v = 0; v < n; ++v) labels[v] = LabelMask((lm >> (v * P)) & ((std::uint64_t(1) << P) - 1));
    return LabeledGraph::from_masks(pi, numbered_ids(n), labels, out);
  }
  throw invalid_error("graph index out of range");
}

inline std::vector<PointedGraph> enumerate_pointed_graphs(const std::vector<std::string>& pi, int max_nodes,
                                                          int guard = 12) {
  std::vector<PointedGraph> r;
  for_each_graph(
      pi, max_nodes,
      [&](const LabeledGraph& g) {
        auto sg = std::make_shared<const LabeledGraph>(g);
        for (int v = 0; v < g.size(); ++v) r.emplace_back(sg, v);
      },
      guard);
  return r;
}

// Seeded sampler: node count uniform in [1, max_nodes], each ordered pair an
// edge with probability 1/2, each label with probability 1/2.
inline std::vector<LabeledGraph> sample_graphs(const std::vector<std::string>& pi, int max_nodes, int count,
                                               std::uint64_t seed) {
  if (max_nodes < 1) throw invalid_error("max_nodes must be at least 1");
  std::mt19937_64 rng(seed);
  auto bit = [&] { return (rng() >> 63) != 0; };
  std::vector<LabeledGraph> r;
  r.reserve(count);
  for (int i = 0; i < count; ++i) {
    int n = 1 + int(rng() % std::uint64_t(max_nodes));
    std::vector<std::vector<int>> out(n);
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v)
        if (bit()) out[u].push_back(v);
    std::vector<LabelMask> labels(n, 0);
    for (int v = 0; v < n; ++v)
      for (std::size_t p = 0; p < pi.size(); ++p)
        if (bit()) labels[v] |= LabelMask(1) << p;
    r.push_back(LabeledGraph::from_masks(pi, numbered_ids(n), labels, out));
  }
  return r;
}

// Tree of walks from the point, truncated at the given length. Walk ids join
// the node ids of the walk with '_'.
inline PointedGraph unravel(const PointedGraph& pg, int depth) {
  if (depth < 0) throw invalid_error("negative unravel depth");
  const LabeledGraph& g = *pg.graph;
  std::vector<std::string> ids{g.id(pg.point)};
  std::vector<int> tail{pg.point};
  std::vector<LabelMask> labels{g.labels(pg.point)};
  std::vector<std::vector<int>> out(1);
  std::vector<int> frontier{0};
  for (int d = 0; d < depth && !frontier.empty(); ++d) {
    std::vector<int> next;
    for (int w : frontier) {
      for (int u : g.out(tail[w])) {
        int id = int(ids.size());
        ids.push_back(ids[w] + "_" + g.id(u));
        tail.push_back(u);
        labels.push_back(g.labels(u));
        out.emplace_back();
        out[w].push_back(id);
        next.push_back(id);
      }
      if (ids.size() > 2'000'000) throw guard_error("unraveling exceeds 2e6 walks");
    }
    frontier = std::move(next);
  }
  std::vector<std::string> sorted = ids;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = "w" + std::to_string(i);
  auto t = std::make_shared<const LabeledGraph>(LabeledGraph::from_masks(g.pi(), ids, labels, out));
  return PointedGraph(t, 0);
}

}  // namespace gnnlogic
