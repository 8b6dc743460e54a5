#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "gnnlogic/error.hpp"
#include "gnnlogic/formula.hpp"
#include "gnnlogic/graph.hpp"

namespace gnnlogic {

struct GradedType;
using TypePtr = std::shared_ptr<const GradedType>;

// Graded Pi-type. Width-k types cap child counts at k; full types keep
// exact counts and the out-degree. Children are sorted canonically and only
// nonzero counts are stored.
struct GradedType {
  enum class Kind { width_k, full };

  Kind kind = Kind::width_k;
  int k = 0;  // 0 for full types
  int depth = 0;
  LabelMask labels = 0;
  std::vector<std::pair<TypePtr, int>> children;
  int out_degree = 0;  // full types only
  std::shared_ptr<const std::vector<std::string>> pi;
};

inline int compare_types(const GradedType& a, const GradedType& b) {
  if (&a == &b) return 0;
  auto cmp = [](auto x, auto y) { return x < y ? -1 : (y < x ? 1 : 0); };
  if (int c = cmp(int(a.kind), int(b.kind))) return c;
  if (int c = cmp(a.k, b.k)) return c;
  if (int c = cmp(a.depth, b.depth)) return c;
  if (int c = cmp(a.labels, b.labels)) return c;
  if (int c = cmp(a.out_degree, b.out_degree)) return c;
  if (int c = cmp(a.children.size(), b.children.size())) return c;
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    if (int c = compare_types(*a.children[i].first, *b.children[i].first)) return c;
    if (int c = cmp(a.children[i].second, b.children[i].second)) return c;
  }
  return 0;
}

inline bool operator==(const GradedType& a, const GradedType& b) { return compare_types(a, b) == 0; }
inline bool operator<(const GradedType& a, const GradedType& b) { return compare_types(a, b) < 0; }

struct TypePtrLess {
  bool operator()(const TypePtr& a, const TypePtr& b) const { return compare_types(*a, *b) < 0; }
};

namespace detail {

inline TypePtr base_type(GradedType::Kind kind, int k, LabelMask labels,
                         const std::shared_ptr<const std::vector<std::string>>& pi) {
  auto t = std::make_shared<GradedType>();
  t->kind = kind;
  t->k = kind == GradedType::Kind::full ? 0 : k;
  t->labels = labels;
  t->pi = pi;
  return t;
}

// Builds the next-depth type from own labels and the types of the
// out-neighbours (one entry per neighbour).
inline TypePtr combine_type(GradedType::Kind kind, int k, LabelMask labels, int depth,
                            const std::vector<TypePtr>& neighbour_types,
                            const std::shared_ptr<const std::vector<std::string>>& pi) {
  std::map<TypePtr, int, TypePtrLess> counts;
  for (const auto& t : neighbour_types) ++counts[t];
  auto t = std::make_shared<GradedType>();
  t->kind = kind;
  t->k = kind == GradedType::Kind::full ? 0 : k;
  t->depth = depth;
  t->labels = labels;
  t->pi = pi;
  for (const auto& [child, c] : counts) {
    int cc = kind == GradedType::Kind::full ? c : std::min(c, k);
    t->children.emplace_back(child, cc);
  }
  t->out_degree = kind == GradedType::Kind::full ? int(neighbour_types.size()) : 0;
  return t;
}

inline TypePtr type_rec(const LabeledGraph& g, int v, int n, GradedType::Kind kind, int k,
                        const std::shared_ptr<const std::vector<std::string>>& pi,
                        std::map<std::pair<int, int>, TypePtr>& memo) {
  auto key = std::make_pair(v, n);
  auto it = memo.find(key);
  if (it != memo.end()) return it->second;
  TypePtr t;
  if (n == 0) {
    t = base_type(kind, k, g.labels(v), pi);
  } else {
    std::vector<TypePtr> ns;
    for (int u : g.out(v)) ns.push_back(type_rec(g, u, n - 1, kind, k, pi, memo));
    t = combine_type(kind, k, g.labels(v), n, ns, pi);
  }
  memo.emplace(key, t);
  return t;
}

}  // namespace detail

inline TypePtr graded_type(const PointedGraph& pg, int k, int n) {
  if (k < 1) throw invalid_error("width must be at least 1");
  if (n < 0) throw invalid_error("negative depth");
  auto pi = std::make_shared<const std::vector<std::string>>(pg.graph->pi());
  std::map<std::pair<int, int>, TypePtr> memo;
  return detail::type_rec(*pg.graph, pg.point, n, GradedType::Kind::width_k, k, pi, memo);
}

inline TypePtr full_type(const PointedGraph& pg, int n) {
  if (n < 0) throw invalid_error("negative depth");
  auto pi = std::make_shared<const std::vector<std::string>>(pg.graph->pi());
  std::map<std::pair<int, int>, TypePtr> memo;
  return detail::type_rec(*pg.graph, pg.point, n, GradedType::Kind::full, 0, pi, memo);
}

inline Formula label_formula(LabelMask labels, const std::vector<std::string>& pi) {
  std::vector<Formula> parts;
  for (std::size_t p = 0; p < pi.size(); ++p)
    if ((labels >> p) & 1u) parts.push_back(prop(pi[p]));
  for (std::size_t p = 0; p < pi.size(); ++p)
    if (!((labels >> p) & 1u)) parts.push_back(neg(prop(pi[p])));
  if (parts.empty()) return top();
  Formula f = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) f = conj(f, parts[i]);
  return f;
}

// Defining formula. Width-k: a child type with count c < k contributes
// <=c>, count k contributes <k>, and "no child of any other type" closes the
// description (equivalent to <=0> for every unlisted type). Full types close
// with <=outdeg> top.
inline Formula type_to_formula(const GradedType& t) {
  static const std::vector<std::string> empty;
  const auto& pi = t.pi ? *t.pi : empty;
  Formula f = label_formula(t.labels, pi);
  if (t.depth == 0) return f;
  std::vector<Formula> listed;
  for (const auto& [child, c] : t.children) {
    Formula cf = type_to_formula(*child);
    listed.push_back(cf);
    if (t.kind == GradedType::Kind::width_k && c >= t.k) f = conj(f, dia(t.k, cf));
    else f = conj(f, dia_eq(c, cf));
  }
  if (t.kind == GradedType::Kind::full) return conj(f, dia_eq(t.out_degree, top()));
  return conj(f, neg(dia(1, neg(disj_all(listed)))));
}

inline PointedGraph realizing_tree(const GradedType& t) {
  static const std::vector<std::string> empty;
  const auto& pi = t.pi ? *t.pi : empty;
  std::vector<std::string> ids;
  std::vector<LabelMask> labels;
  std::vector<std::vector<int>> out;
  std::function<int(const GradedType&)> build = [&](const GradedType& ty) {
    int id = int(ids.size());
    ids.push_back("t" + std::to_string(id));
    labels.push_back(ty.labels);
    out.emplace_back();
    for (const auto& [child, c] : ty.children) {
      for (int i = 0; i < c; ++i) {
        int cid = build(*child);
        out[id].push_back(cid);
      }
    }
    return id;
  };
  build(t);
  auto g = std::make_shared<const LabeledGraph>(LabeledGraph::from_masks(pi, ids, labels, out));
  return PointedGraph(g, 0);
}

// |T_{k,0}| = 2^|Pi|, |T_{k,m+1}| = 2^|Pi| (k+1)^|T_{k,m}|; saturates at 1e300.
inline double type_space_size(int pi_size, int k, int n) {
  double t = std::pow(2.0, pi_size);
  for (int m = 0; m < n; ++m) {
    double e = t * std::log10(double(k + 1)) + pi_size * std::log10(2.0);
    if (e > 300) return 1e300;
    double next = std::pow(2.0, pi_size);
    for (double i = 0; i < t && next <= 1e300; ++i) next *= double(k + 1);
    t = std::min(next, 1e300);
  }
  return t;
}

inline std::vector<TypePtr> enumerate_types(const std::vector<std::string>& pi, int k, int n,
                                            double guard = 1e5) {
  if (k < 1) throw invalid_error("width must be at least 1");
  if (n < 0) throw invalid_error("negative depth");
  if (pi.size() > 16) throw guard_error("label alphabet too large for type enumeration");
  for (int m = 0; m <= n; ++m) {
    double size = type_space_size(int(pi.size()), k, m);
    if (size > guard) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6g", size);
      throw guard_error(std::string("type space guard exceeded: |T_{k,") + std::to_string(m) + "}| = " + buf);
    }
  }
  auto pis = std::make_shared<const std::vector<std::string>>(pi);
  const LabelMask label_count = LabelMask(1) << pi.size();
  std::vector<TypePtr> level;
  for (LabelMask l = 0; l < label_count; ++l)
    level.push_back(detail::base_type(GradedType::Kind::width_k, k, l, pis));
  for (int m = 1; m <= n; ++m) {
    std::sort(level.begin(), level.end(), TypePtrLess{});
    std::vector<TypePtr> next;
    const std::size_t T = level.size();
    for (LabelMask l = 0; l < label_count; ++l) {
      std::vector<int> counts(T, 0);
      for (;;) {
        auto t = std::make_shared<GradedType>();
        t->kind = GradedType::Kind::width_k;
        t->k = k;
        t->depth = m;
        t->labels = l;
        t->pi = pis;
        for (std::size_t i = 0; i < T; ++i)
          if (counts[i]) t->children.emplace_back(level[i], counts[i]);
        next.push_back(t);
        std::size_t i = 0;
        while (i < T && counts[i] == k) counts[i++] = 0;
        if (i == T) break;
        ++counts[i];
      }
    }
    level = std::move(next);
  }
  std::sort(level.begin(), level.end(), TypePtrLess{});
  return level;
}

inline std::vector<TypePtr> gml_to_type_disjunction(const Formula& phi, const std::vector<std::string>& pi, int k,
                                                    int n) {
  if (phi->has_var) throw invalid_error("formula mentions head predicates");
  if (phi->has_glob) throw invalid_error("global modality not supported in type disjunctions");
  if (phi->modal_depth > n) throw invalid_error("modal depth exceeds type depth");
  if (phi->width > k) throw invalid_error("width exceeds type width");
  check_props_declared(phi, pi);
  std::vector<TypePtr> r;
  for (const auto& t : enumerate_types(pi, k, n))
    if (eval_gml(realizing_tree(*t), phi)) r.push_back(t);
  return r;
}

inline std::string type_to_string(const GradedType& t) {
  std::string s = "{";
  bool first = true;
  if (t.pi) {
    for (std::size_t p = 0; p < t.pi->size(); ++p) {
      if ((t.labels >> p) & 1u) {
        s += (first ? "" : ",") + (*t.pi)[p];
        first = false;
      }
    }
  }
  s += "}";
  if (t.depth == 0) return s;
  s += "[";
  for (std::size_t i = 0; i < t.children.size(); ++i) {
    if (i) s += ", ";
    s += type_to_string(*t.children[i].first) + ":" + std::to_string(t.children[i].second);
  }
  s += "]";
  if (t.kind == GradedType::Kind::full) s += "/" + std::to_string(t.out_degree);
  return s;
}

}  // namespace gnnlogic
