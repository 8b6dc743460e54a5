#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "gnnlogic/automata.hpp"
#include "gnnlogic/error.hpp"
#include "gnnlogic/float_system.hpp"
#include "gnnlogic/formula.hpp"
#include "gnnlogic/gmsc.hpp"
#include "gnnlogic/graph.hpp"

namespace gnnlogic {

using Vec = std::vector<Float>;

inline Vec zero_vec(const FloatSystem& s, int d) { return Vec(std::size_t(d), float_zero(s)); }

inline std::vector<std::int64_t> vec_key(const Vec& x) {
  std::vector<std::int64_t> k;
  k.reserve(x.size());
  for (const auto& f : x) k.push_back(scaled_key(f));
  return k;
}

// The value 1, or nullopt when the system cannot represent it.
inline std::optional<Float> float_one(const FloatSystem& s) {
  if (s.n < 1) return std::nullopt;
  return Float{s, false, s.beta_pow_p() / std::uint64_t(s.beta), 1};
}

inline bool is_one(const Float& x) {
  return !x.neg && x.exp == 1 && x.sys.n >= 1 && x.mant == x.sys.beta_pow_p() / std::uint64_t(x.sys.beta);
}

// ReLU*(x) = min(max(0, x), 1)
inline Float relu_star(const Float& x) {
  if (x.neg || x.mant == 0) return float_zero(x.sys);
  if (x.exp < 1 || is_one(x)) return x;
  return *float_one(x.sys);
}

struct RSimpleParams {
  std::vector<Vec> C, A;  // d x d, row-major: C[k][l]
  std::optional<std::vector<Vec>> R;
  Vec b;
};

// Precomputed column-wise nonzeros. Each output coordinate accumulates
// the bias first, then the C, A and R terms in row order.
struct RSimpleKernel {
  struct Term {
    int k;
    Float w;
    int sign;  // +1 / -1 when w is exactly +-1, else 0
  };
  struct Column {
    Float bias;
    std::vector<Term> c, a, r;
  };
  std::vector<Column> cols;

  explicit RSimpleKernel(const RSimpleParams& p) {
    const std::size_t d = p.b.size();
    for (std::size_t l = 0; l < d; ++l) {
      Column col{p.b[l], {}, {}, {}};
      auto term = [](std::size_t k, const Float& w) {
        return Term{int(k), w, is_one(w) ? 1 : (is_one(negate(w)) ? -1 : 0)};
      };
      for (std::size_t k = 0; k < d; ++k) {
        if (p.C[k][l].mant) col.c.push_back(term(k, p.C[k][l]));
        if (p.A[k][l].mant) col.a.push_back(term(k, p.A[k][l]));
        if (p.R && (*p.R)[k][l].mant) col.r.push_back(term(k, (*p.R)[k][l]));
      }
      cols.push_back(std::move(col));
    }
  }

  Vec apply(const Vec& x, const Vec& y, const Vec* z) const {
    Vec out;
    out.reserve(cols.size());
    auto term = [](const Float& v, const Term& t) {
      if (t.sign > 0) return v;
      if (t.sign < 0) return negate(v);
      return mul(v, t.w);
    };
    for (const auto& col : cols) {
      Float acc = col.bias;
      for (const auto& t : col.c) acc = add(acc, term(x[t.k], t));
      for (const auto& t : col.a) acc = add(acc, term(y[t.k], t));
      if (z)
        for (const auto& t : col.r) acc = add(acc, term((*z)[t.k], t));
      out.push_back(relu_star(acc));
    }
    return out;
  }
};

// Per-coordinate SUM_S over a multiset of vectors.
inline Vec aggregate_sum(const FloatSystem& s, int d, const std::vector<const Vec*>& vs) {
  Vec out = zero_vec(s, d);
  std::vector<Float> column;
  for (int i = 0; i < d; ++i) {
    column.clear();
    for (const Vec* v : vs)
      if ((*v)[i].mant) column.push_back((*v)[i]);
    if (column.size() == 1) out[i] = column[0];
    else if (column.size() > 1) out[i] = sum_sorted(s, column);
  }
  return out;
}

// General transition: x, the neighbour vectors, and (with a global readout)
// all vectors of the graph. Neighbour vectors are sorted and k-projected
// when a bound is declared.
using GnnDelta = std::function<Vec(const Vec& x, const std::vector<const Vec*>& local,
                                   const std::vector<const Vec*>* all)>;

struct GnnTransition {
  std::optional<RSimpleParams> rsimple;
  GnnDelta delta;
  std::optional<int> bound;
  bool global = false;
};

// Accepting feature vectors. Either an explicit finite set, or the
// structural test "some coordinate in any_of is 1" combined with a gate
// coordinate: gate must be 1 (require), or gate != 1 accepts outright
// (or_off).
struct GnnAccepting {
  enum class Gate { none, require, or_off };
  std::vector<Vec> vectors;
  bool structural = false;
  std::vector<int> any_of;
  int gate = -1;
  Gate gate_mode = Gate::none;
  int prefix = -1;  // explicit vectors compare only this many leading coordinates

  bool operator()(const Vec& v) const {
    if (!structural) {
      for (const auto& a : vectors) {
        if (prefix < 0 && a == v) return true;
        if (prefix >= 0 && std::equal(a.begin(), a.end(), v.begin(), v.begin() + prefix)) return true;
      }
      return false;
    }
    bool gate_on = gate >= 0 && is_one(v[gate]);
    if (gate_mode == Gate::or_off && !gate_on) return true;
    if (gate_mode == Gate::require && !gate_on) return false;
    for (int i : any_of)
      if (is_one(v[i])) return true;
    return false;
  }
};

struct GnnF {
  FloatSystem system{1, 1, 2};
  int dim = 0;
  std::vector<std::string> pi;
  std::vector<Vec> init;  // indexed by label mask
  GnnTransition transition;
  GnnAccepting accepting;

  bool is_rsimple() const { return transition.rsimple.has_value(); }

  void validate() const {
    if (dim < 1) throw invalid_error("GNN dimension must be positive");
    if (init.size() != (std::size_t(1) << pi.size())) throw invalid_error("init table must cover every label subset");
    for (const auto& v : init) {
      if (int(v.size()) != dim) throw invalid_error("init vector has the wrong dimension");
      for (const auto& f : v)
        if (!(f.sys == system)) throw invalid_error("init vector outside the float system");
    }
    if (transition.rsimple) {
      const auto& p = *transition.rsimple;
      auto check = [&](const std::vector<Vec>& m) {
        if (int(m.size()) != dim) throw invalid_error("matrix has the wrong shape");
        for (const auto& row : m)
          if (int(row.size()) != dim) throw invalid_error("matrix has the wrong shape");
      };
      check(p.C);
      check(p.A);
      if (p.R) check(*p.R);
      if (int(p.b.size()) != dim) throw invalid_error("bias has the wrong dimension");
    } else if (!transition.delta) {
      throw invalid_error("GNN has no transition");
    }
    for (int i : accepting.any_of)
      if (i < 0 || i >= dim) throw invalid_error("accepting coordinate out of range");
    if (accepting.gate >= dim) throw invalid_error("accepting gate out of range");
  }
};

struct GnnConfiguration {
  int round = 0;
  std::vector<Vec> x;
};

namespace detail {

inline std::vector<const Vec*> sorted_multiset(std::vector<const Vec*> vs, std::optional<int> bound) {
  std::sort(vs.begin(), vs.end(), [](const Vec* a, const Vec* b) {
    return std::lexicographical_compare(a->begin(), a->end(), b->begin(), b->end(), FloatLess{});
  });
  if (!bound) return vs;
  std::vector<const Vec*> out;
  for (std::size_t i = 0; i < vs.size();) {
    std::size_t j = i;
    while (j < vs.size() && *vs[j] == *vs[i]) ++j;
    for (std::size_t c = i; c < j && int(c - i) < *bound; ++c) out.push_back(vs[c]);
    i = j;
  }
  return out;
}

}  // namespace detail

// Steps one synchronous round with a given transition. The kernel is
// optional and only used for R-simple transitions.
inline GnnConfiguration step_with(const FloatSystem& s, int dim, const GnnTransition& t, const RSimpleKernel* kernel,
                                  const LabeledGraph& g, const GnnConfiguration& c) {
  GnnConfiguration n;
  n.round = c.round + 1;
  n.x.resize(g.size());
  std::vector<const Vec*> all;
  for (const auto& v : c.x) all.push_back(&v);
  if (t.rsimple) {
    std::optional<RSimpleKernel> own;
    if (!kernel) kernel = &own.emplace(*t.rsimple);
    std::optional<Vec> z;
    if (t.rsimple->R) z = aggregate_sum(s, dim, all);
    for (int v = 0; v < g.size(); ++v) {
      std::vector<const Vec*> local;
      for (int u : g.out(v)) local.push_back(&c.x[u]);
      n.x[v] = kernel->apply(c.x[v], aggregate_sum(s, dim, local), z ? &*z : nullptr);
    }
    return n;
  }
  std::vector<const Vec*> all_sorted;
  if (t.global) all_sorted = detail::sorted_multiset(all, t.bound);
  for (int v = 0; v < g.size(); ++v) {
    std::vector<const Vec*> local;
    for (int u : g.out(v)) local.push_back(&c.x[u]);
    n.x[v] = t.delta(c.x[v], detail::sorted_multiset(local, t.bound), t.global ? &all_sorted : nullptr);
    if (int(n.x[v].size()) != dim) throw invalid_error("transition produced a vector of the wrong dimension");
  }
  return n;
}

inline GnnConfiguration initial_configuration(const GnnF& gnn, const LabeledGraph& g) {
  auto labels = labels_over(g, gnn.pi);
  GnnConfiguration c;
  for (int v = 0; v < g.size(); ++v) c.x.push_back(gnn.init[labels[v]]);
  return c;
}

inline GnnConfiguration step_gnn(const GnnF& gnn, const LabeledGraph& g, const GnnConfiguration& c) {
  return step_with(gnn.system, gnn.dim, gnn.transition, nullptr, g, c);
}

// ---------------------------------------------------------------------------
// GMSC -> R-simple

enum class RSimpleMode { standard, fixed_point, buchi, convergence };

struct RSimpleCompilation {
  GnnF gnn;
  GmscProgram balanced;
  std::vector<Formula> sub;  // SUB(balanced), coordinate order
  int depth = 0;             // D', the common body depth of balanced
  int n_sub = 0;             // N
  std::vector<int> head_coord;  // coordinate of each head of balanced
  // Source round n is read from head coordinates at GNN round
  // (n + 1) * period.
  int period() const { return depth + 1; }
};

inline int max_count(const GmscProgram& prog) {
  int k = 0;
  std::function<void(const Formula&)> walk = [&](const Formula& f) {
    if (f->op == Op::Dia || f->op == Op::Glob) k = std::max(k, f->k);
    if (f->a) walk(f->a);
    if (f->b) walk(f->b);
  };
  for (const auto& f : prog.iteration) walk(f);
  for (const auto& f : prog.terminal) walk(f);
  return k;
}

inline RSimpleCompilation compile_rsimple(const GmscProgram& prog, RSimpleMode mode = RSimpleMode::standard) {
  RSimpleCompilation out;
  out.balanced = balance(prog);
  const GmscProgram& G = out.balanced;
  out.depth = G.formula_depth();

  std::unordered_map<Formula, int, FormulaHash, FormulaEq> index;
  std::vector<Formula>& sub = out.sub;
  std::function<int(const Formula&)> visit = [&](const Formula& f) -> int {
    auto it = index.find(f);
    if (it != index.end()) return it->second;
    if (f->a) visit(f->a);
    if (f->b) visit(f->b);
    int id = int(sub.size());
    sub.push_back(f);
    index.emplace(f, id);
    return id;
  };
  std::vector<int> body_coord;
  for (const auto& f : G.iteration) body_coord.push_back(visit(f));
  for (const auto& h : G.heads) out.head_coord.push_back(visit(var(h)));
  const int N = int(sub.size());
  out.n_sub = N;
  const int D = out.depth;
  const int d = N + D + 1;
  const int last = d - 1;

  const int K = std::max(1, max_count(G));
  FloatSystem s(1, 1, std::max(2, K + 1));
  GnnF& gnn = out.gnn;
  gnn.system = s;
  gnn.dim = d;
  gnn.pi = G.pi;
  const Float one = from_int(s, 1), minus_one = from_int(s, -1);
  RSimpleParams p;
  p.C.assign(d, zero_vec(s, d));
  p.A.assign(d, zero_vec(s, d));
  p.b = zero_vec(s, d);
  if (G.global()) p.R = std::vector<Vec>(d, zero_vec(s, d));

  int top_coord = -1;
  for (int l = 0; l < N; ++l) {
    const Formula& f = sub[l];
    switch (f->op) {
      case Op::Top:
        top_coord = l;
        p.C[l][l] = one;
        break;
      case Op::Prop:
        p.C[l][l] = one;
        break;
      case Op::Var: {
        int h = G.head_index(f->name);
        p.C[body_coord[h]][l] = one;
        if (mode == RSimpleMode::convergence) {
          p.C[last][l] = one;
          p.b[l] = minus_one;
        }
        break;
      }
      case Op::Not:
        p.C[index.at(f->a)][l] = minus_one;
        p.b[l] = one;
        break;
      case Op::And: {
        int j = index.at(f->a), k = index.at(f->b);
        if (j == k) {
          p.C[j][l] = one;
        } else {
          p.C[j][l] = one;
          p.C[k][l] = one;
          p.b[l] = minus_one;
        }
        break;
      }
      case Op::Dia:
        p.A[index.at(f->a)][l] = one;
        p.b[l] = from_int(s, -f->k + 1);
        break;
      case Op::Glob:
        (*p.R)[index.at(f->a)][l] = one;
        p.b[l] = from_int(s, -f->k + 1);
        break;
    }
  }
  for (int l = N; l < last; ++l) p.C[l][l + 1] = one;
  if (mode == RSimpleMode::convergence) p.C[last][last] = one;
  else p.C[last][N] = one;

  std::vector<int> prop_coord(G.pi.size(), -1);
  for (int l = 0; l < N; ++l)
    if (sub[l]->op == Op::Prop)
      prop_coord[std::find(G.pi.begin(), G.pi.end(), sub[l]->name) - G.pi.begin()] = l;
  for (std::size_t P = 0; P < (std::size_t(1) << G.pi.size()); ++P) {
    Vec v = zero_vec(s, d);
    for (std::size_t q = 0; q < G.pi.size(); ++q)
      if (((P >> q) & 1u) && prop_coord[q] >= 0) v[prop_coord[q]] = one;
    if (top_coord >= 0) v[top_coord] = one;
    v[mode == RSimpleMode::convergence ? N : last] = one;
    gnn.init.push_back(v);
  }
  gnn.transition.rsimple = std::move(p);
  gnn.transition.global = G.global();

  gnn.accepting.structural = true;
  auto appointed = G.appointed_mask();
  for (std::size_t h = 0; h < G.heads.size(); ++h)
    if (appointed[h]) gnn.accepting.any_of.push_back(out.head_coord[h]);
  gnn.accepting.gate = last;
  gnn.accepting.gate_mode = mode == RSimpleMode::fixed_point ? GnnAccepting::Gate::or_off : GnnAccepting::Gate::require;
  gnn.validate();
  return out;
}

inline GnnF gmsc_to_rsimple(const GmscProgram& prog, RSimpleMode mode = RSimpleMode::standard) {
  return compile_rsimple(prog, mode).gnn;
}

// ---------------------------------------------------------------------------
// FCMPA -> one-hot GNN

// Dimension |Q|^2. State q_i is the unit vector e_i. The aggregate of a
// multiset M is the |Q| x |Q| 0/1 matrix (row-major) whose row i has its 1
// in column delta_M(q_i); combination reads row i.
struct OneHotEncoding {
  int states = 0;
  int dim() const { return states * states; }
};

inline int decode_one_hot(const Vec& x, int states) {
  int found = -1;
  for (int i = 0; i < int(x.size()); ++i) {
    if (x[i].mant == 0) continue;
    if (!is_one(x[i]) || found >= 0 || i >= states) return -1;
    found = i;
  }
  return found;
}

inline GnnF fcmpa_to_onehot_gnn(const Fcmpa& a, const FloatSystem& s = FloatSystem(1, 1, 2)) {
  const int n = a.num_states;
  if (n < 1) throw invalid_error("automaton has no states");
  if (double(n) * n > 1e6) throw guard_error("one-hot dimension too large");
  GnnF gnn;
  gnn.system = s;
  gnn.dim = n * n;
  gnn.pi = a.pi;
  if (!float_one(s)) throw invalid_error("float system cannot represent 1");
  const Float one = *float_one(s);
  auto unit = [s, n, one](int i) {
    Vec v = zero_vec(s, n * n);
    v[i] = one;
    return v;
  };
  for (int q : a.init) gnn.init.push_back(unit(q));
  auto shared = std::make_shared<Fcmpa>(a);
  auto decode_multiset = [n](const std::vector<const Vec*>& vs) {
    std::vector<int> states;
    for (const Vec* v : vs) {
      int q = decode_one_hot(*v, n);
      if (q < 0) return std::optional<std::vector<int>>{};
      states.push_back(q);
    }
    return std::optional<std::vector<int>>{states};
  };
  // AGG: d_M as a matrix over Q x Q.
  auto agg = [shared, n, unit, decode_multiset](const std::vector<const Vec*>& local,
                                                const std::vector<const Vec*>* all) -> std::optional<Vec> {
    auto ls = decode_multiset(local);
    if (!ls) return std::nullopt;
    StateMultiset global_m;
    if (all) {
      auto gs = decode_multiset(*all);
      if (!gs) return std::nullopt;
      global_m = make_state_multiset(*gs, shared->bound);
    }
    StateMultiset m = make_state_multiset(*ls, shared->bound);
    Vec d = unit(0);
    d[0] = float_zero(d[0].sys);
    for (int i = 0; i < n; ++i) d[std::size_t(i) * n + shared->next(i, m, global_m)] = from_int(d[0].sys, 1);
    return d;
  };
  // COM(d_i, d_M) = d_j iff delta_M(q_i) = q_j; other inputs are left fixed.
  gnn.transition.delta = [agg, n, unit](const Vec& x, const std::vector<const Vec*>& local,
                                        const std::vector<const Vec*>* all) -> Vec {
    int i = decode_one_hot(x, n);
    if (i < 0) return x;
    auto dm = agg(local, all);
    if (!dm) return x;
    for (int j = 0; j < n; ++j)
      if (is_one((*dm)[std::size_t(i) * n + j])) return unit(j);
    return x;
  };
  gnn.transition.global = a.global;
  gnn.accepting.structural = true;
  for (int q = 0; q < n; ++q)
    if (a.accepting[q]) gnn.accepting.any_of.push_back(q);
  gnn.validate();
  return gnn;
}

// ---------------------------------------------------------------------------
// N-layer GNNs

struct NLayerGnn {
  FloatSystem system{1, 1, 2};
  int dim = 0;
  std::vector<std::string> pi;
  std::vector<Vec> init;
  std::vector<GnnTransition> layers;
  GnnAccepting accepting;

  int num_layers() const { return int(layers.size()); }
  void validate() const {
    if (layers.empty()) throw invalid_error("N-layer GNN needs at least one layer");
    if (dim < 1) throw invalid_error("GNN dimension must be positive");
    if (init.size() != (std::size_t(1) << pi.size())) throw invalid_error("init table must cover every label subset");
  }
};

// Layer min(t+1, N) computes round t+1 from round t.
inline GnnConfiguration step_nlayer(const NLayerGnn& g, const LabeledGraph& graph, const GnnConfiguration& c) {
  const auto& layer = g.layers[std::min<std::size_t>(c.round, g.layers.size() - 1)];
  return step_with(g.system, g.dim, layer, nullptr, graph, c);
}

// Dimension d + N. The last N coordinates are a one-hot clock: slot t+1 at
// round t for t < N, saturating at slot N. Layer i runs while slot i is
// set. Acceptance is meant to be judged at round N.
inline GnnF nlayer_to_constant(const NLayerGnn& g) {
  g.validate();
  const int N = g.num_layers();
  const int d = g.dim;
  const FloatSystem s = g.system;
  GnnF out;
  out.system = s;
  out.dim = d + N;
  out.pi = g.pi;
  const Float one = from_int(s, 1);
  for (const auto& v : g.init) {
    Vec w = v;
    w.resize(std::size_t(d + N), float_zero(s));
    w[d] = one;
    out.init.push_back(w);
  }
  auto layers = std::make_shared<std::vector<GnnTransition>>(g.layers);
  auto kernels = std::make_shared<std::vector<std::optional<RSimpleKernel>>>();
  bool global = false;
  for (const auto& l : g.layers) {
    kernels->push_back(l.rsimple ? std::optional<RSimpleKernel>(RSimpleKernel(*l.rsimple)) : std::nullopt);
    global = global || l.global || (l.rsimple && l.rsimple->R);
  }
  out.transition.global = global;
  out.transition.delta = [layers, kernels, s, d, N, one](const Vec& x, const std::vector<const Vec*>& local,
                                                         const std::vector<const Vec*>* all) -> Vec {
    int slot = 0;
    for (int i = 0; i < N; ++i)
      if (is_one(x[d + i])) slot = i;
    auto head = [d](const Vec& v) { return Vec(v.begin(), v.begin() + d); };
    Vec xh = head(x);
    std::vector<Vec> lh, ah;
    for (const Vec* v : local) lh.push_back(head(*v));
    if (all)
      for (const Vec* v : *all) ah.push_back(head(*v));
    std::vector<const Vec*> lp, ap;
    for (const auto& v : lh) lp.push_back(&v);
    for (const auto& v : ah) ap.push_back(&v);
    const auto& layer = (*layers)[slot];
    Vec r;
    if (layer.rsimple) {
      std::optional<Vec> z;
      if (layer.rsimple->R) z = aggregate_sum(s, d, ap);
      r = (*kernels)[slot]->apply(xh, aggregate_sum(s, d, lp), z ? &*z : nullptr);
    } else {
      auto ls = detail::sorted_multiset(lp, layer.bound);
      auto as = detail::sorted_multiset(ap, layer.bound);
      r = layer.delta(xh, ls, layer.global ? &as : nullptr);
    }
    r.resize(std::size_t(d + N), float_zero(s));
    r[d + std::min(slot + 1, N - 1)] = one;
    return r;
  };
  out.accepting = g.accepting;
  out.accepting.prefix = d;
  out.validate();
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline nlohmann::json vec_json(const Vec& v) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& f : v) a.push_back(to_literal(f));
  return a;
}

inline Vec vec_from_json(const FloatSystem& s, const nlohmann::json& j, int d) {
  if (!j.is_array() || int(j.size()) != d) throw parse_error("vector of the wrong length");
  Vec v;
  for (const auto& e : j) {
    std::string t = e.is_string() ? e.get<std::string>() : e.dump();
    bool literal = t.size() > 2 && (t[0] == '+' || t[0] == '-') && t.find('e') != std::string::npos;
    if (literal) {
      v.push_back(parse_literal(s, t));
      continue;
    }
    Float f = round(s, parse_rational(t));
    if (to_rational(f) != parse_rational(t))
      throw parse_error("value '" + t + "' is not representable in " + s.spec());
    v.push_back(f);
  }
  return v;
}

}  // namespace detail

inline nlohmann::json gnn_to_json(const GnnF& g) {
  if (!g.transition.rsimple) throw invalid_error("only R-simple GNNs can be exported");
  if (!g.accepting.structural && g.accepting.vectors.empty() && !g.accepting.any_of.empty())
    throw invalid_error("unsupported accepting descriptor");
  nlohmann::json j;
  j["kind"] = "rsimple";
  j["system"] = g.system.spec();
  j["pi"] = g.pi;
  j["dim"] = g.dim;
  j["init"] = nlohmann::json::array();
  for (std::size_t P = 0; P < g.init.size(); ++P) {
    std::vector<std::string> ls;
    for (std::size_t q = 0; q < g.pi.size(); ++q)
      if ((P >> q) & 1u) ls.push_back(g.pi[q]);
    j["init"].push_back({{"labels", ls}, {"vector", detail::vec_json(g.init[P])}});
  }
  const auto& p = *g.transition.rsimple;
  auto mat = [](const std::vector<Vec>& m) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& row : m) a.push_back(detail::vec_json(row));
    return a;
  };
  j["C"] = mat(p.C);
  j["A"] = mat(p.A);
  if (p.R) j["R"] = mat(*p.R);
  j["b"] = detail::vec_json(p.b);
  nlohmann::json acc;
  if (g.accepting.structural) {
    acc["any_of"] = g.accepting.any_of;
    if (g.accepting.gate >= 0) {
      acc["gate"] = g.accepting.gate;
      acc["gate_mode"] = g.accepting.gate_mode == GnnAccepting::Gate::or_off ? "or-off" : "require";
    }
  } else {
    acc["vectors"] = nlohmann::json::array();
    for (const auto& v : g.accepting.vectors) acc["vectors"].push_back(detail::vec_json(v));
  }
  j["accepting"] = acc;
  return j;
}

inline GnnF parse_gnn(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("malformed GNN JSON: ") + e.what());
  }
  try {
    GnnF g;
    g.system = FloatSystem::parse(j.at("system").get<std::string>());
    g.pi = j.value("pi", std::vector<std::string>{});
    g.dim = j.at("dim").get<int>();
    if (g.dim < 1 || g.dim > 4096) throw parse_error("GNN dimension out of range");
    const int d = g.dim;
    g.init.assign(std::size_t(1) << g.pi.size(), Vec{});
    for (const auto& e : j.at("init")) {
      LabelMask m = 0;
      for (const auto& l : e.at("labels")) {
        auto it = std::find(g.pi.begin(), g.pi.end(), l.get<std::string>());
        if (it == g.pi.end()) throw parse_error("init label outside pi");
        m |= LabelMask(1) << (it - g.pi.begin());
      }
      g.init[m] = detail::vec_from_json(g.system, e.at("vector"), d);
    }
    for (const auto& v : g.init)
      if (v.empty()) throw parse_error("init table must cover every label subset");
    auto mat = [&](const nlohmann::json& m) {
      if (!m.is_array() || int(m.size()) != d) throw parse_error("matrix has the wrong shape");
      std::vector<Vec> r;
      for (const auto& row : m) r.push_back(detail::vec_from_json(g.system, row, d));
      return r;
    };
    RSimpleParams p;
    p.C = mat(j.at("C"));
    p.A = mat(j.at("A"));
    if (j.contains("R")) p.R = mat(j.at("R"));
    p.b = detail::vec_from_json(g.system, j.at("b"), d);
    g.transition.global = p.R.has_value();
    g.transition.rsimple = std::move(p);
    const auto& acc = j.at("accepting");
    if (acc.contains("vectors")) {
      for (const auto& v : acc.at("vectors")) g.accepting.vectors.push_back(detail::vec_from_json(g.system, v, d));
    } else {
      g.accepting.structural = true;
      g.accepting.any_of = acc.at("any_of").get<std::vector<int>>();
      if (acc.contains("gate")) {
        g.accepting.gate = acc.at("gate").get<int>();
        std::string mode = acc.value("gate_mode", "require");
        if (mode == "require") g.accepting.gate_mode = GnnAccepting::Gate::require;
        else if (mode == "or-off") g.accepting.gate_mode = GnnAccepting::Gate::or_off;
        else throw parse_error("unknown gate mode '" + mode + "'");
      }
    }
    g.validate();
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("malformed GNN JSON: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::invalid) throw parse_error(e.what());
    throw;
  }
}

}  // namespace gnnlogic
