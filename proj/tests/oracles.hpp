#pragma once

// Independent reference implementations used to check the library.

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "gnnlogic/gnnlogic.hpp"

namespace oracle {

using Q = boost::multiprecision::cpp_rational;
using Z = boost::multiprecision::cpp_int;

// Every non-negative value m * beta^(e-p) with 0 <= m < beta^p and
// -n <= e <= n, sorted, with the integer significand of its normalized
// representation.
struct Grid {
  std::vector<Q> values;
  std::vector<Z> significand;
  int beta = 2;
};

inline Grid grid(int p, int n, int beta) {
  std::map<Q, Z> seen;
  Z top = 1;
  for (int i = 0; i < p; ++i) top *= beta;
  for (int e = n; e >= -n; --e) {
    Q scale = 1;
    for (int i = 0; i < std::abs(e - p); ++i) scale *= beta;
    if (e - p < 0) scale = 1 / scale;
    Z start = e == -n ? Z(0) : top / beta;
    for (Z m = start; m < top; ++m) seen.emplace(Q(m) * scale, m);
  }
  Grid g;
  g.beta = beta;
  for (auto& [v, m] : seen) {
    g.values.push_back(v);
    g.significand.push_back(m);
  }
  return g;
}

// Round half to the neighbour with even least digit; if both least digits
// are even (odd bases), to the even significand. Saturates at +-max.
inline Q round(const Grid& g, const Q& x) {
  if (x < 0) return -round(g, -x);
  if (x >= g.values.back()) return g.values.back();
  auto it = std::lower_bound(g.values.begin(), g.values.end(), x);
  if (*it == x) return x;
  std::size_t hi = std::size_t(it - g.values.begin()), lo = hi - 1;
  Q dl = x - g.values[lo], dh = g.values[hi] - x;
  if (dl < dh) return g.values[lo];
  if (dh < dl) return g.values[hi];
  bool lo_even = int(g.significand[lo] % g.beta) % 2 == 0;
  bool hi_even = int(g.significand[hi] % g.beta) % 2 == 0;
  if (lo_even != hi_even) return lo_even ? g.values[lo] : g.values[hi];
  return g.significand[lo] % 2 == 0 ? g.values[lo] : g.values[hi];
}

inline Q value(const gnnlogic::Float& f) {
  Q v = Q(Z(f.mant));
  int e = f.exp - f.sys.p;
  for (int i = 0; i < std::abs(e); ++i) {
    if (e > 0) v *= f.sys.beta;
    else v /= f.sys.beta;
  }
  return f.neg ? -v : v;
}

// Plain recursive GML semantics over a node set, with head predicates read
// from a caller-supplied table.
using VarTable = std::map<std::string, std::vector<bool>>;

inline bool holds(const gnnlogic::LabeledGraph& g, int v, const gnnlogic::Formula& f, const VarTable& vars = {}) {
  using gnnlogic::Op;
  switch (f->op) {
    case Op::Top:
      return true;
    case Op::Prop: {
      int p = g.prop_index(f->name);
      return p >= 0 && g.has_label(v, p);
    }
    case Op::Var:
      return vars.at(f->name)[v];
    case Op::Not:
      return !holds(g, v, f->a, vars);
    case Op::And:
      return holds(g, v, f->a, vars) && holds(g, v, f->b, vars);
    case Op::Dia: {
      int c = 0;
      for (int u : g.out(v)) c += holds(g, u, f->a, vars);
      return c >= f->k;
    }
    case Op::Glob: {
      int c = 0;
      for (int u = 0; u < g.size(); ++u) c += holds(g, u, f->a, vars);
      return c >= f->k;
    }
  }
  return false;
}

// Head truth tables of a program for rounds 0..rounds.
inline std::vector<VarTable> program_rounds(const gnnlogic::GmscProgram& prog, const gnnlogic::LabeledGraph& g,
                                            int rounds) {
  std::vector<VarTable> out;
  VarTable cur;
  for (std::size_t h = 0; h < prog.heads.size(); ++h) {
    std::vector<bool> t(g.size());
    for (int v = 0; v < g.size(); ++v) t[v] = holds(g, v, prog.terminal[h]);
    cur[prog.heads[h]] = t;
  }
  out.push_back(cur);
  for (int r = 1; r <= rounds; ++r) {
    VarTable next;
    for (std::size_t h = 0; h < prog.heads.size(); ++h) {
      std::vector<bool> t(g.size());
      for (int v = 0; v < g.size(); ++v) t[v] = holds(g, v, prog.iteration[h], cur);
      next[prog.heads[h]] = t;
    }
    cur = next;
    out.push_back(cur);
  }
  return out;
}

// Acceptance flags of a machine at rounds 0..rounds-1, by plain stepping.
inline std::vector<std::vector<bool>> flags(const gnnlogic::Machine& m, const gnnlogic::LabeledGraph& g, int rounds) {
  auto r = m.runner(g);
  std::vector<std::vector<bool>> out;
  for (int t = 0; t < rounds; ++t) {
    if (t) r->step();
    std::vector<bool> row(g.size());
    for (int v = 0; v < g.size(); ++v) row[v] = r->accepting(v);
    out.push_back(row);
  }
  return out;
}

// Classifier verdicts judged on the window [0, mu + 3 lambda).
inline bool window_verdict(const std::vector<std::vector<bool>>& f, int v, const std::string& kind, int mu, int lambda,
                           long long iter_round = -1) {
  int end = mu + 3 * lambda;
  if (kind == "standard") {
    for (int r = 0; r < end; ++r)
      if (f[r][v]) return true;
    return false;
  }
  if (kind == "fixed-point") {
    for (int r = mu; r < end; ++r)
      if (!f[r][v]) return false;
    return true;
  }
  if (kind == "buchi") {
    int hits = 0;
    for (int r = mu; r < end; ++r) hits += f[r][v];
    return hits >= 3;
  }
  if (kind == "graph-size") return f[std::size_t(iter_round)][v];
  return false;
}

// Number of pointed graphs with 1..n nodes over |Pi| = P labels.
inline std::uint64_t pointed_graph_count(int P, int n) {
  std::uint64_t total = 0;
  for (int k = 1; k <= n; ++k) total += std::uint64_t(k) << (k * k + P * k);
  return total;
}

}  // namespace oracle
