#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "gnnlogic/error.hpp"
#include "gnnlogic/formula.hpp"
#include "gnnlogic/gmsc.hpp"
#include "gnnlogic/graph.hpp"
#include "gnnlogic/types.hpp"

namespace gnnlogic {

// Sorted (state, count) pairs with counts >= 1.
using StateMultiset = std::vector<std::pair<int, int>>;

inline StateMultiset make_state_multiset(std::vector<int> states, std::optional<int> bound) {
  std::sort(states.begin(), states.end());
  StateMultiset m;
  for (std::size_t i = 0; i < states.size();) {
    std::size_t j = i;
    while (j < states.size() && states[j] == states[i]) ++j;
    int c = int(j - i);
    if (bound) c = std::min(c, *bound);
    if (c > 0) m.emplace_back(states[i], c);
    i = j;
  }
  return m;
}

inline StateMultiset k_project(const StateMultiset& m, int k) {
  StateMultiset r;
  for (auto [q, c] : m)
    if (std::min(c, k) > 0) r.emplace_back(q, std::min(c, k));
  return r;
}

// Finite counting message-passing automaton over Pi, optionally with a
// global readout. The transition is a callback; table-form automata wrap a
// dense table in one. States are 0..num_states-1.
struct Fcmpa {
  using Transition = std::function<int(int q, const StateMultiset& local, const StateMultiset& global)>;

  std::vector<std::string> pi;
  int num_states = 0;
  std::function<std::string(int)> state_name;
  std::vector<int> init;  // indexed by label mask over pi
  std::optional<int> bound;
  bool global = false;
  std::vector<bool> accepting;
  Transition transition;

  std::string name_of(int q) const { return state_name ? state_name(q) : "q" + std::to_string(q); }

  int next(int q, const StateMultiset& local, const StateMultiset& global_m) const {
    int r = transition(q, local, global_m);
    if (r < 0 || r >= num_states) throw invalid_error("transition left the state set");
    return r;
  }
};

// Multisets over n states with counts in [0..k], as mixed-radix indices.
inline double multiset_space(int n, int k) { return std::pow(double(k + 1), double(n)); }

inline std::string space_text(double sp) {
  std::ostringstream os;
  if (sp < 1e15) os << std::fixed << std::setprecision(0) << sp;
  else os << std::setprecision(3) << sp;
  return os.str();
}

inline std::size_t multiset_index(const StateMultiset& m, int k) {
  std::size_t idx = 0, w = 1;
  int at = 0;
  for (auto [q, c] : m) {
    for (; at < q; ++at) w *= std::size_t(k + 1);
    idx += w * std::size_t(std::min(c, k));
  }
  return idx;
}

inline StateMultiset multiset_from_index(std::size_t idx, int n, int k) {
  StateMultiset m;
  for (int q = 0; q < n; ++q) {
    int c = int(idx % std::size_t(k + 1));
    idx /= std::size_t(k + 1);
    if (c) m.emplace_back(q, c);
  }
  return m;
}

// Dense table over (q, local[, global]) for bounded automata with few states.
struct TransitionTable {
  int num_states = 0;
  int k = 1;
  bool global = false;
  std::vector<int> next;  // -1 = missing

  std::size_t space() const {
    std::size_t s = 1;
    for (int i = 0; i < num_states; ++i) s *= std::size_t(k + 1);
    return s;
  }
  std::size_t slot(int q, const StateMultiset& local, const StateMultiset& glob) const {
    std::size_t sp = space();
    std::size_t i = std::size_t(q) * sp + multiset_index(local, k);
    if (global) i = i * sp + multiset_index(glob, k);
    return i;
  }
};

enum class DefaultRule { none, stay, state };

// Builds a table-form automaton. Missing entries are rejected unless a
// default rule completes them.
inline Fcmpa make_table_fcmpa(std::vector<std::string> pi, std::vector<std::string> names, std::vector<int> init,
                              int k, bool global, std::vector<bool> accepting,
                              const std::vector<std::tuple<int, StateMultiset, StateMultiset, int>>& entries,
                              DefaultRule rule = DefaultRule::none, int default_state = 0) {
  const int n = int(names.size());
  if (n == 0) throw invalid_error("automaton needs at least one state");
  if (k < 1) throw invalid_error("bound must be at least 1");
  if (init.size() != (std::size_t(1) << pi.size())) throw invalid_error("init table must cover every label subset");
  for (int q : init)
    if (q < 0 || q >= n) throw invalid_error("init maps to an unknown state");
  if (int(accepting.size()) != n) throw invalid_error("accepting flags must cover every state");
  double sp = multiset_space(n, k);
  if (sp * n * (global ? sp : 1.0) > 2e7) throw guard_error("transition table too large to materialize");
  auto table = std::make_shared<TransitionTable>();
  table->num_states = n;
  table->k = k;
  table->global = global;
  table->next.assign(std::size_t(n) * std::size_t(sp) * (global ? std::size_t(sp) : 1), -1);
  for (const auto& [q, local, glob, to] : entries) {
    if (q < 0 || q >= n || to < 0 || to >= n) throw invalid_error("transition entry mentions an unknown state");
    for (auto [s, c] : local)
      if (s < 0 || s >= n || c < 1 || c > k) throw invalid_error("transition multiset out of range");
    for (auto [s, c] : glob)
      if (s < 0 || s >= n || c < 1 || c > k) throw invalid_error("transition multiset out of range");
    if (!global && !glob.empty()) throw invalid_error("global multiset given for an automaton without readout");
    std::size_t slot = table->slot(q, local, glob);
    if (table->next[slot] >= 0 && table->next[slot] != to) throw invalid_error("conflicting transition entries");
    table->next[slot] = to;
  }
  std::size_t missing = 0;
  for (std::size_t i = 0; i < table->next.size(); ++i) {
    if (table->next[i] >= 0) continue;
    if (rule == DefaultRule::none) {
      ++missing;
      continue;
    }
    std::size_t per_state = table->next.size() / std::size_t(n);
    table->next[i] = rule == DefaultRule::stay ? int(i / per_state) : default_state;
  }
  if (missing) throw invalid_error("transition table is not total: " + std::to_string(missing) + " entries missing");
  Fcmpa a;
  a.pi = std::move(pi);
  a.num_states = n;
  auto shared_names = std::make_shared<std::vector<std::string>>(std::move(names));
  a.state_name = [shared_names](int q) { return (*shared_names)[q]; };
  a.init = std::move(init);
  a.bound = k;
  a.global = global;
  a.accepting = std::move(accepting);
  a.transition = [table](int q, const StateMultiset& local, const StateMultiset& glob) {
    return table->next[table->slot(q, local, glob)];
  };
  return a;
}

// ---------------------------------------------------------------------------
// Simulation

struct AutomatonConfiguration {
  int round = 0;
  std::vector<int> state;
  friend bool operator==(const AutomatonConfiguration&, const AutomatonConfiguration&) = default;
};

inline std::vector<LabelMask> labels_over(const LabeledGraph& g, const std::vector<std::string>& pi) {
  std::vector<int> map(g.pi().size(), -1);
  for (std::size_t i = 0; i < g.pi().size(); ++i) {
    auto it = std::find(pi.begin(), pi.end(), g.pi()[i]);
    if (it != pi.end()) map[i] = int(it - pi.begin());
  }
  std::vector<LabelMask> r(g.size(), 0);
  for (int v = 0; v < g.size(); ++v) {
    for (std::size_t i = 0; i < g.pi().size(); ++i) {
      if (!g.has_label(v, int(i))) continue;
      if (map[i] < 0) throw invalid_error("label '" + g.pi()[i] + "' outside the machine's alphabet");
      r[v] |= LabelMask(1) << map[i];
    }
  }
  return r;
}

inline AutomatonConfiguration initial_configuration(const Fcmpa& a, const LabeledGraph& g) {
  auto labels = labels_over(g, a.pi);
  AutomatonConfiguration c;
  for (int v = 0; v < g.size(); ++v) c.state.push_back(a.init[labels[v]]);
  return c;
}

inline AutomatonConfiguration step_automaton(const Fcmpa& a, const LabeledGraph& g, const AutomatonConfiguration& c) {
  if (int(c.state.size()) != g.size()) throw invalid_error("configuration does not match the graph");
  AutomatonConfiguration n;
  n.round = c.round + 1;
  n.state.resize(g.size());
  StateMultiset glob;
  if (a.global) glob = make_state_multiset(c.state, a.bound);
  std::vector<int> buf;
  for (int v = 0; v < g.size(); ++v) {
    buf.clear();
    for (int u : g.out(v)) buf.push_back(c.state[u]);
    n.state[v] = a.next(c.state[v], make_state_multiset(buf, a.bound), glob);
  }
  return n;
}

// ---------------------------------------------------------------------------
// GMSC[1] -> FCMPA

// States are subsets of Pi u T' encoded as bitmasks: bit i < |Pi| is the
// i-th proposition, bit |Pi| + j the j-th head.
struct ProgramAutomatonInfo {
  std::vector<std::string> pi;
  std::vector<std::string> heads;
  int head_bit(int j) const { return int(pi.size()) + j; }
};

namespace detail {

inline bool forces(const Formula& f, std::uint64_t q, const StateMultiset& local, const StateMultiset& glob,
                   const ProgramAutomatonInfo& info,
                   const std::unordered_map<const FormulaNode*, int>& atom) {
  switch (f->op) {
    case Op::Top:
      return true;
    case Op::Prop:
    case Op::Var:
      return (q >> atom.at(f.get())) & 1u;
    case Op::Not:
      return !forces(f->a, q, local, glob, info, atom);
    case Op::And:
      return forces(f->a, q, local, glob, info, atom) && forces(f->b, q, local, glob, info, atom);
    case Op::Dia:
    case Op::Glob: {
      const StateMultiset& m = f->op == Op::Dia ? local : glob;
      static const StateMultiset empty;
      long long sum = 0;
      for (auto [s, c] : m)
        if (forces(f->a, std::uint64_t(s), empty, empty, info, atom)) sum += c;
      return sum >= f->k;
    }
  }
  return false;
}

inline std::string subset_name(std::uint64_t q, const ProgramAutomatonInfo& info) {
  std::string s = "{";
  bool first = true;
  for (std::size_t i = 0; i < info.pi.size() + info.heads.size(); ++i) {
    if (!((q >> i) & 1u)) continue;
    s += (first ? "" : ",") + (i < info.pi.size() ? info.pi[i] : info.heads[i - info.pi.size()]);
    first = false;
  }
  return s + "}";
}

}  // namespace detail

inline Fcmpa gmsc1_to_fcmpa(const GmscProgram& prog) {
  prog.validate();
  if (!prog.is_normal_form()) throw invalid_error("program is not in normal form");
  const int bits = int(prog.pi.size() + prog.heads.size());
  if (bits > 22) throw guard_error("more than 22 propositions and heads: state space too large");
  auto info = std::make_shared<ProgramAutomatonInfo>(ProgramAutomatonInfo{prog.pi, prog.heads});
  auto atoms = std::make_shared<std::unordered_map<const FormulaNode*, int>>();
  auto bodies = std::make_shared<std::vector<Formula>>(prog.iteration);
  std::function<void(const Formula&)> index_atoms = [&](const Formula& f) {
    if (f->op == Op::Prop) {
      auto it = std::find(prog.pi.begin(), prog.pi.end(), f->name);
      (*atoms)[f.get()] = int(it - prog.pi.begin());
    } else if (f->op == Op::Var) {
      (*atoms)[f.get()] = info->head_bit(prog.head_index(f->name));
    }
    if (f->a) index_atoms(f->a);
    if (f->b) index_atoms(f->b);
  };
  for (const auto& f : prog.iteration) index_atoms(f);
  for (const auto& f : prog.terminal) index_atoms(f);

  Fcmpa a;
  a.pi = prog.pi;
  a.num_states = 1 << bits;
  a.state_name = [info](int q) { return detail::subset_name(std::uint64_t(q), *info); };
  a.bound = std::max(1, prog.width());
  a.global = prog.global();
  const std::uint64_t prop_mask = (std::uint64_t(1) << prog.pi.size()) - 1;
  static const StateMultiset empty;
  for (std::uint64_t P = 0; P <= prop_mask; ++P) {
    std::uint64_t q = P;
    for (std::size_t j = 0; j < prog.heads.size(); ++j)
      if (detail::forces(prog.terminal[j], P, empty, empty, *info, *atoms)) q |= std::uint64_t(1) << info->head_bit(int(j));
    a.init.push_back(int(q));
  }
  auto appointed = prog.appointed_mask();
  a.accepting.assign(a.num_states, false);
  for (int q = 0; q < a.num_states; ++q)
    for (std::size_t j = 0; j < prog.heads.size(); ++j)
      if (appointed[j] && ((q >> info->head_bit(int(j))) & 1)) a.accepting[q] = true;
  a.transition = [info, atoms, bodies, prop_mask](int q, const StateMultiset& local, const StateMultiset& glob) {
    std::uint64_t r = std::uint64_t(q) & prop_mask;
    for (std::size_t j = 0; j < bodies->size(); ++j)
      if (detail::forces((*bodies)[j], std::uint64_t(q), local, glob, *info, *atoms))
        r |= std::uint64_t(1) << info->head_bit(int(j));
    return int(r);
  };
  return a;
}

// Heads true in a state of gmsc1_to_fcmpa(prog), as a bitmask over prog.heads.
inline std::uint64_t heads_of_state(const GmscProgram& prog, int q) {
  return std::uint64_t(q) >> prog.pi.size();
}

// ---------------------------------------------------------------------------
// Compaction: restrict to the states reachable on some graph and renumber.

inline Fcmpa compact(const Fcmpa& a, double guard = 1e5) {
  if (!a.bound) throw invalid_error("compaction needs a bounded automaton");
  const int k = *a.bound;
  std::vector<int> reach;
  std::map<int, int> index;
  auto add = [&](int q) {
    if (index.emplace(q, int(reach.size())).second) reach.push_back(q);
  };
  for (int q : a.init) add(q);
  // Transitions from every reachable state over multisets of reachable states.
  for (;;) {
    std::size_t n = reach.size();
    double sp = multiset_space(int(n), k);
    if (sp > guard || sp * (a.global ? sp : 1.0) * double(n) > 50 * guard)
      throw guard_error("compaction guard exceeded: (k+1)^|R| = " + space_text(sp));
    std::size_t space = std::size_t(sp);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t li = 0; li < space; ++li) {
        StateMultiset local;
        for (auto [s, c] : multiset_from_index(li, int(n), k)) local.emplace_back(reach[s], c);
        std::sort(local.begin(), local.end());
        std::size_t gspace = a.global ? space : 1;
        for (std::size_t gi = 0; gi < gspace; ++gi) {
          StateMultiset glob;
          if (a.global) {
            for (auto [s, c] : multiset_from_index(gi, int(n), k)) glob.emplace_back(reach[s], c);
            std::sort(glob.begin(), glob.end());
          }
          add(a.next(reach[i], local, glob));
        }
      }
    }
    if (reach.size() == n) break;
  }
  // Renumber in ascending order of the original state ids.
  std::vector<int> sorted = reach;
  std::sort(sorted.begin(), sorted.end());
  std::map<int, int> renum;
  for (std::size_t i = 0; i < sorted.size(); ++i) renum[sorted[i]] = int(i);
  const int n = int(sorted.size());
  std::vector<std::string> names;
  std::vector<bool> acc;
  for (int q : sorted) {
    names.push_back(a.name_of(q));
    acc.push_back(a.accepting[q]);
  }
  std::vector<int> init;
  for (int q : a.init) init.push_back(renum[q]);
  std::vector<std::tuple<int, StateMultiset, StateMultiset, int>> entries;
  std::size_t space = std::size_t(multiset_space(n, k));
  for (int i = 0; i < n; ++i) {
    for (std::size_t li = 0; li < space; ++li) {
      StateMultiset local = multiset_from_index(li, n, k);
      StateMultiset orig_local;
      for (auto [s, c] : local) orig_local.emplace_back(sorted[s], c);
      std::size_t gspace = a.global ? space : 1;
      for (std::size_t gi = 0; gi < gspace; ++gi) {
        StateMultiset glob, orig_glob;
        if (a.global) {
          glob = multiset_from_index(gi, n, k);
          for (auto [s, c] : glob) orig_glob.emplace_back(sorted[s], c);
        }
        entries.emplace_back(i, local, glob, renum.at(a.next(sorted[i], orig_local, orig_glob)));
      }
    }
  }
  return make_table_fcmpa(a.pi, names, init, k, a.global, acc, entries);
}

// Original state ids of compact(a), in the new numbering order.
inline std::vector<int> compact_state_ids(const Fcmpa& a, double guard = 1e5) {
  if (!a.bound) throw invalid_error("compaction needs a bounded automaton");
  const int k = *a.bound;
  std::vector<int> reach;
  std::set<int> seen;
  for (int q : a.init)
    if (seen.insert(q).second) reach.push_back(q);
  for (;;) {
    std::size_t n = reach.size();
    double sp = multiset_space(int(n), k);
    if (sp > guard) throw guard_error("compaction guard exceeded");
    std::size_t space = std::size_t(sp);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t li = 0; li < space; ++li) {
        StateMultiset local;
        for (auto [s, c] : multiset_from_index(li, int(n), k)) local.emplace_back(reach[s], c);
        std::sort(local.begin(), local.end());
        std::size_t gspace = a.global ? space : 1;
        for (std::size_t gi = 0; gi < gspace; ++gi) {
          StateMultiset glob;
          if (a.global) {
            for (auto [s, c] : multiset_from_index(gi, int(n), k)) glob.emplace_back(reach[s], c);
            std::sort(glob.begin(), glob.end());
          }
          int t = a.next(reach[i], local, glob);
          if (seen.insert(t).second) reach.push_back(t);
        }
      }
    if (reach.size() == n) break;
  }
  std::sort(reach.begin(), reach.end());
  return reach;
}

// ---------------------------------------------------------------------------
// FCMPA -> GMSC

inline std::string state_head(int q) { return "Q" + std::to_string(q); }

inline Formula count_formula(bool global, int n, int k, const Formula& x) {
  if (n >= k) return global ? glob(k, x) : dia(k, x);
  return global ? glob_eq(n, x) : dia_eq(n, x);
}

// One head X_q per state: X_q(0) :- OR over label sets P with init(P) = q;
// X_q :- AND_{q'} (X_q' -> OR_{S in M_k(q', q)} phi_S).
inline GmscProgram fcmpa_to_gmsc(const Fcmpa& a, double guard = 1e5) {
  if (!a.bound) throw invalid_error("automaton is unbounded");
  const int k = *a.bound;
  const int n = a.num_states;
  double sp = multiset_space(n, k);
  if (sp > guard || (a.global && sp * sp > guard))
    throw guard_error("multiset enumeration guard exceeded: (k+1)^|Q| = " + space_text(sp));
  const std::size_t space = std::size_t(sp);
  GmscProgram prog;
  prog.pi = a.pi;
  for (int q = 0; q < n; ++q) prog.heads.push_back(state_head(q));
  std::vector<Formula> X;
  for (int q = 0; q < n; ++q) X.push_back(var(state_head(q)));

  std::vector<std::vector<Formula>> term(n);
  for (std::size_t P = 0; P < a.init.size(); ++P) term[a.init[P]].push_back(label_formula(LabelMask(P), a.pi));
  for (int q = 0; q < n; ++q) prog.terminal.push_back(disj_all(term[q]));

  auto phi_of = [&](const StateMultiset& m, bool global) {
    std::vector<int> counts(n, 0);
    for (auto [s, c] : m) counts[s] = c;
    std::vector<Formula> parts;
    for (int s = 0; s < n; ++s) parts.push_back(count_formula(global, counts[s], k, X[s]));
    return conj_all(parts);
  };
  std::vector<Formula> local_phi(space), glob_phi(a.global ? space : 0);
  for (std::size_t i = 0; i < space; ++i) local_phi[i] = phi_of(multiset_from_index(i, n, k), false);
  for (std::size_t i = 0; i < glob_phi.size(); ++i) glob_phi[i] = phi_of(multiset_from_index(i, n, k), true);

  // cases[q][q'] = disjuncts S with delta(q', S) = q
  std::vector<std::vector<std::vector<Formula>>> cases(n, std::vector<std::vector<Formula>>(n));
  for (int from = 0; from < n; ++from) {
    for (std::size_t li = 0; li < space; ++li) {
      StateMultiset local = multiset_from_index(li, n, k);
      if (!a.global) {
        cases[a.next(from, local, {})][from].push_back(local_phi[li]);
        continue;
      }
      for (std::size_t gi = 0; gi < space; ++gi) {
        StateMultiset glob_m = multiset_from_index(gi, n, k);
        cases[a.next(from, local, glob_m)][from].push_back(conj(local_phi[li], glob_phi[gi]));
      }
    }
  }
  for (int q = 0; q < n; ++q) {
    std::vector<Formula> clauses;
    for (int from = 0; from < n; ++from) clauses.push_back(implies(X[from], disj_all(cases[q][from])));
    prog.iteration.push_back(conj_all(clauses));
  }
  for (int q = 0; q < n; ++q)
    if (a.accepting[q]) prog.appointed.push_back(state_head(q));
  prog.validate();
  return prog;
}

// ---------------------------------------------------------------------------
// Counting type automaton

// delta(tau, N): labels of tau plus the k-projected multiset of child types.
inline TypePtr type_transition(const GradedType& tau, const BoundedMultiset<TypePtr, TypePtrLess>& children, int k) {
  auto t = std::make_shared<GradedType>();
  t->kind = GradedType::Kind::width_k;
  t->k = k;
  t->depth = tau.depth + 1;
  t->labels = tau.labels;
  t->pi = tau.pi;
  auto projected = k_project(children, k);
  for (const auto& [child, c] : projected.entries()) t->children.emplace_back(child, c);
  return t;
}

inline TypePtr simulate_type_automaton(const PointedGraph& pg, int k, int n) {
  if (k < 1) throw invalid_error("width must be at least 1");
  if (n < 0) throw invalid_error("negative round count");
  const LabeledGraph& g = *pg.graph;
  auto pi = std::make_shared<const std::vector<std::string>>(g.pi());
  std::vector<TypePtr> state;
  for (int v = 0; v < g.size(); ++v) {
    auto t = std::make_shared<GradedType>();
    t->kind = GradedType::Kind::width_k;
    t->k = k;
    t->labels = g.labels(v);
    t->pi = pi;
    state.push_back(t);
  }
  for (int r = 0; r < n; ++r) {
    std::vector<TypePtr> next(g.size());
    for (int v = 0; v < g.size(); ++v) {
      BoundedMultiset<TypePtr, TypePtrLess> m{k};
      for (int u : g.out(v)) m.add(state[u]);
      next[v] = type_transition(*state[v], m, k);
    }
    state = std::move(next);
  }
  return state[pg.point];
}

// Full-type variant used for the state-sharing checks: exact counts.
inline std::vector<TypePtr> full_type_states(const LabeledGraph& g, int n) {
  auto pi = std::make_shared<const std::vector<std::string>>(g.pi());
  std::vector<TypePtr> state;
  for (int v = 0; v < g.size(); ++v) state.push_back(detail::base_type(GradedType::Kind::full, 0, g.labels(v), pi));
  for (int r = 1; r <= n; ++r) {
    std::vector<TypePtr> next(g.size());
    for (int v = 0; v < g.size(); ++v) {
      std::vector<TypePtr> ns;
      for (int u : g.out(v)) ns.push_back(state[u]);
      next[v] = detail::combine_type(GradedType::Kind::full, 0, g.labels(v), r, ns, pi);
    }
    state = std::move(next);
  }
  return state;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json multiset_json(const Fcmpa& a, const StateMultiset& m) {
  nlohmann::json j = nlohmann::json::object();
  for (auto [s, c] : m) j[a.name_of(s)] = c;
  return j;
}

// Enumerates the full table; compact() first for translated automata.
inline nlohmann::json fcmpa_to_json(const Fcmpa& a, double guard = 2e6) {
  if (!a.bound) throw invalid_error("only bounded automata can be exported");
  const int k = *a.bound;
  double sp = multiset_space(a.num_states, k);
  if (sp * a.num_states * (a.global ? sp : 1.0) > guard) throw guard_error("transition table too large to export");
  nlohmann::json j;
  j["kind"] = "fcmpa";
  j["pi"] = a.pi;
  std::vector<std::string> names;
  for (int q = 0; q < a.num_states; ++q) names.push_back(a.name_of(q));
  j["states"] = names;
  j["bound"] = k;
  j["global"] = a.global;
  j["init"] = nlohmann::json::array();
  for (std::size_t P = 0; P < a.init.size(); ++P) {
    std::vector<std::string> ls;
    for (std::size_t p = 0; p < a.pi.size(); ++p)
      if ((P >> p) & 1u) ls.push_back(a.pi[p]);
    j["init"].push_back({{"labels", ls}, {"state", names[a.init[P]]}});
  }
  std::vector<std::string> acc;
  for (int q = 0; q < a.num_states; ++q)
    if (a.accepting[q]) acc.push_back(names[q]);
  j["accepting"] = acc;
  j["transitions"] = nlohmann::json::array();
  std::size_t space = std::size_t(sp);
  for (int q = 0; q < a.num_states; ++q)
    for (std::size_t li = 0; li < space; ++li) {
      StateMultiset local = multiset_from_index(li, a.num_states, k);
      std::size_t gspace = a.global ? space : 1;
      for (std::size_t gi = 0; gi < gspace; ++gi) {
        StateMultiset glob_m = a.global ? multiset_from_index(gi, a.num_states, k) : StateMultiset{};
        nlohmann::json e{{"state", names[q]}, {"multiset", multiset_json(a, local)}};
        if (a.global) e["global"] = multiset_json(a, glob_m);
        e["next"] = names[a.next(q, local, glob_m)];
        j["transitions"].push_back(e);
      }
    }
  return j;
}

inline Fcmpa parse_fcmpa(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("malformed automaton JSON: ") + e.what());
  }
  try {
    std::vector<std::string> pi = j.value("pi", std::vector<std::string>{});
    auto names = j.at("states").get<std::vector<std::string>>();
    std::map<std::string, int> idx;
    for (std::size_t i = 0; i < names.size(); ++i)
      if (!idx.emplace(names[i], int(i)).second) throw parse_error("duplicate state '" + names[i] + "'");
    auto state_of = [&](const nlohmann::json& v) {
      if (v.is_number_integer()) {
        int q = v.get<int>();
        if (q < 0 || q >= int(names.size())) throw parse_error("unknown state index");
        return q;
      }
      auto it = idx.find(v.get<std::string>());
      if (it == idx.end()) throw parse_error("unknown state '" + v.get<std::string>() + "'");
      return it->second;
    };
    int k = j.at("bound").get<int>();
    bool global = j.value("global", false);
    std::vector<int> init(std::size_t(1) << pi.size(), -1);
    for (const auto& e : j.at("init")) {
      LabelMask m = 0;
      for (const auto& l : e.at("labels")) {
        auto it = std::find(pi.begin(), pi.end(), l.get<std::string>());
        if (it == pi.end()) throw parse_error("init label outside pi");
        m |= LabelMask(1) << (it - pi.begin());
      }
      init[m] = state_of(e.at("state"));
    }
    for (int q : init)
      if (q < 0) throw parse_error("init table must cover every label subset");
    std::vector<bool> acc(names.size(), false);
    for (const auto& s : j.at("accepting")) acc[state_of(s)] = true;
    auto ms = [&](const nlohmann::json& m) {
      std::vector<int> counts(names.size(), 0);
      for (auto it = m.begin(); it != m.end(); ++it) {
        int c = it.value().get<int>();
        if (c < 1) throw parse_error("multiset counts must be positive");
        counts[state_of(nlohmann::json(it.key()))] += c;
      }
      StateMultiset r;
      for (std::size_t s = 0; s < counts.size(); ++s)
        if (counts[s] > 0) r.emplace_back(int(s), std::min(counts[s], k));
      return r;
    };
    std::vector<std::tuple<int, StateMultiset, StateMultiset, int>> entries;
    for (const auto& e : j.value("transitions", nlohmann::json::array())) {
      entries.emplace_back(state_of(e.at("state")), ms(e.at("multiset")),
                           e.contains("global") ? ms(e.at("global")) : StateMultiset{}, state_of(e.at("next")));
    }
    DefaultRule rule = DefaultRule::none;
    int def = 0;
    if (j.contains("default")) {
      const auto& d = j.at("default");
      if (d.is_string() && d.get<std::string>() == "stay") {
        rule = DefaultRule::stay;
      } else {
        rule = DefaultRule::state;
        def = state_of(d);
      }
    }
    return make_table_fcmpa(pi, names, init, k, global, acc, entries, rule, def);
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("malformed automaton JSON: ") + e.what());
  }
}

}  // namespace gnnlogic
