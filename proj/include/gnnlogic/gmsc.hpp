#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "gnnlogic/error.hpp"
#include "gnnlogic/formula.hpp"
#include "gnnlogic/graph.hpp"

namespace gnnlogic {

// GMSC program: one terminal clause X(0) :- phi and one iteration clause
// X :- psi per head, plus the appointed heads.
struct GmscProgram {
  std::vector<std::string> pi;
  std::vector<std::string> heads;
  std::vector<Formula> terminal;
  std::vector<Formula> iteration;
  std::vector<std::string> appointed;

  int head_index(const std::string& x) const {
    for (std::size_t i = 0; i < heads.size(); ++i)
      if (heads[i] == x) return int(i);
    return -1;
  }

  bool global() const {
    for (const auto& f : terminal)
      if (f->has_glob) return true;
    for (const auto& f : iteration)
      if (f->has_glob) return true;
    return false;
  }

  int modal_depth() const {
    int m = 0;
    for (const auto& f : terminal) m = std::max(m, f->modal_depth);
    for (const auto& f : iteration) m = std::max(m, f->modal_depth);
    return m;
  }

  int width() const {
    int w = 0;
    for (const auto& f : terminal) w = std::max(w, f->width);
    for (const auto& f : iteration) w = std::max(w, f->width);
    return w;
  }

  int formula_depth() const {
    int d = 0;
    for (const auto& f : terminal) d = std::max(d, f->formula_depth);
    for (const auto& f : iteration) d = std::max(d, f->formula_depth);
    return d;
  }

  bool is_normal_form() const {
    for (const auto& f : terminal)
      if (f->modal_depth != 0) return false;
    for (const auto& f : iteration)
      if (f->modal_depth > 1) return false;
    return true;
  }

  std::vector<bool> appointed_mask() const {
    std::vector<bool> m(heads.size(), false);
    for (const auto& a : appointed) m[head_index(a)] = true;
    return m;
  }

  void validate() const {
    if (terminal.size() != heads.size() || iteration.size() != heads.size())
      throw invalid_error("every head needs exactly one terminal and one iteration clause");
    std::set<std::string> seen;
    for (const auto& h : heads) {
      if (h.empty() || !std::isupper(static_cast<unsigned char>(h[0])))
        throw invalid_error("head predicate '" + h + "' must start with an uppercase letter");
      if (!seen.insert(h).second) throw invalid_error("duplicate head predicate '" + h + "'");
    }
    std::set<std::string> pis(pi.begin(), pi.end());
    if (pis.size() != pi.size()) throw invalid_error("duplicate proposition in alphabet");
    for (std::size_t i = 0; i < heads.size(); ++i) {
      if (terminal[i]->has_var) throw invalid_error("terminal clause of " + heads[i] + " mentions a head predicate");
      for (const auto* f : {&terminal[i], &iteration[i]}) {
        std::set<std::string> ps, vs;
        collect_symbols(*f, ps, vs);
        for (const auto& p : ps)
          if (!pis.count(p)) throw invalid_error("undeclared proposition '" + p + "'");
        for (const auto& v : vs)
          if (!seen.count(v)) throw invalid_error("undeclared head predicate '" + v + "'");
      }
    }
    for (const auto& a : appointed)
      if (!seen.count(a)) throw invalid_error("appointed predicate '" + a + "' is not a head");
  }
};

// ---------------------------------------------------------------------------
// Text form

// program = {rule} ["pi" ":" ids ";"] "appointed" ":" ids ";"
// rule    = ident "(0)" ":-" body ";" | ident ":-" body ";"
// Without a pi declaration the alphabet is the sorted set of propositions used.
inline GmscProgram parse_program(const std::string& text) {
  FormulaParser p(text);
  std::vector<std::string> order;
  std::map<std::string, Formula> term, iter;
  std::vector<std::string> appointed;
  std::vector<std::string> declared_pi;
  bool has_pi = false, has_appointed = false;
  auto expect = [&](const std::string& tok) {
    if (!p.match(tok)) throw p.err("expected '" + tok + "'");
  };
  auto read_list = [&](std::vector<std::string>& out, bool allow_empty) {
    if (allow_empty && p.match(";")) return;
    for (;;) {
      p.skip();
      out.push_back(p.read_ident());
      if (p.match(",")) continue;
      expect(";");
      return;
    }
  };
  for (;;) {
    p.skip();
    if (p.eof()) break;
    std::string id = p.read_ident();
    p.skip();
    if (id == "appointed" && p.peek(':')) {
      if (has_appointed) throw p.err("duplicate appointed declaration");
      has_appointed = true;
      expect(":");
      read_list(appointed, true);
      continue;
    }
    if (id == "pi" && p.peek(':')) {
      if (has_pi) throw p.err("duplicate pi declaration");
      has_pi = true;
      expect(":");
      read_list(declared_pi, true);
      continue;
    }
    if (!std::isupper(static_cast<unsigned char>(id[0]))) throw p.err("head predicate '" + id + "' must be uppercase");
    bool terminal_clause = false;
    if (p.match("(")) {
      expect("0");
      expect(")");
      terminal_clause = true;
    }
    expect(":-");
    Formula body = p.parse_body();
    expect(";");
    auto& target = terminal_clause ? term : iter;
    if (target.count(id)) throw p.err("duplicate " + std::string(terminal_clause ? "terminal" : "iteration") +
                                      " clause for " + id);
    if (terminal_clause && body->has_var) throw p.err("terminal clause of " + id + " mentions a head predicate");
    target[id] = body;
    if (std::find(order.begin(), order.end(), id) == order.end()) order.push_back(id);
  }
  if (!has_appointed) throw parse_error("missing appointed declaration");
  GmscProgram prog;
  prog.heads = order;
  for (const auto& h : order) {
    if (!term.count(h)) throw parse_error("missing terminal clause for " + h);
    if (!iter.count(h)) throw parse_error("missing iteration clause for " + h);
    prog.terminal.push_back(term[h]);
    prog.iteration.push_back(iter[h]);
  }
  prog.appointed = appointed;
  if (has_pi) {
    prog.pi = declared_pi;
  } else {
    std::set<std::string> ps;
    for (const auto& f : prog.terminal) {
      auto s = props_of(f);
      ps.insert(s.begin(), s.end());
    }
    for (const auto& f : prog.iteration) {
      auto s = props_of(f);
      ps.insert(s.begin(), s.end());
    }
    prog.pi.assign(ps.begin(), ps.end());
  }
  try {
    prog.validate();
  } catch (const Error& e) {
    throw parse_error(e.what());
  }
  return prog;
}

inline std::string program_to_string(const GmscProgram& prog) {
  std::string s;
  if (!prog.pi.empty()) {
    s += "pi: ";
    for (std::size_t i = 0; i < prog.pi.size(); ++i) s += (i ? ", " : "") + prog.pi[i];
    s += ";\n";
  } else {
    s += "pi: ;\n";
  }
  for (std::size_t i = 0; i < prog.heads.size(); ++i) {
    s += prog.heads[i] + "(0) :- " + to_string(prog.terminal[i]) + ";\n";
    s += prog.heads[i] + " :- " + to_string(prog.iteration[i]) + ";\n";
  }
  s += "appointed: ";
  for (std::size_t i = 0; i < prog.appointed.size(); ++i) s += (i ? ", " : "") + prog.appointed[i];
  return s + ";\n";
}

// ---------------------------------------------------------------------------
// Semantics

struct GmscConfiguration {
  int round = 0;
  int nodes = 0;
  std::vector<std::uint8_t> truth;  // truth[head * nodes + v]

  bool holds(int head, int v) const { return truth[std::size_t(head) * nodes + v] != 0; }
  friend bool operator==(const GmscConfiguration&, const GmscConfiguration&) = default;
};

// The program's bodies compiled into one DAG; shareable across graphs.
struct CompiledProgram {
  CompiledFormulas formulas;
  std::vector<int> terminal, iteration;

  explicit CompiledProgram(const GmscProgram& prog) : formulas(prog.pi, prog.heads) {
    for (const auto& f : prog.terminal) terminal.push_back(formulas.add(f));
    for (const auto& f : prog.iteration) iteration.push_back(formulas.add(f));
  }
};

// Steps configurations of a program on one graph.
class ProgramSimulator {
 public:
  ProgramSimulator(const GmscProgram& prog, const LabeledGraph& g)
      : ProgramSimulator(prog, std::make_shared<const CompiledProgram>(prog), g) {}

  ProgramSimulator(const GmscProgram& prog, std::shared_ptr<const CompiledProgram> compiled, const LabeledGraph& g)
      : prog_(prog), g_(g), compiled_(std::move(compiled)), ev_(compiled_->formulas, g) {
    for (const auto& p : g.pi())
      if (std::find(prog.pi.begin(), prog.pi.end(), p) == prog.pi.end())
        for (int v = 0; v < g.size(); ++v)
          if (g.has_label(v, g.prop_index(p))) throw invalid_error("label '" + p + "' outside program alphabet");
  }

  GmscConfiguration initial() {
    GmscConfiguration c{0, g_.size(), std::vector<std::uint8_t>(prog_.heads.size() * g_.size())};
    ev_.set_vars(nullptr);
    ev_.next_round();
    for (std::size_t h = 0; h < compiled_->terminal.size(); ++h)
      for (int v = 0; v < g_.size(); ++v) c.truth[h * g_.size() + v] = ev_.eval(compiled_->terminal[h], v);
    return c;
  }

  GmscConfiguration step(const GmscConfiguration& c) {
    if (c.nodes != g_.size() || c.truth.size() != prog_.heads.size() * g_.size())
      throw invalid_error("configuration does not match the graph");
    GmscConfiguration n{c.round + 1, c.nodes, std::vector<std::uint8_t>(c.truth.size())};
    ev_.set_vars(&c.truth);
    ev_.next_round();
    for (std::size_t h = 0; h < compiled_->iteration.size(); ++h)
      for (int v = 0; v < g_.size(); ++v) n.truth[h * g_.size() + v] = ev_.eval(compiled_->iteration[h], v);
    ev_.set_vars(nullptr);
    return n;
  }

 private:
  const GmscProgram& prog_;
  const LabeledGraph& g_;
  std::shared_ptr<const CompiledProgram> compiled_;
  Evaluator ev_;
};

inline GmscConfiguration initial_configuration(const GmscProgram& prog, const LabeledGraph& g) {
  ProgramSimulator s(prog, g);
  return s.initial();
}

inline GmscConfiguration step(const GmscProgram& prog, const LabeledGraph& g, const GmscConfiguration& c) {
  ProgramSimulator s(prog, g);
  return s.step(c);
}

// X^n by literal substitution; guarded on the size of the expanded tree.
inline Formula iteration_formula(const GmscProgram& prog, const std::string& x, int n, double guard = 1e5) {
  int hx = prog.head_index(x);
  if (hx < 0) throw invalid_error("unknown head predicate '" + x + "'");
  if (n < 0) throw invalid_error("negative round");
  std::vector<Formula> cur = prog.terminal;
  for (int r = 0; r < n; ++r) {
    std::unordered_map<std::string, Formula> sub;
    for (std::size_t i = 0; i < prog.heads.size(); ++i) sub[prog.heads[i]] = cur[i];
    std::vector<Formula> next;
    for (const auto& f : prog.iteration) {
      Formula g = substitute(f, sub);
      if (g->tree_size > guard)
        throw guard_error("iteration formula exceeds " + std::to_string(long(guard)) + " nodes");
      next.push_back(g);
    }
    cur = std::move(next);
  }
  if (cur[hx]->tree_size > guard) throw guard_error("iteration formula exceeds guard");
  return cur[hx];
}

// ---------------------------------------------------------------------------
// Normal form

namespace detail {

inline std::string fresh_name(const std::string& base, std::set<std::string>& used) {
  std::string n = base;
  while (used.count(n)) n += "_";
  used.insert(n);
  return n;
}

}  // namespace detail

// Equivalent program with terminal modal depth 0 and iteration modal depth
// at most 1. With M the largest modal depth of any body, an M-phase clock
// T_1..T_M gates one head per modal subformula of height h < M, updated in
// phase h and held otherwise; each original head is updated in phase M, so
// it holds X^n throughout period n. When some terminal body has positive
// modal depth, a startup period evaluates the terminal bodies first (Init)
// and X^n is then held throughout period n+1.
inline GmscProgram to_normal_form(const GmscProgram& prog) {
  prog.validate();
  if (prog.is_normal_form()) return prog;
  const int M = std::max(1, prog.modal_depth());
  bool startup = false;
  for (const auto& f : prog.terminal)
    if (f->modal_depth > 0) startup = true;

  std::set<std::string> used(prog.heads.begin(), prog.heads.end());
  GmscProgram out;
  out.pi = prog.pi;
  out.appointed = prog.appointed;

  std::vector<std::string> clock;
  if (M > 1)
    for (int j = 1; j <= M; ++j) clock.push_back(detail::fresh_name("T_" + std::to_string(j), used));
  auto phase = [&](int h) { return M > 1 ? var(clock[h - 1]) : top(); };
  std::string init_name = startup ? detail::fresh_name("Init", used) : "";

  // Modal subformula -> stratum head, shared across bodies.
  std::unordered_map<Formula, std::string, FormulaHash, FormulaEq> stratum;
  std::vector<std::pair<std::string, Formula>> strata;  // name, hatted update body (a single modality)
  std::vector<int> stratum_height;
  std::map<std::pair<std::string, int>, int> counter;

  // Replaces every modal subformula of height < limit by its stratum head and
  // returns the result; modalities of height >= limit keep their operator.
  std::function<Formula(const Formula&, const std::string&, int)> hat;
  hat = [&](const Formula& f, const std::string& owner, int limit) -> Formula {
    switch (f->op) {
      case Op::Top:
      case Op::Prop:
      case Op::Var:
        return f;
      case Op::Not:
        return neg(hat(f->a, owner, limit));
      case Op::And:
        return conj(hat(f->a, owner, limit), hat(f->b, owner, limit));
      case Op::Dia:
      case Op::Glob: {
        int h = f->modal_depth;
        Formula inner = hat(f->a, owner, h);
        Formula one = f->op == Op::Dia ? dia(f->k, inner) : glob(f->k, inner);
        if (h >= limit) return one;
        auto it = stratum.find(f);
        if (it != stratum.end()) return var(it->second);
        int idx = ++counter[{owner, h}];
        std::string name = detail::fresh_name(owner + "_" + std::to_string(h) + "_" + std::to_string(idx), used);
        stratum.emplace(f, name);
        strata.emplace_back(name, one);
        stratum_height.push_back(h);
        return var(name);
      }
    }
    return f;
  };

  std::vector<Formula> hatted_term(prog.heads.size()), hatted_iter(prog.heads.size());
  for (std::size_t i = 0; i < prog.heads.size(); ++i) {
    hatted_term[i] = hat(prog.terminal[i], prog.heads[i], M);
    hatted_iter[i] = hat(prog.iteration[i], prog.heads[i], M);
  }

  auto held = [&](int h, const Formula& update, const std::string& self) {
    if (M == 1) return update;
    return disj(conj(phase(h), update), conj(neg(phase(h)), var(self)));
  };

  for (std::size_t i = 0; i < prog.heads.size(); ++i) {
    const std::string& x = prog.heads[i];
    out.heads.push_back(x);
    if (!startup) {
      out.terminal.push_back(prog.terminal[i]);
      out.iteration.push_back(held(M, hatted_iter[i], x));
    } else {
      out.terminal.push_back(bot());
      Formula init = var(init_name);
      Formula update = disj(conj(init, hatted_term[i]), conj(neg(init), hatted_iter[i]));
      out.iteration.push_back(held(M, update, x));
    }
  }
  for (std::size_t s = 0; s < strata.size(); ++s) {
    out.heads.push_back(strata[s].first);
    out.terminal.push_back(bot());
    out.iteration.push_back(held(stratum_height[s], strata[s].second, strata[s].first));
  }
  for (int j = 0; j < int(clock.size()); ++j) {
    out.heads.push_back(clock[j]);
    out.terminal.push_back(j == 0 ? top() : bot());
    out.iteration.push_back(var(clock[j == 0 ? M - 1 : j - 1]));
  }
  if (startup) {
    out.heads.push_back(init_name);
    out.terminal.push_back(top());
    out.iteration.push_back(M > 1 ? conj(var(init_name), neg(var(clock[M - 1]))) : bot());
  }
  out.validate();
  return out;
}

// Rounds of the source program versus rounds of to_normal_form's output:
// source round n is held by the output during rounds offset + n*period ...
// offset + n*period + period - 1.
struct NormalFormTiming {
  int period = 1;
  int offset = 0;
};

inline NormalFormTiming normal_form_timing(const GmscProgram& prog) {
  if (prog.is_normal_form()) return {1, 0};
  int M = std::max(1, prog.modal_depth());
  bool startup = false;
  for (const auto& f : prog.terminal)
    if (f->modal_depth > 0) startup = true;
  return {M, startup ? M : 0};
}

// ---------------------------------------------------------------------------
// Balancing

namespace detail {

// Pads f to formula depth d: even gap n -> !^n f, odd gap -> !^(n-1) (f & top).
inline Formula pad_to(const Formula& f, int d) {
  int gap = d - f->formula_depth;
  if (gap < 0) throw invalid_error("cannot pad a formula to a smaller depth");
  if (gap == 0) return f;
  Formula g = f;
  int negs = gap;
  if (gap % 2 == 1) {
    g = conj(g, top());
    negs = gap - 1;
  }
  for (int i = 0; i < negs; ++i) g = neg(g);
  return g;
}

inline bool is_top(const Formula& f) { return f->op == Op::Top; }

inline Formula balance_conjunctions(const Formula& f) {
  switch (f->op) {
    case Op::Top:
    case Op::Prop:
    case Op::Var:
      return f;
    case Op::Not:
      return neg(balance_conjunctions(f->a));
    case Op::Dia:
      return dia(f->k, balance_conjunctions(f->a));
    case Op::Glob:
      return glob(f->k, balance_conjunctions(f->a));
    case Op::And: {
      Formula a = balance_conjunctions(f->a);
      Formula b = balance_conjunctions(f->b);
      if (is_top(a) || is_top(b)) return conj(a, b);
      int d = std::max(a->formula_depth, b->formula_depth);
      return conj(pad_to(a, d), pad_to(b, d));
    }
  }
  return f;
}

}  // namespace detail

// The depth every iteration body of balance(prog) has. With the disjunction
// desugared this is max(5, D + 4) where D is the largest body depth of prog.
inline int balanced_depth(const GmscProgram& prog) { return std::max(5, prog.formula_depth() + 4); }

// Fresh head I (I(0) :- bot, I :- top); every head X gets X(0) :- bot and
// X :- (!I & phi_X) | (I & psi_X); conjunctions and bodies are then padded
// to equal depth. Source round n corresponds to round n+1.
inline GmscProgram balance(const GmscProgram& prog) {
  prog.validate();
  std::set<std::string> used(prog.heads.begin(), prog.heads.end());
  std::string I = detail::fresh_name("I", used);
  GmscProgram out;
  out.pi = prog.pi;
  out.appointed = prog.appointed;
  std::vector<Formula> bodies;
  for (std::size_t i = 0; i < prog.heads.size(); ++i) {
    out.heads.push_back(prog.heads[i]);
    out.terminal.push_back(bot());
    Formula body = disj(conj(neg(var(I)), prog.terminal[i]), conj(var(I), prog.iteration[i]));
    bodies.push_back(detail::balance_conjunctions(body));
  }
  out.heads.push_back(I);
  out.terminal.push_back(bot());
  bodies.push_back(top());
  int d = 0;
  for (const auto& b : bodies) d = std::max(d, b->formula_depth);
  for (auto& b : bodies) b = detail::pad_to(b, d);
  out.iteration = bodies;
  out.validate();
  return out;
}

// True when f satisfies the balancing condition: every conjunction with
// neither conjunct top has conjuncts of equal formula depth.
inline bool conjunctions_balanced(const Formula& f) {
  switch (f->op) {
    case Op::Top:
    case Op::Prop:
    case Op::Var:
      return true;
    case Op::Not:
    case Op::Dia:
    case Op::Glob:
      return conjunctions_balanced(f->a);
    case Op::And:
      if (!detail::is_top(f->a) && !detail::is_top(f->b) && f->a->formula_depth != f->b->formula_depth)
        return false;
      return conjunctions_balanced(f->a) && conjunctions_balanced(f->b);
  }
  return true;
}

}  // namespace gnnlogic
