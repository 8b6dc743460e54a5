#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <functional>
#include <memory>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "gnnlogic/error.hpp"
#include "gnnlogic/graph.hpp"

namespace gnnlogic {

// Core connectives. Sugar (or, implies, iff, bot, box, exact counts) is
// expanded by the builders below, so only these ever appear in a tree.
enum class Op : std::uint8_t { Top, Prop, Var, Not, And, Dia, Glob };

struct FormulaNode;
using Formula = std::shared_ptr<const FormulaNode>;

struct FormulaNode {
  Op op;
  std::string name;  // Prop / Var
  int k = 0;         // Dia / Glob
  Formula a, b;

  std::size_t hash = 0;
  int modal_depth = 0;
  int width = 0;
  int formula_depth = 0;
  bool has_var = false;
  bool has_glob = false;
  double tree_size = 1;
};

namespace detail {

inline std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

inline Formula make_node(Op op, std::string name, int k, Formula a, Formula b) {
  auto n = std::make_shared<FormulaNode>();
  n->op = op;
  n->name = std::move(name);
  n->k = k;
  n->a = std::move(a);
  n->b = std::move(b);
  std::size_t h = std::size_t(op) * 1315423911u;
  h = mix(h, std::hash<std::string>{}(n->name));
  h = mix(h, std::size_t(k));
  if (n->a) h = mix(h, n->a->hash);
  if (n->b) h = mix(h, n->b->hash);
  n->hash = h;
  switch (op) {
    case Op::Top:
    case Op::Prop:
      break;
    case Op::Var:
      n->has_var = true;
      break;
    case Op::Not:
      n->modal_depth = n->a->modal_depth;
      n->width = n->a->width;
      n->formula_depth = n->a->formula_depth + 1;
      break;
    case Op::And:
      n->modal_depth = std::max(n->a->modal_depth, n->b->modal_depth);
      n->width = std::max(n->a->width, n->b->width);
      n->formula_depth = std::max(n->a->formula_depth, n->b->formula_depth) + 1;
      break;
    case Op::Dia:
    case Op::Glob:
      n->modal_depth = n->a->modal_depth + 1;
      n->width = std::max(n->a->width, k);
      n->formula_depth = n->a->formula_depth + 1;
      break;
  }
  if (n->a) {
    n->has_var = n->has_var || n->a->has_var;
    n->has_glob = n->a->has_glob;
    n->tree_size += n->a->tree_size;
  }
  if (n->b) {
    n->has_var = n->has_var || n->b->has_var;
    n->has_glob = n->has_glob || n->b->has_glob;
    n->tree_size += n->b->tree_size;
  }
  if (op == Op::Glob) n->has_glob = true;
  return n;
}

}  // namespace detail

inline Formula top() {
  static const Formula t = detail::make_node(Op::Top, "", 0, nullptr, nullptr);
  return t;
}
inline Formula prop(const std::string& p) { return detail::make_node(Op::Prop, p, 0, nullptr, nullptr); }
inline Formula var(const std::string& x) { return detail::make_node(Op::Var, x, 0, nullptr, nullptr); }
inline Formula neg(Formula a) { return detail::make_node(Op::Not, "", 0, std::move(a), nullptr); }
inline Formula conj(Formula a, Formula b) { return detail::make_node(Op::And, "", 0, std::move(a), std::move(b)); }
inline Formula dia(int k, Formula a) {
  if (k < 0) throw invalid_error("negative grade");
  return detail::make_node(Op::Dia, "", k, std::move(a), nullptr);
}
inline Formula glob(int k, Formula a) {
  if (k < 0) throw invalid_error("negative grade");
  return detail::make_node(Op::Glob, "", k, std::move(a), nullptr);
}

inline Formula bot() { return neg(top()); }
inline Formula disj(Formula a, Formula b) { return neg(conj(neg(std::move(a)), neg(std::move(b)))); }
inline Formula implies(Formula a, Formula b) { return neg(conj(std::move(a), neg(std::move(b)))); }
inline Formula iff(const Formula& a, const Formula& b) { return conj(implies(a, b), implies(b, a)); }
inline Formula box(Formula a) { return neg(dia(1, neg(std::move(a)))); }
inline Formula dia_eq(int k, const Formula& a) { return conj(dia(k, a), neg(dia(k + 1, a))); }
inline Formula glob_eq(int k, const Formula& a) { return conj(glob(k, a), neg(glob(k + 1, a))); }

// Balanced folds; the empty conjunction is top, the empty disjunction bot.
inline Formula conj_all(const std::vector<Formula>& xs, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return xs[lo];
  std::size_t mid = lo + (hi - lo) / 2;
  return conj(conj_all(xs, lo, mid), conj_all(xs, mid, hi));
}
inline Formula conj_all(const std::vector<Formula>& xs) { return xs.empty() ? top() : conj_all(xs, 0, xs.size()); }
inline Formula disj_all(const std::vector<Formula>& xs) {
  if (xs.empty()) return bot();
  if (xs.size() == 1) return xs[0];
  std::vector<Formula> negs;
  negs.reserve(xs.size());
  for (const auto& x : xs) negs.push_back(neg(x));
  return neg(conj_all(negs));
}

inline bool structurally_equal(const Formula& a, const Formula& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->hash != b->hash || a->op != b->op || a->k != b->k || a->name != b->name) return false;
  return structurally_equal(a->a, b->a) && structurally_equal(a->b, b->b);
}

struct FormulaHash {
  std::size_t operator()(const Formula& f) const { return f->hash; }
};
struct FormulaEq {
  bool operator()(const Formula& a, const Formula& b) const { return structurally_equal(a, b); }
};

struct Measures {
  int modal_depth = 0;
  int width = 0;
  int formula_depth = 0;
  friend bool operator==(const Measures&, const Measures&) = default;
};

inline Measures measures(const Formula& f) { return {f->modal_depth, f->width, f->formula_depth}; }

// ---------------------------------------------------------------------------
// Printing

inline std::string to_string(const Formula& f) {
  switch (f->op) {
    case Op::Top:
      return "top";
    case Op::Prop:
    case Op::Var:
      return f->name;
    case Op::Not: {
      const Formula& a = f->a;
      if (a->op == Op::Top) return "bot";
      if (a->op == Op::And && a->a->op == Op::Not && a->b->op == Op::Not)
        return "(" + to_string(a->a->a) + " | " + to_string(a->b->a) + ")";
      if (a->op == Op::Dia && a->k == 1 && a->a->op == Op::Not) return "[] " + to_string(a->a->a);
      return "!" + to_string(a);
    }
    case Op::And:
      return "(" + to_string(f->a) + " & " + to_string(f->b) + ")";
    case Op::Dia:
      return "<" + std::to_string(f->k) + "> " + to_string(f->a);
    case Op::Glob:
      return "<e " + std::to_string(f->k) + "> " + to_string(f->a);
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Parsing

class FormulaParser {
 public:
  explicit FormulaParser(const std::string& text, std::size_t pos = 0) : s_(text), pos_(pos) {}

  Formula parse_body() {
    skip();
    if (eof()) throw err("unexpected end of input");
    char c = s_[pos_];
    if (c == '!') {
      ++pos_;
      return neg(parse_body());
    }
    if (c == '(') {
      ++pos_;
      Formula lhs = parse_body();
      skip();
      std::string op = read_binop();
      if (op.empty()) throw err("expected '&', '|' or '->'");
      Formula rhs = parse_body();
      Formula acc = combine(op, lhs, rhs);
      for (;;) {
        skip();
        if (peek(')')) {
          ++pos_;
          return acc;
        }
        std::string next = read_binop();
        if (next.empty()) throw err("expected ')'");
        if (next != op || op == "->") throw err("mixed operators need parentheses");
        acc = combine(op, acc, parse_body());
      }
    }
    if (c == '[') {
      if (s_.compare(pos_, 2, "[]") != 0) throw err("expected '[]'");
      pos_ += 2;
      return box(parse_body());
    }
    if (c == '<') {
      ++pos_;
      skip();
      bool global = false, exact = false;
      if (peek('=')) {
        exact = true;
        ++pos_;
      } else if (peek('e')) {
        global = true;
        ++pos_;
        skip();
        if (peek('=')) {
          exact = true;
          ++pos_;
        }
      }
      skip();
      int k = read_nat();
      skip();
      if (!peek('>')) throw err("expected '>'");
      ++pos_;
      Formula body = parse_body();
      if (global) return exact ? glob_eq(k, body) : glob(k, body);
      return exact ? dia_eq(k, body) : dia(k, body);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::string id = read_ident();
      if (id == "top") return top();
      if (id == "bot") return bot();
      if (std::isupper(static_cast<unsigned char>(id[0]))) return var(id);
      return prop(id);
    }
    throw err(std::string("unexpected character '") + c + "'");
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n = 1) { pos_ += n; }
  bool match(const std::string& tok) {
    skip();
    if (s_.compare(pos_, tok.size(), tok) != 0) return false;
    pos_ += tok.size();
    return true;
  }
  void skip() {
    while (pos_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
        ++pos_;
      } else if (s_[pos_] == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }
  bool eof() const { return pos_ >= s_.size(); }
  bool peek(char c) const { return pos_ < s_.size() && s_[pos_] == c; }

  std::string read_ident() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    if (start == pos_) throw err("expected identifier");
    return s_.substr(start, pos_ - start);
  }

  int read_nat() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) throw err("expected a natural number");
    if (pos_ - start > 9) throw err("grade too large");
    return std::stoi(s_.substr(start, pos_ - start));
  }

  Error err(const std::string& msg) const {
    int line = 1 + int(std::count(s_.begin(), s_.begin() + std::min(pos_, s_.size()), '\n'));
    return parse_error(msg + " (line " + std::to_string(line) + ")");
  }

 private:
  std::string read_binop() {
    if (peek('&')) {
      ++pos_;
      return "&";
    }
    if (peek('|')) {
      ++pos_;
      return "|";
    }
    if (s_.compare(pos_, 2, "->") == 0) {
      pos_ += 2;
      return "->";
    }
    return "";
  }

  static Formula combine(const std::string& op, Formula a, Formula b) {
    if (op == "&") return conj(std::move(a), std::move(b));
    if (op == "|") return disj(std::move(a), std::move(b));
    return implies(std::move(a), std::move(b));
  }

  const std::string& s_;
  std::size_t pos_;
};

inline Formula parse_formula(const std::string& text) {
  FormulaParser p(text);
  Formula f = p.parse_body();
  p.skip();
  if (!p.eof()) throw p.err("trailing input");
  return f;
}

// ---------------------------------------------------------------------------
// Traversals

inline void collect_symbols(const Formula& f, std::set<std::string>& props, std::set<std::string>& vars) {
  switch (f->op) {
    case Op::Prop:
      props.insert(f->name);
      break;
    case Op::Var:
      vars.insert(f->name);
      break;
    default:
      if (f->a) collect_symbols(f->a, props, vars);
      if (f->b) collect_symbols(f->b, props, vars);
  }
}

inline std::set<std::string> props_of(const Formula& f) {
  std::set<std::string> p, v;
  collect_symbols(f, p, v);
  return p;
}

inline std::set<std::string> vars_of(const Formula& f) {
  std::set<std::string> p, v;
  collect_symbols(f, p, v);
  return v;
}

// Rebuilds f bottom-up; fn may return a replacement for any node (given the
// node with already-rewritten children) or nullptr to keep it.
inline Formula rewrite(const Formula& f, const std::function<Formula(const Formula&)>& fn,
                       std::unordered_map<const FormulaNode*, Formula>& memo) {
  auto it = memo.find(f.get());
  if (it != memo.end()) return it->second;
  Formula cur = f;
  if (f->a) {
    Formula a = rewrite(f->a, fn, memo);
    Formula b = f->b ? rewrite(f->b, fn, memo) : nullptr;
    if (a != f->a || b != f->b) cur = detail::make_node(f->op, f->name, f->k, a, b);
  }
  Formula r = fn(cur);
  if (!r) r = cur;
  memo.emplace(f.get(), r);
  return r;
}

inline Formula rewrite(const Formula& f, const std::function<Formula(const Formula&)>& fn) {
  std::unordered_map<const FormulaNode*, Formula> memo;
  return rewrite(f, fn, memo);
}

// Simultaneous substitution of variables.
inline Formula substitute(const Formula& f, const std::unordered_map<std::string, Formula>& sub) {
  return rewrite(f, [&](const Formula& n) -> Formula {
    if (n->op != Op::Var) return nullptr;
    auto it = sub.find(n->name);
    return it == sub.end() ? nullptr : it->second;
  });
}

// ---------------------------------------------------------------------------
// Evaluation

// Formulas compiled into one shared DAG with structural de-duplication.
class CompiledFormulas {
 public:
  struct Node {
    Op op;
    int a = -1, b = -1;
    int k = 0;
    int atom = -1;  // prop index in pi, or variable index
  };

  CompiledFormulas(std::vector<std::string> pi, std::vector<std::string> vars)
      : pi_(std::move(pi)), vars_(std::move(vars)) {}

  int add(const Formula& f) {
    auto it = ptr_memo_.find(f.get());
    if (it != ptr_memo_.end()) return it->second;
    Node n{f->op};
    n.k = f->k;
    if (f->a) n.a = add(f->a);
    if (f->b) n.b = add(f->b);
    if (f->op == Op::Prop) {
      auto p = std::find(pi_.begin(), pi_.end(), f->name);
      if (p == pi_.end()) throw invalid_error("undeclared proposition '" + f->name + "'");
      n.atom = int(p - pi_.begin());
    } else if (f->op == Op::Var) {
      auto p = std::find(vars_.begin(), vars_.end(), f->name);
      if (p == vars_.end()) throw invalid_error("undeclared head predicate '" + f->name + "'");
      n.atom = int(p - vars_.begin());
    }
    std::uint64_t key = (std::uint64_t(f->op) << 60) ^ (std::uint64_t(std::uint32_t(n.a)) << 36) ^
                        (std::uint64_t(std::uint32_t(n.b)) << 12) ^ std::uint64_t(n.k) * 0x9e3779b1ULL ^
                        std::uint64_t(n.atom + 1) * 0x85ebca6bULL;
    int id = -1;
    auto range = struct_memo_.equal_range(key);
    for (auto r = range.first; r != range.second; ++r) {
      const Node& m = nodes_[r->second];
      if (m.op == n.op && m.a == n.a && m.b == n.b && m.k == n.k && m.atom == n.atom) {
        id = r->second;
        break;
      }
    }
    if (id < 0) {
      id = int(nodes_.size());
      nodes_.push_back(n);
      struct_memo_.emplace(key, id);
    }
    ptr_memo_.emplace(f.get(), id);
    keep_.push_back(f);
    return id;
  }

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<std::string>& pi() const { return pi_; }
  const std::vector<std::string>& vars() const { return vars_; }

 private:
  std::vector<std::string> pi_;
  std::vector<std::string> vars_;
  std::vector<Node> nodes_;
  std::unordered_map<const FormulaNode*, int> ptr_memo_;
  std::unordered_multimap<std::uint64_t, int> struct_memo_;
  std::vector<Formula> keep_;
};

// Lazy, memoized evaluation of compiled formulas on one graph. Variable
// values come from a row-major table var_values[var * |V| + node]. Call
// next_round() whenever the variable table changes.
class Evaluator {
 public:
  Evaluator(const CompiledFormulas& c, const LabeledGraph& g) : c_(c), g_(g) {
    if (c.pi() != g.pi()) {
      for (const auto& p : c.pi())
        if (g.prop_index(p) < 0) throw invalid_error("undeclared proposition '" + p + "'");
      prop_map_.resize(c.pi().size());
      for (std::size_t i = 0; i < c.pi().size(); ++i) prop_map_[i] = g.prop_index(c.pi()[i]);
    }
    std::size_t cells = c.nodes().size() * std::size_t(g.size());
    stamp_.assign(cells, 0);
    value_.assign(cells, 0);
    grown_ = int(c.nodes().size());
  }

  void set_vars(const std::vector<std::uint8_t>* vars) { vars_ = vars; }
  void next_round() {
    if (++round_ == 0) {
      std::fill(stamp_.begin(), stamp_.end(), 0);
      round_ = 1;
    }
  }

  bool eval(int id, int v) {
    if (id >= grown_) grow();
    std::size_t cell = std::size_t(id) * g_.size() + v;
    if (stamp_[cell] == round_) return value_[cell];
    const auto& n = c_.nodes()[id];
    bool r = false;
    switch (n.op) {
      case Op::Top:
        r = true;
        break;
      case Op::Prop:
        r = g_.has_label(v, prop_map_.empty() ? n.atom : prop_map_[n.atom]);
        break;
      case Op::Var:
        if (!vars_) throw invalid_error("head predicate evaluated without a configuration");
        r = (*vars_)[std::size_t(n.atom) * g_.size() + v] != 0;
        break;
      case Op::Not:
        r = !eval(n.a, v);
        break;
      case Op::And:
        r = eval(n.a, v) && eval(n.b, v);
        break;
      case Op::Dia: {
        if (n.k == 0) {
          r = true;
          break;
        }
        int cnt = 0;
        const auto& out = g_.out(v);
        for (std::size_t i = 0; i < out.size() && cnt < n.k; ++i)
          if (eval(n.a, out[i])) ++cnt;
        r = cnt >= n.k;
        break;
      }
      case Op::Glob: {
        if (n.k == 0) {
          r = true;
          break;
        }
        int cnt = 0;
        for (int u = 0; u < g_.size() && cnt < n.k; ++u)
          if (eval(n.a, u)) ++cnt;
        r = cnt >= n.k;
        break;
      }
    }
    stamp_[cell] = round_;
    value_[cell] = r;
    return r;
  }

 private:
  void grow() {
    std::size_t cells = c_.nodes().size() * std::size_t(g_.size());
    stamp_.resize(cells, 0);
    value_.resize(cells, 0);
    grown_ = int(c_.nodes().size());
  }

  const CompiledFormulas& c_;
  const LabeledGraph& g_;
  std::vector<int> prop_map_;
  const std::vector<std::uint8_t>* vars_ = nullptr;
  std::vector<std::uint32_t> stamp_;
  std::vector<std::uint8_t> value_;
  std::uint32_t round_ = 1;
  int grown_ = 0;
};

inline void check_props_declared(const Formula& f, const std::vector<std::string>& pi) {
  for (const auto& p : props_of(f))
    if (std::find(pi.begin(), pi.end(), p) == pi.end()) throw invalid_error("undeclared proposition '" + p + "'");
}

inline std::vector<bool> eval_all(const LabeledGraph& g, const Formula& phi) {
  if (phi->has_var) throw invalid_error("formula mentions head predicates");
  CompiledFormulas c(g.pi(), {});
  int id = c.add(phi);
  Evaluator ev(c, g);
  std::vector<bool> r(g.size());
  for (int v = 0; v < g.size(); ++v) r[v] = ev.eval(id, v);
  return r;
}

inline bool eval_gml(const PointedGraph& pg, const Formula& phi) {
  if (phi->has_var) throw invalid_error("formula mentions head predicates");
  CompiledFormulas c(pg.graph->pi(), {});
  int id = c.add(phi);
  Evaluator ev(c, *pg.graph);
  return ev.eval(id, pg.point);
}

}  // namespace gnnlogic
