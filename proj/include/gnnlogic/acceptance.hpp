#pragma once

#include <cctype>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <boost/container_hash/hash.hpp>

#include "gnnlogic/automata.hpp"
#include "gnnlogic/error.hpp"
#include "gnnlogic/gmsc.hpp"
#include "gnnlogic/gnn.hpp"
#include "gnnlogic/graph.hpp"

namespace gnnlogic {

using NodeState = std::vector<std::int64_t>;

// Stepping interface shared by the machine kinds.
class Runner {
 public:
  virtual ~Runner() = default;
  virtual void reset() = 0;
  virtual void step() = 0;
  virtual int round() const = 0;
  virtual int nodes() const = 0;
  virtual NodeState node_state(int v) const = 0;
  virtual bool accepting(int v) const = 0;

  virtual void config_key(std::vector<std::int64_t>& out) const {
    out.clear();
    for (int v = 0; v < nodes(); ++v) {
      auto s = node_state(v);
      out.insert(out.end(), s.begin(), s.end());
    }
  }
};

class ProgramRunner : public Runner {
 public:
  ProgramRunner(std::shared_ptr<const GmscProgram> prog, std::shared_ptr<const CompiledProgram> compiled,
                const LabeledGraph& g)
      : prog_(std::move(prog)), g_(g), sim_(*prog_, std::move(compiled), g_), appointed_(prog_->appointed_mask()) {
    reset();
  }
  void reset() override { c_ = sim_.initial(); }
  void step() override { c_ = sim_.step(c_); }
  int round() const override { return c_.round; }
  int nodes() const override { return g_.size(); }
  NodeState node_state(int v) const override {
    NodeState s;
    for (std::size_t h = 0; h < prog_->heads.size(); ++h) s.push_back(c_.holds(int(h), v));
    return s;
  }
  bool accepting(int v) const override {
    for (std::size_t h = 0; h < appointed_.size(); ++h)
      if (appointed_[h] && c_.holds(int(h), v)) return true;
    return false;
  }
  void config_key(std::vector<std::int64_t>& out) const override {
    out.assign((c_.truth.size() + 63) / 64, 0);
    for (std::size_t i = 0; i < c_.truth.size(); ++i)
      if (c_.truth[i]) out[i / 64] |= std::int64_t(1) << (i % 64);
  }
  const GmscConfiguration& configuration() const { return c_; }

 private:
  std::shared_ptr<const GmscProgram> prog_;
  const LabeledGraph& g_;
  ProgramSimulator sim_;
  std::vector<bool> appointed_;
  GmscConfiguration c_;
};

class AutomatonRunner : public Runner {
 public:
  AutomatonRunner(std::shared_ptr<const Fcmpa> a, const LabeledGraph& g) : a_(std::move(a)), g_(g) { reset(); }
  void reset() override { c_ = initial_configuration(*a_, g_); }
  void step() override { c_ = step_automaton(*a_, g_, c_); }
  int round() const override { return c_.round; }
  int nodes() const override { return g_.size(); }
  NodeState node_state(int v) const override { return {c_.state[v]}; }
  bool accepting(int v) const override { return a_->accepting[c_.state[v]]; }
  void config_key(std::vector<std::int64_t>& out) const override { out.assign(c_.state.begin(), c_.state.end()); }

 private:
  std::shared_ptr<const Fcmpa> a_;
  const LabeledGraph& g_;
  AutomatonConfiguration c_;
};

class GnnRunner : public Runner {
 public:
  GnnRunner(std::shared_ptr<const GnnF> gnn, const LabeledGraph& g) : gnn_(std::move(gnn)), g_(g) {
    if (gnn_->transition.rsimple) kernel_.emplace(*gnn_->transition.rsimple);
    reset();
  }
  void reset() override { c_ = initial_configuration(*gnn_, g_); }
  void step() override {
    c_ = step_with(gnn_->system, gnn_->dim, gnn_->transition, kernel_ ? &*kernel_ : nullptr, g_, c_);
  }
  int round() const override { return c_.round; }
  int nodes() const override { return g_.size(); }
  NodeState node_state(int v) const override { return vec_key(c_.x[v]); }
  bool accepting(int v) const override { return gnn_->accepting(c_.x[v]); }
  const Vec& vector(int v) const { return c_.x[v]; }

 private:
  std::shared_ptr<const GnnF> gnn_;
  const LabeledGraph& g_;
  std::optional<RSimpleKernel> kernel_;
  GnnConfiguration c_;
};

class NLayerRunner : public Runner {
 public:
  NLayerRunner(std::shared_ptr<const NLayerGnn> gnn, const LabeledGraph& g) : gnn_(std::move(gnn)), g_(g) { reset(); }
  void reset() override {
    auto labels = labels_over(g_, gnn_->pi);
    c_ = GnnConfiguration{};
    for (int v = 0; v < g_.size(); ++v) c_.x.push_back(gnn_->init[labels[v]]);
  }
  void step() override { c_ = step_nlayer(*gnn_, g_, c_); }
  int round() const override { return c_.round; }
  int nodes() const override { return g_.size(); }
  NodeState node_state(int v) const override {
    // The layer in use is part of the state until the last layer is reached.
    NodeState s = vec_key(c_.x[v]);
    s.push_back(std::min(c_.round, gnn_->num_layers() - 1));
    return s;
  }
  bool accepting(int v) const override { return gnn_->accepting(c_.x[v]); }

 private:
  std::shared_ptr<const NLayerGnn> gnn_;
  const LabeledGraph& g_;
  GnnConfiguration c_;
};

// A machine of any kind, ready to be run on graphs.
struct Machine {
  enum class Kind { program, automaton, gnn, nlayer };
  Kind kind = Kind::program;
  std::string name;
  std::shared_ptr<const GmscProgram> program;
  std::shared_ptr<const Fcmpa> automaton;
  std::shared_ptr<const GnnF> gnn;
  std::shared_ptr<const NLayerGnn> nlayer;
  std::shared_ptr<const CompiledProgram> compiled;

  const std::vector<std::string>& pi() const {
    switch (kind) {
      case Kind::program:
        return program->pi;
      case Kind::automaton:
        return automaton->pi;
      case Kind::gnn:
        return gnn->pi;
      case Kind::nlayer:
        return nlayer->pi;
    }
    return program->pi;
  }

  std::unique_ptr<Runner> runner(const LabeledGraph& g) const {
    switch (kind) {
      case Kind::program:
        return std::make_unique<ProgramRunner>(
            program, compiled ? compiled : std::make_shared<const CompiledProgram>(*program), g);
      case Kind::automaton:
        return std::make_unique<AutomatonRunner>(automaton, g);
      case Kind::gnn:
        return std::make_unique<GnnRunner>(gnn, g);
      case Kind::nlayer:
        return std::make_unique<NLayerRunner>(nlayer, g);
    }
    return nullptr;
  }

  std::string kind_name() const {
    static const char* names[] = {"gmsc", "fcmpa", "gnn", "nlayer-gnn"};
    return names[int(kind)];
  }
};

inline Machine make_machine(GmscProgram p, std::string name = "program") {
  p.validate();
  Machine m{Machine::Kind::program, std::move(name), std::make_shared<const GmscProgram>(std::move(p)), {}, {}, {}, {}};
  m.compiled = std::make_shared<const CompiledProgram>(*m.program);
  return m;
}
inline Machine make_machine(Fcmpa a, std::string name = "automaton") {
  return Machine{Machine::Kind::automaton, std::move(name), {}, std::make_shared<const Fcmpa>(std::move(a)), {}, {}, {}};
}
inline Machine make_machine(GnnF g, std::string name = "gnn") {
  g.validate();
  return Machine{Machine::Kind::gnn, std::move(name), {}, {}, std::make_shared<const GnnF>(std::move(g)), {}, {}};
}
inline Machine make_machine(NLayerGnn g, std::string name = "nlayer") {
  g.validate();
  return Machine{Machine::Kind::nlayer, std::move(name), {}, {}, {}, std::make_shared<const NLayerGnn>(std::move(g)), {}};
}

// ---------------------------------------------------------------------------
// Traces

struct RunTrace {
  std::string kind;
  int nodes = 0;
  int mu = 0;
  int lambda = 1;
  std::vector<std::vector<std::uint8_t>> flags;  // [round][node], rounds 0 .. mu+lambda-1
  std::vector<std::vector<NodeState>> configs;   // optional, same indexing

  int length() const { return mu + lambda; }
  bool flag(int v, long long r) const {
    if (r >= length()) r = mu + (r - mu) % lambda;
    return flags[std::size_t(r)][v] != 0;
  }
};

struct KeyHash {
  std::size_t operator()(const std::vector<std::int64_t>& k) const { return boost::hash_range(k.begin(), k.end()); }
};

inline constexpr int kDefaultCeiling = 100000;

// Simulates until the first repeated global configuration.
inline RunTrace trace(const Machine& m, const LabeledGraph& g, int ceiling = kDefaultCeiling, bool keep_configs = false) {
  auto r = m.runner(g);
  RunTrace t;
  t.kind = m.kind_name();
  t.nodes = g.size();
  std::unordered_map<std::vector<std::int64_t>, int, KeyHash> seen;
  std::vector<std::int64_t> key;
  for (int round = 0;; ++round) {
    r->config_key(key);
    auto [it, fresh] = seen.emplace(key, round);
    if (!fresh) {
      t.mu = it->second;
      t.lambda = round - it->second;
      return t;
    }
    if (round >= ceiling)
      throw ceiling_error("trace ceiling of " + std::to_string(ceiling) + " rounds exceeded without a repetition");
    std::vector<std::uint8_t> fl(g.size());
    for (int v = 0; v < g.size(); ++v) fl[v] = r->accepting(v);
    t.flags.push_back(std::move(fl));
    if (keep_configs) {
      std::vector<NodeState> c;
      for (int v = 0; v < g.size(); ++v) c.push_back(r->node_state(v));
      t.configs.push_back(std::move(c));
    }
    r->step();
  }
}

// ---------------------------------------------------------------------------
// Iter expressions over V: integers, V, + - * ^ and parentheses.

class IterExpr {
 public:
  IterExpr() = default;
  explicit IterExpr(std::string text) : text_(std::move(text)) {
    pos_ = 0;
    root_ = parse_sum();
    skip();
    if (pos_ != text_.size()) throw parse_error("unexpected '" + text_.substr(pos_) + "' in Iter expression");
    for (long long v = 1; v <= 64; ++v) {
      long long r;
      try {
        r = eval(v);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::guard) throw;
        break;
      }
      if (r < 0) throw parse_error("Iter expression is negative at V = " + std::to_string(v));
    }
  }

  long long eval(long long V) const { return eval_node(root_, V); }
  const std::string& text() const { return text_; }

 private:
  struct Node {
    char op;  // 'n' number, 'V', '+', '-', '*', '^', 'u' unary minus
    long long value = 0;
    std::shared_ptr<Node> a, b;
  };
  using P = std::shared_ptr<Node>;

  std::string text_;
  std::size_t pos_ = 0;
  P root_;

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  P bin(char op, P a, P b) { return std::make_shared<Node>(Node{op, 0, std::move(a), std::move(b)}); }
  P parse_sum() {
    P a = parse_product();
    for (;;) {
      if (eat('+')) a = bin('+', a, parse_product());
      else if (eat('-')) a = bin('-', a, parse_product());
      else return a;
    }
  }
  P parse_product() {
    P a = parse_power();
    while (eat('*')) a = bin('*', a, parse_power());
    return a;
  }
  P parse_power() {
    P a = parse_atom();
    if (eat('^')) return bin('^', a, parse_power());
    return a;
  }
  P parse_atom() {
    skip();
    if (eat('(')) {
      P a = parse_sum();
      if (!eat(')')) throw parse_error("missing ')' in Iter expression");
      return a;
    }
    if (eat('-')) return bin('u', parse_atom(), nullptr);
    if (eat('V') || eat('v')) return std::make_shared<Node>(Node{'V', 0, nullptr, nullptr});
    skip();
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) throw parse_error("expected a number, V or '(' in Iter expression '" + text_ + "'");
    if (pos_ - start > 12) throw parse_error("number too large in Iter expression");
    return std::make_shared<Node>(Node{'n', std::stoll(text_.substr(start, pos_ - start)), nullptr, nullptr});
  }

  static long long checked(__int128 v) {
    if (v > (__int128(1) << 40) || v < -(__int128(1) << 40)) throw guard_error("Iter expression value too large");
    return (long long)v;
  }
  long long eval_node(const P& n, long long V) const {
    switch (n->op) {
      case 'n':
        return n->value;
      case 'V':
        return V;
      case 'u':
        return -eval_node(n->a, V);
      case '+':
        return checked(__int128(eval_node(n->a, V)) + eval_node(n->b, V));
      case '-':
        return checked(__int128(eval_node(n->a, V)) - eval_node(n->b, V));
      case '*':
        return checked(__int128(eval_node(n->a, V)) * eval_node(n->b, V));
      case '^': {
        long long b = eval_node(n->a, V), e = eval_node(n->b, V);
        if (e < 0) throw guard_error("negative exponent in Iter expression");
        __int128 r = 1;
        for (long long i = 0; i < e; ++i) r = checked(r * b);
        return (long long)r;
      }
    }
    return 0;
  }
};

struct Classifier {
  enum class Kind { standard, fixed_point, buchi, graph_size, convergence };
  Kind kind = Kind::standard;
  IterExpr iter;

  std::string spec() const {
    switch (kind) {
      case Kind::standard:
        return "standard";
      case Kind::fixed_point:
        return "fixed-point";
      case Kind::buchi:
        return "buchi";
      case Kind::graph_size:
        return "graph-size:" + iter.text();
      case Kind::convergence:
        return "convergence";
    }
    return "";
  }
};

inline Classifier parse_classifier(const std::string& text) {
  Classifier c;
  if (text == "standard") c.kind = Classifier::Kind::standard;
  else if (text == "fixed-point") c.kind = Classifier::Kind::fixed_point;
  else if (text == "buchi") c.kind = Classifier::Kind::buchi;
  else if (text == "convergence") c.kind = Classifier::Kind::convergence;
  else if (text.rfind("graph-size:", 0) == 0) {
    c.kind = Classifier::Kind::graph_size;
    c.iter = IterExpr(text.substr(11));
  } else {
    throw parse_error("unknown classifier '" + text + "'");
  }
  return c;
}

inline bool classify(const RunTrace& t, int v, const Classifier& c) {
  if (v < 0 || v >= t.nodes) throw invalid_error("unknown node");
  switch (c.kind) {
    case Classifier::Kind::standard:
      for (int r = 0; r < t.length(); ++r)
        if (t.flag(v, r)) return true;
      return false;
    case Classifier::Kind::fixed_point:
      for (int r = t.mu; r < t.length(); ++r)
        if (!t.flag(v, r)) return false;
      return true;
    case Classifier::Kind::buchi:
      for (int r = t.mu; r < t.length(); ++r)
        if (t.flag(v, r)) return true;
      return false;
    case Classifier::Kind::graph_size:
      return t.flag(v, c.iter.eval(t.nodes));
    case Classifier::Kind::convergence:
      return t.lambda == 1 && t.flag(v, t.mu);
  }
  return false;
}

// First round at which v accepts, if any.
inline std::optional<int> first_accepting_round(const RunTrace& t, int v) {
  for (int r = 0; r < t.length(); ++r)
    if (t.flag(v, r)) return r;
  return std::nullopt;
}

}  // namespace gnnlogic
