#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "gnnlogic/acceptance.hpp"
#include "gnnlogic/error.hpp"
#include "gnnlogic/gnn.hpp"
#include "gnnlogic/graph.hpp"

namespace gnnlogic {

// Graphs to check: every graph with at most max_nodes nodes, or a seeded
// sample of count graphs with at most max_nodes nodes.
struct GraphSource {
  enum class Kind { exhaustive, sampled };
  Kind kind = Kind::exhaustive;
  int max_nodes = 3;
  int count = 0;
  std::uint64_t seed = 0;

  static GraphSource exhaustive(int n) { return {Kind::exhaustive, n, 0, 0}; }
  static GraphSource sampled(int n, int count, std::uint64_t seed) { return {Kind::sampled, n, count, seed}; }

  std::string spec() const {
    if (kind == Kind::exhaustive) return "exhaustive<=" + std::to_string(max_nodes);
    return "sampled<=" + std::to_string(max_nodes) + ",count=" + std::to_string(count) + ",seed=" + std::to_string(seed);
  }
};

inline std::vector<LabeledGraph> source_graphs(const GraphSource& src, const std::vector<std::string>& pi) {
  std::vector<LabeledGraph> out;
  if (src.kind == GraphSource::Kind::exhaustive) {
    for_each_graph(pi, src.max_nodes, [&](const LabeledGraph& g) { out.push_back(g); });
  } else {
    out = sample_graphs(pi, src.max_nodes, src.count, src.seed);
  }
  return out;
}

// Random access to the graphs of a source; exhaustive sources are decoded on
// demand instead of materialized.
class GraphList {
 public:
  GraphList(const GraphSource& src, std::vector<std::string> pi) : src_(src), pi_(std::move(pi)) {
    if (src.kind == GraphSource::Kind::exhaustive) {
      check_enumeration_guard(int(pi_.size()), src.max_nodes);
      size_ = count_graphs(int(pi_.size()), src.max_nodes);
    } else {
      sampled_ = sample_graphs(pi_, src.max_nodes, src.count, src.seed);
      size_ = sampled_.size();
    }
  }
  std::size_t size() const { return size_; }
  LabeledGraph operator[](std::size_t i) const {
    if (src_.kind == GraphSource::Kind::exhaustive) return graph_at(pi_, src_.max_nodes, i);
    return sampled_[i];
  }

 private:
  GraphSource src_;
  std::vector<std::string> pi_;
  std::vector<LabeledGraph> sampled_;
  std::size_t size_ = 0;
};

struct Counterexample {
  std::size_t graph_index = 0;
  LabeledGraph graph;
  int node = 0;
  std::string verdict_a, verdict_b;
  std::optional<int> round_a, round_b;  // run-correspondence mode
  std::string note;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["graph_index"] = graph_index;
    j["graph"] = graph_to_json(graph);
    j["node"] = graph.id(node);
    j["a"] = verdict_a;
    j["b"] = verdict_b;
    if (round_a) j["round_a"] = *round_a;
    if (round_b) j["round_b"] = *round_b;
    if (!note.empty()) j["note"] = note;
    return j;
  }
};

struct EquivReport {
  std::string machine_a, machine_b;
  std::string mode;  // "acceptance" or "run-correspondence"
  std::string classifier;
  std::string source;
  bool equivalent = true;
  std::size_t graphs = 0;
  std::size_t points = 0;
  std::vector<Counterexample> counterexamples;
  double seconds = 0;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["a"] = machine_a;
    j["b"] = machine_b;
    j["mode"] = mode;
    if (!classifier.empty()) j["classifier"] = classifier;
    j["source"] = source;
    j["verdict"] = equivalent ? "equivalent" : "counterexample";
    j["graphs"] = graphs;
    j["points"] = points;
    j["counterexamples"] = nlohmann::json::array();
    for (const auto& c : counterexamples) j["counterexamples"].push_back(c.to_json());
    j["seconds"] = seconds;
    return j;
  }
};

struct HarnessOptions {
  int jobs = 1;
  bool collect_all = false;
  int ceiling = kDefaultCeiling;
};

namespace detail {

inline void require_same_pi(const Machine& a, const Machine& b) {
  std::set<std::string> pa(a.pi().begin(), a.pi().end()), pb(b.pi().begin(), b.pi().end());
  if (pa != pb) throw invalid_error("machines are over different label alphabets");
}

// Runs check(graph_index, points) over all graphs in blocks, each block in
// parallel when jobs > 1. Counterexamples are kept in graph order; without
// collect_all only the one from the lowest graph index is kept, and graphs
// and points count the prefix up to it.
inline void run_graphs(std::size_t n, const HarnessOptions& opt,
                       const std::function<std::vector<Counterexample>(std::size_t, std::size_t&)>& check,
                       EquivReport& report) {
  constexpr std::size_t kBlock = 4096;
  const int jobs = std::max(1, opt.jobs);
  std::vector<std::vector<Counterexample>> found;
  std::vector<std::size_t> points;
  for (std::size_t base = 0; base < n; base += kBlock) {
    const std::size_t len = std::min(kBlock, n - base);
    found.assign(len, {});
    points.assign(len, 0);
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> first_bad{len};
    std::mutex err_mu;
    std::exception_ptr err;
    auto worker = [&] {
      for (;;) {
        std::size_t i = next++;
        if (i >= len) return;
        if (!opt.collect_all && i > first_bad.load()) return;
        try {
          found[i] = check(base + i, points[i]);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!err) err = std::current_exception();
          first_bad = 0;
          return;
        }
        if (!found[i].empty()) {
          std::size_t cur = first_bad.load();
          while (i < cur && !first_bad.compare_exchange_weak(cur, i)) {
          }
        }
      }
    };
    if (jobs == 1 || len == 1) {
      worker();
    } else {
      std::vector<std::thread> ts;
      for (int j = 0; j < jobs; ++j) ts.emplace_back(worker);
      for (auto& t : ts) t.join();
    }
    if (err) std::rethrow_exception(err);
    bool stop = false;
    for (std::size_t i = 0; i < len; ++i) {
      if (!opt.collect_all && i > first_bad.load()) break;
      ++report.graphs;
      report.points += points[i];
      for (auto& c : found[i]) report.counterexamples.push_back(std::move(c));
      if (!opt.collect_all && !found[i].empty()) stop = true;
    }
    if (stop) break;
  }
  report.equivalent = report.counterexamples.empty();
  if (!opt.collect_all && report.counterexamples.size() > 1) report.counterexamples.resize(1);
}

inline std::string verdict_text(bool accepted) { return accepted ? "accept" : "reject"; }

}  // namespace detail

inline EquivReport check_acceptance_equiv(const Machine& a, const Machine& b, const Classifier& c,
                                          const GraphSource& src, const HarnessOptions& opt = {}) {
  detail::require_same_pi(a, b);
  auto t0 = std::chrono::steady_clock::now();
  EquivReport report;
  report.machine_a = a.name;
  report.machine_b = b.name;
  report.mode = "acceptance";
  report.classifier = c.spec();
  report.source = src.spec();
  GraphList graphs(src, a.pi());
  detail::run_graphs(
      graphs.size(), opt,
      [&](std::size_t i, std::size_t& points) {
        std::vector<Counterexample> out;
        const LabeledGraph g = graphs[i];
        RunTrace ta, tb;
        try {
          ta = trace(a, g, opt.ceiling);
          tb = trace(b, g, opt.ceiling);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::ceiling) throw;
          out.push_back(Counterexample{i, g, 0, "?", "?", {}, {}, e.what()});
          return out;
        }
        for (int v = 0; v < g.size(); ++v) {
          ++points;
          bool x = classify(ta, v, c), y = classify(tb, v, c);
          if (x != y) {
            out.push_back(Counterexample{i, g, v, detail::verdict_text(x), detail::verdict_text(y), {}, {}, ""});
            if (!opt.collect_all) break;
          }
        }
        return out;
      },
      report);
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

// Maps a node state to a comparison value.
using Decoder = std::function<NodeState(const LabeledGraph& g, int v, const NodeState& state)>;

inline NodeState identity_decode(const LabeledGraph&, int, const NodeState& s) { return s; }

// Compares decoded states of A at rounds n = 0..rounds with decoded states
// of B at rounds offset + n * rate.
inline EquivReport check_run_correspondence(const Machine& a, const Machine& b, const Decoder& decode_a,
                                            const Decoder& decode_b, int rate, int offset, const GraphSource& src,
                                            int rounds, const HarnessOptions& opt = {}) {
  detail::require_same_pi(a, b);
  if (rate < 1 || offset < 0 || rounds < 0) throw invalid_error("rate must be positive, offset and rounds non-negative");
  auto t0 = std::chrono::steady_clock::now();
  EquivReport report;
  report.machine_a = a.name;
  report.machine_b = b.name;
  report.mode = "run-correspondence";
  report.source = src.spec();
  GraphList graphs(src, a.pi());
  detail::run_graphs(
      graphs.size(), opt,
      [&](std::size_t i, std::size_t& points) {
        std::vector<Counterexample> out;
        const LabeledGraph g = graphs[i];
        auto ra = a.runner(g), rb = b.runner(g);
        for (int k = 0; k < offset; ++k) rb->step();
        for (int n = 0; n <= rounds; ++n) {
          if (n > 0) {
            ra->step();
            for (int k = 0; k < rate; ++k) rb->step();
          }
          for (int v = 0; v < g.size(); ++v) {
            ++points;
            NodeState x = decode_a(g, v, ra->node_state(v));
            NodeState y = decode_b(g, v, rb->node_state(v));
            if (x != y) {
              auto text = [](const NodeState& s) {
                std::string r = "[";
                for (std::size_t j = 0; j < s.size(); ++j) r += (j ? "," : "") + std::to_string(s[j]);
                return r + "]";
              };
              out.push_back(Counterexample{i, g, v, text(x), text(y), ra->round(), rb->round(), ""});
              return out;
            }
          }
        }
        return out;
      },
      report);
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

// ---------------------------------------------------------------------------
// Decoders

// Program node state (head bits) restricted to the named heads.
inline Decoder program_heads_decoder(const GmscProgram& prog, const std::vector<std::string>& heads) {
  std::vector<int> idx;
  for (const auto& h : heads) {
    int i = prog.head_index(h);
    if (i < 0) throw invalid_error("unknown head '" + h + "'");
    idx.push_back(i);
  }
  return [idx](const LabeledGraph&, int, const NodeState& s) {
    NodeState r;
    for (int i : idx) r.push_back(s[i]);
    return r;
  };
}

// Program node state as the set "labels u true heads", encoded as a bitmask
// with labels first (the state encoding of gmsc1_to_fcmpa).
inline Decoder program_state_set_decoder(const GmscProgram& prog) {
  auto pi = prog.pi;
  return [pi](const LabeledGraph& g, int v, const NodeState& s) {
    auto labels = labels_over(g, pi);
    std::int64_t m = labels[v];
    for (std::size_t h = 0; h < s.size(); ++h)
      if (s[h]) m |= std::int64_t(1) << (pi.size() + h);
    return NodeState{m};
  };
}

// R-simple GNN node state restricted to the given coordinates, as 0/1.
inline Decoder coordinate_decoder(const FloatSystem& s, std::vector<int> coords) {
  std::int64_t one = scaled_key(from_int(s, 1));
  return [coords, one](const LabeledGraph&, int, const NodeState& st) {
    NodeState r;
    for (int c : coords) r.push_back(st[c] == one ? 1 : (st[c] == 0 ? 0 : -1));
    return r;
  };
}

// Heads of the source program as coordinates of compile_rsimple's output.
inline Decoder rsimple_heads_decoder(const RSimpleCompilation& comp, const std::vector<std::string>& heads) {
  std::vector<int> coords;
  for (const auto& h : heads) {
    int i = comp.balanced.head_index(h);
    if (i < 0) throw invalid_error("unknown head '" + h + "'");
    coords.push_back(comp.head_coord[i]);
  }
  return coordinate_decoder(comp.gnn.system, coords);
}

// One-hot vectors of dimension states^2 decoded to the state index.
inline Decoder one_hot_decoder(const FloatSystem& s, int states) {
  std::int64_t one = scaled_key(from_int(s, 1));
  return [states, one](const LabeledGraph&, int, const NodeState& st) {
    int found = -1;
    for (int i = 0; i < int(st.size()); ++i) {
      if (st[i] == 0) continue;
      if (st[i] != one || found >= 0 || i >= states) return NodeState{-1};
      found = i;
    }
    return NodeState{found};
  };
}

}  // namespace gnnlogic
