#include <gtest/gtest.h>

#include "corpus.hpp"
#include "gnnlogic/gnnlogic.hpp"
#include "oracles.hpp"

using namespace gnnlogic;

namespace {

LabeledGraph path2() {
  return parse_graph(R"({"pi":["p"],"nodes":[{"id":"w"},{"id":"u","labels":["p"]}],"edges":[["w","u"]]})");
}

LabeledGraph empty_nodes(int n) {
  nlohmann::json j{{"pi", nlohmann::json::array()}, {"nodes", nlohmann::json::array()}, {"edges", nlohmann::json::array()}};
  for (int i = 0; i < n; ++i) j["nodes"].push_back({{"id", "n" + std::to_string(i)}});
  return parse_graph(j.dump());
}

GraphSource exhaustive(int n) { return GraphSource{GraphSource::Kind::exhaustive, n, 0, 0}; }

std::vector<Machine> window_machines() {
  std::vector<Machine> ms;
  for (const auto& e : corpus::programs()) {
    ms.push_back(make_machine(e.program, e.name));
    if (e.name == "reach" || e.name == "global") ms.push_back(make_machine(gmsc_to_rsimple(e.program), e.name + "-gnn"));
  }
  ms.push_back(make_machine(corpus::parity_automaton()));
  return ms;
}

}  // namespace

TEST(Trace, ConstantMachine) {
  auto a = make_table_fcmpa({"p"}, {"a", "b"}, {0, 1}, 1, false, {false, true}, {}, DefaultRule::stay);
  auto t = trace(make_machine(a), path2());
  EXPECT_EQ(t.mu, 0);
  EXPECT_EQ(t.lambda, 1);
  EXPECT_FALSE(t.flag(0, 1000));
  EXPECT_TRUE(t.flag(1, 1000));
}

TEST(Trace, Reach) {
  auto g = path2();
  auto t = trace(make_machine(parse_program(corpus::kReach)), g);
  EXPECT_LE(t.mu, 2);
  EXPECT_EQ(t.lambda, 1);
  EXPECT_EQ(first_accepting_round(t, g.index_of("w")), 1);
  EXPECT_EQ(first_accepting_round(t, g.index_of("u")), 0);
}

TEST(Trace, Clock) {
  auto g = empty_nodes(1);
  auto m = make_machine(corpus::clock_automaton());
  auto t = trace(m, g, kDefaultCeiling, true);
  EXPECT_EQ(t.mu, 0);
  EXPECT_EQ(t.lambda, 2);
  EXPECT_EQ(t.configs.size(), 2u);
  EXPECT_FALSE(t.flag(0, 10));
  EXPECT_TRUE(t.flag(0, 11));
  EXPECT_TRUE(classify(t, 0, parse_classifier("standard")));
  EXPECT_FALSE(classify(t, 0, parse_classifier("fixed-point")));
  EXPECT_TRUE(classify(t, 0, parse_classifier("buchi")));
  EXPECT_FALSE(classify(t, 0, parse_classifier("convergence")));
  EXPECT_TRUE(classify(t, 0, parse_classifier("graph-size:V")));
  EXPECT_FALSE(classify(t, 0, parse_classifier("graph-size:2*V")));
  EXPECT_THROW(classify(t, 1, parse_classifier("standard")), Error);
}

TEST(Trace, Ceiling) {
  try {
    trace(make_machine(corpus::clock_automaton()), empty_nodes(1), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ceiling);
  }
  EXPECT_NO_THROW(trace(make_machine(corpus::clock_automaton()), empty_nodes(1), 2));
}

TEST(Classifier, Parse) {
  for (const char* c : {"standard", "fixed-point", "buchi", "convergence", "graph-size:V"})
    EXPECT_EQ(parse_classifier(c).spec(), c);
  EXPECT_THROW(parse_classifier("eventually"), Error);
  EXPECT_THROW(parse_classifier("graph-size:"), Error);
}

TEST(IterExpr, Evaluation) {
  EXPECT_EQ(IterExpr("V").eval(5), 5);
  EXPECT_EQ(IterExpr("2*V+1").eval(5), 11);
  EXPECT_EQ(IterExpr("V^2").eval(5), 25);
  EXPECT_EQ(IterExpr("2^V^2").eval(2), 16);
  EXPECT_EQ(IterExpr("(V + 1) * 3").eval(1), 6);
  EXPECT_EQ(IterExpr("7").eval(100), 7);
  EXPECT_EQ(IterExpr("V - 1").eval(1), 0);
  for (const char* bad : {"", "V+", "(V", "x", "1-V", "V)", "2**V"}) {
    try {
      IterExpr e(bad);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::parse) << bad;
    }
  }
  EXPECT_THROW(IterExpr("V^V").eval(60), Error);
}

// Classifier verdicts from the cycle summary agree with judging the plain
// flag sequence over the window [0, mu + 3 lambda).
TEST(Classifier, MatchesWindowOracle) {
  const std::vector<std::string> iters{"V", "2*V+1", "V^2"};
  for (const auto& m : window_machines()) {
    auto graphs = source_graphs(exhaustive(2), m.pi());
    for (const auto& g : sample_graphs(m.pi(), 5, 40, 6)) graphs.push_back(g);
    for (const auto& g : graphs) {
      auto t = trace(m, g);
      int need = t.mu + 3 * t.lambda;
      for (const auto& it : iters) need = std::max<long long>(need, IterExpr(it).eval(g.size()) + 1);
      auto f = oracle::flags(m, g, need);
      for (int v = 0; v < g.size(); ++v) {
        for (const char* k : {"standard", "fixed-point", "buchi"})
          ASSERT_EQ(classify(t, v, parse_classifier(k)), oracle::window_verdict(f, v, k, t.mu, t.lambda)) << m.name << k;
        for (const auto& it : iters)
          ASSERT_EQ(classify(t, v, parse_classifier("graph-size:" + it)),
                    oracle::window_verdict(f, v, "graph-size", t.mu, t.lambda, IterExpr(it).eval(g.size())))
              << m.name << it;
      }
    }
  }
}

// graph-size:V reads the flag after |V| plain steps.
TEST(Classifier, GraphSizeDirect) {
  for (const auto& e : corpus::programs()) {
    auto m = make_machine(e.program);
    for (const auto& g : sample_graphs(m.pi(), 6, 30, 21)) {
      auto r = m.runner(g);
      for (int i = 0; i < g.size(); ++i) r->step();
      auto t = trace(m, g);
      for (int v = 0; v < g.size(); ++v) ASSERT_EQ(classify(t, v, parse_classifier("graph-size:V")), r->accepting(v));
    }
  }
}

TEST(Modes, FixedPointAndBuchi) {
  for (const auto& e : corpus::programs()) {
    auto src = make_machine(e.program, e.name);
    auto fp = make_machine(gmsc_to_rsimple(e.program, RSimpleMode::fixed_point));
    auto bu = make_machine(gmsc_to_rsimple(e.program, RSimpleMode::buchi));
    EXPECT_TRUE(check_acceptance_equiv(src, fp, parse_classifier("fixed-point"), exhaustive(2)).equivalent) << e.name;
    EXPECT_TRUE(check_acceptance_equiv(src, bu, parse_classifier("buchi"), exhaustive(2)).equivalent) << e.name;
  }
}

TEST(Modes, Convergence) {
  for (const auto& e : corpus::programs()) {
    auto src = make_machine(e.program, e.name);
    auto cv = make_machine(gmsc_to_rsimple(e.program, RSimpleMode::convergence));
    EXPECT_TRUE(check_acceptance_equiv(src, cv, parse_classifier("convergence"), exhaustive(2)).equivalent) << e.name;
  }
}

// A program that oscillates never converges, whatever its flags.
TEST(Modes, OscillationRejectsUnderConvergence) {
  auto prog = parse_program("X(0) :- top;\nX :- !X;\nappointed: X;\n");
  auto g = empty_nodes(2);
  auto t = trace(make_machine(prog), g);
  EXPECT_EQ(t.lambda, 2);
  EXPECT_FALSE(classify(t, 0, parse_classifier("convergence")));
  auto tg = trace(make_machine(gmsc_to_rsimple(prog, RSimpleMode::convergence)), g);
  EXPECT_FALSE(classify(tg, 0, parse_classifier("convergence")));
}
