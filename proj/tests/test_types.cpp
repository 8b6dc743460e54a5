#include <gtest/gtest.h>

#include <random>

#include "corpus.hpp"
#include "gnnlogic/gnnlogic.hpp"
#include "oracles.hpp"

using namespace gnnlogic;

namespace {

bool contains(const std::vector<TypePtr>& ts, const TypePtr& t) {
  for (const auto& x : ts)
    if (*x == *t) return true;
  return false;
}

}  // namespace

TEST(GradedType, Examples) {
  auto iso = parse_graph(R"({"pi":["p","q"],"nodes":[{"id":"a","labels":["p"]}],"edges":[]})");
  for (int k = 1; k <= 3; ++k) {
    auto t = graded_type(PointedGraph(iso, "a"), k, 0);
    EXPECT_EQ(t->labels, 1u);
    EXPECT_TRUE(t->children.empty());
  }

  auto loop = parse_graph(R"({"pi":["p"],"nodes":[{"id":"a","labels":["p"]}],"edges":[["a","a"]]})");
  auto t = graded_type(PointedGraph(loop, "a"), 1, 1);
  EXPECT_EQ(t->labels, 1u);
  ASSERT_EQ(t->children.size(), 1u);
  EXPECT_EQ(t->children[0].first->labels, 1u);
  EXPECT_EQ(t->children[0].second, 1);

  auto fork = parse_graph(R"({"pi":["p"],"nodes":[{"id":"r"},{"id":"x","labels":["p"]},{"id":"y","labels":["p"]}],
                            "edges":[["r","x"],["r","y"]]})");
  auto f1 = graded_type(PointedGraph(fork, "r"), 1, 1);
  ASSERT_EQ(f1->children.size(), 1u);
  EXPECT_EQ(f1->children[0].second, 1);
  auto f2 = graded_type(PointedGraph(fork, "r"), 2, 1);
  EXPECT_EQ(f2->children[0].second, 2);
  auto full = full_type(PointedGraph(fork, "r"), 1);
  EXPECT_EQ(full->out_degree, 2);
  EXPECT_EQ(full->children[0].second, 2);
}

TEST(GradedType, FormulaOfDepthZero) {
  auto t = graded_type(PointedGraph(parse_graph(R"({"pi":["p","q"],"nodes":[{"id":"a","labels":["p"]}]})"), "a"), 1, 0);
  EXPECT_TRUE(structurally_equal(type_to_formula(*t), conj(prop("p"), neg(prop("q")))));
  EXPECT_EQ(type_to_string(*t), "{p}");
}

TEST(TypeSpace, Sizes) {
  EXPECT_EQ(enumerate_types({"p"}, 1, 0).size(), 2u);
  EXPECT_EQ(enumerate_types({"p"}, 1, 1).size(), 8u);
  for (auto [P, k, n] : std::vector<std::tuple<int, int, int>>{{1, 1, 2}, {1, 2, 1}, {2, 1, 1}, {0, 3, 2}}) {
    std::vector<std::string> pi;
    for (int i = 0; i < P; ++i) pi.push_back(std::string(1, char('p' + i)));
    EXPECT_DOUBLE_EQ(double(enumerate_types(pi, k, n).size()), type_space_size(P, k, n));
  }
  try {
    enumerate_types({"p", "q"}, 2, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::guard);
  }
}

TEST(TypeSpace, EnumeratedTypesAreDistinct) {
  auto ts = enumerate_types({"p"}, 1, 2);
  for (std::size_t i = 1; i < ts.size(); ++i) EXPECT_TRUE(*ts[i - 1] < *ts[i]);
}

TEST(RealizingTree, Examples) {
  auto d0 = enumerate_types({"p"}, 1, 0);
  auto tr = realizing_tree(*d0[1]);
  EXPECT_EQ(tr.graph->size(), 1);
  EXPECT_TRUE(tr.graph->has_label(0, 0));
  for (const auto& t : enumerate_types({"p"}, 1, 1)) {
    if (t->children.size() == 1 && t->children[0].first->labels == 1u) {
      auto r = realizing_tree(*t);
      EXPECT_EQ(r.graph->size(), 2);
      EXPECT_TRUE(r.graph->has_label(1, 0));
    }
  }
}

TEST(RealizingTree, RoundTripAndFormula) {
  for (auto [k, n] : std::vector<std::pair<int, int>>{{1, 0}, {1, 1}, {2, 1}, {1, 2}}) {
    for (const auto& t : enumerate_types({"p"}, k, n)) {
      auto tree = realizing_tree(*t);
      EXPECT_EQ(*graded_type(tree, k, n), *t) << type_to_string(*t);
      EXPECT_TRUE(eval_gml(tree, type_to_formula(*t))) << type_to_string(*t);
    }
  }
}

// Each pointed graph satisfies exactly the formula of its own type.
TEST(TypeFormula, ExclusiveAndExhaustive) {
  for (auto [k, n] : std::vector<std::pair<int, int>>{{1, 1}, {2, 1}, {1, 2}}) {
    auto ts = enumerate_types({"p"}, k, n);
    std::vector<Formula> fs;
    for (const auto& t : ts) fs.push_back(type_to_formula(*t));
    for_each_graph({"p"}, k == 1 && n == 2 ? 2 : 3, [&](const LabeledGraph& g) {
      for (int v = 0; v < g.size(); ++v) {
        auto own = graded_type(PointedGraph(std::make_shared<const LabeledGraph>(g), v), k, n);
        int hits = 0;
        for (std::size_t i = 0; i < ts.size(); ++i) {
          bool h = oracle::holds(g, v, fs[i]);
          hits += h;
          if (h) {
            ASSERT_EQ(*ts[i], *own);
          }
        }
        ASSERT_EQ(hits, 1);
      }
    });
  }
}

TEST(TypeDisjunction, Examples) {
  EXPECT_EQ(gml_to_type_disjunction(top(), {"p"}, 1, 1).size(), 8u);
  EXPECT_TRUE(gml_to_type_disjunction(conj(prop("p"), neg(prop("p"))), {"p"}, 1, 1).empty());
  EXPECT_THROW(gml_to_type_disjunction(dia(2, top()), {"p"}, 1, 1), Error);
  EXPECT_THROW(gml_to_type_disjunction(dia(1, dia(1, top())), {"p"}, 1, 1), Error);
  EXPECT_THROW(gml_to_type_disjunction(var("X"), {"p"}, 1, 1), Error);
}

TEST(TypeDisjunction, SoundOnSmallGraphs) {
  std::mt19937_64 rng(2);
  auto points = enumerate_pointed_graphs({"p"}, 3);
  for (int n = 0; n <= 1; ++n) {
    for (int i = 0; i < 25; ++i) {
      Formula f = corpus::random_formula(rng, {"p"}, 4, false, 1);
      if (f->modal_depth > n) continue;
      auto ts = gml_to_type_disjunction(f, {"p"}, 1, n);
      for (const auto& pg : points)
        ASSERT_EQ(oracle::holds(*pg.graph, pg.point, f), contains(ts, graded_type(pg, 1, n))) << to_string(f);
    }
  }
}

TEST(TypeAutomaton, MatchesGradedType) {
  auto loop = parse_graph(R"({"pi":["p"],"nodes":[{"id":"a","labels":["p"]}],"edges":[["a","a"]]})");
  EXPECT_EQ(*simulate_type_automaton(PointedGraph(loop, "a"), 1, 2), *graded_type(PointedGraph(loop, "a"), 1, 2));
  auto points = enumerate_pointed_graphs({"p"}, 2);
  for (int k = 1; k <= 2; ++k)
    for (int n = 0; n <= 2; ++n)
      for (const auto& pg : points) ASSERT_EQ(*simulate_type_automaton(pg, k, n), *graded_type(pg, k, n));
}

TEST(TypeAutomaton, FullTypeStates) {
  for (const auto& g : sample_graphs({"p"}, 4, 20, 6)) {
    auto states = full_type_states(g, 2);
    auto sg = std::make_shared<const LabeledGraph>(g);
    for (int v = 0; v < g.size(); ++v) EXPECT_EQ(*states[v], *full_type(PointedGraph(sg, v), 2));
  }
}
