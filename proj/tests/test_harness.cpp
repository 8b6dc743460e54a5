#include <gtest/gtest.h>

#include "corpus.hpp"
#include "gnnlogic/gnnlogic.hpp"
#include "oracles.hpp"

using namespace gnnlogic;

namespace {

const Classifier kStandard = parse_classifier("standard");

nlohmann::json stable(const EquivReport& r) {
  auto j = r.to_json();
  j.erase("seconds");
  return j;
}

}  // namespace

TEST(Harness, ReachAgainstAutomaton) {
  auto prog = parse_program(corpus::kReach);
  auto r = check_acceptance_equiv(make_machine(prog), make_machine(compact(gmsc1_to_fcmpa(prog))), kStandard,
                                  GraphSource::exhaustive(3));
  EXPECT_TRUE(r.equivalent);
  EXPECT_EQ(r.graphs, 4u + 64u + 4096u);
  EXPECT_EQ(r.points, oracle::pointed_graph_count(1, 3));
  EXPECT_EQ(r.mode, "acceptance");
  EXPECT_EQ(r.source, "exhaustive<=3");
}

TEST(Harness, SelfEquivalence) {
  for (const auto& e : corpus::programs()) {
    auto m = make_machine(e.program);
    EXPECT_TRUE(check_acceptance_equiv(m, m, kStandard, GraphSource::sampled(5, 50, 3)).equivalent) << e.name;
  }
}

TEST(Harness, ReachAgainstCentre) {
  auto reach = make_machine(parse_program(corpus::kReach), "reach");
  auto centre = make_machine(parse_program(std::string("pi: p;\n") + corpus::kCentre), "centre");
  auto r = check_acceptance_equiv(reach, centre, kStandard, GraphSource::exhaustive(3));
  ASSERT_FALSE(r.equivalent);
  ASSERT_EQ(r.counterexamples.size(), 1u);
  const auto& c = r.counterexamples[0];
  EXPECT_EQ(r.graphs, c.graph_index + 1);
  bool a = classify(trace(reach, c.graph), c.node, kStandard);
  bool b = classify(trace(centre, c.graph), c.node, kStandard);
  EXPECT_NE(a, b);
  EXPECT_EQ(c.verdict_a, a ? "accept" : "reject");
  EXPECT_EQ(c.verdict_b, b ? "accept" : "reject");
  auto j = r.to_json();
  EXPECT_EQ(j["verdict"], "counterexample");
  EXPECT_EQ(parse_graph(j["counterexamples"][0]["graph"].dump()).size(), c.graph.size());
}

TEST(Harness, CollectAll) {
  auto reach = make_machine(parse_program(corpus::kReach));
  auto centre = make_machine(parse_program(std::string("pi: p;\n") + corpus::kCentre));
  HarnessOptions opt;
  opt.collect_all = true;
  auto r = check_acceptance_equiv(reach, centre, kStandard, GraphSource::exhaustive(2), opt);
  EXPECT_EQ(r.graphs, 68u);
  std::size_t brute = 0;
  for (const auto& g : source_graphs(GraphSource::exhaustive(2), {"p"})) {
    auto ta = trace(reach, g), tb = trace(centre, g);
    for (int v = 0; v < g.size(); ++v) brute += classify(ta, v, kStandard) != classify(tb, v, kStandard);
  }
  EXPECT_EQ(r.counterexamples.size(), brute);
}

TEST(Harness, ParallelIsDeterministic) {
  auto reach = make_machine(parse_program(corpus::kReach));
  auto centre = make_machine(parse_program(std::string("pi: p;\n") + corpus::kCentre));
  for (bool all : {false, true}) {
    HarnessOptions one, four;
    one.collect_all = four.collect_all = all;
    four.jobs = 4;
    auto a = check_acceptance_equiv(reach, centre, kStandard, GraphSource::exhaustive(3), one);
    auto b = check_acceptance_equiv(reach, centre, kStandard, GraphSource::exhaustive(3), four);
    EXPECT_EQ(stable(a), stable(b));
  }
}

TEST(Harness, DifferentAlphabets) {
  auto reach = make_machine(parse_program(corpus::kReach));
  auto centre = make_machine(parse_program(corpus::kCentre));
  EXPECT_THROW(check_acceptance_equiv(reach, centre, kStandard, GraphSource::exhaustive(1)), Error);
}

TEST(Harness, CeilingBecomesCounterexample) {
  auto clock = make_machine(corpus::clock_automaton());
  HarnessOptions opt;
  opt.ceiling = 1;
  auto r = check_acceptance_equiv(clock, clock, kStandard, GraphSource::exhaustive(1), opt);
  ASSERT_FALSE(r.equivalent);
  EXPECT_EQ(r.counterexamples[0].verdict_a, "?");
  EXPECT_FALSE(r.counterexamples[0].note.empty());
}

TEST(RunCorrespondence, ProgramAndAutomaton) {
  for (const auto& e : corpus::programs()) {
    auto nf = to_normal_form(e.program);
    auto r = check_run_correspondence(make_machine(nf), make_machine(gmsc1_to_fcmpa(nf)), program_state_set_decoder(nf),
                                      identity_decode, 1, 0, GraphSource::exhaustive(2), 6);
    EXPECT_TRUE(r.equivalent) << e.name;
    EXPECT_EQ(r.mode, "run-correspondence");
  }
}

TEST(RunCorrespondence, NormalForm) {
  for (const auto& e : corpus::programs()) {
    auto nf = to_normal_form(e.program);
    auto timing = normal_form_timing(e.program);
    auto r = check_run_correspondence(make_machine(e.program), make_machine(nf),
                                      program_heads_decoder(e.program, e.program.heads),
                                      program_heads_decoder(nf, e.program.heads), timing.period, timing.offset,
                                      GraphSource::exhaustive(2), 4);
    EXPECT_TRUE(r.equivalent) << e.name;
  }
}

TEST(RunCorrespondence, DetectsWrongRate) {
  auto prog = corpus::find("random").program;
  auto comp = compile_rsimple(prog);
  auto r = check_run_correspondence(make_machine(prog), make_machine(comp.gnn), program_heads_decoder(prog, prog.heads),
                                    rsimple_heads_decoder(comp, prog.heads), comp.period() + 1, comp.period(),
                                    GraphSource::exhaustive(2), 4);
  EXPECT_FALSE(r.equivalent);
  ASSERT_EQ(r.counterexamples.size(), 1u);
  EXPECT_TRUE(r.counterexamples[0].round_a.has_value());
  EXPECT_THROW(check_run_correspondence(make_machine(prog), make_machine(prog), identity_decode, identity_decode, 0, 0,
                                        GraphSource::exhaustive(1), 1),
               Error);
}

// One flipped matrix entry in a compiled GNN is caught.
TEST(Mutation, FlippedMatrixEntry) {
  auto prog = parse_program(corpus::kReach);
  auto comp = compile_rsimple(prog);
  auto mutated = comp.gnn;
  auto& A = mutated.transition.rsimple->A;
  bool flipped = false;
  for (auto& row : A)
    for (auto& x : row)
      if (!flipped && x.mant) {
        x = float_zero(x.sys);
        flipped = true;
      }
  ASSERT_TRUE(flipped);
  auto r = check_acceptance_equiv(make_machine(prog), make_machine(mutated), kStandard, GraphSource::exhaustive(3));
  EXPECT_FALSE(r.equivalent);
}

TEST(Mutation, AlteredTransition) {
  auto prog = parse_program(corpus::kReach);
  auto a = compact(gmsc1_to_fcmpa(prog));
  auto altered = a;
  altered.transition = [a](int q, const StateMultiset& l, const StateMultiset& gm) {
    int r = a.next(q, l, gm);
    return q == 0 && !l.empty() ? 0 : r;
  };
  auto r = check_acceptance_equiv(make_machine(prog), make_machine(altered), kStandard, GraphSource::exhaustive(3));
  EXPECT_FALSE(r.equivalent);
}

TEST(Mutation, DroppedAppointedPredicate) {
  auto prog = parse_program("X(0) :- p;\nY(0) :- bot;\nX :- X;\nY :- <1> X;\nappointed: X, Y;\n");
  auto dropped = prog;
  dropped.appointed = {"X"};
  auto r = check_acceptance_equiv(make_machine(prog), make_machine(dropped), kStandard, GraphSource::exhaustive(3));
  EXPECT_FALSE(r.equivalent);
}
