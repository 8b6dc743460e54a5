#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = gnnlogic::cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return std::string(GNNLOGIC_DATA_DIR) + "/" + name; }

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string temp_file(const std::string& name, const std::string& text) {
  auto p = std::filesystem::temp_directory_path() / ("gnnlogic_cli_" + name);
  std::ofstream(p) << text;
  return p.string();
}

}  // namespace

TEST(Cli, Version) {
  auto r = cli({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_FALSE(r.out.empty());
}

TEST(Cli, Usage) {
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"bogus"}).code, 2);
  EXPECT_EQ(cli({"eval", "--formula", "p"}).code, 2);
  EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST(Cli, Eval) {
  auto r = cli({"eval", "--formula", "<1> p", "--graph", data("path2.json"), "--node", "w"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "true\n");
  EXPECT_EQ(cli({"eval", "--formula", "<1> p", "--graph", data("path2.json"), "--node", "u"}).out, "false\n");
  auto j = cli({"eval", "--json", "--formula", "p", "--graph", data("path2.json"), "--node", "u"});
  EXPECT_EQ(nlohmann::json::parse(j.out)["value"], true);
  EXPECT_EQ(cli({"eval", "--formula", "<1 p", "--graph", data("path2.json"), "--node", "u"}).code, 2);
  EXPECT_EQ(cli({"eval", "--formula", "p", "--graph", data("path2.json"), "--node", "zz"}).code, 2);
}

TEST(Cli, Simulate) {
  auto r = cli({"simulate", "--program", data("reach.gmsc"), "--graph", data("path2.json"), "--rounds", "2"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "round 0: w={} u={X}*\nround 1: w={X}* u={}\nround 2: w={} u={}\n");
  auto t = cli({"simulate", "--automaton", data("reach.fcmpa.json"), "--graph", data("path2.json"), "--trace"});
  EXPECT_EQ(t.out,
            "round 0: w={} u={p,X}*\nround 1: w={X}* u={p}\nround 2: w={} u={p}\ncycle: mu=2 lambda=1\n");
  auto g = cli({"simulate", "--gnn", data("reach.gnn.json"), "--graph", data("path2.json"), "--rounds", "0"});
  EXPECT_EQ(g.code, 0);
  EXPECT_EQ(g.out.rfind("round 0: w=(", 0), 0u);
}

TEST(Cli, Accepts) {
  auto r = cli({"accepts", "--machine", data("reach.gmsc"), "--graph", data("path2.json"), "--node", "w"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "accept at round 1\n");
  auto f = cli({"accepts", "--machine", data("reach.gnn.json"), "--graph", data("path2.json"), "--node", "w",
                "--classifier", "fixed-point"});
  EXPECT_EQ(f.code, 1);
  EXPECT_EQ(f.out, "reject\n");
  auto a = cli({"accepts", "--machine", data("reach.fcmpa.json"), "--graph", data("path2.json"), "--node", "u"});
  EXPECT_EQ(a.out, "accept at round 0\n");
  EXPECT_EQ(cli({"accepts", "--machine", data("missing.gmsc"), "--graph", data("path2.json"), "--node", "w"}).code, 2);
  EXPECT_EQ(cli({"accepts", "--machine", data("reach.gmsc"), "--graph", data("path2.json"), "--node", "w",
                 "--classifier", "sometimes"})
                .code,
            2);
}

TEST(Cli, CeilingIsGuardExit) {
  auto prog = temp_file("osc.gmsc", "pi: p;\nX(0) :- top;\nX :- !X;\nappointed: X;\n");
  auto r = cli({"accepts", "--machine", prog, "--graph", data("path2.json"), "--node", "w", "--ceiling", "1"});
  EXPECT_EQ(r.code, 3);
}

TEST(Cli, TranslateMatchesSamples) {
  auto f = cli({"translate", "--from", "gmsc", "--to", "fcmpa", "--input", data("reach.gmsc")});
  EXPECT_EQ(f.code, 0);
  EXPECT_EQ(nlohmann::json::parse(f.out), nlohmann::json::parse(slurp(data("reach.fcmpa.json"))));
  auto g = cli({"translate", "--from", "gmsc", "--to", "rsimple", "--input", data("reach.gmsc")});
  EXPECT_EQ(nlohmann::json::parse(g.out), nlohmann::json::parse(slurp(data("reach.gnn.json"))));
  auto n = cli({"translate", "--from", "gmsc", "--to", "normal-form", "--input", data("reach.gmsc")});
  EXPECT_EQ(n.out, "pi: p;\nX(0) :- p;\nX :- <1> X;\nappointed: X;\n");
  auto out = (std::filesystem::temp_directory_path() / "gnnlogic_cli_reach.gnn.json").string();
  EXPECT_EQ(cli({"translate", "--from", "gmsc", "--to", "rsimple", "--input", data("reach.gmsc"), "--out", out}).code, 0);
  EXPECT_EQ(nlohmann::json::parse(slurp(out)), nlohmann::json::parse(slurp(data("reach.gnn.json"))));
  auto back = cli({"translate", "--from", "fcmpa", "--to", "gmsc", "--input", data("reach.fcmpa.json")});
  EXPECT_EQ(back.code, 0);
  EXPECT_NO_THROW(gnnlogic::parse_program(back.out));
  EXPECT_EQ(cli({"translate", "--from", "gmsc", "--to", "nowhere", "--input", data("reach.gmsc")}).code, 2);
}

TEST(Cli, TranslateTypes) {
  auto r = cli({"translate", "--from", "gml", "--to", "gml-types", "--formula", "<1> p", "--pi", "p", "--width", "1",
                "--depth", "1"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "{}[{p}:1]\n{}[{}:1, {p}:1]\n{p}[{p}:1]\n{p}[{}:1, {p}:1]\n");
}

TEST(Cli, CheckEquiv) {
  auto r = cli({"check-equiv", "--a", data("reach.gmsc"), "--b", data("reach.fcmpa.json"), "--exhaustive", "2"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "equivalent: 68 graphs, 132 points, exhaustive<=2, standard\n");
  auto s = cli({"check-equiv", "--a", data("reach.gmsc"), "--b", data("reach.gnn.json"), "--samples", "30", "--seed",
                "4", "--max-nodes", "5", "--jobs", "2"});
  EXPECT_EQ(s.code, 0);
  auto centre = temp_file("centre.gmsc", "pi: p;\nX(0) :- [] bot;\nX :- (<1> X & [] X);\nappointed: X;\n");
  auto report = (std::filesystem::temp_directory_path() / "gnnlogic_cli_report.json").string();
  auto c = cli({"check-equiv", "--a", data("reach.gmsc"), "--b", centre, "--exhaustive", "3", "--out", report});
  EXPECT_EQ(c.code, 1);
  EXPECT_EQ(c.out.rfind("counterexample:", 0), 0u);
  auto j = nlohmann::json::parse(slurp(report));
  EXPECT_EQ(j["verdict"], "counterexample");
  EXPECT_EQ(j["counterexamples"].size(), 1u);
  EXPECT_EQ(cli({"check-equiv", "--a", data("reach.gmsc"), "--b", centre, "--exhaustive", "9"}).code, 2);
}

TEST(Cli, EnumerationGuardExit) {
  auto prog = temp_file("wide.gmsc", "X(0) :- (((a & b) & (c & d)) & e);\nX :- X;\nappointed: X;\n");
  EXPECT_EQ(cli({"check-equiv", "--a", prog, "--b", prog, "--exhaustive", "3"}).code, 3);
}

TEST(Cli, Float) {
  EXPECT_EQ(cli({"float", "--system", "p=3,n=1,beta=10", "--add", "0.312", "0.743"}).out, "1.06\n");
  EXPECT_EQ(cli({"float", "--system", "p=2,n=1,beta=10", "--mul", "0.5", "0.5"}).out, "0.25\n");
  auto sum = temp_file("sum.txt", "1\n-1\n0.01\n");
  EXPECT_EQ(cli({"float", "--system", "p=2,n=1,beta=10", "--sum-file", sum}).out, "0.01\n");
  EXPECT_EQ(cli({"float", "--system", "p=1,n=1,beta=2", "--bound"}).out, "bound 7\nexact 5\n");
  auto j = cli({"--json", "float", "--system", "p=3,n=1,beta=10", "--add", "0.312", "0.743"});
  EXPECT_EQ(nlohmann::json::parse(j.out)["literal"], "+0.106e1");
  EXPECT_EQ(cli({"float", "--system", "p=0,n=1,beta=10", "--bound"}).code, 2);
}

TEST(Cli, Type) {
  auto r = cli({"type", "--graph", data("path2.json"), "--node", "w", "--depth", "1", "--formula"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "{}[{p}:1]\n((!p & <1> p) & [] p)\n");
}
