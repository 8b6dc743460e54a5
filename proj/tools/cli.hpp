#pragma once

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gnnlogic/gnnlogic.hpp"

namespace gnnlogic::cli {

enum ExitCode { kOk = 0, kRejected = 1, kUsage = 2, kGuard = 3 };

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw parse_error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw invalid_error("cannot write '" + path + "'");
  f << text;
}

inline bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Machine kind from --kind, else from the file extension.
inline std::string machine_kind(const std::string& path, const std::string& kind) {
  if (!kind.empty()) {
    if (kind != "gmsc" && kind != "fcmpa" && kind != "gnn") throw parse_error("unknown machine kind '" + kind + "'");
    return kind;
  }
  if (ends_with(path, ".gmsc")) return "gmsc";
  if (ends_with(path, ".fcmpa.json")) return "fcmpa";
  if (ends_with(path, ".gnn.json")) return "gnn";
  throw parse_error("cannot infer the machine kind of '" + path + "'; use --kind");
}

inline Machine load_machine(const std::string& path, const std::string& kind) {
  std::string k = machine_kind(path, kind);
  std::string text = read_file(path);
  if (k == "gmsc") return make_machine(parse_program(text), path);
  if (k == "fcmpa") return make_machine(parse_fcmpa(text), path);
  return make_machine(parse_gnn(text), path);
}

inline LabeledGraph load_graph(const std::string& path) { return parse_graph(read_file(path)); }

inline std::string state_text(const Machine& m, const NodeState& s) {
  switch (m.kind) {
    case Machine::Kind::program: {
      std::string r = "{";
      bool first = true;
      for (std::size_t h = 0; h < s.size(); ++h)
        if (s[h]) {
          r += (first ? "" : ",") + m.program->heads[h];
          first = false;
        }
      return r + "}";
    }
    case Machine::Kind::automaton:
      return m.automaton->name_of(int(s[0]));
    case Machine::Kind::gnn: {
      std::string r = "(";
      for (std::size_t i = 0; i < s.size(); ++i)
        r += (i ? "," : "") + to_decimal(from_scaled_key(m.gnn->system, s[i]));
      return r + ")";
    }
    case Machine::Kind::nlayer:
      break;
  }
  return "?";
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cross-compiler and exact simulator for GMSC programs, counting message-passing automata and "
               "floating-point GNNs over labeled graphs.",
               "gnnlogic"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();
  bool json = false;
  app.add_flag("--json", json, "Machine-readable JSON output");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a GML formula at a node");
  std::string formula, graph_path, node;
  eval_cmd->add_option("--formula", formula, "GML formula")->required();
  eval_cmd->add_option("--graph", graph_path, "Graph JSON file")->required();
  eval_cmd->add_option("--node", node, "Node id")->required();

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate a machine on a graph");
  std::string program_path, automaton_path, gnn_path, kind;
  int rounds = 5;
  bool show_trace = false;
  auto* o_prog = sim_cmd->add_option("--program", program_path, "GMSC program file");
  auto* o_aut = sim_cmd->add_option("--automaton", automaton_path, "Automaton JSON file");
  auto* o_gnn = sim_cmd->add_option("--gnn", gnn_path, "GNN JSON file");
  o_prog->excludes(o_aut)->excludes(o_gnn);
  o_aut->excludes(o_gnn);
  sim_cmd->add_option("--graph", graph_path, "Graph JSON file")->required();
  auto* o_rounds = sim_cmd->add_option("--rounds", rounds, "Number of rounds to show")->check(CLI::NonNegativeNumber);
  auto* o_trace = sim_cmd->add_flag("--trace", show_trace, "Run until the configuration repeats");
  o_rounds->excludes(o_trace);

  // accepts
  auto* acc_cmd = app.add_subcommand("accepts", "Decide acceptance at a node");
  std::string machine_path, classifier_text = "standard";
  int ceiling = kDefaultCeiling;
  acc_cmd->add_option("--machine", machine_path, "Machine file (.gmsc, .fcmpa.json, .gnn.json)")->required();
  acc_cmd->add_option("--kind", kind, "Machine kind override: gmsc, fcmpa, gnn");
  acc_cmd->add_option("--graph", graph_path, "Graph JSON file")->required();
  acc_cmd->add_option("--node", node, "Node id")->required();
  acc_cmd->add_option("--classifier", classifier_text, "standard | fixed-point | buchi | graph-size:<expr> | convergence");
  acc_cmd->add_option("--ceiling", ceiling, "Trace round ceiling")->check(CLI::PositiveNumber);

  // translate
  auto* tr_cmd = app.add_subcommand("translate", "Translate between machine models");
  std::string from, to, input, out_path, mode_text = "standard", head, pi_text;
  int width = 1, depth = 0, round_n = 0;
  tr_cmd->add_option("--from", from, "gmsc | fcmpa | gml")->required();
  tr_cmd->add_option("--to", to, "normal-form | balanced | fcmpa | rsimple | gml-types | gmsc")->required();
  tr_cmd->add_option("--input", input, "Input machine file");
  tr_cmd->add_option("--formula", formula, "GML formula (--from gml)");
  tr_cmd->add_option("--pi", pi_text, "Comma-separated label alphabet (--from gml)");
  tr_cmd->add_option("--head", head, "Head predicate whose iteration formula is translated (--to gml-types)");
  tr_cmd->add_option("--round", round_n, "Round of the iteration formula (--to gml-types)");
  tr_cmd->add_option("--width", width, "Type width k")->check(CLI::PositiveNumber);
  tr_cmd->add_option("--depth", depth, "Type depth n")->check(CLI::NonNegativeNumber);
  tr_cmd->add_option("--mode", mode_text, "R-simple mode: standard | fixed-point | buchi | convergence");
  tr_cmd->add_option("--out", out_path, "Output path (default stdout)");

  // check-equiv
  auto* eq_cmd = app.add_subcommand("check-equiv", "Check acceptance equivalence of two machines");
  std::string a_path, b_path, a_kind, b_kind;
  int exhaustive = -1, samples = -1, max_nodes = 6, jobs = 1;
  std::uint64_t seed = 0;
  bool collect_all = false;
  eq_cmd->add_option("--a", a_path, "First machine file")->required();
  eq_cmd->add_option("--b", b_path, "Second machine file")->required();
  eq_cmd->add_option("--kind-a", a_kind, "Kind override for --a");
  eq_cmd->add_option("--kind-b", b_kind, "Kind override for --b");
  eq_cmd->add_option("--classifier", classifier_text, "Classifier spec");
  auto* o_ex = eq_cmd->add_option("--exhaustive", exhaustive, "All graphs with at most N nodes")->check(CLI::Range(1, 5));
  auto* o_sa = eq_cmd->add_option("--samples", samples, "Number of sampled graphs")->check(CLI::PositiveNumber);
  o_ex->excludes(o_sa);
  eq_cmd->add_option("--seed", seed, "Sampler seed");
  eq_cmd->add_option("--max-nodes", max_nodes, "Largest sampled graph")->check(CLI::Range(1, 64));
  eq_cmd->add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1, 256));
  eq_cmd->add_option("--ceiling", ceiling, "Trace round ceiling")->check(CLI::PositiveNumber);
  eq_cmd->add_flag("--collect-all", collect_all, "Report every counterexample");
  eq_cmd->add_option("--out", out_path, "Write the report JSON here");

  // float
  auto* fl_cmd = app.add_subcommand("float", "Floating-point system arithmetic");
  std::string system_text, sum_file;
  std::vector<std::string> add_args, mul_args;
  bool bound = false;
  fl_cmd->add_option("--system", system_text, "p=..,n=..,beta=..")->required();
  auto* o_sum = fl_cmd->add_option("--sum-file", sum_file, "File of values to sum with SUM_S");
  auto* o_bound = fl_cmd->add_flag("--bound", bound, "Print the stabilization bound");
  auto* o_add = fl_cmd->add_option("--add", add_args, "Add two values")->expected(2);
  auto* o_mul = fl_cmd->add_option("--mul", mul_args, "Multiply two values")->expected(2);
  o_sum->excludes(o_bound)->excludes(o_add)->excludes(o_mul);
  o_bound->excludes(o_add)->excludes(o_mul);
  o_add->excludes(o_mul);

  // type
  auto* ty_cmd = app.add_subcommand("type", "Graded type of a pointed graph");
  bool full = false;
  ty_cmd->add_option("--graph", graph_path, "Graph JSON file")->required();
  ty_cmd->add_option("--node", node, "Node id")->required();
  ty_cmd->add_option("--width", width, "Width k")->check(CLI::PositiveNumber);
  ty_cmd->add_option("--depth", depth, "Depth n")->required()->check(CLI::NonNegativeNumber);
  ty_cmd->add_flag("--full", full, "Full type with exact counts");
  ty_cmd->add_flag("--formula", show_trace, "Also print the defining formula");

  std::vector<const char*> argv{"gnnlogic"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*eval_cmd) {
      auto g = std::make_shared<const LabeledGraph>(load_graph(graph_path));
      Formula f = parse_formula(formula);
      bool r = eval_gml(PointedGraph(g, g->index_of(node)), f);
      if (json) out << nlohmann::json{{"formula", to_string(f)}, {"node", node}, {"value", r}}.dump() << "\n";
      else out << (r ? "true" : "false") << "\n";
      return kOk;
    }

    if (*sim_cmd) {
      Machine m;
      if (!program_path.empty()) m = load_machine(program_path, "gmsc");
      else if (!automaton_path.empty()) m = load_machine(automaton_path, "fcmpa");
      else if (!gnn_path.empty()) m = load_machine(gnn_path, "gnn");
      else throw parse_error("simulate needs --program, --automaton or --gnn");
      LabeledGraph g = load_graph(graph_path);
      int shown = rounds;
      std::optional<RunTrace> t;
      if (show_trace) {
        t = trace(m, g);
        shown = t->length() - 1;
      }
      auto r = m.runner(g);
      nlohmann::json j;
      j["rounds"] = nlohmann::json::array();
      for (int n = 0; n <= shown; ++n) {
        if (n) r->step();
        nlohmann::json row;
        row["round"] = n;
        std::string line = "round " + std::to_string(n) + ":";
        for (int v = 0; v < g.size(); ++v) {
          std::string st = state_text(m, r->node_state(v));
          bool acc = r->accepting(v);
          row["nodes"][g.id(v)] = {{"state", st}, {"accepting", acc}};
          line += " " + g.id(v) + "=" + st + (acc ? "*" : "");
        }
        j["rounds"].push_back(row);
        if (!json) out << line << "\n";
      }
      if (t) {
        j["mu"] = t->mu;
        j["lambda"] = t->lambda;
        if (!json) out << "cycle: mu=" << t->mu << " lambda=" << t->lambda << "\n";
      }
      if (json) out << j.dump() << "\n";
      return kOk;
    }

    if (*acc_cmd) {
      Machine m = load_machine(machine_path, kind);
      LabeledGraph g = load_graph(graph_path);
      Classifier c = parse_classifier(classifier_text);
      int v = g.index_of(node);
      RunTrace t = trace(m, g, ceiling);
      bool r = classify(t, v, c);
      auto first = first_accepting_round(t, v);
      if (json) {
        nlohmann::json j{{"accept", r}, {"classifier", c.spec()}, {"mu", t.mu}, {"lambda", t.lambda}};
        if (first) j["first_round"] = *first;
        out << j.dump() << "\n";
      } else if (r && c.kind == Classifier::Kind::standard) {
        out << "accept at round " << *first << "\n";
      } else {
        out << (r ? "accept" : "reject") << "\n";
      }
      return r ? kOk : kRejected;
    }

    if (*tr_cmd) {
      if (from == "gml") {
        if (to != "gml-types") throw parse_error("--from gml only translates to gml-types");
        std::vector<std::string> pi;
        std::stringstream ss(pi_text);
        for (std::string p; std::getline(ss, p, ',');)
          if (!p.empty()) pi.push_back(p);
        Formula f = parse_formula(formula);
        auto types = gml_to_type_disjunction(f, pi, width, depth);
        nlohmann::json j = nlohmann::json::array();
        std::string text;
        for (const auto& t : types) {
          j.push_back(type_to_string(*t));
          text += type_to_string(*t) + "\n";
        }
        write_output(out_path, json ? j.dump() + "\n" : text, out);
        return kOk;
      }
      if (input.empty()) throw parse_error("--input is required");
      if (from == "gmsc") {
        GmscProgram p = parse_program(read_file(input));
        std::string result;
        if (to == "normal-form") {
          result = program_to_string(to_normal_form(p));
        } else if (to == "balanced") {
          result = program_to_string(balance(p));
        } else if (to == "fcmpa") {
          result = fcmpa_to_json(compact(gmsc1_to_fcmpa(to_normal_form(p)))).dump(2) + "\n";
        } else if (to == "rsimple") {
          RSimpleMode mode;
          if (mode_text == "standard") mode = RSimpleMode::standard;
          else if (mode_text == "fixed-point") mode = RSimpleMode::fixed_point;
          else if (mode_text == "buchi") mode = RSimpleMode::buchi;
          else if (mode_text == "convergence") mode = RSimpleMode::convergence;
          else throw parse_error("unknown mode '" + mode_text + "'");
          result = gnn_to_json(gmsc_to_rsimple(p, mode)).dump() + "\n";
        } else if (to == "gml-types") {
          if (head.empty()) throw parse_error("--head is required for gml-types");
          Formula f = iteration_formula(p, head, round_n);
          std::string text;
          for (const auto& t : gml_to_type_disjunction(f, p.pi, width, std::max(depth, f->modal_depth)))
            text += type_to_string(*t) + "\n";
          result = text;
        } else {
          throw parse_error("unknown target '" + to + "'");
        }
        write_output(out_path, result, out);
        return kOk;
      }
      if (from == "fcmpa") {
        Fcmpa a = parse_fcmpa(read_file(input));
        if (to != "gmsc") throw parse_error("--from fcmpa only translates to gmsc");
        write_output(out_path, program_to_string(fcmpa_to_gmsc(a)), out);
        return kOk;
      }
      throw parse_error("unknown source '" + from + "'");
    }

    if (*eq_cmd) {
      Machine a = load_machine(a_path, a_kind);
      Machine b = load_machine(b_path, b_kind);
      Classifier c = parse_classifier(classifier_text);
      GraphSource src;
      if (samples > 0) src = GraphSource::sampled(max_nodes, samples, seed);
      else src = GraphSource::exhaustive(exhaustive > 0 ? exhaustive : 3);
      if (src.kind == GraphSource::Kind::exhaustive) check_enumeration_guard(int(a.pi().size()), src.max_nodes);
      HarnessOptions opt;
      opt.jobs = jobs;
      opt.collect_all = collect_all;
      opt.ceiling = ceiling;
      EquivReport r = check_acceptance_equiv(a, b, c, src, opt);
      std::string report = r.to_json().dump(2) + "\n";
      if (!out_path.empty()) write_output(out_path, report, out);
      if (json) {
        out << r.to_json().dump() << "\n";
      } else {
        out << (r.equivalent ? "equivalent" : "counterexample") << ": " << r.graphs << " graphs, " << r.points
            << " points, " << src.spec() << ", " << c.spec() << "\n";
        if (!r.equivalent) {
          const auto& ce = r.counterexamples.front();
          out << "node " << ce.graph.id(ce.node) << ": a=" << ce.verdict_a << " b=" << ce.verdict_b << "\n";
          out << graph_to_json(ce.graph).dump() << "\n";
        }
      }
      return r.equivalent ? kOk : kRejected;
    }

    if (*fl_cmd) {
      FloatSystem s = FloatSystem::parse(system_text);
      auto emit = [&](const Float& x) {
        if (json) out << nlohmann::json{{"value", to_decimal(x)}, {"literal", to_literal(x)}}.dump() << "\n";
        else out << to_decimal(x) << "\n";
      };
      if (!add_args.empty()) {
        emit(add(parse_value(s, add_args[0]), parse_value(s, add_args[1])));
      } else if (!mul_args.empty()) {
        emit(mul(parse_value(s, mul_args[0]), parse_value(s, mul_args[1])));
      } else if (!sum_file.empty()) {
        std::stringstream ss(read_file(sum_file));
        std::vector<Float> xs;
        for (std::string t; ss >> t;) xs.push_back(parse_value(s, t));
        emit(sum_sorted(s, xs));
      } else if (bound) {
        long long b = sum_bound(s);
        long long exact = sum_bound_exact(s);
        if (json) out << nlohmann::json{{"bound", b}, {"exact", exact}}.dump() << "\n";
        else out << "bound " << b << "\nexact " << exact << "\n";
      } else {
        throw parse_error("float needs --add, --mul, --sum-file or --bound");
      }
      return kOk;
    }

    if (*ty_cmd) {
      auto g = std::make_shared<const LabeledGraph>(load_graph(graph_path));
      PointedGraph pg(g, g->index_of(node));
      TypePtr t = full ? full_type(pg, depth) : graded_type(pg, width, depth);
      if (json) {
        nlohmann::json j{{"type", type_to_string(*t)}};
        if (show_trace) j["formula"] = to_string(type_to_formula(*t));
        out << j.dump() << "\n";
      } else {
        out << type_to_string(*t) << "\n";
        if (show_trace) out << to_string(type_to_formula(*t)) << "\n";
      }
      return kOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::guard:
      case ErrorKind::ceiling:
        return kGuard;
      default:
        return kUsage;
    }
  }
  return kUsage;
}

}  // namespace gnnlogic::cli
