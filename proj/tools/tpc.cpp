#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <json.hpp>
#include <random>

#include "tpc/error.hpp"
#include "tpc/inclu.hpp"
#include "tpc/pipeline.hpp"

using namespace tpc;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kSchema = "tpc-cli/1";

int log_level() {
  const char* v = std::getenv("TPC_LOG");
  if (!v) return 0;
  std::string s = v;
  if (s == "debug" || s == "2") return 2;
  if (s == "info" || s == "1") return 1;
  return 0;
}

void note(int level, const std::string& msg) {
  if (log_level() >= level) std::cerr << "[tpc] " << msg << "\n";
}

struct Globals {
  bool json = false;
  unsigned seed = 1;
  std::size_t max_depth = 8;
  bool no_selfcheck = false;
};

json envelope(const std::string& command) { return json{{"schema", kSchema}, {"command", command}}; }

void emit(const Globals& g, const json& j, const std::string& text) {
  if (g.json)
    std::cout << j.dump(2) << "\n";
  else
    std::cout << text;
}

json charfn_json(const SymbolicCharFn& f) {
  json branches = json::array();
  for (const auto& b : f.branches) {
    json bounds = json::array();
    for (const auto& [r, bound] : b.bounds) bounds.push_back(bound.str(r));
    json atoms = json::array();
    for (const auto& a : b.atoms.atoms) atoms.push_back(a.str());
    json groups = json::array();
    for (const auto& gr : b.atoms.groups) groups.push_back(gr.str());
    branches.push_back({{"bounds", bounds}, {"atoms", atoms}, {"groups", groups}});
  }
  return {{"scheme", f.scheme.str()}, {"roots", f.roots}, {"branches", branches}, {"text", f.str()}};
}

json check_json(const InclusionCheck& c) {
  json j{{"query", c.query}};
  if (!c.error.empty()) {
    j["error"] = c.error;
    return j;
  }
  j["system"] = c.system.str();
  j["region"] = c.region.str(c.system.names(VarRole::Parameter));
  j["holds"] = c.holds;
  return j;
}

json trace_json(const ReductionTrace& t) {
  json steps = json::array();
  for (const auto& s : t.steps) {
    json checks = json::array();
    for (const auto& c : s.checks) checks.push_back(check_json(c));
    steps.push_back({{"rule", s.rule}, {"at", s.at}, {"before", s.before.str()}, {"after", s.after.str()}, {"checks", checks}});
  }
  json rejected = json::array();
  for (const auto& c : t.rejected) rejected.push_back(check_json(c));
  return {{"steps", steps}, {"blocked", rejected}};
}

std::string proof_text(const Theory& th, const Term& from, const Proof& p) {
  std::string out;
  Term cur = from;
  for (std::size_t k = 0; k < p.steps.size(); ++k) {
    cur = std::get<Term>(replay(th, cur, {p.steps[k]}));
    out += std::to_string(k + 1) + ". " + p.steps[k] + "  " + cur.str() + "\n";
  }
  return out;
}

DecisionProcedure build(const Theory& th, const Globals& g) {
  PipelineOptions opt;
  opt.selfcheck = !g.no_selfcheck;
  note(1, "building decision procedure");
  auto dp = pipeline(th, opt);
  if (!dp.order.warning.empty()) std::cerr << "warning: " << dp.order.warning << "\n";
  note(1, "reduced scheme " + dp.reduced_scheme.str());
  note(2, dp.trace.str());
  if (dp.check.ran)
    note(1, "self-check: " + std::to_string(dp.check.members) + " members, " + std::to_string(dp.check.others) +
                " nearby goals");
  return dp;
}

SearchBudget budget(const Globals& g) {
  SearchBudget b;
  b.max_depth = g.max_depth;
  return b;
}

int cmd_parse(const Globals& g, const std::string& file) {
  Theory th = load_theory(file);
  json j = envelope("parse");
  j["start"] = th.start.str();
  if (th.goal) j["goal"] = th.goal->str();
  json axioms = json::array();
  for (const auto& c : th.axioms) axioms.push_back({{"name", c.name}, {"lhs", c.lhs.str()}, {"rhs", c.rhs.str()}});
  j["axioms"] = axioms;
  emit(g, j, th.str());
  return 0;
}

int cmd_oracle(const Globals& g, const std::string& file, std::optional<std::size_t> depth, bool dump,
               std::size_t sample) {
  Theory th = load_theory(file);
  SearchBudget b = budget(g);
  if (depth) b.max_depth = *depth;
  auto trees = reachable_set(th, th.start, b);
  json j = envelope("oracle");
  j["depth"] = b.max_depth;
  j["count"] = trees.size();
  std::string text = std::to_string(trees.size()) + " trees within " + std::to_string(b.max_depth) + " steps\n";
  if (th.goal) {
    bool hit = std::find(trees.begin(), trees.end(), *th.goal) != trees.end();
    j["goal_reached"] = hit;
    text += "goal " + th.goal->str() + (hit ? " reached\n" : " not reached\n");
  }
  std::vector<Term> shown;
  if (dump) shown = trees;
  if (sample && !trees.empty()) {
    std::mt19937 rng(g.seed);
    std::sample(trees.begin(), trees.end(), std::back_inserter(shown), sample, rng);
  }
  if (!shown.empty()) {
    json list = json::array();
    for (const auto& t : shown) {
      list.push_back(t.str());
      text += t.str() + "\n";
    }
    j["trees"] = list;
  }
  emit(g, j, text);
  return 0;
}

int cmd_prove(const Globals& g, const std::string& file, std::optional<std::string> goal, const std::string& method) {
  Theory th = load_theory(file);
  if (!goal && !th.goal) throw CLI::ValidationError("--goal", "the theory has no goal; pass --goal");
  Term d = goal ? parse_term(*goal) : *th.goal;
  std::optional<Proof> p;
  if (method == "oracle") {
    p = find_proof(th, d, budget(g));
  } else {
    p = build(th, g).prove(d);
  }
  json j = envelope("prove");
  j["method"] = method;
  j["goal"] = d.str();
  if (!p) {
    j["found"] = false;
    emit(g, j, "no proof found\n");
    return 1;
  }
  j["found"] = true;
  j["steps"] = p->steps;
  emit(g, j, proof_text(th, th.start, *p));
  return 0;
}

int cmd_decide(const Globals& g, const std::string& file, std::optional<std::string> from, const std::string& to,
               const std::string& method) {
  Theory th = load_theory(file);
  Term t = from ? parse_term(*from) : th.start;
  Term d = parse_term(to);
  bool yes;
  json j = envelope("decide");
  j["method"] = method;
  if (method == "oracle") {
    yes = decide_oracle(th, t, d, budget(g));
  } else {
    auto dp = build(th, g);
    auto r = tune(dp.charfn, t, d);
    yes = r.assignment.has_value();
    j["scheme"] = dp.reduced_scheme.str();
    if (yes) j["index"] = r.assignment->str();
  }
  j["from"] = t.str();
  j["to"] = d.str();
  j["result"] = yes;
  emit(g, j, yes ? "true\n" : "false\n");
  return yes ? 0 : 1;
}

int cmd_sigma(const Globals& g, const std::string& file, const std::string& scheme) {
  Theory th = load_theory(file);
  auto f = sigma(th, parse_scheme(scheme));
  json j = envelope("sigma");
  j["charfn"] = charfn_json(f);
  emit(g, j, f.str() + "\n");
  return 0;
}

int cmd_includes(const Globals& g, const std::string& file, const std::string& left, const std::string& right) {
  Theory th = load_theory(file);
  auto f = sigma(th, parse_scheme(left));
  auto h = sigma(th, parse_scheme(right));
  auto sys = includes(f, h);
  json j = envelope("includes");
  j["query"] = left + " <= " + right;
  j["system"] = sys.str();
  std::string text = "system:\n" + sys.str();
  if (!sys.contradiction && sys.families.empty()) {
    json solved = json::array();
    std::string st;
    for (const auto& e : solved_form(sys)) {
      solved.push_back(e.str());
      st += "  " + e.str() + "\n";
    }
    j["solved"] = solved;
    if (!st.empty()) text += "solved:\n" + st;
  }
  Region r = eliminate(sys);
  std::string region = r.str(sys.names(VarRole::Parameter));
  j["region"] = region;
  j["universal"] = r.universal_p();
  text += "region: " + region + "\n";
  emit(g, j, text);
  return 0;
}

int cmd_reduce(const Globals& g, const std::string& file, std::optional<std::string> scheme) {
  Theory th = load_theory(file);
  IterExpr e = scheme ? parse_scheme(*scheme) : build_scheme(th.axiom_names());
  check_scheme(th, e);
  auto r = reduce_scheme(th, e);
  json j = envelope("reduce");
  j["input"] = e.str();
  j["output"] = r.scheme.str();
  j["trace"] = trace_json(r.trace);
  emit(g, j, r.trace.str() + "result: " + r.scheme.str() + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proof synthesis for truncated predicate calculus theories"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_flag("--json", g.json, "Structured output");
  app.add_option("--seed", g.seed, "Seed for sampling");
  app.add_option("--max-depth", g.max_depth, "Depth bound for the exhaustive search");
  app.add_flag("--no-selfcheck", g.no_selfcheck, "Skip the oracle self-check of generated procedures");

  std::string file;
  std::function<int()> action;

  auto* parse = app.add_subcommand("parse", "Check and print a theory");
  parse->add_option("file", file)->required();
  parse->callback([&] { action = [&] { return cmd_parse(g, file); }; });

  std::optional<std::size_t> depth;
  bool dump = false;
  std::size_t sample = 0;
  auto* oracle = app.add_subcommand("oracle", "Enumerate reachable trees");
  oracle->add_option("file", file)->required();
  oracle->add_option("--depth", depth, "Number of steps");
  oracle->add_flag("--dump", dump, "Print every tree");
  oracle->add_option("--sample", sample, "Print this many trees chosen with --seed");
  oracle->callback([&] { action = [&] { return cmd_oracle(g, file, depth, dump, sample); }; });

  std::optional<std::string> goal, from, scheme;
  std::string method = "generated", to, left, right;
  auto* prove = app.add_subcommand("prove", "Find a proof of the goal");
  prove->add_option("file", file)->required();
  prove->add_option("--goal", goal, "Goal tree (defaults to the theory's goal)");
  prove->add_option("--method", method)->check(CLI::IsMember({"oracle", "generated"}));
  prove->callback([&] { action = [&] { return cmd_prove(g, file, goal, method); }; });

  auto* decide = app.add_subcommand("decide", "Is --to reachable from --from?");
  decide->add_option("file", file)->required();
  decide->add_option("--from", from, "Start tree (defaults to the theory's start)");
  decide->add_option("--to", to)->required();
  decide->add_option("--method", method)->check(CLI::IsMember({"oracle", "generated"}));
  decide->callback([&] { action = [&] { return cmd_decide(g, file, from, to, method); }; });

  auto* sig = app.add_subcommand("sigma", "Print the characteristic function of a scheme");
  sig->add_option("file", file)->required();
  sig->add_option("--scheme", scheme)->required();
  sig->callback([&] { action = [&] { return cmd_sigma(g, file, *scheme); }; });

  auto* inc = app.add_subcommand("includes", "Conditions under which --left is included in --right");
  inc->add_option("file", file)->required();
  inc->add_option("--left", left)->required();
  inc->add_option("--right", right)->required();
  inc->callback([&] { action = [&] { return cmd_includes(g, file, left, right); }; });

  auto* red = app.add_subcommand("reduce", "Simplify a scheme");
  red->add_option("file", file)->required();
  red->add_option("--scheme", scheme, "Scheme (defaults to the full scheme of the axioms)");
  red->callback([&] { action = [&] { return cmd_reduce(g, file, scheme); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    return action();
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SyntaxError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Unsupported& e) {
    std::cerr << "unsupported: " << e.what() << "\n";
    return 3;
  } catch (const NotLinearizable& e) {
    std::cerr << "not linearizable: " << e.what() << "\n";
    return 3;
  } catch (const NoCompose& e) {
    std::cerr << "no composition: " << e.what() << "\n";
    return 3;
  } catch (const Ambiguous& e) {
    std::cerr << "ambiguous: " << e.what() << "\n";
    return 3;
  } catch (const InternalMismatch& e) {
    std::cerr << "internal mismatch: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
