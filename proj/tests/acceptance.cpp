// One PASS/FAIL line per acceptance criterion. Criterion 11 is a stretch
// goal: it is reported but does not change the exit code.
#include <algorithm>
#include <chrono>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "support.hpp"
#include "tpc/delta.hpp"
#include "tpc/error.hpp"
#include "tpc/final.hpp"
#include "tpc/inclu.hpp"

using namespace tpc;
using namespace tpc::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

SymbolicPath SP(const char* clause) { return SymbolicPath(path_from_clause(parse_clause("p", clause))); }
SymbolicPath run_of(const char* functor, std::size_t arity, std::size_t child, AffineExpr e) {
  return SymbolicPath({tpc::Run{Step{functor, arity, child}, std::move(e)}});
}
AffineExpr v(const char* name) { return AffineExpr::var(name); }

std::set<Term> reached(const Theory& th, const IterExpr& e, std::size_t len) {
  std::set<Term> out;
  for (const auto& p : enumerate_indices(e, len)) {
    if (p.steps.size() > len) continue;
    if (auto d = run(th, th.start, p.steps)) out.insert(*d);
  }
  return out;
}

void ancestor(Outcome& o) {
  Theory th = theory("ancestor");
  auto p = find_proof(th, *th.goal, SearchBudget{8, 64, 1'000'000});
  o.require(p.has_value(), "oracle finds a proof");
  if (!p) return;
  o.detail << "oracle proof has " << p->steps.size() << " steps; ";
  o.require(p->steps.size() == 7, "7 steps");
  auto end = check_proof(th, *p);
  o.require(std::holds_alternative<Term>(end) && std::get<Term>(end) == *th.goal, "oracle proof checks");
  Proof printed{{"p3", "a1", "p2", "a2", "p1", "a2", "l1"}};
  auto end2 = check_proof(th, printed);
  o.require(std::holds_alternative<Term>(end2) && std::get<Term>(end2) == *th.goal, "printed sequence checks");
}

void instantiation(Outcome& o) {
  auto steps = instantiate(parse_scheme("(a*.b)*.a*"), parse_multi_index("{{2,0,1},3}"));
  std::string s;
  for (const auto& x : steps) s += (s.empty() ? "" : ".") + x;
  o.detail << s << "; ";
  o.require(s == "a.a.b.b.a.b.a.a.a", "exact sequence");
}

void paths(Outcome& o) {
  auto p = compose_paths(path_from_clause(parse_clause("p", "P(x, y) -> x")),
                         path_from_clause(parse_clause("p", "R(x, y) -> y")));
  o.detail << "[" << path_clause(p).str() << "] ";
  o.require(path_clause(p).str() == "P(R(x, y), z) -> y", "composition");
  auto q = power_path(path_from_clause(parse_clause("p", "F(x) -> x")), 4);
  o.detail << "[" << path_clause(q).str() << "]; ";
  o.require(path_clause(q).str() == "F(F(F(F(x)))) -> x", "power");
  AtomSet want;
  want.atoms = {Atom::equals_lr(SP("P(R(x, y), z) -> x"), SP("P(x, y) -> x")),
                Atom::equals_lr(SP("P(x, y) -> y"), SP("P(x, R(y, z)) -> y")),
                Atom::equals_lr(SP("P(R(x, z), y) -> z"), SP("P(x, R(y, z)) -> z"))};
  AtomSet got = split_axiom(parse_clause("a", "P(R(x, z), y) -> P(x, R(y, z))"));
  o.require(got.atoms.size() == 3 && got == want, "three atoms of the split");
}

void sigma_forms(Outcome& o) {
  auto f = sigma(theory("chain"), parse_scheme("a*"), SigmaOptions{{"j"}});
  AtomSet single;
  single.atoms = {Atom::equals_lr(SP("P(x) -> x"), SP("P(x) -> x").then(run_of("F", 1, 0, v("j"))))};
  o.require(f.atoms() == single, "single-atom form of a*");

  auto g = sigma(theory("spine"), parse_scheme("(a*.b)*"));
  AtomSet want;
  auto left = run_of("R", 2, 0, v("m"));
  want.atoms = {Atom::equals_lr(SP("P(x, y) -> x").then(left), SP("P(x, y) -> x")),
                Atom::equals_lr(SP("P(x, y) -> y"), SP("P(x, y) -> y").then(left))};
  IterGroup grp{"i", AffineExpr(1), v("m"), {}};
  grp.body.push_back(Atom::equals_lr(
      SP("P(x, y) -> x").then(run_of("R", 2, 0, v("i") - 1)).then(SP("R(x, y) -> y")),
      SP("P(x, y) -> y")
          .then(run_of("R", 2, 0, v("m") - v("i")))
          .then(SP("R(x, y) -> y"))
          .then(run_of("F", 1, 0, AffineExpr::ref(Ref{"m", {v("i")}})))));
  want.groups.push_back(grp);
  o.require(g.atoms() == want, "three-part form of (a*.b)*");

  struct Case {
    const char* theory;
    const char* scheme;
    std::vector<const char*> starts;
  };
  std::vector<Case> cases = {
      {"chain", "a*", {"P(Z)", "P(F(Z))"}},
      {"fg", "b*.a*", {"P(Z, Z)"}},
      {"fg", "a.b.a*.b", {"P(Z, Z)"}},
      {"modular", "b*", {"P(Z)"}},
      {"modular", "a*.b*", {"P(Z)"}},
      {"spine", "b*", {"P(R(R(R(Z, Z), Z), Z), Z)"}},
      {"spine", "(a*.b)*", {"P(R(R(R(Z, Z), Z), Z), Z)"}},
      {"spine", "(a*.b)*.a*", {"P(R(R(R(Z, Z), Z), Z), Z)"}},
  };
  std::size_t checked = 0, mismatches = 0;
  for (const auto& c : cases) {
    Theory th = theory(c.theory);
    auto e = parse_scheme(c.scheme);
    auto fn = sigma(th, e);
    auto indices = enumerate_indices(e, 6);
    for (const char* s : c.starts) {
      Term t = T(s);
      std::vector<Term> pool;
      for (const auto& d : reachable_set(th, t, SearchBudget{7, 64, 1'000'000}))
        if (d.size() <= 14) pool.push_back(d);
      for (const auto& p : indices) {
        auto d = run(th, t, p.steps);
        for (const auto& other : pool) {
          bool want_hit = d && *d == other;
          ++checked;
          if (eval_charfn(fn, p.index, t, other) != want_hit) ++mismatches;
        }
      }
    }
  }
  o.detail << checked << " (index, tree) pairs, " << mismatches << " mismatches; ";
  o.require(mismatches == 0, "oracle agreement");
}

void inclusion(Outcome& o) {
  Theory th = theory("fg");
  auto sys = includes(sigma(th, parse_scheme("a.b.a*.b")), sigma(th, parse_scheme("b.a*.b")));
  auto solved = solved_form(sys);
  o.require(solved.size() == 1 && solved[0].str() == "k = n+1", "solved form k = n+1");
  Region r = eliminate(sys);
  o.detail << "forward: " << r.str(sys.names(VarRole::Parameter)) << "; ";
  o.require(r.universal_p(), "forward region universal");
  Region back = eliminate(swap_roles(sys));
  o.detail << "reversed: " << back.str() << "; ";
  o.require(back.str() == "k >= 1", "reversed region k >= 1");
}

void modular(Outcome& o) {
  Theory th = theory("modular");
  auto sys = includes(sigma(th, parse_scheme("a*")), sigma(th, parse_scheme("b*")));
  o.require(sys.equations.size() == 1 && sys.equations[0].str() == "n = 2k", "n = 2k");
  Region r = eliminate(sys);
  o.detail << "region: " << r.str() << "; ";
  o.require(!r.empty && r.inequalities.empty() && r.congruences.size() == 1 && r.str() == "n mod 2 = 0",
            "exactly n mod 2 = 0");
}

void delta(Outcome& o) {
  Theory th = theory("fg");
  auto e = parse_scheme("(a*.b)*.a*");
  auto r = reduce_scheme(th, e);
  o.detail << e.str() << " -> " << r.scheme.str() << "; ";
  o.require(r.scheme == parse_scheme("b*.a*"), "reduces to b*.a*");
  bool r1 = false;
  for (const auto& s : r.trace.steps)
    for (const auto& c : s.checks)
      r1 = r1 || (s.rule == "R1" && c.query == "a.b.a*.b <= b.a*.b" && c.region.universal_p());
  o.require(r1, "R1 justified by a.b.a*.b <= b.a*.b");
  o.require(replay_trace(e, r.trace) == r.scheme, "trace replays");
  auto before = reached(th, e, 6), after = reached(th, r.scheme, 6);
  o.detail << before.size() << " trees either way; ";
  o.require(before == after, "same trees for proofs of length <= 6");
}

// Every P-rooted tree of size <= 14 over the theory's symbols is decided and
// compared with the depth-8 oracle. A positive answer whose proof is longer
// than 8 lies beyond the oracle's horizon; it is checked by replay instead.
void final_solver(Outcome& o) {
  auto j = tune(sigma(theory("chain"), parse_scheme("a*"), SigmaOptions{{"j"}}), T("P(F(Z))"), T("P(F(F(F(F(Z)))))"));
  o.require(j.assignment && j.values.at(Ref{"j", {}}) == 3, "j = 3");
  Term d = Term::app("P", {tower("F", 8, T("Z")), tower("G", 5, T("Z"))});
  auto nk = tune(sigma(theory("fg"), parse_scheme("b*.a*")), T("P(Z, Z)"), d);
  o.require(nk.assignment && nk.values.at(Ref{"n", {}}) == 2 && nk.values.at(Ref{"k", {}}) == 3, "(n, k) = (2, 3)");

  struct Case {
    const char* theory;
    const char* scheme;
    std::vector<std::pair<std::string, std::size_t>> inner;
  };
  std::vector<Case> cases = {{"chain", "a*", {{"F", 1}, {"Z", 0}}}, {"fg", "b*.a*", {{"F", 1}, {"G", 1}, {"Z", 0}}}};
  for (const auto& c : cases) {
    Theory th = theory(c.theory);
    auto f = sigma(th, parse_scheme(c.scheme));
    auto inner = trees_up_to(c.inner, 13);
    std::vector<Term> goals;
    for (const auto& u : inner) {
      if (th.start.arity() == 1) {
        goals.push_back(Term::app("P", {u}));
        continue;
      }
      for (const auto& w : inner)
        if (u.size() + w.size() + 1 <= 14) goals.push_back(Term::app("P", {u, w}));
    }
    auto oracle = reachable_set(th, th.start, SearchBudget{8, 14, 1'000'000});
    std::set<Term> in(oracle.begin(), oracle.end());
    std::size_t agree = 0, beyond = 0, bad = 0, replayed = 0;
    for (const auto& g : goals) {
      bool got = decide(f, th.start, g);
      std::optional<Proof> p;
      if (got) {
        p = extract_proof(f, th, th.start, g);
        if (p && std::get<Term>(replay(th, th.start, p->steps)) == g) ++replayed;
      }
      if (got == in.count(g) > 0)
        ++agree;
      else if (got && p && p->steps.size() > 8)
        ++beyond;
      else
        ++bad;
    }
    o.detail << c.theory << ": " << goals.size() << " goals, " << agree << " agree, " << beyond << " beyond depth 8, "
             << bad << " mismatches, " << replayed << " proofs replayed; ";
    o.require(bad == 0, std::string(c.theory) + " agrees with the oracle");
  }
}

void multi_index(Outcome& o) {
  const char* text = R"(
param m : M
exists u : M
m[1] >= 1
m[2] >= 1
m[1] + m[2] - u - 2 = 0
m[1][i] - u[i] = 0, for i = 1..m[1]-2
m[1][m[1]-1] + m[2][1] - u[m[1]-1] = 0
m[1][m[1]] + m[2][2] - u[m[1]] = 0
m[2][i+2] - u[m[1]+i] = 0, for i = 1..m[2]-2
)";
  auto sys = parse_system(text);
  Env env;
  env.roots["m"] = parse_multi_index("{{4,1,2},{5,2,0,1}}");
  env.roots["u"] = parse_multi_index("{4,6,4,0,1}");
  o.require(sys.holds(env), "printed sample satisfies the system");
  auto sol = solve_multiindex(sys, "u");
  std::set<std::string> got;
  for (const auto& e : sol.entries) got.insert(e.str());
  std::set<std::string> want = {"u = m[1]+m[2]-2", "u[i] = m[1][i], for i = 1..m[1]-2",
                                "u[m[1]-1] = m[1][m[1]-1]+m[2][1]", "u[m[1]] = m[1][m[1]]+m[2][2]",
                                "u[m[1]+i] = m[2][i+2], for i = 1..m[2]-2"};
  o.require(got == want, "solved form");
  o.require(sol.region.inequalities.size() == 2 && sol.region.congruences.empty() &&
                (sol.region.str() == "m[1] >= 1\nm[2] >= 1" || sol.region.str() == "m[2] >= 1\nm[1] >= 1"),
            "region m[1] >= 1, m[2] >= 1");
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> len(1, 6), elem(0, 9);
  int ok = 0, tried = 0;
  while (tried < 50) {
    std::vector<MultiIndex> parts;
    for (int p = 0; p < 2; ++p) {
      std::vector<MultiIndex> items;
      int n = len(rng);
      for (int k = 0; k < n; ++k) items.push_back(MultiIndex::nat(static_cast<std::uint64_t>(elem(rng))));
      parts.push_back(MultiIndex::list(items));
    }
    Env e;
    e.roots["m"] = MultiIndex::list(parts);
    if (!sol.region.contains(e.lookup()) || !sol.domain.contains(e.lookup())) continue;
    ++tried;
    e.roots["u"] = sol.build(e);
    ok += sys.holds(e);
  }
  o.detail << ok << "/" << tried << " random instances satisfy the system; ";
  o.require(ok == tried, "random instances");
}

void scaling(Outcome& o) {
  Theory th = theory("chain");
  auto f = sigma(th, parse_scheme("a*"));
  Term small = Term::app("P", {tower("F", 1000, T("Z"))});
  Term large = Term::app("P", {tower("F", 4000, T("Z"))});
  bool accepted = true;
  auto time = [&](const Term& d) {
    auto start = std::chrono::steady_clock::now();
    for (int k = 0; k < 50; ++k) accepted = decide(f, th.start, d) && accepted;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / 50;
  };
  // interleaved rounds, median ratio
  std::vector<double> ratios, as, bs;
  for (int round = 0; round < 9; ++round) {
    double a = time(small), b = time(large);
    as.push_back(a);
    bs.push_back(b);
    ratios.push_back(b / a);
  }
  std::sort(ratios.begin(), ratios.end());
  std::sort(as.begin(), as.end());
  std::sort(bs.begin(), bs.end());
  double ratio = ratios[ratios.size() / 2];
  o.require(accepted, "both chains accepted");
  o.detail << "N=1000: " << as[4] * 1e3 << " ms, N=4000: " << bs[4] * 1e3 << " ms, median ratio " << ratio << "; ";
  o.require(ratio <= 8.0, "ratio <= 8");
  // the breadth-first oracle needs a depth budget of at least N
  auto start = std::chrono::steady_clock::now();
  decide_oracle(th, th.start, Term::app("P", {tower("F", 200, T("Z"))}), SearchBudget{200, 1'000'000, 1'000'000});
  double oracle = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.detail << "oracle at N=200 took " << oracle * 1e3 << " ms with depth budget 200; ";
}

void stretch(Outcome& o) {
  Theory th = theory("spine3");
  auto e = build_scheme({"a", "b", "c"});
  auto r = reduce_scheme(th, e);
  o.detail << "start " << e.str() << "; ";
  if (r.trace.steps.empty())
    o.detail << "no rewrite applied; ";
  else
    o.detail << "furthest: " << r.trace.steps.back().rule << " gives " << r.scheme.str() << "; ";
  for (const auto& c : r.trace.rejected) {
    o.detail << "blocked by " << c.query << " (" << (c.error.empty() ? "region " + c.region.str() : c.error) << "); ";
    break;
  }
  o.require(r.scheme == parse_scheme("c*.(a*.b)*.a*.c*"), "reaches c*.alpha.c*");
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"ancestor proof", ancestor},       {"instantiation", instantiation}, {"path algebra", paths},
      {"sigma", sigma_forms},             {"inclusion", inclusion},         {"modular", modular},
      {"delta", delta},                   {"final", final_solver},          {"multi-index", multi_index},
      {"scaling", scaling},               {"stretch: three axioms", stretch},
  };
  bool ok = true;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      criteria[k].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "[exception: " << e.what() << "]";
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << (k + 1) << " " << criteria[k].first << ": " << o.detail.str()
              << std::endl;
    if (k < 10) ok = ok && o.pass;
  }
  return ok ? 0 : 1;
}
