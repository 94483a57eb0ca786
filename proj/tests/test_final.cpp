#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <set>

#include "support.hpp"
#include "tpc/error.hpp"
#include "tpc/final.hpp"

using namespace tpc;
using namespace tpc::testing;

namespace {

SymbolicCharFn sig(const Theory& th, const char* scheme, std::vector<std::string> roots = {}) {
  return sigma(th, parse_scheme(scheme), SigmaOptions{std::move(roots)});
}

Ref R(const char* s) { return parse_affine(s).terms().front().first; }

std::set<std::string> equation_lines(const ConditionSystem& sys) {
  std::set<std::string> out;
  for (const auto& e : sys.equations) out.insert(e.str());
  return out;
}

}  // namespace

TEST(Tune, SingleRun) {
  auto f = sig(theory("chain"), "a*", {"j"});
  auto r = tune(f, T("P(F(Z))"), T("P(F(F(F(F(Z)))))"));
  ASSERT_TRUE(r.assignment);
  EXPECT_EQ(r.values.at(R("j")), 3);
  EXPECT_EQ(*r.assignment, coerce_index(f.scheme, parse_multi_index("3")));
}

TEST(Tune, TwoEquations) {
  auto f = sig(theory("fg"), "b*.a*");
  Term d = Term::app("P", {tower("F", 8, T("Z")), tower("G", 5, T("Z"))});
  auto r = tune(f, T("P(Z, Z)"), d);
  ASSERT_TRUE(r.assignment);
  EXPECT_EQ(r.values.at(R("n")), 2);
  EXPECT_EQ(r.values.at(R("k")), 3);
  EXPECT_EQ(equation_lines(r.equations), (std::set<std::string>{"n+2k = 8", "n+k = 5"}));
}

// start with four R nodes on the left spine; the goal comes from the index
// {1, 1, 2}
TEST(Tune, IteratedGroup) {
  Theory th = theory("spine");
  auto f = sig(th, "(a*.b)*", {"m"});
  Term t = T("P(R(R(R(R(Z, Z), Z), Z), Z), Z)");
  MultiIndex want = parse_multi_index("{1,1,2}");
  auto d = run(th, t, instantiate(f.scheme, want));
  ASSERT_TRUE(d);
  auto r = tune(f, t, *d);
  ASSERT_TRUE(r.assignment);
  EXPECT_EQ(*r.assignment, coerce_index(f.scheme, want));
  EXPECT_EQ(r.values.at(R("m")), 3);
  EXPECT_EQ(r.values.at(R("m[1]")), 1);
  EXPECT_EQ(r.values.at(R("m[2]")), 1);
  EXPECT_EQ(r.values.at(R("m[3]")), 2);
}

TEST(Tune, SameTree) {
  for (const auto& [name, scheme, start] :
       std::vector<std::tuple<const char*, const char*, const char*>>{{"chain", "a*", "P(F(Z))"},
                                                                        {"fg", "b*.a*", "P(Z, F(Z))"},
                                                                        {"spine", "(a*.b)*.a*", "P(R(R(Z, Z), Z), Z)"}}) {
    auto f = sig(theory(name), scheme);
    Term t = T(start);
    EXPECT_TRUE(decide(f, t, t)) << name;
    auto p = extract_proof(f, theory(name), t, t);
    ASSERT_TRUE(p);
    EXPECT_TRUE(p->steps.empty());
  }
}

TEST(Tune, Deterministic) {
  auto f = sig(theory("fg"), "b*.a*");
  Term d = T("P(F(F(F(F(Z)))), G(G(G(Z))))");
  EXPECT_EQ(tune(f, T("P(Z, Z)"), d).assignment, tune(f, T("P(Z, Z)"), d).assignment);
}

TEST(Decide, Cases) {
  Theory th = theory("fg");
  auto f = sig(th, "b*.a*");
  Term t = T("P(Z, Z)");
  EXPECT_TRUE(decide(f, t, Term::app("P", {tower("F", 8, T("Z")), tower("G", 5, T("Z"))})));
  Term d = T("P(F(Z), G(G(Z)))");
  EXPECT_FALSE(decide(f, t, d));
  EXPECT_FALSE(decide_oracle(th, t, d, SearchBudget{4, 64, 1'000'000}));
  EXPECT_FALSE(decide(f, t, T("Q(Z)")));
  EXPECT_FALSE(decide(f, t, T("P(G(Z), Z)")));
}

TEST(Extract, Proofs) {
  Theory chain = theory("chain");
  auto p = extract_proof(sig(chain, "a*"), chain, T("P(F(Z))"), T("P(F(F(F(F(Z)))))"));
  ASSERT_TRUE(p);
  EXPECT_EQ(p->steps, (std::vector<std::string>{"a", "a", "a"}));

  Theory fg = theory("fg");
  Term d = Term::app("P", {tower("F", 8, T("Z")), tower("G", 5, T("Z"))});
  auto q = extract_proof(sig(fg, "b*.a*"), fg, T("P(Z, Z)"), d);
  ASSERT_TRUE(q);
  EXPECT_EQ(q->steps, (std::vector<std::string>{"b", "b", "a", "a", "a"}));
  EXPECT_EQ(std::get<Term>(check_proof(fg, *q)), d);

  EXPECT_FALSE(extract_proof(sig(fg, "b*.a*"), fg, T("P(Z, Z)"), T("P(F(Z), G(G(Z)))")));
}

// Sound and complete against the oracle on small goals; extracted proofs
// replay.
TEST(Decide, AgreesWithOracle) {
  struct Case {
    const char* theory;
    const char* scheme;
    std::vector<std::pair<std::string, std::size_t>> inner;  // signature below the root
  };
  std::vector<Case> cases = {
      {"chain", "a*", {{"F", 1}, {"Z", 0}}},
      {"fg", "b*.a*", {{"F", 1}, {"G", 1}, {"Z", 0}}},
      {"modular", "a*", {{"F", 1}, {"Z", 0}}},
      {"spine", "(a*.b)*.a*", {{"R", 2}, {"F", 1}, {"Z", 0}}},
  };
  for (const auto& c : cases) {
    Theory th = theory(c.theory);
    auto f = sig(th, c.scheme);
    const Term& t = th.start;
    std::size_t arity = t.arity();
    std::size_t limit = c.theory == std::string("spine") ? 11 : 14;
    auto inner = trees_up_to(c.inner, limit - 1);
    std::vector<Term> goals;
    if (arity == 1) {
      for (const auto& u : inner) goals.push_back(Term::app("P", {u}));
    } else {
      for (const auto& u : inner)
        for (const auto& v : inner)
          if (u.size() + v.size() + 1 <= limit) goals.push_back(Term::app("P", {u, v}));
    }
    SearchBudget budget{14, limit, 1'000'000};
    auto members = reachable_set(th, t, budget);
    std::set<Term> in(members.begin(), members.end());
    std::size_t yes = 0;
    for (const auto& d : goals) {
      bool want = in.count(d) > 0;
      bool got = decide(f, t, d);
      ASSERT_EQ(got, want) << c.theory << " " << d.str();
      if (got) {
        ++yes;
        auto p = extract_proof(f, th, t, d);
        ASSERT_TRUE(p);
        EXPECT_EQ(std::get<Term>(replay(th, t, p->steps)), d);
      }
    }
    EXPECT_GT(yes, 3u) << c.theory;
  }
}

TEST(Decide, ScalesBetterThanQuadratic) {
  Theory th = theory("chain");
  auto f = sig(th, "a*");
  Term t = T("P(Z)");
  Term small = Term::app("P", {tower("F", 1000, T("Z"))});
  Term large = Term::app("P", {tower("F", 4000, T("Z"))});
  auto time = [&](const Term& d) {
    auto start = std::chrono::steady_clock::now();
    for (int k = 0; k < 50; ++k) EXPECT_TRUE(decide(f, t, d));
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  // interleaved rounds; the median ratio is stable against scheduler noise
  std::vector<double> ratios;
  for (int round = 0; round < 9; ++round) {
    double a = time(small);
    ratios.push_back(time(large) / a);
  }
  std::sort(ratios.begin(), ratios.end());
  EXPECT_LE(ratios[4], 8.0);
}
