#include <gtest/gtest.h>

#include <set>

#include "support.hpp"
#include "tpc/delta.hpp"
#include "tpc/error.hpp"

using namespace tpc;
using namespace tpc::testing;

namespace {

IterExpr E(const char* s) { return parse_scheme(s); }

// Trees reached from the start by instances of length <= len.
std::set<Term> reached(const Theory& th, const IterExpr& e, std::size_t len) {
  std::set<Term> out;
  for (const auto& p : enumerate_indices(e, len)) {
    if (p.steps.size() > len) continue;
    if (auto d = run(th, th.start, p.steps)) out.insert(*d);
  }
  return out;
}

}  // namespace

TEST(Normalize, Cases) {
  EXPECT_EQ(normalize(E("a*.a*")).str(), "a*");
  EXPECT_EQ(normalize(E("b*.b.a*|a*")).str(), "b*.a*");
  EXPECT_EQ(normalize(E("(a|b).c")).str(), "a.c|b.c");
  EXPECT_EQ(normalize(E("a*|eps")).str(), "a*");
  EXPECT_EQ(normalize(E("b*.b|eps")).str(), "b*");
  EXPECT_EQ(normalize(E("a.eps.b")).str(), "a.b");
  EXPECT_EQ(normalize(E("(a*)*")).str(), "a*");
  EXPECT_EQ(normalize(E("a|a")).str(), "a");
  for (const char* s : {"a*.a*", "(a|b).c", "b*.b.a*|a*", "(a*.b)*.a*", "a.(b|eps).c*"})
    EXPECT_EQ(normalize(normalize(E(s))), normalize(E(s))) << s;
}

TEST(Normalize, KeepsRelation) {
  Theory th = theory("fg");
  for (const char* s : {"b*.b.a*|a*", "(a|b).b*", "a*.a*.b", "(b*.b|eps).a"})
    EXPECT_EQ(reached(th, E(s), 6), reached(th, normalize(E(s)), 6)) << s;
}

TEST(Absorption, ShiftedStar) { EXPECT_TRUE(test_absorption(theory("fg"), "a", E("b.a*.b"))); }

TEST(Absorption, EmptyGammaNeverAbsorbs) {
  EXPECT_FALSE(test_absorption(theory("chain"), "a", IterExpr::eps()));
  EXPECT_FALSE(test_absorption(theory("fg"), "b", IterExpr::eps()));
  EXPECT_FALSE(test_absorption(theory("spine"), "a", IterExpr::eps()));
}

// b adds two F's; a*.a adds any positive number
TEST(Absorption, DoubleStepIntoRun) {
  Theory th = theory("modular");
  auto gamma = E("a*.a");
  bool brute = true;
  auto right = reached(th, gamma, 8);
  for (const auto& d : reached(th, IterExpr::dot({IterExpr::axiom("b"), gamma}), 6)) brute = brute && right.count(d);
  EXPECT_TRUE(brute);
  EXPECT_EQ(test_absorption(th, "b", gamma), brute);
}

TEST(Absorption, SpineDoesNotAbsorb) {
  Theory th = theory("spine");
  EXPECT_FALSE(test_absorption(th, "a", E("b.a*.b")));
}

TEST(Absorption, UnknownAxiom) { EXPECT_THROW(test_absorption(theory("fg"), "z", E("a")), UnknownAxiom); }

TEST(Commutation, Cases) {
  EXPECT_TRUE(test_commutation(theory("fg"), "a", "b"));
  EXPECT_TRUE(test_commutation(theory("fg"), "a", "a"));
  EXPECT_TRUE(test_commutation(theory("modular"), "a", "b"));
  EXPECT_FALSE(test_commutation(theory("spine"), "a", "b"));
}

TEST(Commutation, AgreesWithOracle) {
  for (const char* name : {"fg", "modular", "spine", "spine3"}) {
    Theory th = theory(name);
    auto names = th.axiom_names();
    for (const auto& a : names)
      for (const auto& b : names) {
        auto ab = reached(th, IterExpr::dot({IterExpr::axiom(a), IterExpr::axiom(b)}), 2);
        auto ba = reached(th, IterExpr::dot({IterExpr::axiom(b), IterExpr::axiom(a)}), 2);
        // commuting axioms can never be told apart from the start
        if (test_commutation(th, a, b)) EXPECT_EQ(ab, ba) << name << " " << a << " " << b;
      }
  }
  Theory spine = theory("spine");
  EXPECT_NE(reached(spine, E("a.b"), 2), reached(spine, E("b.a"), 2));
}

TEST(Reduce, ShiftedSchemeCollapses) {
  Theory th = theory("fg");
  auto r = reduce_scheme(th, E("(a*.b)*.a*"));
  EXPECT_EQ(r.scheme, E("b*.a*"));
  ASSERT_FALSE(r.trace.steps.empty());
  const auto& first = r.trace.steps[0];
  EXPECT_EQ(first.rule, "R1");
  ASSERT_EQ(first.checks.size(), 1u);
  EXPECT_EQ(first.checks[0].query, "a.b.a*.b <= b.a*.b");
  EXPECT_TRUE(first.checks[0].region.universal_p());
  EXPECT_NE(r.trace.str().find("region all n"), std::string::npos);
}

TEST(Reduce, StarOfShiftedPair) {
  Theory th = theory("fg");
  auto r = reduce_scheme(th, E("(a*.b)*"));
  ASSERT_FALSE(r.trace.steps.empty());
  EXPECT_EQ(r.trace.steps[0].after, normalize(E("b*.(a*.b)|eps")));
}

TEST(Reduce, SingleStarUnchanged) {
  auto r = reduce_scheme(theory("chain"), E("a*"));
  EXPECT_EQ(r.scheme, E("a*"));
  EXPECT_TRUE(r.trace.steps.empty());
}

TEST(Reduce, BlockedQueriesAreReported) {
  auto r = reduce_scheme(theory("spine"), E("(a*.b)*.a*"));
  EXPECT_EQ(r.scheme, E("(a*.b)*.a*"));
  EXPECT_FALSE(r.trace.rejected.empty());
  EXPECT_EQ(r.trace.rejected[0].query, "a.b.a*.b <= b.a*.b");
}

TEST(Reduce, RulesNeedTheirPattern) {
  EXPECT_THROW(apply_rule("R1", E("a*.b"), {}), Error);
  EXPECT_THROW(apply_rule("R3", E("a.b"), {0}), Error);
  EXPECT_THROW(apply_rule("R9", E("a"), {}), Error);
}

namespace {

struct Case {
  const char* theory;
  const char* scheme;
};

const std::vector<Case> kCorpus = {
    {"fg", "(a*.b)*.a*"}, {"fg", "(a*.b)*"},          {"fg", "a*.b.a*"},   {"fg", "(b*.a)*.b*"},
    {"modular", "a*.b*"}, {"modular", "(a*.b)*.a*"}, {"chain", "a*"},     {"spine", "(a*.b)*.a*"},
    {"spine", "a*.b*"},   {"spine3", "((a*.b)*.a*.c)*.(a*.b)*.a*"},
};

}  // namespace

TEST(Reduce, TraceReplays) {
  for (const auto& c : kCorpus) {
    auto r = reduce_scheme(theory(c.theory), E(c.scheme));
    EXPECT_EQ(replay_trace(E(c.scheme), r.trace), r.scheme) << c.theory << " " << c.scheme;
    for (std::size_t k = 1; k < r.trace.steps.size(); ++k) EXPECT_EQ(r.trace.steps[k].before, r.trace.steps[k - 1].after);
  }
}

TEST(Reduce, Idempotent) {
  for (const auto& c : kCorpus) {
    Theory th = theory(c.theory);
    auto once = reduce_scheme(th, E(c.scheme));
    auto twice = reduce_scheme(th, once.scheme);
    EXPECT_EQ(twice.scheme, once.scheme) << c.theory << " " << c.scheme;
    EXPECT_TRUE(twice.trace.steps.empty());
  }
}

// reachable sets agree for all instances of length <= 6
TEST(Reduce, PreservesRelation) {
  for (const auto& c : kCorpus) {
    Theory th = theory(c.theory);
    auto r = reduce_scheme(th, E(c.scheme));
    EXPECT_EQ(reached(th, E(c.scheme), 6), reached(th, r.scheme, 6))
        << c.theory << " " << c.scheme << " -> " << r.scheme.str();
  }
}

TEST(Reduce, StepCap) {
  auto r = reduce_scheme(theory("fg"), E("(a*.b)*.a*"), 1);
  EXPECT_EQ(r.trace.steps.size(), 1u);
  EXPECT_EQ(replay_trace(E("(a*.b)*.a*"), r.trace), r.scheme);
}

TEST(Order, SingleAxiom) {
  auto o = order_axioms(theory("chain"));
  EXPECT_EQ(o.order, std::vector<std::string>{"a"});
  EXPECT_TRUE(o.weak);
}

TEST(Order, CommutingKeepDeclarationOrder) {
  auto o = order_axioms(theory("fg"));
  EXPECT_EQ(o.order, (std::vector<std::string>{"a", "b"}));
  EXPECT_TRUE(o.weak);
  EXPECT_TRUE(o.warning.empty());
}

TEST(Order, NonCommutingStillLinear) {
  Theory th = theory("spine");
  auto o = order_axioms(th);
  EXPECT_EQ(std::set<std::string>(o.order.begin(), o.order.end()), (std::set<std::string>{"a", "b"}));
  EXPECT_NO_THROW(sigma(th, build_scheme(o.order)));
}

TEST(Order, IsAPermutation) {
  for (const char* name : {"ancestor", "spine3", "modular"}) {
    Theory th = theory(name);
    auto o = order_axioms(th);
    auto names = th.axiom_names();
    EXPECT_EQ(std::multiset<std::string>(o.order.begin(), o.order.end()),
              std::multiset<std::string>(names.begin(), names.end()));
    EXPECT_EQ(o.weak, o.warning.empty());
  }
}
