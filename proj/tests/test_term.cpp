#include <gtest/gtest.h>

#include "support.hpp"

using namespace tpc;
using namespace tpc::testing;

TEST(Theory, AncestorHasSevenAxioms) {
  Theory th = theory("ancestor");
  EXPECT_EQ(th.axioms.size(), 7u);
  EXPECT_EQ(th.start, T("S"));
  EXPECT_EQ(th.axiom_names(), (std::vector<std::string>{"p1", "p2", "p3", "a1", "a2", "l1", "l2"}));
  ASSERT_TRUE(th.goal);
  EXPECT_EQ(*th.goal, T("Ancestor(Adam, Olga)"));
}

TEST(Theory, StartAloneHasNoAxioms) {
  Theory th = parse_theory("start: S\n");
  EXPECT_TRUE(th.axioms.empty());
}

TEST(Theory, FreeRightHandVariableIsNamed) {
  try {
    parse_theory("start: P(Z)\na: P(x) -> P(F(y))\n");
    FAIL() << "accepted a new variable";
  } catch (const FreeRhsVariable& e) {
    EXPECT_EQ(e.variable(), "y");
    EXPECT_EQ(e.axiom(), "a");
  }
}

TEST(Theory, RejectsBadInput) {
  EXPECT_THROW(parse_theory("start: P(x)\n"), NonGroundStart);
  EXPECT_THROW(parse_theory("start: P(Z)\na: P(x) -> P(x, x)\n"), ArityMismatch);
  EXPECT_THROW(parse_theory("start: P(Z\n"), SyntaxError);
  EXPECT_THROW(parse_theory("a: P(x) -> P(x)\n"), SyntaxError);
}

TEST(Theory, SyntaxErrorHasPosition) {
  try {
    parse_theory("start: P(Z)\na: P(x) => P(x)\n");
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Theory, PrintParseRoundTrip) {
  for (const char* name : {"ancestor", "fg", "chain", "modular", "spine", "spine3"}) {
    Theory th = theory(name);
    EXPECT_EQ(parse_theory(th.str()), th) << name;
  }
}

TEST(Apply, RootOnly) {
  Theory th = theory("ancestor");
  EXPECT_EQ(apply_clause(th.axiom("a1"), T("And(Parent(Peter, Olga), S)")), T("And(Ancestor(Peter, Olga), S)"));
  EXPECT_FALSE(apply_clause(th.axiom("l1"), T("Ancestor(Adam, Olga)")));
  EXPECT_EQ(apply_clause(th.axiom("p1"), T("S")), T("And(Parent(Adam, John), S)"));
  // no rewriting below the root
  EXPECT_FALSE(apply_clause(th.axiom("a1"), T("And(S, And(Parent(Peter, Olga), S))")));
}

TEST(Apply, NonLinearPatternNeedsEqualSubtrees) {
  Clause c = parse_clause("d", "P(x, x) -> Q(x)");
  EXPECT_EQ(apply_clause(c, T("P(A, A)")), T("Q(A)"));
  EXPECT_FALSE(apply_clause(c, T("P(A, B)")));
}

TEST(Compose, PathExample) {
  auto c = compose_clauses(parse_clause("p", "P(x, y) -> x"), parse_clause("q", "R(x, y) -> y"));
  ASSERT_TRUE(c);
  EXPECT_TRUE(equal_up_to_renaming(*c, parse_clause("r", "P(R(x, y), z) -> y")));
}

TEST(Compose, FgAxiomsCommute) {
  Theory th = theory("fg");
  auto ab = compose_clauses(th.axiom("a"), th.axiom("b"));
  auto ba = compose_clauses(th.axiom("b"), th.axiom("a"));
  ASSERT_TRUE(ab && ba);
  Clause want = parse_clause("w", "P(x, y) -> P(F(F(F(x))), G(G(y)))");
  EXPECT_TRUE(equal_up_to_renaming(*ab, want));
  EXPECT_TRUE(equal_up_to_renaming(*ba, want));
  // the same clause by running the axioms on a sample tree
  EXPECT_EQ(apply_clause(*ab, T("P(A, B)")), run(th, T("P(A, B)"), {"a", "b"}));
}

TEST(Compose, IdentityIsNeutral) {
  Theory th = theory("spine");
  for (const auto& c : th.axioms) {
    auto l = compose_clauses(identity_clause(), c);
    auto r = compose_clauses(c, identity_clause());
    ASSERT_TRUE(l && r);
    EXPECT_TRUE(equal_up_to_renaming(*l, c));
    EXPECT_TRUE(equal_up_to_renaming(*r, c));
  }
}

TEST(Compose, EmptyRelation) {
  EXPECT_FALSE(compose_clauses(parse_clause("a", "x -> P(x)"), parse_clause("b", "Q(x) -> x")));
}

// apply(compose(c1, c2)) agrees with applying c1 then c2
TEST(Compose, AgreesWithSequentialApplication) {
  std::vector<Clause> cs = {
      parse_clause("a", "P(x, y) -> P(F(x), y)"), parse_clause("b", "P(R(x, z), y) -> P(x, R(y, z))"),
      parse_clause("c", "P(x, R(y, z)) -> P(R(x, z), y)"), parse_clause("d", "P(x, x) -> P(x, F(x))"),
      parse_clause("e", "P(x, y) -> P(y, x)"), parse_clause("f", "P(F(x), y) -> P(x, R(y, y))"),
  };
  auto trees = trees_up_to({{"P", 2}, {"R", 2}, {"F", 1}, {"Z", 0}}, 7);
  std::size_t checked = 0;
  for (const auto& c1 : cs)
    for (const auto& c2 : cs) {
      auto c = compose_clauses(c1, c2);
      for (const auto& t : trees) {
        std::optional<Term> seq;
        if (auto mid = apply_clause(c1, t)) seq = apply_clause(c2, *mid);
        std::optional<Term> direct;
        if (c) direct = apply_clause(*c, t);
        ASSERT_EQ(seq.has_value(), direct.has_value()) << c1.str() << " ; " << c2.str() << " on " << t.str();
        if (seq) {
          EXPECT_EQ(*seq, *direct);
          ++checked;
        }
      }
    }
  EXPECT_GT(checked, 100u);
}

TEST(Proof, AncestorProofChecks) {
  Theory th = theory("ancestor");
  auto r = check_proof(th, Proof{{"p3", "a1", "p2", "a2", "p1", "a2", "l1"}});
  ASSERT_TRUE(std::holds_alternative<Term>(r));
  EXPECT_EQ(std::get<Term>(r), T("Ancestor(Adam, Olga)"));
}

TEST(Proof, EmptyAndInvalid) {
  Theory th = theory("ancestor");
  EXPECT_EQ(std::get<Term>(check_proof(th, Proof{})), th.start);
  auto bad = check_proof(th, Proof{{"l1"}});
  ASSERT_TRUE(std::holds_alternative<InvalidAt>(bad));
  EXPECT_EQ(std::get<InvalidAt>(bad).step, 1u);
  EXPECT_THROW(check_proof(th, Proof{{"zz"}}), UnknownAxiom);
}

TEST(Proof, MatchesComposedClause) {
  Theory th = theory("ancestor");
  std::vector<std::string> steps{"p3", "a1", "p2", "a2", "p1", "a2", "l1"};
  auto c = reduce_specific(th, steps);
  ASSERT_TRUE(c);
  EXPECT_EQ(apply_clause(*c, th.start), std::get<Term>(check_proof(th, Proof{steps})));
}

TEST(Horn, AncestorProgram) {
  std::vector<Term> facts = {T("Parent(Adam, John)"), T("Parent(John, Peter)"), T("Parent(Peter, Olga)")};
  std::vector<HornRule> rules = {
      {{T("Parent(p, c)")}, T("Ancestor(p, c)")},
      {{T("Parent(p, a)"), T("Ancestor(a, o)")}, T("Ancestor(p, o)")},
  };
  Theory th = horn_to_tpc(facts, rules, T("Ancestor(Adam, Olga)"));
  EXPECT_EQ(th, theory("ancestor"));
}

TEST(Horn, EmptyProgramAndSingleFact) {
  Theory empty = horn_to_tpc({}, {}, T("S"));
  EXPECT_EQ(empty.axiom_names(), (std::vector<std::string>{"l1", "l2"}));
  EXPECT_EQ(empty.start, T("S"));
  Theory one = horn_to_tpc({T("Q(A)")}, {}, T("Q(A)"));
  ASSERT_EQ(one.axioms.size(), 3u);
  EXPECT_TRUE(equal_up_to_renaming(one.axioms[0], parse_clause("f", "x -> And(Q(A), x)")));
  validate(one);
}

TEST(Horn, RejectsEmptyBody) {
  EXPECT_THROW(horn_to_tpc({}, {{{}, T("Q(A)")}}, T("Q(A)")), UnsupportedRule);
}
