#include <gtest/gtest.h>

#include <set>

#include "support.hpp"

using namespace tpc;
using namespace tpc::testing;

namespace {
MultiIndex M(const char* s) { return parse_multi_index(s); }
using Steps = std::vector<std::string>;
}  // namespace

TEST(Scheme, ParsePrintRoundTrip) {
  for (const char* s : {"a", "eps", "a.b", "a*", "(a*.b)*.a*", "((a*.b)*.a*.c)*.(a*.b)*.a*", "a|b", "(a|b.c)*"}) {
    auto e = parse_scheme(s);
    EXPECT_EQ(parse_scheme(e.str()), e) << s;
  }
  EXPECT_THROW(parse_scheme("a.(b"), SyntaxError);
}

TEST(Scheme, CheckAgainstTheory) {
  Theory th = theory("fg");
  EXPECT_NO_THROW(check_scheme(th, parse_scheme("(a*.b)*")));
  EXPECT_THROW(check_scheme(th, parse_scheme("a.c")), UnknownAxiom);
}

TEST(Shape, Rules) {
  EXPECT_EQ(shape_of(parse_scheme("(a*.b)*.a*")),
            IndexShape::tuple({IndexShape::list_of(IndexShape::list_of(IndexShape::unit())),
                               IndexShape::list_of(IndexShape::unit())}));
  EXPECT_EQ(shape_of(parse_scheme("a")), IndexShape::unit());
  EXPECT_EQ(shape_of(parse_scheme("a.b")), IndexShape::unit());
  EXPECT_EQ(shape_of(parse_scheme("a|b")), IndexShape::choice({IndexShape::unit(), IndexShape::unit()}));
}

TEST(Coerce, WorkedIndex) {
  auto e = parse_scheme("(a*.b)*.a*");
  EXPECT_EQ(coerce_index(e, M("{{2,0,1},3}")), M("{{{u,u},{},{u}},{u,u,u}}"));
  EXPECT_EQ(coerce_index(parse_scheme("a*"), M("0")), M("{}"));
  EXPECT_THROW(coerce_index(parse_scheme("a|b"), M("{5}")), ShapeError);
}

TEST(Coerce, Idempotent) {
  auto e = parse_scheme("(a*.b)*.a*");
  for (const auto& p : enumerate_indices(e, 5)) EXPECT_EQ(coerce_index(e, p.index), p.index);
}

TEST(Coerce, ErrorNamesThePosition) {
  try {
    coerce_index(parse_scheme("(a*.b)*.a*"), M("{{2,{1},1},3}"));
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("m[1][2]"), std::string::npos) << e.what();
  }
}

TEST(Instantiate, Examples) {
  EXPECT_EQ(instantiate(parse_scheme("(a*.b)*.a*"), M("{{2,0,1},3}")),
            (Steps{"a", "a", "b", "b", "a", "b", "a", "a", "a"}));
  EXPECT_TRUE(instantiate(parse_scheme("a*"), M("0")).empty());
  EXPECT_EQ(instantiate(parse_scheme("a.b.a*.b"), M("2")), (Steps{"a", "b", "a", "a", "b"}));
  EXPECT_EQ(instantiate(parse_scheme("a|b.c"), M("{2,u}")), (Steps{"b", "c"}));
}

TEST(Reduce, Examples) {
  Theory fg = theory("fg");
  auto ba = reduce_specific(fg, {"b", "a"});
  ASSERT_TRUE(ba);
  EXPECT_TRUE(equal_up_to_renaming(*ba, parse_clause("w", "P(x, y) -> P(F(F(F(x))), G(G(y)))")));
  EXPECT_TRUE(equal_up_to_renaming(*reduce_specific(fg, {}), identity_clause()));
  Theory anc = theory("ancestor");
  auto ll = reduce_specific(anc, {"l1", "l1"});
  ASSERT_TRUE(ll);
  EXPECT_TRUE(equal_up_to_renaming(*ll, parse_clause("w", "And(And(x, y), z) -> x")));
  EXPECT_FALSE(reduce_specific(anc, {"p1", "l1", "l1"}));
}

TEST(Enumerate, Small) {
  auto a = enumerate_indices(parse_scheme("a*"), 2);
  ASSERT_EQ(a.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(a[k].index, MultiIndex::units(k));

  auto ab = enumerate_indices(parse_scheme("a|b"), 1);
  ASSERT_EQ(ab.size(), 2u);
  EXPECT_EQ(ab[0].index, M("{1,u}"));
  EXPECT_EQ(ab[1].index, M("{2,u}"));

  std::set<Steps> seqs;
  for (const auto& p : enumerate_indices(parse_scheme("(a*.b)*"), 2)) seqs.insert(p.steps);
  EXPECT_EQ(seqs, (std::set<Steps>{{}, {"b"}, {"b", "b"}, {"a", "b"}}));
}

TEST(Enumerate, EachIndexOnceInShortlex) {
  auto e = parse_scheme("(a*.b)*.a*");
  auto all = enumerate_indices(e, 5);
  std::set<MultiIndex> seen;
  for (std::size_t k = 0; k < all.size(); ++k) {
    EXPECT_TRUE(seen.insert(all[k].index).second);
    EXPECT_EQ(instantiate(e, all[k].index), all[k].steps);
    if (k) EXPECT_LE(all[k - 1].steps.size(), all[k].steps.size());
  }
}

TEST(BuildScheme, Steps) {
  EXPECT_EQ(build_scheme({"a"}), parse_scheme("a*"));
  EXPECT_EQ(build_scheme({"a", "b"}), parse_scheme("(a*.b)*.a*"));
  EXPECT_EQ(build_scheme({"a", "b", "c"}), parse_scheme("((a*.b)*.a*.c)*.(a*.b)*.a*"));
}

// every axiom word of length <= L is an instance of the built scheme
TEST(BuildScheme, CoversAllWords) {
  for (std::size_t n = 1; n <= 3; ++n) {
    std::vector<std::string> names;
    for (std::size_t k = 0; k < n; ++k) names.push_back(std::string(1, static_cast<char>('a' + k)));
    auto e = build_scheme(names);
    for (std::size_t L = 0; L <= 5; ++L) {
      std::set<Steps> got;
      for (const auto& p : enumerate_indices(e, L)) got.insert(p.steps);
      std::set<Steps> want{{}};
      std::vector<Steps> layer{{}};
      for (std::size_t len = 1; len <= L; ++len) {
        std::vector<Steps> next;
        for (const auto& w : layer)
          for (const auto& a : names) {
            auto x = w;
            x.push_back(a);
            want.insert(x);
            next.push_back(x);
          }
        layer = std::move(next);
      }
      EXPECT_EQ(got, want) << n << " axioms, length " << L;
    }
  }
}

// the reduced clause of an instance does what replaying the axioms does
TEST(Semantics, ReducedClauseAgreesWithReplay) {
  struct Case {
    const char* theory;
    const char* scheme;
    std::vector<std::pair<std::string, std::size_t>> sig;
  };
  std::vector<Case> cases = {
      {"fg", "(a*.b)*.a*", {{"P", 2}, {"F", 1}, {"G", 1}, {"Z", 0}}},
      {"spine", "(a*.b)*.a*", {{"P", 2}, {"R", 2}, {"F", 1}, {"Z", 0}}},
      {"spine3", "((a*.b)*.a*.c)*", {{"P", 2}, {"R", 2}, {"Z", 0}}},
  };
  for (const auto& c : cases) {
    Theory th = theory(c.theory);
    auto e = parse_scheme(c.scheme);
    auto trees = trees_up_to(c.sig, 7);
    for (const auto& p : enumerate_indices(e, 4)) {
      auto cl = reduce_specific(th, p.steps);
      for (const auto& t : trees) {
        auto want = run(th, t, p.steps);
        std::optional<Term> got;
        if (cl) got = apply_clause(*cl, t);
        ASSERT_EQ(want.has_value(), got.has_value()) << c.scheme << " " << p.index.str() << " " << t.str();
        if (want) EXPECT_EQ(*want, *got);
      }
    }
  }
}
