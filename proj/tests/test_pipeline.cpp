#include <gtest/gtest.h>

#include "support.hpp"
#include "tpc/error.hpp"
#include "tpc/pipeline.hpp"

using namespace tpc;
using namespace tpc::testing;

TEST(Pipeline, ShiftedPair) {
  auto dp = pipeline(theory("fg"));
  EXPECT_EQ(dp.reduced_scheme, parse_scheme("b*.a*"));
  std::string fn = dp.charfn.str();
  EXPECT_NE(fn.find("^{n+2k}"), std::string::npos) << fn;
  EXPECT_NE(fn.find("^{n+k}"), std::string::npos) << fn;
  ASSERT_FALSE(dp.trace.steps.empty());
  EXPECT_EQ(dp.trace.steps[0].rule, "R1");
  Term d = Term::app("P", {tower("F", 8, T("Z")), tower("G", 5, T("Z"))});
  EXPECT_TRUE(dp.decide(d));
  auto p = dp.prove(d);
  ASSERT_TRUE(p);
  EXPECT_EQ(std::get<Term>(check_proof(dp.theory, *p)), d);
  EXPECT_TRUE(dp.check.ran);
  EXPECT_GT(dp.check.members, 5u);
  EXPECT_GT(dp.check.others, 5u);
}

TEST(Pipeline, SingleAxiom) {
  auto dp = pipeline(theory("chain"));
  EXPECT_EQ(dp.reduced_scheme, parse_scheme("a*"));
  ASSERT_FALSE(dp.charfn.branches.empty());
  EXPECT_EQ(dp.charfn.atoms().atoms.size(), 1u);
  EXPECT_TRUE(dp.charfn.atoms().groups.empty());
  EXPECT_TRUE(dp.decide(T("P(F(F(Z)))")));
  EXPECT_FALSE(dp.decide(T("P(G(Z))")));
}

TEST(Pipeline, SelfCheckPasses) {
  for (const char* name : {"modular", "spine"}) {
    auto dp = pipeline(theory(name));
    EXPECT_TRUE(dp.check.ran) << name;
    EXPECT_GT(dp.check.members, 0u) << name;
  }
}

TEST(Pipeline, SkipSelfCheck) {
  PipelineOptions opt;
  opt.selfcheck = false;
  auto dp = pipeline(theory("fg"), opt);
  EXPECT_FALSE(dp.check.ran);
}

TEST(Pipeline, AncestorNamesTheBlockingScheme) {
  try {
    pipeline(theory("ancestor"));
    FAIL() << "expected the ancestor theory to resist synthesis";
  } catch (const NotLinearizable& e) {
    EXPECT_NE(std::string(e.what()).find("scheme "), std::string::npos) << e.what();
  } catch (const Unsupported& e) {
    EXPECT_NE(std::string(e.what()).find("scheme "), std::string::npos) << e.what();
  }
}

TEST(Pipeline, StagesFollowTheOrder) {
  auto dp = pipeline(theory("spine"));
  ASSERT_EQ(dp.stages.size(), 2u);
  EXPECT_EQ(dp.stages[0].axiom, dp.order.order[0]);
  EXPECT_EQ(dp.stages[0].built, parse_scheme(dp.order.order[0] + "*"));
  EXPECT_EQ(dp.stages[1].built, build_scheme(dp.order.order));
}
