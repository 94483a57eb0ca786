#pragma once

#include <string>
#include <vector>

#include "tpc/math.hpp"
#include "tpc/scheme.hpp"
#include "tpc/sigma.hpp"

namespace tpc {

// Outcome of one inclusion query "left <= right" between two schemes.
struct InclusionCheck {
  std::string query;  // "a.b.a*.b <= b.a*.b"
  ConditionSystem system;
  Region region;
  bool holds = false;
  std::string error;  // set when the query could not be decided
};

InclusionCheck check_inclusion(const Theory& th, const IterExpr& left, const IterExpr& right);

// a.gamma <= gamma for every value of gamma's indices
bool test_absorption(const Theory& th, const std::string& a, const IterExpr& gamma);
bool test_commutation(const Theory& th, const std::string& a, const std::string& b);

struct ReductionStep {
  std::string rule;            // R1, R2, R3
  std::vector<std::size_t> at; // child positions from the root of `before`
  std::vector<InclusionCheck> checks;
  IterExpr before = IterExpr::eps();
  IterExpr after = IterExpr::eps();
};

struct ReductionTrace {
  std::vector<ReductionStep> steps;
  std::vector<InclusionCheck> rejected;  // queries that blocked a rule
  std::string str() const;
};

struct ReduceResult {
  IterExpr scheme;
  ReductionTrace trace;
};

ReduceResult reduce_scheme(const Theory& th, const IterExpr& e, std::size_t max_steps = 32);

// Relation-preserving cleanup: flatten, distribute concatenation over
// alternatives, a*.a* -> a*, x*.x.y | y -> x*.y, drop eps next to nullable.
IterExpr normalize(const IterExpr& e);

// Rewrite at the given position without testing, then normalize.
IterExpr apply_rule(const std::string& rule, const IterExpr& e, const std::vector<std::size_t>& at);

// Re-apply every step from the original scheme; returns the final scheme.
IterExpr replay_trace(const IterExpr& original, const ReductionTrace& trace);

struct AxiomOrder {
  std::vector<std::string> order;
  bool weak = true;     // the pairwise relation was a weak order
  std::string warning;  // set when it was not
};

AxiomOrder order_axioms(const Theory& th);

}  // namespace tpc
