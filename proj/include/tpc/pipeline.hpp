#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tpc/delta.hpp"
#include "tpc/final.hpp"
#include "tpc/oracle.hpp"

namespace tpc {

struct PipelineOptions {
  bool selfcheck = true;
  std::size_t check_depth = 6;
  std::size_t check_size = 12;
};

// One axiom added to the scheme, then reduced.
struct Stage {
  std::string axiom;
  IterExpr built = IterExpr::eps();
  ReduceResult reduced{IterExpr::eps(), {}};
};

struct SelfCheck {
  bool ran = false;
  std::size_t members = 0;  // reachable goals, all decided true
  std::size_t others = 0;   // perturbed goals, every positive answer replayed
};

struct DecisionProcedure {
  Theory theory;
  AxiomOrder order;
  std::vector<Stage> stages;
  IterExpr reduced_scheme = IterExpr::eps();
  SymbolicCharFn charfn;
  ReductionTrace trace;  // all stages, in order
  SelfCheck check;

  bool decide(const Term& d) const;
  std::optional<Proof> prove(const Term& d) const;
};

// Throws NotLinearizable or Unsupported naming the scheme that failed, and
// InternalMismatch when the self-check disagrees with the oracle.
DecisionProcedure pipeline(const Theory& th, const PipelineOptions& opt = {});

}  // namespace tpc
