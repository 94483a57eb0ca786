#pragma once

#include <map>
#include <optional>
#include <string>

#include "tpc/math.hpp"
#include "tpc/sigma.hpp"

namespace tpc {

struct TuneResult {
  std::optional<MultiIndex> assignment;  // empty: no index relates t to d
  std::size_t branch = 0;                // branch that matched
  std::map<Ref, Int> values;
  ConditionSystem equations;  // counts read off the trees, as solved
};

// Reads index values off (t, d) by matching the unambiguous atoms, solving
// the resulting equations, and then tuning each iteration of the groups.
// Throws Ambiguous when some branch cannot be settled without search.
TuneResult tune(const SymbolicCharFn& f, const Term& t, const Term& d);

bool decide(const SymbolicCharFn& f, const Term& t, const Term& d);

// Axiom sequence taking t to d, checked by replay. Throws InternalMismatch
// when the tuned index does not replay to d.
std::optional<Proof> extract_proof(const SymbolicCharFn& f, const Theory& th, const Term& t, const Term& d);

}  // namespace tpc
