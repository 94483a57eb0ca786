#pragma once

#include "tpc/math.hpp"
#include "tpc/sigma.hpp"

namespace tpc {

// Conditions h(m, n) under which f(m) is contained in g(n). The roots of f
// are parameters; the roots of g are existentials, renamed away from the
// roots of f. Sound, not complete: atoms are matched positionally by path
// skeleton and a mismatch yields an unsatisfiable system.
ConditionSystem includes(const SymbolicCharFn& f, const SymbolicCharFn& g);

// The same conditions read the other way: parameters become existentials.
ConditionSystem swap_roles(const ConditionSystem& sys);

}  // namespace tpc
