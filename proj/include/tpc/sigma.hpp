#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tpc/path.hpp"
#include "tpc/scheme.hpp"
#include "tpc/term.hpp"

namespace tpc {

// Constraint on one index quantity inside a branch.
struct Bound {
  enum class Kind { Any, Zero, Pos, Eq };
  Kind kind = Kind::Any;
  Int value = 0;  // Eq only

  static Bound any() { return {}; }
  static Bound zero() { return {Kind::Zero, 0}; }
  static Bound pos() { return {Kind::Pos, 0}; }
  static Bound eq(Int v) { return {Kind::Eq, v}; }

  bool admits(Int v) const;
  // Every value admitted here is admitted by o.
  bool within(const Bound& o) const;
  // The single admitted value, if there is one.
  std::optional<Int> fixed() const;
  void constrain(Assumptions& as, const Ref& r) const;
  std::string str(const Ref& r) const;  // "n >= 1"
  friend bool operator==(const Bound&, const Bound&) = default;
};

struct Branch {
  AtomSet atoms;
  std::map<Ref, Bound> bounds;  // Any bounds are never stored

  bool unconstrained() const { return bounds.empty(); }
  bool bounds_hold(const Lookup& lookup) const;
  Assumptions assumptions() const;
  // atoms with every fixed bound substituted
  AtomSet pinned() const;
  std::string key() const;
};

// Relation of a scheme: the disjunction of its branches.
struct SymbolicCharFn {
  IterExpr scheme = IterExpr::eps();
  IndexShape shape;
  std::vector<std::string> roots;  // one per index component
  std::vector<Branch> branches;

  // First branch's atoms; the main formula.
  const AtomSet& atoms() const { return branches.front().atoms; }
  std::string str() const;
};

struct SigmaOptions {
  // Preferred root names, in the order the roots are allocated.
  std::vector<std::string> roots;
};

// Throws Unsupported, NotLinearizable or NoCompose. Failures inside a
// sub-scheme are prefixed with "[sub-scheme] ".
SymbolicCharFn sigma(const Theory& th, const IterExpr& e, const SigmaOptions& opt = {});

struct StarClosure {
  AtomSet atoms;        // valid for count >= 1
  bool at_most_one = false;  // the body cannot follow itself; atoms are the count = 1 case
};

// Closure of a star body. The body reads its own index through
// count[ivar]; the result is in terms of count and, for per-iteration
// atoms, an IterGroup over ivar = 1..count. Every result is verified by
// induction on count before it is returned.
StarClosure star_closure(const AtomSet& body, const Ref& count, const std::string& ivar = "i");

// Removes duplicate and subsumed branches, and widens a positive bound to
// Any when the zero case of the formula is another branch.
std::vector<Branch> merge_branches(std::vector<Branch> branches);

// True when the atoms say d = t for every tree with the given root functor
// shape: EqualsLR(p, p) over all children of one node.
bool is_covering_identity(const AtomSet& s);

// Index of the scheme -> values of the roots.
Env bind(const SymbolicCharFn& f, const MultiIndex& m);
// Values of ground refs -> canonical index. Missing lengths default to 0.
MultiIndex unbind(const SymbolicCharFn& f, const std::map<Ref, Int>& values);

bool eval_charfn(const SymbolicCharFn& f, const MultiIndex& m, const Term& t, const Term& d);
bool eval_charfn(const SymbolicCharFn& f, const Env& env, const Term& t, const Term& d);

}  // namespace tpc
