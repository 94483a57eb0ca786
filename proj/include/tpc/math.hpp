#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tpc/affine.hpp"

namespace tpc {

struct Equation {
  AffineExpr lhs;
  AffineExpr rhs;
  AffineExpr diff() const { return lhs - rhs; }
  std::string str() const;
  friend bool operator==(const Equation&, const Equation&) = default;
};

// expr = residue (mod modulus), modulus >= 2, 0 <= residue < modulus
struct Congruence {
  AffineExpr expr;
  Int residue = 0;
  Int modulus = 2;
  std::string str() const;  // "n mod 2 = 0"
  friend bool operator==(const Congruence&, const Congruence&) = default;
};

// eq holds for var = lower..upper (empty when upper < lower)
struct Family {
  std::string var = "i";
  AffineExpr lower;
  AffineExpr upper;
  Equation eq;
  std::string str() const;  // "... , for i = 1..m[1]-2"
  friend bool operator==(const Family&, const Family&) = default;
};

enum class VarRole { Parameter, Existential };
enum class VarKind { Scalar, MultiIndex };

struct VarDecl {
  std::string name;
  VarRole role = VarRole::Parameter;
  VarKind kind = VarKind::Scalar;
  friend bool operator==(const VarDecl&, const VarDecl&) = default;
};

struct ConditionSystem {
  std::vector<VarDecl> vars;
  std::vector<Equation> equations;
  std::vector<AffineExpr> inequalities;  // e >= 0
  std::vector<Congruence> congruences;
  std::vector<Family> families;
  bool contradiction = false;  // structurally unsatisfiable
  std::string why;             // reason for the contradiction

  static ConditionSystem unsat(std::string why);

  // Adds the declaration unless the name is already declared.
  void declare(const std::string& name, VarRole role, VarKind kind = VarKind::Scalar);
  const VarDecl* find(const std::string& name) const;
  std::vector<std::string> names(VarRole role) const;
  // Throws Error when an expression uses an undeclared root or a name is
  // declared twice.
  void validate() const;

  // All conditions at the given values. Refs that cannot be evaluated make
  // the condition false.
  bool holds(const Env& env) const;

  std::string str() const;
  friend bool operator==(const ConditionSystem&, const ConditionSystem&) = default;
};

ConditionSystem parse_system(std::string_view text);

// Conjunction of conditions over parameters only.
struct Region {
  bool empty = false;
  std::vector<AffineExpr> inequalities;  // e >= 0
  std::vector<Congruence> congruences;
  // Conditions as derived, before subsumption was applied.
  std::vector<std::string> trace;

  static Region universal() { return {}; }
  static Region unsat(std::string why = {});
  bool universal_p() const { return !empty && inequalities.empty() && congruences.empty(); }
  bool contains(const Lookup& lookup) const;
  // "all n", "none", or one condition per line
  std::string str(const std::vector<std::string>& params = {}) const;
};

// Parameter values for which natural values of the existentials satisfy the
// system. Throws Unsupported for families over existentials, free
// existentials with non-unit coefficients, and disjunctive answers.
Region eliminate(const ConditionSystem& sys);

// The existentials fixed by the equations, "k = n+1" or "2k = n" when the
// value is fractional. Free existentials are left out.
std::vector<Equation> solved_form(const ConditionSystem& sys);

// Least natural solution of a system whose variables are all existential.
// Empty result when there is none. Throws Underdetermined when some
// variable is not bounded.
std::optional<std::map<Ref, Int>> solve_concrete(const ConditionSystem& sys);

struct SolvedEntry {
  Ref target;                      // |u| or u[...]
  AffineExpr value;                // in parameters (and var)
  std::optional<std::string> var;  // set for families
  AffineExpr lower, upper;
  std::string str() const;
};

struct MultiIndexSolution {
  std::vector<SolvedEntry> entries;  // length first, then elements
  Region region;  // parameters where the solved values exist and are natural
  Region domain;  // region plus every element index in range
  // Builds the target at concrete parameter values.
  MultiIndex build(const Env& params) const;
  std::string str() const;
};

// Solves hierarchically for one multi-index existential: its length first,
// then one element per equation. Throws Unsupported when an equation
// mentions two target elements.
MultiIndexSolution solve_multiindex(const ConditionSystem& sys, const std::string& target);

}  // namespace tpc
