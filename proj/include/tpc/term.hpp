#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tpc/error.hpp"

namespace tpc {

// Immutable tree node shared between terms. Hash, size and groundness are
// computed once at construction so equality tests on large trees are cheap.
class Term {
 public:
  static Term var(std::string name);
  static Term app(std::string functor, std::vector<Term> children = {});

  bool is_var() const;
  bool is_ground() const;
  const std::string& name() const;
  std::span<const Term> children() const;
  std::size_t arity() const { return children().size(); }
  const Term& child(std::size_t i) const { return children()[i]; }

  std::size_t hash() const;
  // Number of nodes (variables count as one node).
  std::size_t size() const;
  std::size_t depth() const;

  std::string str() const;

  friend bool operator==(const Term& a, const Term& b);
  // Canonical total order: size, then name, then children left to right.
  friend std::strong_ordering operator<=>(const Term& a, const Term& b);

 private:
  struct Node;
  explicit Term(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct TermHash {
  std::size_t operator()(const Term& t) const { return t.hash(); }
};

using Subst = std::map<std::string, Term>;

// Variables in order of first occurrence (left to right, depth first).
std::vector<std::string> variables_of(const Term& t);
Term substitute(const Term& t, const Subst& s);
// Root matching of a pattern against a ground tree. Repeated pattern
// variables must bind structurally equal subtrees.
bool match(const Term& pattern, const Term& ground, Subst& s);
// Most general unifier with occurs check.
std::optional<Subst> unify(const Term& a, const Term& b);

struct Clause {
  std::string name;
  Term lhs;
  Term rhs;

  std::string str() const;  // "lhs -> rhs"
  friend bool operator==(const Clause& a, const Clause& b) {
    return a.lhs == b.lhs && a.rhs == b.rhs;
  }
};

// x -> x, the clause-level representation of the empty proof.
Clause identity_clause();
// Renames variables to x, y, z, w, x1, x2, ... in order of first occurrence
// on the left-hand side. Two clauses are equal up to renaming iff their
// canonical forms are equal.
Clause canonical(const Clause& c);
bool equal_up_to_renaming(const Clause& a, const Clause& b);

std::optional<Term> apply_clause(const Clause& c, const Term& t);
// Clause whose relation is "c1 then c2"; empty when the relation is empty.
std::optional<Clause> compose_clauses(const Clause& c1, const Clause& c2);

struct Theory {
  Term start = Term::app("S");
  std::vector<Clause> axioms;
  std::optional<Term> goal;

  const Clause* find(std::string_view name) const;
  const Clause& axiom(std::string_view name) const;  // throws UnknownAxiom
  std::vector<std::string> axiom_names() const;
  std::string str() const;  // canonical printer, parse_theory(str()) == *this

  friend bool operator==(const Theory& a, const Theory& b) {
    if (a.start != b.start || a.goal != b.goal || a.axioms.size() != b.axioms.size())
      return false;
    for (std::size_t i = 0; i < a.axioms.size(); ++i)
      if (a.axioms[i].name != b.axioms[i].name || !(a.axioms[i] == b.axioms[i]))
        return false;
    return true;
  }
};

// Throws the matching Error subclass on every invariant violation.
void validate(const Theory& th);

Term parse_term(std::string_view text);
Clause parse_clause(std::string_view name, std::string_view text);
Theory parse_theory(std::string_view text);
Theory load_theory(const std::string& path);

struct Proof {
  std::vector<std::string> steps;
  friend bool operator==(const Proof&, const Proof&) = default;
};

struct InvalidAt {
  std::size_t step;  // 1-based
};

std::variant<Term, InvalidAt> check_proof(const Theory& th, const Proof& p);
// Folds apply_clause over an arbitrary start tree.
std::variant<Term, InvalidAt> replay(const Theory& th, const Term& from,
                                     const std::vector<std::string>& steps);

struct HornRule {
  std::vector<Term> body;
  Term head;
};

Theory horn_to_tpc(const std::vector<Term>& facts, const std::vector<HornRule>& rules,
                   const Term& goal);

}  // namespace tpc
