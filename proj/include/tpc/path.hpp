#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tpc/affine.hpp"
#include "tpc/term.hpp"

namespace tpc {

// One projection [F(x1..xk) -> x_child]; child is 0-based.
struct Step {
  std::string functor;
  std::size_t arity = 0;
  std::size_t child = 0;

  friend bool operator==(const Step&, const Step&) = default;
  friend auto operator<=>(const Step&, const Step&) = default;
  bool same_node(const Step& o) const { return functor == o.functor && arity == o.arity; }
  std::string key() const;  // "P/2.1"
};

using Path = std::vector<Step>;

// [P(R(x, y), z)->y] style clause for a concrete path.
Clause path_clause(const Path& p);
// Inverse of path_clause; the pattern must be linear, with only variables
// off the designated branch.
Path path_from_clause(const Clause& c);
std::string path_str(const Path& p);
Path compose_paths(const Path& p, const Path& q);
Path power_path(const Path& p, std::size_t n);
std::optional<Term> apply_path(const Path& p, const Term& t);

struct Run {
  Step step;
  AffineExpr exp;
  friend bool operator==(const Run&, const Run&) = default;
};

// Run-length path with affine exponents. Normal form: adjacent runs have
// different steps, no run has exponent identically zero.
class SymbolicPath {
 public:
  SymbolicPath() = default;
  explicit SymbolicPath(const Path& p);
  explicit SymbolicPath(std::vector<Run> runs);

  const std::vector<Run>& runs() const { return runs_; }
  bool empty() const { return runs_.empty(); }
  std::vector<Step> skeleton() const;
  // Total length as an affine expression.
  AffineExpr length() const;

  SymbolicPath then(const SymbolicPath& o) const;
  SymbolicPath substituted(const RefMap& m) const;
  void collect_refs(std::set<Ref>& out) const;
  bool mentions_root(std::string_view root) const;

  // Concrete path under the lookup; nullopt when an exponent is unknown or
  // negative.
  std::optional<Path> evaluate(const Lookup& lookup) const;
  std::optional<Term> apply(const Term& t, const Lookup& lookup) const;
  std::optional<Path> concrete() const;

  std::string str() const;  // "[P(x, y)->x].[F(x)->x]^{2n+k}"
  std::string key() const;
  friend bool operator==(const SymbolicPath&, const SymbolicPath&) = default;

 private:
  void normalize();
  std::vector<Run> runs_;
};

enum class AtomKind { EqualsLR, GroundL, GroundR, MatchL, EqualsLL, EqualsRR };

// EqualsLR(left on t, right on d); GroundL/GroundR(path, ground);
// MatchL(left): the path applies to t; EqualsLL/EqualsRR(left, right) compare
// two subtrees on one side and cannot be evaluated yet.
struct Atom {
  AtomKind kind = AtomKind::EqualsLR;
  SymbolicPath left;
  SymbolicPath right;
  std::optional<Term> ground;
  // Provenance used by the star closure: index of the body atom that
  // created this atom and the iteration it was created in. Not part of key().
  int origin = -1;
  Int birth = 0;

  static Atom equals_lr(SymbolicPath l, SymbolicPath r);
  static Atom ground_l(SymbolicPath l, Term g);
  static Atom ground_r(SymbolicPath r, Term g);
  static Atom match_l(SymbolicPath l);
  static Atom equals_ll(SymbolicPath a, SymbolicPath b);
  static Atom equals_rr(SymbolicPath a, SymbolicPath b);

  bool reads_left() const;   // left refers to t
  bool reads_right() const;  // right refers to d
  Atom substituted(const RefMap& m) const;
  void collect_refs(std::set<Ref>& out) const;
  bool mentions_root(std::string_view root) const;

  std::string str() const;
  std::string key() const;
};

// Conjunction of body over var = lower..upper.
struct IterGroup {
  std::string var = "i";
  AffineExpr lower;
  AffineExpr upper;
  std::vector<Atom> body;

  IterGroup substituted(const RefMap& m) const;  // never touches var itself
  std::string str() const;
  std::string key() const;
};

struct AtomSet {
  std::vector<Atom> atoms;
  std::vector<IterGroup> groups;

  AtomSet substituted(const RefMap& m) const;
  void collect_refs(std::set<Ref>& out) const;  // free refs (group vars excluded)
  bool mentions_root(std::string_view root) const;
  // Sorted, deduplicated, empty groups removed when provably empty.
  void canonicalize();
  std::string str() const;  // Intersect(...) form
  std::string key() const;
  friend bool operator==(const AtomSet& a, const AtomSet& b) { return a.key() == b.key(); }
};

AtomSet split_axiom(const Clause& c);
AtomSet identity_atoms();
bool is_identity(const AtomSet& s);

bool eval_atom(const Atom& a, const Lookup& lookup, const Term& t, const Term& d);
bool eval_atomset(const AtomSet& s, const Env& env, const Term& t, const Term& d);
bool eval_atomset(const AtomSet& s, const Lookup& lookup, const Term& t, const Term& d);

enum class Relation { Prefix, Extends, Diverge, Unknown };
struct Related {
  Relation rel = Relation::Unknown;
  SymbolicPath rest;  // Prefix: q = p.rest; Extends: p = q.rest
};
// Equal paths relate as Prefix with an empty rest.
Related relate(const SymbolicPath& p, const SymbolicPath& q, const Assumptions& a);

// Relation "A then B" over (t, d). nullopt when the composed relation is
// provably empty. Throws Unsupported when a path relation depends on the
// value of an index (non-uniform group transport).
std::optional<AtomSet> compose_atomsets(const AtomSet& a, const AtomSet& b, const Assumptions& ctx);

}  // namespace tpc
