#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/rational.hpp>

#include "tpc/scheme.hpp"

namespace tpc {

using Int = std::int64_t;
using Rational = boost::rational<Int>;

class AffineExpr;

// A reference to an index quantity. `n` is the length of root n, `m[2]` the
// length of the second element of m, `m[i][1]` nests further. Subscripts are
// themselves affine. Iteration variables are roots without subscripts that
// are bound as plain integers.
struct Ref {
  std::string root;
  std::vector<AffineExpr> subs;

  std::string str() const;
  bool is_ground() const;  // all subscripts constant
};

bool operator==(const Ref& a, const Ref& b);
std::strong_ordering operator<=>(const Ref& a, const Ref& b);

// c + sum(coef * ref); terms sorted by Ref, no zero coefficients.
class AffineExpr {
 public:
  AffineExpr() = default;
  AffineExpr(Int c) : constant_(c) {}  // NOLINT: integers promote
  static AffineExpr ref(Ref r, Int coef = 1);
  static AffineExpr var(std::string root) { return ref(Ref{std::move(root), {}}); }

  Int constant() const { return constant_; }
  const std::vector<std::pair<Ref, Int>>& terms() const { return terms_; }
  bool is_constant() const { return terms_.empty(); }
  Int coef(const Ref& r) const;
  // Refs at top level and inside subscripts.
  void collect_refs(std::set<Ref>& out, bool nested = true) const;
  bool mentions_root(std::string_view root) const;

  AffineExpr operator-() const;
  friend AffineExpr operator+(const AffineExpr& a, const AffineExpr& b);
  friend AffineExpr operator-(const AffineExpr& a, const AffineExpr& b);
  friend AffineExpr operator*(Int k, const AffineExpr& a);

  std::string str() const;  // "2n+k-1", "m[1]+m[2]-2"
  friend bool operator==(const AffineExpr&, const AffineExpr&);
  friend std::strong_ordering operator<=>(const AffineExpr&, const AffineExpr&);

 private:
  void add(const Ref& r, Int c);
  Int constant_ = 0;
  std::vector<std::pair<Ref, Int>> terms_;
};

AffineExpr parse_affine(std::string_view text);

// Replaces refs (matched after substituting inside subscripts) and bare
// iteration variables.
using RefMap = std::map<Ref, AffineExpr>;
AffineExpr substitute(const AffineExpr& e, const RefMap& m);
Ref substitute(const Ref& r, const RefMap& m);
RefMap single(const std::string& var, const AffineExpr& value);

// Ground ref -> value, or nullopt when unknown.
using Lookup = std::function<std::optional<Int>(const Ref&)>;
std::optional<Int> evaluate(const AffineExpr& e, const Lookup& lookup);
// Grounds the subscripts of r; nullopt when one is unknown.
std::optional<Ref> ground_ref(const Ref& r, const Lookup& lookup);

// Index values bound to named roots, plus integer iteration variables.
struct Env {
  std::map<std::string, MultiIndex> roots;
  std::map<std::string, Int> scalars;

  // Length at a ground ref; nullopt for unbound roots or missing elements.
  std::optional<Int> value(const Ref& r) const;
  Lookup lookup() const;
};

// Linear facts `e >= 0`. Every ref is implicitly >= 0.
class Assumptions {
 public:
  void add_nonneg(const AffineExpr& e) { facts_.push_back(e); }
  void add_ge(const AffineExpr& a, const AffineExpr& b) { facts_.push_back(a - b); }
  void add_eq(const AffineExpr& a, const AffineExpr& b) {
    add_ge(a, b);
    add_ge(b, a);
  }
  void append(const Assumptions& o) { facts_.insert(facts_.end(), o.facts_.begin(), o.facts_.end()); }
  const std::vector<AffineExpr>& facts() const { return facts_; }

  // Sound, incomplete: rational Fourier-Motzkin refutation of e <= -1.
  bool proves_nonneg(const AffineExpr& e) const;
  bool proves_positive(const AffineExpr& e) const { return proves_nonneg(e - 1); }
  bool proves_zero(const AffineExpr& e) const;
  bool feasible() const;

 private:
  std::vector<AffineExpr> facts_;
};

// Linear combination over rationals, used by the solvers.
struct LinearRow {
  std::map<Ref, Rational> coef;
  Rational constant{0};

  static LinearRow from(const AffineExpr& e);
  bool is_constant() const { return coef.empty(); }
  void add(const LinearRow& o, Rational k);
  void scale(Rational k);
  // Clears denominators; returns expr and the positive multiplier used.
  std::pair<AffineExpr, Int> to_integer() const;
};

}  // namespace tpc
