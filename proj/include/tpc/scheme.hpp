#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tpc/term.hpp"

namespace tpc {

// Regular-expression-like term over axiom names: a, eps, a.b, a*, a|b.
// Dot lists are flattened and drop eps factors; a Dot or Alt of a single
// item collapses to that item.
class IterExpr {
 public:
  enum class Kind { Axiom, Eps, Dot, Star, Alt };

  static IterExpr axiom(std::string name);
  static IterExpr eps();
  static IterExpr dot(std::vector<IterExpr> items);
  static IterExpr star(IterExpr body);
  static IterExpr alt(std::vector<IterExpr> items);

  Kind kind() const;
  const std::string& name() const;          // Axiom
  const std::vector<IterExpr>& items() const;  // Dot, Alt
  const IterExpr& body() const;             // Star

  bool is_unit() const;  // consumes no index (axiom, eps, or dot of those)
  int star_depth() const;
  bool nullable() const;

  std::string str() const;  // "((a*.b)*.a*.c)*.(a*.b)*.a*"

  friend bool operator==(const IterExpr& a, const IterExpr& b);

 private:
  struct Node;
  explicit IterExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

IterExpr parse_scheme(std::string_view text);
// Every axiom reference resolves in the theory.
void check_scheme(const Theory& th, const IterExpr& e);

// A natural number, a list of multi-indexes, or the placeholder `u` used in
// canonical indexes for positions that select nothing.
class MultiIndex {
 public:
  enum class Kind { Nat, List, Unit };

  static MultiIndex nat(std::uint64_t n);
  static MultiIndex list(std::vector<MultiIndex> items = {});
  static MultiIndex unit();
  static MultiIndex units(std::size_t n);  // {u, ..., u}

  Kind kind() const { return kind_; }
  std::uint64_t value() const { return value_; }
  const std::vector<MultiIndex>& items() const { return items_; }
  // |m|: the number itself, or the list length (0 for a placeholder).
  std::uint64_t length() const;
  const MultiIndex& operator[](std::size_t one_based) const;

  std::string str() const;
  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
  friend std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b);

 private:
  Kind kind_ = Kind::Unit;
  std::uint64_t value_ = 0;
  std::vector<MultiIndex> items_;
};

MultiIndex parse_multi_index(std::string_view text);

class IndexShape {
 public:
  enum class Kind { Unit, ListOf, Tuple, Choice };

  static IndexShape unit();
  static IndexShape list_of(IndexShape element);
  static IndexShape tuple(std::vector<IndexShape> parts);
  static IndexShape choice(std::vector<IndexShape> branches);

  Kind kind() const { return kind_; }
  const std::vector<IndexShape>& parts() const { return parts_; }
  const IndexShape& element() const { return parts_.front(); }

  std::string str() const;
  friend bool operator==(const IndexShape&, const IndexShape&) = default;

 private:
  Kind kind_ = Kind::Unit;
  std::vector<IndexShape> parts_;
};

IndexShape shape_of(const IterExpr& e);
MultiIndex coerce_index(const IndexShape& shape, const MultiIndex& m);
MultiIndex coerce_index(const IterExpr& e, const MultiIndex& m);
std::vector<std::string> instantiate(const IterExpr& e, const MultiIndex& m);
std::optional<Clause> reduce_specific(const Theory& th, const std::vector<std::string>& seq);

struct IndexedProof {
  MultiIndex index;
  std::vector<std::string> steps;
};

// Canonical indexes with instantiation length <= budget (and star lists no
// longer than budget), ordered by length, then steps, then index.
std::vector<IndexedProof> enumerate_indices(const IterExpr& e, std::size_t budget);

IterExpr build_scheme(const std::vector<std::string>& axioms);

}  // namespace tpc
