#include "tpc/scheme.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

namespace tpc {

struct IterExpr::Node {
  Kind kind = Kind::Eps;
  std::string name;
  std::vector<IterExpr> items;
};

IterExpr IterExpr::axiom(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Axiom;
  n->name = std::move(name);
  return IterExpr(std::move(n));
}

IterExpr IterExpr::eps() {
  static const IterExpr e(std::make_shared<Node>());
  return e;
}

IterExpr IterExpr::dot(std::vector<IterExpr> items) {
  std::vector<IterExpr> flat;
  for (auto& it : items) {
    if (it.kind() == Kind::Eps) continue;
    if (it.kind() == Kind::Dot)
      flat.insert(flat.end(), it.items().begin(), it.items().end());
    else
      flat.push_back(std::move(it));
  }
  if (flat.empty()) return eps();
  if (flat.size() == 1) return flat.front();
  auto n = std::make_shared<Node>();
  n->kind = Kind::Dot;
  n->items = std::move(flat);
  return IterExpr(std::move(n));
}

IterExpr IterExpr::star(IterExpr body) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Star;
  n->items.push_back(std::move(body));
  return IterExpr(std::move(n));
}

IterExpr IterExpr::alt(std::vector<IterExpr> items) {
  if (items.empty()) throw ShapeError("empty alternative");
  if (items.size() == 1) return items.front();
  auto n = std::make_shared<Node>();
  n->kind = Kind::Alt;
  n->items = std::move(items);
  return IterExpr(std::move(n));
}

IterExpr::Kind IterExpr::kind() const { return node_->kind; }
const std::string& IterExpr::name() const { return node_->name; }
const std::vector<IterExpr>& IterExpr::items() const { return node_->items; }
const IterExpr& IterExpr::body() const { return node_->items.front(); }

bool IterExpr::is_unit() const {
  switch (kind()) {
    case Kind::Axiom:
    case Kind::Eps:
      return true;
    case Kind::Dot:
      return std::all_of(items().begin(), items().end(), [](const IterExpr& e) { return e.is_unit(); });
    default:
      return false;
  }
}

int IterExpr::star_depth() const {
  int d = 0;
  for (const auto& it : items()) d = std::max(d, it.star_depth());
  return kind() == Kind::Star ? d + 1 : d;
}

bool IterExpr::nullable() const {
  switch (kind()) {
    case Kind::Axiom:
      return false;
    case Kind::Eps:
    case Kind::Star:
      return true;
    case Kind::Dot:
      return std::all_of(items().begin(), items().end(), [](const IterExpr& e) { return e.nullable(); });
    case Kind::Alt:
      return std::any_of(items().begin(), items().end(), [](const IterExpr& e) { return e.nullable(); });
  }
  return false;
}

std::string IterExpr::str() const {
  switch (kind()) {
    case Kind::Axiom:
      return name();
    case Kind::Eps:
      return "eps";
    case Kind::Star: {
      auto k = body().kind();
      bool paren = k == Kind::Dot || k == Kind::Alt || k == Kind::Star;
      return paren ? "(" + body().str() + ")*" : body().str() + "*";
    }
    case Kind::Dot: {
      std::string out;
      for (std::size_t i = 0; i < items().size(); ++i) {
        if (i) out += '.';
        const auto& it = items()[i];
        out += it.kind() == Kind::Alt ? "(" + it.str() + ")" : it.str();
      }
      return out;
    }
    case Kind::Alt: {
      std::string out;
      for (std::size_t i = 0; i < items().size(); ++i) {
        if (i) out += '|';
        out += items()[i].str();
      }
      return out;
    }
  }
  return {};
}

bool operator==(const IterExpr& a, const IterExpr& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind() || a.name() != b.name() || a.items().size() != b.items().size())
    return false;
  for (std::size_t i = 0; i < a.items().size(); ++i)
    if (!(a.items()[i] == b.items()[i])) return false;
  return true;
}

namespace {

class SchemeParser {
 public:
  explicit SchemeParser(std::string_view s) : s_(s) {}

  IterExpr parse() {
    IterExpr e = alt();
    ws();
    if (p_ != s_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  IterExpr alt() {
    std::vector<IterExpr> items{dot()};
    while (eat('|')) items.push_back(dot());
    return IterExpr::alt(std::move(items));
  }
  IterExpr dot() {
    std::vector<IterExpr> items{postfix()};
    while (eat('.')) items.push_back(postfix());
    return IterExpr::dot(std::move(items));
  }
  IterExpr postfix() {
    IterExpr e = primary();
    while (eat('*')) e = IterExpr::star(e);
    return e;
  }
  IterExpr primary() {
    ws();
    if (eat('(')) {
      IterExpr e = alt();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (p_ >= s_.size() || !std::isalpha(static_cast<unsigned char>(s_[p_])))
      fail("expected axiom name, 'eps' or '('");
    std::size_t b = p_;
    while (p_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[p_])) || s_[p_] == '_')) ++p_;
    std::string id(s_.substr(b, p_ - b));
    return id == "eps" ? IterExpr::eps() : IterExpr::axiom(id);
  }
  void ws() {
    while (p_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[p_]))) ++p_;
  }
  bool eat(char c) {
    ws();
    if (p_ < s_.size() && s_[p_] == c) {
      ++p_;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& m) { throw SyntaxError(1, p_ + 1, m); }

  std::string_view s_;
  std::size_t p_ = 0;
};

}  // namespace

IterExpr parse_scheme(std::string_view text) { return SchemeParser(text).parse(); }

void check_scheme(const Theory& th, const IterExpr& e) {
  if (e.kind() == IterExpr::Kind::Axiom) {
    th.axiom(e.name());
    return;
  }
  for (const auto& it : e.items()) check_scheme(th, it);
}

// ---------------------------------------------------------------------------

MultiIndex MultiIndex::nat(std::uint64_t n) {
  MultiIndex m;
  m.kind_ = Kind::Nat;
  m.value_ = n;
  return m;
}

MultiIndex MultiIndex::list(std::vector<MultiIndex> items) {
  MultiIndex m;
  m.kind_ = Kind::List;
  m.items_ = std::move(items);
  return m;
}

MultiIndex MultiIndex::unit() { return MultiIndex{}; }

MultiIndex MultiIndex::units(std::size_t n) {
  return list(std::vector<MultiIndex>(n, unit()));
}

std::uint64_t MultiIndex::length() const {
  switch (kind_) {
    case Kind::Nat:
      return value_;
    case Kind::List:
      return items_.size();
    case Kind::Unit:
      return 0;
  }
  return 0;
}

const MultiIndex& MultiIndex::operator[](std::size_t one_based) const {
  if (kind_ != Kind::List || one_based < 1 || one_based > items_.size())
    throw ShapeError("multi-index " + str() + " has no element " + std::to_string(one_based));
  return items_[one_based - 1];
}

std::string MultiIndex::str() const {
  switch (kind_) {
    case Kind::Nat:
      return std::to_string(value_);
    case Kind::Unit:
      return "u";
    case Kind::List: {
      std::string out = "{";
      for (std::size_t i = 0; i < items_.size(); ++i) {
        if (i) out += ",";
        out += items_[i].str();
      }
      return out + "}";
    }
  }
  return {};
}

std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b) {
  if (auto c = a.kind_ <=> b.kind_; c != 0) return c;
  if (auto c = a.value_ <=> b.value_; c != 0) return c;
  return std::lexicographical_compare_three_way(a.items_.begin(), a.items_.end(), b.items_.begin(), b.items_.end());
}

MultiIndex parse_multi_index(std::string_view text) {
  std::size_t p = 0;
  auto ws = [&] {
    while (p < text.size() && std::isspace(static_cast<unsigned char>(text[p]))) ++p;
  };
  std::function<MultiIndex()> rec = [&]() -> MultiIndex {
    ws();
    if (p >= text.size()) throw SyntaxError(1, p + 1, "unexpected end of multi-index");
    if (text[p] == '{') {
      ++p;
      std::vector<MultiIndex> items;
      ws();
      if (p < text.size() && text[p] == '}') {
        ++p;
        return MultiIndex::list();
      }
      while (true) {
        items.push_back(rec());
        ws();
        if (p < text.size() && text[p] == ',') {
          ++p;
          continue;
        }
        if (p < text.size() && text[p] == '}') {
          ++p;
          break;
        }
        throw SyntaxError(1, p + 1, "expected ',' or '}'");
      }
      return MultiIndex::list(std::move(items));
    }
    if (text[p] == 'u') {
      ++p;
      return MultiIndex::unit();
    }
    if (!std::isdigit(static_cast<unsigned char>(text[p])))
      throw SyntaxError(1, p + 1, "expected number, 'u' or '{'");
    std::uint64_t v = 0;
    while (p < text.size() && std::isdigit(static_cast<unsigned char>(text[p])))
      v = v * 10 + static_cast<std::uint64_t>(text[p++] - '0');
    return MultiIndex::nat(v);
  };
  MultiIndex m = rec();
  ws();
  if (p != text.size()) throw SyntaxError(1, p + 1, "unexpected trailing input");
  return m;
}

// ---------------------------------------------------------------------------

IndexShape IndexShape::unit() { return IndexShape{}; }

IndexShape IndexShape::list_of(IndexShape element) {
  IndexShape s;
  s.kind_ = Kind::ListOf;
  s.parts_.push_back(std::move(element));
  return s;
}

IndexShape IndexShape::tuple(std::vector<IndexShape> parts) {
  IndexShape s;
  s.kind_ = Kind::Tuple;
  s.parts_ = std::move(parts);
  return s;
}

IndexShape IndexShape::choice(std::vector<IndexShape> branches) {
  IndexShape s;
  s.kind_ = Kind::Choice;
  s.parts_ = std::move(branches);
  return s;
}

std::string IndexShape::str() const {
  auto join = [&] {
    std::string out;
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      if (i) out += ", ";
      out += parts_[i].str();
    }
    return out;
  };
  switch (kind_) {
    case Kind::Unit:
      return "Unit";
    case Kind::ListOf:
      return "ListOf(" + element().str() + ")";
    case Kind::Tuple:
      return "Tuple(" + join() + ")";
    case Kind::Choice:
      return "Choice([" + join() + "])";
  }
  return {};
}

IndexShape shape_of(const IterExpr& e) {
  switch (e.kind()) {
    case IterExpr::Kind::Axiom:
    case IterExpr::Kind::Eps:
      return IndexShape::unit();
    case IterExpr::Kind::Star:
      return IndexShape::list_of(shape_of(e.body()));
    case IterExpr::Kind::Dot: {
      std::vector<IndexShape> parts;
      for (const auto& f : e.items())
        if (auto s = shape_of(f); s.kind() != IndexShape::Kind::Unit) parts.push_back(std::move(s));
      if (parts.empty()) return IndexShape::unit();
      // one consumer: the Dot takes that factor's index directly
      if (parts.size() == 1) return parts.front();
      return IndexShape::tuple(std::move(parts));
    }
    case IterExpr::Kind::Alt: {
      std::vector<IndexShape> parts;
      for (const auto& f : e.items()) parts.push_back(shape_of(f));
      return IndexShape::choice(std::move(parts));
    }
  }
  return IndexShape::unit();
}

namespace {

MultiIndex coerce_at(const IndexShape& s, const MultiIndex& m, const std::string& where) {
  auto fail = [&](const std::string& why) -> MultiIndex {
    throw ShapeError("index " + m.str() + " at " + where + " does not fit " + s.str() + ": " + why);
  };
  using K = MultiIndex::Kind;
  switch (s.kind()) {
    case IndexShape::Kind::Unit:
      if (m.kind() != K::Unit) return fail("expected placeholder u");
      return m;
    case IndexShape::Kind::ListOf: {
      if (m.kind() == K::Nat) {
        if (s.element().kind() != IndexShape::Kind::Unit)
          return fail("a number only stands for a list of placeholders");
        return MultiIndex::units(m.value());
      }
      if (m.kind() != K::List) return fail("expected a list");
      std::vector<MultiIndex> out;
      for (std::size_t i = 0; i < m.items().size(); ++i)
        out.push_back(coerce_at(s.element(), m.items()[i], where + "[" + std::to_string(i + 1) + "]"));
      return MultiIndex::list(std::move(out));
    }
    case IndexShape::Kind::Tuple: {
      if (s.parts().size() == 1) {
        try {
          return coerce_at(s.parts().front(), m, where);
        } catch (const ShapeError&) {
          if (m.kind() == K::List && m.items().size() == 1)
            return coerce_at(s.parts().front(), m.items().front(), where + "[1]");
          throw;
        }
      }
      if (m.kind() != K::List || m.items().size() != s.parts().size())
        return fail("expected a list of " + std::to_string(s.parts().size()) + " components");
      std::vector<MultiIndex> out;
      for (std::size_t i = 0; i < m.items().size(); ++i)
        out.push_back(coerce_at(s.parts()[i], m.items()[i], where + "[" + std::to_string(i + 1) + "]"));
      return MultiIndex::list(std::move(out));
    }
    case IndexShape::Kind::Choice: {
      if (m.kind() != K::List || m.items().size() != 2)
        return fail("a choice index must have length 2");
      const auto& tag = m.items()[0];
      if (tag.kind() != K::Nat || tag.value() < 1 || tag.value() > s.parts().size())
        return fail("branch selector out of range");
      return MultiIndex::list(
          {tag, coerce_at(s.parts()[tag.value() - 1], m.items()[1], where + "[2]")});
    }
  }
  return m;
}

void inst(const IterExpr& e, const MultiIndex& m, std::vector<std::string>& out) {
  switch (e.kind()) {
    case IterExpr::Kind::Axiom:
      out.push_back(e.name());
      return;
    case IterExpr::Kind::Eps:
      return;
    case IterExpr::Kind::Star:
      for (const auto& el : m.items()) inst(e.body(), el, out);
      return;
    case IterExpr::Kind::Alt:
      inst(e.items()[m.items()[0].value() - 1], m.items()[1], out);
      return;
    case IterExpr::Kind::Dot: {
      std::size_t consumers = 0;
      for (const auto& f : e.items()) consumers += f.is_unit() ? 0 : 1;
      std::size_t k = 0;
      for (const auto& f : e.items()) {
        if (f.is_unit()) {
          inst(f, MultiIndex::unit(), out);
        } else {
          inst(f, consumers == 1 ? m : m.items()[k], out);
          ++k;
        }
      }
      return;
    }
  }
}

}  // namespace

MultiIndex coerce_index(const IndexShape& shape, const MultiIndex& m) {
  return coerce_at(shape, m, "m");
}

MultiIndex coerce_index(const IterExpr& e, const MultiIndex& m) {
  return coerce_index(shape_of(e), m);
}

std::vector<std::string> instantiate(const IterExpr& e, const MultiIndex& m) {
  MultiIndex canon = coerce_index(e, m);
  std::vector<std::string> out;
  inst(e, canon, out);
  return out;
}

std::optional<Clause> reduce_specific(const Theory& th, const std::vector<std::string>& seq) {
  Clause acc = identity_clause();
  for (const auto& name : seq) {
    auto next = compose_clauses(acc, th.axiom(name));
    if (!next) return std::nullopt;
    acc = *next;
  }
  acc.name.clear();
  for (std::size_t i = 0; i < seq.size(); ++i) acc.name += (i ? "." : "") + seq[i];
  if (seq.empty()) acc.name = "eps";
  return acc;
}

namespace {

std::vector<IndexedProof> gen(const IterExpr& e, std::size_t budget) {
  using K = IterExpr::Kind;
  switch (e.kind()) {
    case K::Axiom:
      if (budget == 0) return {};
      return {IndexedProof{MultiIndex::unit(), {e.name()}}};
    case K::Eps:
      return {IndexedProof{MultiIndex::unit(), {}}};
    case K::Alt: {
      std::vector<IndexedProof> out;
      for (std::size_t b = 0; b < e.items().size(); ++b)
        for (auto& p : gen(e.items()[b], budget))
          out.push_back({MultiIndex::list({MultiIndex::nat(b + 1), p.index}), std::move(p.steps)});
      return out;
    }
    case K::Star: {
      auto elems = gen(e.body(), budget);
      std::vector<IndexedProof> out;
      std::vector<MultiIndex> cur;
      std::vector<std::string> steps;
      std::function<void(std::size_t)> rec = [&](std::size_t left) {
        out.push_back({MultiIndex::list(cur), steps});
        if (cur.size() >= budget) return;
        for (const auto& el : elems) {
          if (el.steps.size() > left) continue;
          cur.push_back(el.index);
          steps.insert(steps.end(), el.steps.begin(), el.steps.end());
          rec(left - el.steps.size());
          steps.resize(steps.size() - el.steps.size());
          cur.pop_back();
        }
      };
      rec(budget);
      return out;
    }
    case K::Dot: {
      std::size_t consumers = 0;
      for (const auto& f : e.items()) consumers += f.is_unit() ? 0 : 1;
      std::vector<IndexedProof> out;
      std::vector<MultiIndex> comps;
      std::vector<std::string> steps;
      std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t left) {
        if (i == e.items().size()) {
          MultiIndex idx = consumers == 0   ? MultiIndex::unit()
                           : consumers == 1 ? comps.front()
                                            : MultiIndex::list(comps);
          out.push_back({idx, steps});
          return;
        }
        const auto& f = e.items()[i];
        for (const auto& p : gen(f, left)) {
          if (!f.is_unit()) comps.push_back(p.index);
          steps.insert(steps.end(), p.steps.begin(), p.steps.end());
          rec(i + 1, left - p.steps.size());
          steps.resize(steps.size() - p.steps.size());
          if (!f.is_unit()) comps.pop_back();
        }
      };
      rec(0, budget);
      return out;
    }
  }
  return {};
}

}  // namespace

std::vector<IndexedProof> enumerate_indices(const IterExpr& e, std::size_t budget) {
  auto out = gen(e, budget);
  std::sort(out.begin(), out.end(), [](const IndexedProof& a, const IndexedProof& b) {
    if (a.steps.size() != b.steps.size()) return a.steps.size() < b.steps.size();
    if (a.steps != b.steps) return a.steps < b.steps;
    return a.index.str() < b.index.str();
  });
  return out;
}

IterExpr build_scheme(const std::vector<std::string>& axioms) {
  if (axioms.empty()) throw Error("build_scheme needs at least one axiom");
  IterExpr acc = IterExpr::star(IterExpr::axiom(axioms.front()));
  for (std::size_t i = 1; i < axioms.size(); ++i)
    acc = IterExpr::dot({IterExpr::star(IterExpr::dot({acc, IterExpr::axiom(axioms[i])})), acc});
  return acc;
}

}  // namespace tpc
