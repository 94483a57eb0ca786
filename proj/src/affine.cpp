#include "tpc/affine.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

namespace tpc {

bool operator==(const Ref& a, const Ref& b) { return a.root == b.root && a.subs == b.subs; }

std::strong_ordering operator<=>(const Ref& a, const Ref& b) {
  if (auto c = a.root <=> b.root; c != 0) return c;
  if (auto c = a.subs.size() <=> b.subs.size(); c != 0) return c;
  for (std::size_t i = 0; i < a.subs.size(); ++i)
    if (auto c = a.subs[i] <=> b.subs[i]; c != 0) return c;
  return std::strong_ordering::equal;
}

std::string Ref::str() const {
  std::string out = root;
  for (const auto& s : subs) out += "[" + s.str() + "]";
  return out;
}

bool Ref::is_ground() const {
  return std::all_of(subs.begin(), subs.end(), [](const AffineExpr& e) { return e.is_constant(); });
}

AffineExpr AffineExpr::ref(Ref r, Int coef) {
  AffineExpr e;
  e.add(r, coef);
  return e;
}

void AffineExpr::add(const Ref& r, Int c) {
  if (c == 0) return;
  auto it = std::lower_bound(terms_.begin(), terms_.end(), r,
                             [](const auto& t, const Ref& x) { return t.first < x; });
  if (it != terms_.end() && it->first == r) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  } else {
    terms_.insert(it, {r, c});
  }
}

Int AffineExpr::coef(const Ref& r) const {
  for (const auto& [x, c] : terms_)
    if (x == r) return c;
  return 0;
}

void AffineExpr::collect_refs(std::set<Ref>& out, bool nested) const {
  for (const auto& [r, c] : terms_) {
    out.insert(r);
    if (nested)
      for (const auto& s : r.subs) s.collect_refs(out, true);
  }
}

bool AffineExpr::mentions_root(std::string_view root) const {
  for (const auto& [r, c] : terms_) {
    if (r.root == root) return true;
    for (const auto& s : r.subs)
      if (s.mentions_root(root)) return true;
  }
  return false;
}

AffineExpr AffineExpr::operator-() const { return -1 * *this; }

AffineExpr operator+(const AffineExpr& a, const AffineExpr& b) {
  AffineExpr out = a;
  out.constant_ += b.constant_;
  for (const auto& [r, c] : b.terms_) out.add(r, c);
  return out;
}

AffineExpr operator-(const AffineExpr& a, const AffineExpr& b) { return a + (-1 * b); }

AffineExpr operator*(Int k, const AffineExpr& a) {
  AffineExpr out;
  if (k == 0) return out;
  out.constant_ = a.constant_ * k;
  out.terms_ = a.terms_;
  for (auto& t : out.terms_) t.second *= k;
  return out;
}

std::string AffineExpr::str() const {
  std::string out;
  // positive terms first: "m-i" rather than "-i+m"; subscripted refs
  // before bare ones, bare ones latest letter first ("n+2k", "m[1]+i")
  std::vector<std::pair<Ref, Int>> order = terms_;
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    bool sa = !a.first.subs.empty(), sb = !b.first.subs.empty();
    if (sa != sb) return sa;
    if (sa) return false;
    return a.first.root > b.first.root;
  });
  for (bool positive : {true, false})
    for (const auto& [r, c] : order) {
      if ((c > 0) != positive) continue;
      if (c < 0)
        out += "-";
      else if (!out.empty())
        out += "+";
      Int a = c < 0 ? -c : c;
      if (a != 1) out += std::to_string(a);
      out += r.str();
    }
  if (constant_ != 0 || out.empty()) {
    if (constant_ >= 0 && !out.empty()) out += "+";
    out += std::to_string(constant_);
  }
  return out;
}

bool operator==(const AffineExpr& a, const AffineExpr& b) {
  return a.constant_ == b.constant_ && a.terms_ == b.terms_;
}

std::strong_ordering operator<=>(const AffineExpr& a, const AffineExpr& b) {
  if (auto c = a.terms_.size() <=> b.terms_.size(); c != 0) return c;
  for (std::size_t i = 0; i < a.terms_.size(); ++i) {
    if (auto c = a.terms_[i].first <=> b.terms_[i].first; c != 0) return c;
    if (auto c = a.terms_[i].second <=> b.terms_[i].second; c != 0) return c;
  }
  return a.constant_ <=> b.constant_;
}

namespace {

class AffineParser {
 public:
  explicit AffineParser(std::string_view s) : s_(s) {}

  AffineExpr parse() {
    AffineExpr e = expr();
    ws();
    if (p_ != s_.size()) fail("unexpected trailing input");
    return e;
  }

  AffineExpr expr() {
    ws();
    Int sign = 1;
    if (peek('-')) {
      ++p_;
      sign = -1;
    } else if (peek('+')) {
      ++p_;
    }
    AffineExpr e = sign * term();
    while (true) {
      ws();
      if (peek('+')) {
        ++p_;
        e = e + term();
      } else if (peek('-')) {
        ++p_;
        e = e - term();
      } else {
        return e;
      }
    }
  }

 private:
  AffineExpr term() {
    ws();
    Int k = 1;
    bool have_num = false;
    if (p_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p_]))) {
      k = number();
      have_num = true;
      ws();
      if (peek('*')) {
        ++p_;
        ws();
      } else if (!(peek('(') || peek('|') || ident_start())) {
        return AffineExpr(k);
      }
    }
    (void)have_num;
    return k * factor();
  }

  AffineExpr factor() {
    ws();
    if (peek('(')) {
      ++p_;
      AffineExpr e = expr();
      ws();
      expect(')');
      return e;
    }
    if (peek('|')) {
      ++p_;
      Ref r = ref();
      ws();
      expect('|');
      return AffineExpr::ref(std::move(r));
    }
    return AffineExpr::ref(ref());
  }

  Ref ref() {
    ws();
    if (!ident_start()) fail("expected a variable");
    std::size_t b = p_;
    while (p_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[p_])) || s_[p_] == '_')) ++p_;
    Ref r{std::string(s_.substr(b, p_ - b)), {}};
    while (true) {
      ws();
      if (!peek('[')) break;
      ++p_;
      r.subs.push_back(expr());
      ws();
      expect(']');
    }
    return r;
  }

  Int number() {
    Int v = 0;
    while (p_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p_])))
      v = v * 10 + (s_[p_++] - '0');
    return v;
  }
  bool ident_start() const {
    return p_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[p_]));
  }
  bool peek(char c) const { return p_ < s_.size() && s_[p_] == c; }
  void expect(char c) {
    if (!peek(c)) fail(std::string("expected '") + c + "'");
    ++p_;
  }
  void ws() {
    while (p_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[p_]))) ++p_;
  }
  [[noreturn]] void fail(const std::string& m) { throw SyntaxError(1, p_ + 1, m); }

  std::string_view s_;
  std::size_t p_ = 0;
};

}  // namespace

AffineExpr parse_affine(std::string_view text) { return AffineParser(text).parse(); }

Ref substitute(const Ref& r, const RefMap& m) {
  Ref out{r.root, {}};
  out.subs.reserve(r.subs.size());
  for (const auto& s : r.subs) out.subs.push_back(substitute(s, m));
  return out;
}

AffineExpr substitute(const AffineExpr& e, const RefMap& m) {
  if (m.empty()) return e;
  AffineExpr out(e.constant());
  for (const auto& [r, c] : e.terms()) {
    Ref rr = substitute(r, m);
    auto it = m.find(rr);
    out = out + (it != m.end() ? c * it->second : AffineExpr::ref(rr, c));
  }
  return out;
}

RefMap single(const std::string& var, const AffineExpr& value) {
  return RefMap{{Ref{var, {}}, value}};
}

std::optional<Ref> ground_ref(const Ref& r, const Lookup& lookup) {
  Ref out{r.root, {}};
  for (const auto& s : r.subs) {
    auto v = evaluate(s, lookup);
    if (!v) return std::nullopt;
    out.subs.emplace_back(*v);
  }
  return out;
}

std::optional<Int> evaluate(const AffineExpr& e, const Lookup& lookup) {
  Int acc = e.constant();
  for (const auto& [r, c] : e.terms()) {
    auto g = ground_ref(r, lookup);
    if (!g) return std::nullopt;
    auto v = lookup(*g);
    if (!v) return std::nullopt;
    acc += c * *v;
  }
  return acc;
}

std::optional<Int> Env::value(const Ref& r) const {
  if (r.subs.empty())
    if (auto it = scalars.find(r.root); it != scalars.end()) return it->second;
  auto it = roots.find(r.root);
  if (it == roots.end()) return std::nullopt;
  const MultiIndex* cur = &it->second;
  for (const auto& s : r.subs) {
    Int k = s.constant();
    if (cur->kind() != MultiIndex::Kind::List || k < 1 || static_cast<std::size_t>(k) > cur->items().size())
      return std::nullopt;
    cur = &cur->items()[static_cast<std::size_t>(k - 1)];
  }
  return static_cast<Int>(cur->length());
}

Lookup Env::lookup() const {
  return [this](const Ref& r) { return value(r); };
}

// ---------------------------------------------------------------------------

LinearRow LinearRow::from(const AffineExpr& e) {
  LinearRow r;
  r.constant = e.constant();
  for (const auto& [ref, c] : e.terms()) r.coef[ref] = c;
  return r;
}

void LinearRow::add(const LinearRow& o, Rational k) {
  if (k == Rational(0)) return;
  constant += o.constant * k;
  for (const auto& [ref, c] : o.coef) {
    auto& slot = coef[ref];
    slot += c * k;
    if (slot == Rational(0)) coef.erase(ref);
  }
}

void LinearRow::scale(Rational k) {
  constant *= k;
  for (auto& [ref, c] : coef) c *= k;
}

std::pair<AffineExpr, Int> LinearRow::to_integer() const {
  Int l = constant.denominator();
  for (const auto& [ref, c] : coef) l = std::lcm(l, c.denominator());
  AffineExpr e((constant * l).numerator());
  for (const auto& [ref, c] : coef) e = e + AffineExpr::ref(ref, (c * l).numerator());
  return {e, l};
}

namespace {

// Returns true when the system `rows >= 0` is infeasible over the rationals.
bool fm_infeasible(std::vector<LinearRow> rows) {
  constexpr std::size_t kRowCap = 4000;
  while (true) {
    for (const auto& r : rows)
      if (r.is_constant() && r.constant < Rational(0)) return true;
    std::erase_if(rows, [](const LinearRow& r) { return r.is_constant(); });
    if (rows.empty()) return false;
    // Eliminate the variable with the fewest pos*neg products.
    std::map<Ref, std::pair<std::size_t, std::size_t>> counts;
    for (const auto& r : rows)
      for (const auto& [ref, c] : r.coef) (c > Rational(0) ? counts[ref].first : counts[ref].second)++;
    auto best = std::min_element(counts.begin(), counts.end(), [](const auto& a, const auto& b) {
      return a.second.first * a.second.second < b.second.first * b.second.second;
    });
    Ref v = best->first;
    std::vector<LinearRow> pos, neg, next;
    for (auto& r : rows) {
      auto it = r.coef.find(v);
      if (it == r.coef.end())
        next.push_back(std::move(r));
      else if (it->second > Rational(0))
        pos.push_back(std::move(r));
      else
        neg.push_back(std::move(r));
    }
    for (const auto& p : pos) {
      for (const auto& n : neg) {
        LinearRow c = p;
        c.scale(1 / p.coef.at(v));
        LinearRow d = n;
        d.scale(1 / -n.coef.at(v));
        c.add(d, 1);
        c.coef.erase(v);
        next.push_back(std::move(c));
      }
    }
    if (next.size() > kRowCap) return false;
    rows = std::move(next);
  }
}

}  // namespace

bool Assumptions::proves_nonneg(const AffineExpr& e) const {
  if (e.is_constant()) return e.constant() >= 0;
  // Cheap path: every coefficient nonneg and constant nonneg.
  bool trivial = e.constant() >= 0;
  for (const auto& [r, c] : e.terms()) trivial = trivial && c > 0;
  if (trivial) return true;
  std::vector<LinearRow> rows;
  std::set<Ref> refs;
  for (const auto& f : facts_) {
    rows.push_back(LinearRow::from(f));
    f.collect_refs(refs, false);
  }
  rows.push_back(LinearRow::from(-e - 1));
  e.collect_refs(refs, false);
  for (const auto& r : refs) rows.push_back(LinearRow::from(AffineExpr::ref(r)));
  return fm_infeasible(std::move(rows));
}

bool Assumptions::proves_zero(const AffineExpr& e) const {
  if (e.is_constant()) return e.constant() == 0;
  return proves_nonneg(e) && proves_nonneg(-e);
}

bool Assumptions::feasible() const {
  std::vector<LinearRow> rows;
  std::set<Ref> refs;
  for (const auto& f : facts_) {
    rows.push_back(LinearRow::from(f));
    f.collect_refs(refs, false);
  }
  for (const auto& r : refs) rows.push_back(LinearRow::from(AffineExpr::ref(r)));
  return !fm_infeasible(std::move(rows));
}

}  // namespace tpc
