#include "tpc/term.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <sstream>
#include <unordered_map>

namespace tpc {

struct Term::Node {
  bool variable = false;
  std::string name;
  std::vector<Term> children;
  std::size_t hash = 0;
  std::size_t size = 1;
  std::size_t depth = 1;
  bool ground = true;
};

namespace {

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

}  // namespace

Term Term::var(std::string name) {
  auto n = std::make_shared<Node>();
  n->variable = true;
  n->hash = mix(0x51ed27, std::hash<std::string>{}(name));
  n->name = std::move(name);
  n->ground = false;
  return Term(std::move(n));
}

Term Term::app(std::string functor, std::vector<Term> children) {
  auto n = std::make_shared<Node>();
  std::size_t h = mix(0x2545f491, std::hash<std::string>{}(functor));
  h = mix(h, children.size());
  std::size_t depth = 0;
  for (const auto& c : children) {
    h = mix(h, c.hash());
    n->size += c.size();
    depth = std::max(depth, c.depth());
    n->ground = n->ground && c.is_ground();
  }
  n->depth = depth + 1;
  n->hash = h;
  n->name = std::move(functor);
  n->children = std::move(children);
  return Term(std::move(n));
}

bool Term::is_var() const { return node_->variable; }
bool Term::is_ground() const { return node_->ground; }
const std::string& Term::name() const { return node_->name; }
std::span<const Term> Term::children() const { return node_->children; }
std::size_t Term::hash() const { return node_->hash; }
std::size_t Term::size() const { return node_->size; }
std::size_t Term::depth() const { return node_->depth; }

std::string Term::str() const {
  std::string out;
  std::function<void(const Term&)> rec = [&](const Term& t) {
    out += t.name();
    if (t.is_var() || t.arity() == 0) return;
    out += '(';
    for (std::size_t i = 0; i < t.arity(); ++i) {
      if (i) out += ", ";
      rec(t.child(i));
    }
    out += ')';
  };
  rec(*this);
  return out;
}

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  if (a.hash() != b.hash() || a.size() != b.size() || a.is_var() != b.is_var() ||
      a.name() != b.name() || a.arity() != b.arity())
    return false;
  for (std::size_t i = 0; i < a.arity(); ++i)
    if (!(a.child(i) == b.child(i))) return false;
  return true;
}

std::strong_ordering operator<=>(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return std::strong_ordering::equal;
  if (auto c = a.size() <=> b.size(); c != 0) return c;
  if (auto c = b.is_var() <=> a.is_var(); c != 0) return c;
  if (auto c = a.name() <=> b.name(); c != 0) return c;
  if (auto c = a.arity() <=> b.arity(); c != 0) return c;
  for (std::size_t i = 0; i < a.arity(); ++i)
    if (auto c = a.child(i) <=> b.child(i); c != 0) return c;
  return std::strong_ordering::equal;
}

std::vector<std::string> variables_of(const Term& t) {
  std::vector<std::string> out;
  std::function<void(const Term&)> rec = [&](const Term& u) {
    if (u.is_ground()) return;
    if (u.is_var()) {
      if (std::find(out.begin(), out.end(), u.name()) == out.end()) out.push_back(u.name());
      return;
    }
    for (const auto& c : u.children()) rec(c);
  };
  rec(t);
  return out;
}

Term substitute(const Term& t, const Subst& s) {
  if (t.is_ground()) return t;
  if (t.is_var()) {
    auto it = s.find(t.name());
    return it == s.end() ? t : it->second;
  }
  std::vector<Term> kids;
  kids.reserve(t.arity());
  for (const auto& c : t.children()) kids.push_back(substitute(c, s));
  return Term::app(t.name(), std::move(kids));
}

bool match(const Term& pattern, const Term& ground, Subst& s) {
  if (pattern.is_var()) {
    auto [it, inserted] = s.emplace(pattern.name(), ground);
    return inserted || it->second == ground;
  }
  if (pattern.is_ground()) return pattern == ground;
  if (ground.is_var() || pattern.name() != ground.name() || pattern.arity() != ground.arity())
    return false;
  for (std::size_t i = 0; i < pattern.arity(); ++i)
    if (!match(pattern.child(i), ground.child(i), s)) return false;
  return true;
}

namespace {

Term resolve(const Term& t, const Subst& s) {
  Term cur = t;
  while (cur.is_var()) {
    auto it = s.find(cur.name());
    if (it == s.end()) break;
    cur = it->second;
  }
  return cur;
}

bool occurs(const std::string& v, const Term& t, const Subst& s) {
  Term r = resolve(t, s);
  if (r.is_var()) return r.name() == v;
  for (const auto& c : r.children())
    if (occurs(v, c, s)) return true;
  return false;
}

bool unify_into(const Term& a, const Term& b, Subst& s) {
  Term x = resolve(a, s);
  Term y = resolve(b, s);
  if (x.is_var() && y.is_var() && x.name() == y.name()) return true;
  if (x.is_var()) {
    if (occurs(x.name(), y, s)) return false;
    s.emplace(x.name(), y);
    return true;
  }
  if (y.is_var()) return unify_into(y, x, s);
  if (x.name() != y.name() || x.arity() != y.arity()) return false;
  for (std::size_t i = 0; i < x.arity(); ++i)
    if (!unify_into(x.child(i), y.child(i), s)) return false;
  return true;
}

Term fully_resolve(const Term& t, const Subst& s) {
  Term r = resolve(t, s);
  if (r.is_var() || r.is_ground()) return r;
  std::vector<Term> kids;
  for (const auto& c : r.children()) kids.push_back(fully_resolve(c, s));
  return Term::app(r.name(), std::move(kids));
}

std::string canonical_var_name(std::size_t i) {
  static const char* base[] = {"x", "y", "z", "w"};
  if (i < 4) return base[i];
  return "x" + std::to_string(i - 3);
}

Term rename(const Term& t, const std::string& suffix) {
  Subst s;
  for (const auto& v : variables_of(t)) s.emplace(v, Term::var(v + suffix));
  return substitute(t, s);
}

}  // namespace

std::optional<Subst> unify(const Term& a, const Term& b) {
  Subst s;
  if (!unify_into(a, b, s)) return std::nullopt;
  Subst out;
  for (const auto& [k, v] : s) out.emplace(k, fully_resolve(v, s));
  return out;
}

std::string Clause::str() const { return lhs.str() + " -> " + rhs.str(); }

Clause identity_clause() { return Clause{"eps", Term::var("x"), Term::var("x")}; }

Clause canonical(const Clause& c) {
  auto vars = variables_of(c.lhs);
  for (const auto& v : variables_of(c.rhs))
    if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
  // Two-phase rename so that new names never collide with old ones.
  Subst tmp, fin;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    tmp.emplace(vars[i], Term::var("#" + std::to_string(i)));
    fin.emplace("#" + std::to_string(i), Term::var(canonical_var_name(i)));
  }
  return Clause{c.name, substitute(substitute(c.lhs, tmp), fin),
                substitute(substitute(c.rhs, tmp), fin)};
}

bool equal_up_to_renaming(const Clause& a, const Clause& b) {
  return canonical(a) == canonical(b);
}

std::optional<Term> apply_clause(const Clause& c, const Term& t) {
  Subst s;
  if (!match(c.lhs, t, s)) return std::nullopt;
  return substitute(c.rhs, s);
}

std::optional<Clause> compose_clauses(const Clause& c1, const Clause& c2) {
  Term l1 = rename(c1.lhs, "#1"), r1 = rename(c1.rhs, "#1");
  Term l2 = rename(c2.lhs, "#2"), r2 = rename(c2.rhs, "#2");
  auto mgu = unify(r1, l2);
  if (!mgu) return std::nullopt;
  Clause out{c1.name + "." + c2.name, substitute(l1, *mgu), substitute(r2, *mgu)};
  return canonical(out);
}

const Clause* Theory::find(std::string_view name) const {
  for (const auto& a : axioms)
    if (a.name == name) return &a;
  return nullptr;
}

const Clause& Theory::axiom(std::string_view name) const {
  if (const auto* a = find(name)) return *a;
  throw UnknownAxiom(std::string(name));
}

std::vector<std::string> Theory::axiom_names() const {
  std::vector<std::string> out;
  for (const auto& a : axioms) out.push_back(a.name);
  return out;
}

std::string Theory::str() const {
  std::ostringstream os;
  os << "start: " << start.str() << '\n';
  for (const auto& a : axioms) os << a.name << ": " << a.str() << '\n';
  if (goal) os << "goal: " << goal->str() << '\n';
  return os.str();
}

namespace {

void collect_arities(const Term& t, std::map<std::string, std::size_t>& ar) {
  if (t.is_var()) return;
  auto [it, inserted] = ar.emplace(t.name(), t.arity());
  if (!inserted && it->second != t.arity())
    throw ArityMismatch("functor '" + t.name() + "' used with arities " +
                        std::to_string(it->second) + " and " + std::to_string(t.arity()));
  for (const auto& c : t.children()) collect_arities(c, ar);
}

}  // namespace

void validate(const Theory& th) {
  if (!th.start.is_ground()) throw NonGroundStart("start sentence contains variables");
  if (th.goal && !th.goal->is_ground()) throw NonGroundStart("goal sentence contains variables");
  std::map<std::string, std::size_t> ar;
  collect_arities(th.start, ar);
  if (th.goal) collect_arities(*th.goal, ar);
  std::set<std::string> names;
  for (const auto& a : th.axioms) {
    if (!names.insert(a.name).second) throw Error("duplicate axiom name '" + a.name + "'");
    collect_arities(a.lhs, ar);
    collect_arities(a.rhs, ar);
    auto lv = variables_of(a.lhs);
    for (const auto& v : variables_of(a.rhs))
      if (std::find(lv.begin(), lv.end(), v) == lv.end()) throw FreeRhsVariable(v, a.name);
  }
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class TermParser {
 public:
  TermParser(std::string_view text, std::size_t line, std::size_t col0)
      : text_(text), line_(line), col0_(col0) {}

  Term parse_full() {
    Term t = parse();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return t;
  }

  Term parse() {
    skip_ws();
    std::string id = ident();
    skip_ws();
    bool upper = std::isupper(static_cast<unsigned char>(id[0]));
    if (pos_ < text_.size() && text_[pos_] == '(') {
      if (!upper) fail("functor '" + id + "' must start with an uppercase letter");
      ++pos_;
      std::vector<Term> kids;
      kids.push_back(parse());
      skip_ws();
      while (pos_ < text_.size() && text_[pos_] == ',') {
        ++pos_;
        kids.push_back(parse());
        skip_ws();
      }
      if (pos_ >= text_.size() || text_[pos_] != ')') fail("expected ')'");
      ++pos_;
      return Term::app(id, std::move(kids));
    }
    return upper ? Term::app(id) : Term::var(id);
  }

  std::size_t pos() const { return pos_; }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  std::string ident() {
    if (pos_ >= text_.size() || !std::isalpha(static_cast<unsigned char>(text_[pos_])))
      fail("expected identifier");
    std::size_t b = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    return std::string(text_.substr(b, pos_ - b));
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw SyntaxError(line_, col0_ + pos_ + 1, msg);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_;
  std::size_t col0_;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_ident(std::string_view s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

}  // namespace

Term parse_term(std::string_view text) { return TermParser(text, 1, 0).parse_full(); }

Clause parse_clause(std::string_view name, std::string_view text) {
  auto arrow = text.find("->");
  if (arrow == std::string_view::npos) throw SyntaxError(1, 1, "expected '->'");
  return Clause{std::string(name), TermParser(text.substr(0, arrow), 1, 0).parse_full(),
                TermParser(text.substr(arrow + 2), 1, arrow + 2).parse_full()};
}

Theory parse_theory(std::string_view text) {
  Theory th;
  bool have_start = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    std::size_t lead = 0;
    while (lead < line.size() && std::isspace(static_cast<unsigned char>(line[lead]))) ++lead;
    if (trim(line).empty()) continue;
    auto colon = line.find(':');
    if (colon == std::string_view::npos) throw SyntaxError(line_no, lead + 1, "expected ':'");
    std::string_view name = trim(line.substr(0, colon));
    if (!is_ident(name)) throw SyntaxError(line_no, lead + 1, "invalid declaration name");
    std::string_view body = line.substr(colon + 1);
    std::size_t body_col = colon + 1;
    if (name == "start" || name == "goal") {
      Term t = TermParser(body, line_no, body_col).parse_full();
      if (name == "start") {
        th.start = t;
        have_start = true;
      } else {
        th.goal = t;
      }
      continue;
    }
    auto arrow = body.find("->");
    if (arrow == std::string_view::npos)
      throw SyntaxError(line_no, body_col + 1, "expected '->' in axiom '" + std::string(name) + "'");
    Term lhs = TermParser(body.substr(0, arrow), line_no, body_col).parse_full();
    Term rhs = TermParser(body.substr(arrow + 2), line_no, body_col + arrow + 2).parse_full();
    th.axioms.push_back(Clause{std::string(name), lhs, rhs});
  }
  if (!have_start) throw SyntaxError(line_no, 1, "missing 'start' declaration");
  validate(th);
  return th;
}

Theory load_theory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open theory file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_theory(ss.str());
}

std::variant<Term, InvalidAt> replay(const Theory& th, const Term& from,
                                     const std::vector<std::string>& steps) {
  Term cur = from;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    auto next = apply_clause(th.axiom(steps[i]), cur);
    if (!next) return InvalidAt{i + 1};
    cur = *next;
  }
  return cur;
}

std::variant<Term, InvalidAt> check_proof(const Theory& th, const Proof& p) {
  return replay(th, th.start, p.steps);
}

Theory horn_to_tpc(const std::vector<Term>& facts, const std::vector<HornRule>& rules,
                   const Term& goal) {
  Theory th;
  th.start = Term::app("S");
  th.goal = goal;
  std::size_t idx = 0;
  for (const auto& f : facts) {
    if (!f.is_ground()) throw UnsupportedRule("fact " + f.str() + " is not ground");
    Term x = Term::var("x");
    th.axioms.push_back(Clause{"p" + std::to_string(++idx), x, Term::app("And", {f, x})});
  }
  idx = 0;
  for (const auto& r : rules) {
    if (r.body.empty()) throw UnsupportedRule("rule with head " + r.head.str() + " has no body");
    std::set<std::string> used;
    for (const auto& b : r.body)
      for (const auto& v : variables_of(b)) used.insert(v);
    for (const auto& v : variables_of(r.head)) used.insert(v);
    std::string tail = "x";
    for (int k = 1; used.count(tail); ++k) tail = "x" + std::to_string(k);
    Term lhs = Term::var(tail);
    for (auto it = r.body.rbegin(); it != r.body.rend(); ++it) lhs = Term::app("And", {*it, lhs});
    Clause c{"a" + std::to_string(++idx), lhs, Term::app("And", {r.head, Term::var(tail)})};
    auto lv = variables_of(c.lhs);
    for (const auto& v : variables_of(c.rhs))
      if (std::find(lv.begin(), lv.end(), v) == lv.end())
        throw UnsupportedRule("head variable '" + v + "' does not occur in the body");
    th.axioms.push_back(std::move(c));
  }
  Term x = Term::var("x"), y = Term::var("y");
  th.axioms.push_back(Clause{"l1", Term::app("And", {x, y}), x});
  th.axioms.push_back(Clause{"l2", Term::app("And", {x, y}), y});
  validate(th);
  return th;
}

}  // namespace tpc
