#include "tpc/path.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace tpc {

std::string Step::key() const {
  return functor + "/" + std::to_string(arity) + "." + std::to_string(child + 1);
}

Clause path_clause(const Path& p) {
  std::size_t fresh = 0;
  auto var = [&] { return Term::var("v" + std::to_string(fresh++)); };
  Term target = var();
  Term cur = target;
  for (auto it = p.rbegin(); it != p.rend(); ++it) {
    std::vector<Term> kids;
    for (std::size_t k = 0; k < it->arity; ++k) kids.push_back(k == it->child ? cur : var());
    cur = Term::app(it->functor, std::move(kids));
  }
  return canonical(Clause{"", cur, target});
}

Path path_from_clause(const Clause& c) {
  if (!c.rhs.is_var()) throw ShapeError("a path clause must have a single variable on the right: " + c.str());
  Path out;
  std::set<std::string> seen;
  bool found = false;
  std::function<bool(const Term&, Path&)> walk = [&](const Term& t, Path& cur) -> bool {
    if (t.is_var()) {
      if (!seen.insert(t.name()).second)
        throw ShapeError("a path clause must be linear: " + c.str());
      if (t.name() == c.rhs.name()) {
        out = cur;
        found = true;
      }
      return true;
    }
    for (std::size_t k = 0; k < t.arity(); ++k) {
      if (!t.child(k).is_var() && !t.child(k).is_ground()) {
        cur.push_back(Step{t.name(), t.arity(), k});
        walk(t.child(k), cur);
        cur.pop_back();
      } else if (t.child(k).is_var()) {
        cur.push_back(Step{t.name(), t.arity(), k});
        walk(t.child(k), cur);
        cur.pop_back();
      } else {
        throw ShapeError("a path clause may only constrain its own branch: " + c.str());
      }
    }
    return true;
  };
  Path cur;
  walk(c.lhs, cur);
  if (!found) throw ShapeError("path target variable does not occur on the left: " + c.str());
  // Every off-branch position must be a bare variable.
  for (std::size_t d = 0; d < out.size(); ++d) {
    Term node = c.lhs;
    for (std::size_t k = 0; k < d; ++k) node = node.child(out[k].child);
    for (std::size_t k = 0; k < node.arity(); ++k)
      if (k != out[d].child && !node.child(k).is_var())
        throw ShapeError("a path clause may only constrain its own branch: " + c.str());
  }
  return out;
}

std::string path_str(const Path& p) {
  if (p.empty()) return "[x->x]";
  return "[" + path_clause(p).str() + "]";
}

Path compose_paths(const Path& p, const Path& q) {
  Path out = p;
  out.insert(out.end(), q.begin(), q.end());
  return out;
}

Path power_path(const Path& p, std::size_t n) {
  Path out;
  out.reserve(p.size() * n);
  for (std::size_t i = 0; i < n; ++i) out.insert(out.end(), p.begin(), p.end());
  return out;
}

std::optional<Term> apply_path(const Path& p, const Term& t) {
  const Term* cur = &t;
  for (const auto& s : p) {
    if (cur->is_var() || cur->name() != s.functor || cur->arity() != s.arity) return std::nullopt;
    cur = &cur->child(s.child);
  }
  return *cur;
}

// ---------------------------------------------------------------------------

SymbolicPath::SymbolicPath(const Path& p) {
  for (const auto& s : p) runs_.push_back(Run{s, AffineExpr(1)});
  normalize();
}

SymbolicPath::SymbolicPath(std::vector<Run> runs) : runs_(std::move(runs)) { normalize(); }

void SymbolicPath::normalize() {
  std::vector<Run> out;
  for (auto& r : runs_) {
    if (r.exp.is_constant() && r.exp.constant() == 0) continue;
    if (!out.empty() && out.back().step == r.step) {
      out.back().exp = out.back().exp + r.exp;
      if (out.back().exp.is_constant() && out.back().exp.constant() == 0) out.pop_back();
    } else {
      out.push_back(std::move(r));
    }
  }
  runs_ = std::move(out);
}

std::vector<Step> SymbolicPath::skeleton() const {
  std::vector<Step> out;
  for (const auto& r : runs_) out.push_back(r.step);
  return out;
}

AffineExpr SymbolicPath::length() const {
  AffineExpr e;
  for (const auto& r : runs_) e = e + r.exp;
  return e;
}

SymbolicPath SymbolicPath::then(const SymbolicPath& o) const {
  std::vector<Run> runs = runs_;
  runs.insert(runs.end(), o.runs_.begin(), o.runs_.end());
  return SymbolicPath(std::move(runs));
}

SymbolicPath SymbolicPath::substituted(const RefMap& m) const {
  std::vector<Run> runs = runs_;
  for (auto& r : runs) r.exp = substitute(r.exp, m);
  return SymbolicPath(std::move(runs));
}

void SymbolicPath::collect_refs(std::set<Ref>& out) const {
  for (const auto& r : runs_) r.exp.collect_refs(out);
}

bool SymbolicPath::mentions_root(std::string_view root) const {
  return std::any_of(runs_.begin(), runs_.end(), [&](const Run& r) { return r.exp.mentions_root(root); });
}

std::optional<Path> SymbolicPath::evaluate(const Lookup& lookup) const {
  Path out;
  for (const auto& r : runs_) {
    auto n = tpc::evaluate(r.exp, lookup);
    if (!n || *n < 0) return std::nullopt;
    out.insert(out.end(), static_cast<std::size_t>(*n), r.step);
  }
  return out;
}

std::optional<Term> SymbolicPath::apply(const Term& t, const Lookup& lookup) const {
  const Term* cur = &t;
  for (const auto& r : runs_) {
    auto n = tpc::evaluate(r.exp, lookup);
    if (!n || *n < 0) return std::nullopt;
    for (Int k = 0; k < *n; ++k) {
      if (cur->is_var() || cur->name() != r.step.functor || cur->arity() != r.step.arity)
        return std::nullopt;
      cur = &cur->child(r.step.child);
    }
  }
  return *cur;
}

std::optional<Path> SymbolicPath::concrete() const {
  return evaluate([](const Ref&) -> std::optional<Int> { return std::nullopt; });
}

namespace {

std::string exponent_str(const AffineExpr& e) {
  std::string s = e.str();
  bool simple = (e.is_constant() && e.constant() >= 0) ||
                (e.constant() == 0 && e.terms().size() == 1 && e.terms()[0].second == 1 &&
                 e.terms()[0].first.subs.empty());
  return simple ? "^" + s : "^{" + s + "}";
}

}  // namespace

std::string SymbolicPath::str() const {
  if (runs_.empty()) return "[x->x]";
  std::vector<std::string> parts;
  Path pending;
  auto flush = [&] {
    if (!pending.empty()) parts.push_back(path_str(pending));
    pending.clear();
  };
  for (const auto& r : runs_) {
    if (r.exp.is_constant() && r.exp.constant() == 1) {
      pending.push_back(r.step);
      continue;
    }
    flush();
    parts.push_back(path_str({r.step}) + exponent_str(r.exp));
  }
  flush();
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "." : "") + parts[i];
  return out;
}

std::string SymbolicPath::key() const {
  std::string out;
  for (const auto& r : runs_) out += r.step.key() + "^(" + r.exp.str() + ")";
  return out;
}

// ---------------------------------------------------------------------------

Atom Atom::equals_lr(SymbolicPath l, SymbolicPath r) { return Atom{AtomKind::EqualsLR, std::move(l), std::move(r), {}}; }
Atom Atom::ground_l(SymbolicPath l, Term g) { return Atom{AtomKind::GroundL, std::move(l), {}, std::move(g)}; }
Atom Atom::ground_r(SymbolicPath r, Term g) { return Atom{AtomKind::GroundR, {}, std::move(r), std::move(g)}; }
Atom Atom::match_l(SymbolicPath l) { return Atom{AtomKind::MatchL, std::move(l), {}, {}}; }
Atom Atom::equals_ll(SymbolicPath a, SymbolicPath b) { return Atom{AtomKind::EqualsLL, std::move(a), std::move(b), {}}; }
Atom Atom::equals_rr(SymbolicPath a, SymbolicPath b) { return Atom{AtomKind::EqualsRR, std::move(a), std::move(b), {}}; }

bool Atom::reads_left() const {
  return kind == AtomKind::EqualsLR || kind == AtomKind::GroundL || kind == AtomKind::MatchL ||
         kind == AtomKind::EqualsLL;
}

bool Atom::reads_right() const {
  return kind == AtomKind::EqualsLR || kind == AtomKind::GroundR || kind == AtomKind::EqualsRR;
}

Atom Atom::substituted(const RefMap& m) const {
  Atom a = *this;
  a.left = left.substituted(m);
  a.right = right.substituted(m);
  return a;
}

void Atom::collect_refs(std::set<Ref>& out) const {
  left.collect_refs(out);
  right.collect_refs(out);
}

bool Atom::mentions_root(std::string_view root) const {
  return left.mentions_root(root) || right.mentions_root(root);
}

std::string Atom::str() const {
  switch (kind) {
    case AtomKind::EqualsLR:
      return "EqualsLR(" + left.str() + ", " + right.str() + ")";
    case AtomKind::GroundL:
      return "GroundL(" + left.str() + ", " + ground->str() + ")";
    case AtomKind::GroundR:
      return "GroundR(" + right.str() + ", " + ground->str() + ")";
    case AtomKind::MatchL:
      return "MatchL(" + left.str() + ")";
    case AtomKind::EqualsLL:
      return "EqualsLL(" + left.str() + ", " + right.str() + ")";
    case AtomKind::EqualsRR:
      return "EqualsRR(" + left.str() + ", " + right.str() + ")";
  }
  return {};
}

std::string Atom::key() const {
  std::string out = std::to_string(static_cast<int>(kind)) + "|" + left.key() + "|" + right.key();
  if (ground) out += "|" + ground->str();
  return out;
}

IterGroup IterGroup::substituted(const RefMap& m) const {
  RefMap inner = m;
  inner.erase(Ref{var, {}});
  IterGroup g{var, substitute(lower, m), substitute(upper, m), {}};
  for (const auto& a : body) g.body.push_back(a.substituted(inner));
  return g;
}

std::string IterGroup::str() const {
  std::string inner;
  if (body.size() == 1) {
    inner = body.front().str();
  } else {
    inner = "Intersect(";
    for (std::size_t k = 0; k < body.size(); ++k) inner += (k ? ", " : "") + body[k].str();
    inner += ")";
  }
  return "IterIntersect(" + var + " -> " + inner + ", " + lower.str() + ", " + upper.str() + ")";
}

std::string IterGroup::key() const {
  std::vector<std::string> ks;
  for (const auto& a : body) ks.push_back(a.key());
  std::sort(ks.begin(), ks.end());
  std::string out = var + "=" + lower.str() + ".." + upper.str() + "{";
  for (const auto& k : ks) out += k + ";";
  return out + "}";
}

AtomSet AtomSet::substituted(const RefMap& m) const {
  AtomSet out;
  for (const auto& a : atoms) out.atoms.push_back(a.substituted(m));
  for (const auto& g : groups) out.groups.push_back(g.substituted(m));
  return out;
}

void AtomSet::collect_refs(std::set<Ref>& out) const {
  for (const auto& a : atoms) a.collect_refs(out);
  for (const auto& g : groups) {
    std::set<Ref> inner;
    for (const auto& a : g.body) a.collect_refs(inner);
    g.lower.collect_refs(inner);
    g.upper.collect_refs(inner);
    for (const auto& r : inner)
      if (!(r.root == g.var && r.subs.empty())) out.insert(r);
  }
}

bool AtomSet::mentions_root(std::string_view root) const {
  for (const auto& a : atoms)
    if (a.mentions_root(root)) return true;
  for (const auto& g : groups) {
    if (g.var == root) continue;
    if (g.lower.mentions_root(root) || g.upper.mentions_root(root)) return true;
    for (const auto& a : g.body)
      if (a.mentions_root(root)) return true;
  }
  return false;
}

namespace {

void dedupe(std::vector<Atom>& atoms) {
  std::set<std::string> seen;
  std::vector<Atom> out;
  for (auto& a : atoms)
    if (seen.insert(a.key()).second) out.push_back(std::move(a));
  atoms = std::move(out);
}

}  // namespace

void AtomSet::canonicalize() {
  dedupe(atoms);
  std::vector<IterGroup> kept;
  for (auto& g : groups) {
    dedupe(g.body);
    AffineExpr span = g.upper - g.lower;
    if (g.body.empty() || (span.is_constant() && span.constant() < 0)) continue;
    if (span.is_constant() && span.constant() == 0) {
      // A single iteration is plain atoms.
      for (const auto& a : g.body) atoms.push_back(a.substituted(single(g.var, g.lower)));
      continue;
    }
    kept.push_back(std::move(g));
  }
  groups = std::move(kept);
  dedupe(atoms);
}

std::string AtomSet::str() const {
  std::vector<std::string> parts;
  for (const auto& a : atoms) parts.push_back(a.str());
  for (const auto& g : groups) parts.push_back(g.str());
  if (parts.size() == 1) return parts.front();
  std::string out = "Intersect(\n";
  for (std::size_t k = 0; k < parts.size(); ++k) out += "  " + parts[k] + (k + 1 < parts.size() ? ",\n" : "\n");
  return out + ")";
}

std::string AtomSet::key() const {
  std::vector<std::string> ks, gs;
  for (const auto& a : atoms) ks.push_back(a.key());
  for (const auto& g : groups) gs.push_back(g.key());
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  std::sort(gs.begin(), gs.end());
  std::string out;
  for (const auto& k : ks) out += k + ";";
  out += "#";
  for (const auto& g : gs) out += g + ";";
  return out;
}

// ---------------------------------------------------------------------------

namespace {

bool covers(const Path& q, const Path& p) {
  // p applying implies q applies.
  if (q.empty()) return true;
  if (p.size() < q.size()) return false;
  for (std::size_t k = 0; k + 1 < q.size(); ++k)
    if (p[k] != q[k]) return false;
  return p[q.size() - 1].same_node(q.back());
}

}  // namespace

AtomSet split_axiom(const Clause& c) {
  std::map<std::string, std::vector<Path>> lhs_vars;
  std::vector<std::string> lhs_order;
  std::vector<std::pair<Path, Term>> lhs_ground;
  std::function<void(const Term&, Path&)> walk_lhs = [&](const Term& t, Path& cur) {
    if (t.is_var()) {
      if (!lhs_vars.count(t.name())) lhs_order.push_back(t.name());
      lhs_vars[t.name()].push_back(cur);
      return;
    }
    if (t.is_ground()) {
      lhs_ground.emplace_back(cur, t);
      return;
    }
    for (std::size_t k = 0; k < t.arity(); ++k) {
      cur.push_back(Step{t.name(), t.arity(), k});
      walk_lhs(t.child(k), cur);
      cur.pop_back();
    }
  };
  Path cur;
  walk_lhs(c.lhs, cur);

  AtomSet out;
  std::set<std::string> used;
  std::vector<Atom> ground_r;
  std::function<void(const Term&, Path&)> walk_rhs = [&](const Term& t, Path& p) {
    if (t.is_var()) {
      used.insert(t.name());
      out.atoms.push_back(Atom::equals_lr(SymbolicPath(lhs_vars.at(t.name()).front()), SymbolicPath(p)));
      return;
    }
    if (t.is_ground()) {
      ground_r.push_back(Atom::ground_r(SymbolicPath(p), t));
      return;
    }
    for (std::size_t k = 0; k < t.arity(); ++k) {
      p.push_back(Step{t.name(), t.arity(), k});
      walk_rhs(t.child(k), p);
      p.pop_back();
    }
  };
  walk_rhs(c.rhs, cur);
  for (auto& a : ground_r) out.atoms.push_back(std::move(a));

  std::vector<Path> left_paths;
  for (const auto& v : lhs_order)
    if (used.count(v)) left_paths.push_back(lhs_vars.at(v).front());
  for (const auto& [p, g] : lhs_ground) {
    out.atoms.push_back(Atom::ground_l(SymbolicPath(p), g));
    left_paths.push_back(p);
  }
  for (const auto& v : lhs_order) {
    const auto& ps = lhs_vars.at(v);
    for (std::size_t k = 1; k < ps.size(); ++k) {
      out.atoms.push_back(Atom::equals_ll(SymbolicPath(ps.front()), SymbolicPath(ps[k])));
      left_paths.push_back(ps[k]);
    }
    if (ps.size() > 1 && !used.count(v)) left_paths.push_back(ps.front());
  }
  for (const auto& v : lhs_order) {
    if (used.count(v) || lhs_vars.at(v).size() > 1) continue;
    const Path& q = lhs_vars.at(v).front();
    bool covered = std::any_of(left_paths.begin(), left_paths.end(), [&](const Path& p) { return covers(q, p); });
    if (!covered) {
      out.atoms.push_back(Atom::match_l(SymbolicPath(q)));
      left_paths.push_back(q);
    }
  }
  return out;
}

AtomSet identity_atoms() {
  AtomSet s;
  s.atoms.push_back(Atom::equals_lr(SymbolicPath(), SymbolicPath()));
  return s;
}

bool is_identity(const AtomSet& s) { return s == identity_atoms(); }

bool eval_atom(const Atom& a, const Lookup& lookup, const Term& t, const Term& d) {
  switch (a.kind) {
    case AtomKind::EqualsLR: {
      auto l = a.left.apply(t, lookup);
      if (!l) return false;
      auto r = a.right.apply(d, lookup);
      return r && *l == *r;
    }
    case AtomKind::GroundL: {
      auto l = a.left.apply(t, lookup);
      return l && *l == *a.ground;
    }
    case AtomKind::GroundR: {
      auto r = a.right.apply(d, lookup);
      return r && *r == *a.ground;
    }
    case AtomKind::MatchL:
      return a.left.apply(t, lookup).has_value();
    case AtomKind::EqualsLL:
    case AtomKind::EqualsRR:
      throw Unimplemented("evaluation of " + std::string(a.kind == AtomKind::EqualsLL ? "EqualsLL" : "EqualsRR") +
                          " atoms is not implemented");
  }
  return false;
}

bool eval_atomset(const AtomSet& s, const Lookup& lookup, const Term& t, const Term& d) {
  for (const auto& a : s.atoms)
    if (!eval_atom(a, lookup, t, d)) return false;
  for (const auto& g : s.groups) {
    auto lo = evaluate(g.lower, lookup);
    auto hi = evaluate(g.upper, lookup);
    if (!lo || !hi) return false;
    for (Int i = *lo; i <= *hi; ++i) {
      Lookup inner = [&, i](const Ref& r) -> std::optional<Int> {
        if (r.root == g.var && r.subs.empty()) return i;
        return lookup(r);
      };
      for (const auto& a : g.body)
        if (!eval_atom(a, inner, t, d)) return false;
    }
  }
  return true;
}

bool eval_atomset(const AtomSet& s, const Env& env, const Term& t, const Term& d) {
  return eval_atomset(s, env.lookup(), t, d);
}

}  // namespace tpc
