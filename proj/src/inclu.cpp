#include "tpc/inclu.hpp"

#include <algorithm>
#include <set>

#include "tpc/error.hpp"

namespace tpc {

namespace {

using Renaming = std::map<std::string, std::string>;

AffineExpr rename(const AffineExpr& e, const Renaming& rn);

Ref rename(const Ref& r, const Renaming& rn) {
  Ref out{r.root, {}};
  if (auto it = rn.find(r.root); it != rn.end()) out.root = it->second;
  for (const auto& s : r.subs) out.subs.push_back(rename(s, rn));
  return out;
}

AffineExpr rename(const AffineExpr& e, const Renaming& rn) {
  AffineExpr out(e.constant());
  for (const auto& [r, c] : e.terms()) out = out + AffineExpr::ref(rename(r, rn), c);
  return out;
}

SymbolicPath rename(const SymbolicPath& p, const Renaming& rn) {
  std::vector<Run> runs;
  for (const auto& r : p.runs()) runs.push_back(Run{r.step, rename(r.exp, rn)});
  return SymbolicPath(runs);
}

Atom rename(Atom a, const Renaming& rn) {
  a.left = rename(a.left, rn);
  a.right = rename(a.right, rn);
  return a;
}

AtomSet rename(const AtomSet& s, const Renaming& rn) {
  AtomSet out;
  for (const auto& a : s.atoms) out.atoms.push_back(rename(a, rn));
  for (const auto& g : s.groups) {
    Renaming inner = rn;
    inner.erase(g.var);
    IterGroup h{g.var, rename(g.lower, rn), rename(g.upper, rn), {}};
    for (const auto& a : g.body) h.body.push_back(rename(a, inner));
    out.groups.push_back(std::move(h));
  }
  return out;
}

const std::vector<std::string> kScalarPool = {"n", "k", "j", "l", "p", "q"};
const std::vector<std::string> kListPool = {"m", "u", "w", "v", "s"};

std::string fresh_name(const std::string& like, const std::set<std::string>& taken) {
  const auto& pool = std::find(kScalarPool.begin(), kScalarPool.end(), like) != kScalarPool.end() ? kScalarPool : kListPool;
  for (const auto& n : pool)
    if (!taken.count(n)) return n;
  for (int k = 2;; ++k) {
    std::string n = like + std::to_string(k);
    if (!taken.count(n)) return n;
  }
}

void check_kinds(const AtomSet& s) {
  auto check = [](const Atom& a) {
    if (a.kind == AtomKind::EqualsLL || a.kind == AtomKind::EqualsRR)
      throw Unsupported("inclusion over a same-side comparison atom: " + a.str());
  };
  for (const auto& a : s.atoms) check(a);
  for (const auto& g : s.groups)
    for (const auto& a : g.body) check(a);
}

// Conditions collected for one pair of branches.
struct Conditions {
  std::vector<Equation> equations;
  std::vector<AffineExpr> inequalities;
  std::vector<Family> families;
};

bool equate(const AffineExpr& a, const AffineExpr& b, std::vector<Equation>& out) {
  AffineExpr d = a - b;
  if (d.is_constant()) return d.constant() == 0;
  out.push_back(Equation{a, b});
  return true;
}

bool match_path(const SymbolicPath& a, const SymbolicPath& b, std::vector<Equation>& out) {
  if (a.runs().size() != b.runs().size()) return false;
  for (std::size_t k = 0; k < a.runs().size(); ++k) {
    if (!(a.runs()[k].step == b.runs()[k].step)) return false;
    if (!equate(a.runs()[k].exp, b.runs()[k].exp, out)) return false;
  }
  return true;
}

// Equations that make a and b the same atom.
std::optional<std::vector<Equation>> match_atom(const Atom& a, const Atom& b) {
  if (a.kind != b.kind || a.ground != b.ground) return std::nullopt;
  std::vector<Equation> eqs;
  if (!match_path(a.left, b.left, eqs) || !match_path(a.right, b.right, eqs)) return std::nullopt;
  return eqs;
}

// Positional match: for each atom of b, the first atom of a with the same
// skeleton. Every atom of b is then implied by a.
std::optional<Conditions> match_sets(const AtomSet& a, const AtomSet& b) {
  Conditions c;
  for (const auto& beta : b.atoms) {
    bool found = false;
    for (const auto& alpha : a.atoms)
      if (auto eqs = match_atom(alpha, beta)) {
        c.equations.insert(c.equations.end(), eqs->begin(), eqs->end());
        found = true;
        break;
      }
    if (!found) return std::nullopt;
  }
  for (const auto& gb : b.groups) {
    bool found = false;
    for (const auto& ga : a.groups) {
      if (ga.body.size() < gb.body.size()) continue;
      Conditions gc;
      if (!equate(ga.lower, gb.lower, gc.equations) || !equate(ga.upper, gb.upper, gc.equations)) continue;
      // b's iteration variable becomes a's
      RefMap to_a = single(gb.var, AffineExpr::var(ga.var));
      bool ok = true;
      for (const auto& beta : gb.body) {
        Atom bb = beta;
        bb.left = bb.left.substituted(to_a);
        bb.right = bb.right.substituted(to_a);
        bool hit = false;
        for (const auto& alpha : ga.body)
          if (auto eqs = match_atom(alpha, bb)) {
            for (auto& e : *eqs) {
              if (e.diff().mentions_root(ga.var))
                gc.families.push_back(Family{ga.var, ga.lower, ga.upper, e});
              else
                gc.equations.push_back(e);
            }
            hit = true;
            break;
          }
        if (!hit) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      c.equations.insert(c.equations.end(), gc.equations.begin(), gc.equations.end());
      c.families.insert(c.families.end(), gc.families.begin(), gc.families.end());
      found = true;
      break;
    }
    if (!found) return std::nullopt;
  }
  return c;
}

void bound_conditions(const std::map<Ref, Bound>& bounds, Conditions& c) {
  for (const auto& [r, b] : bounds) {
    AffineExpr x = AffineExpr::ref(r);
    switch (b.kind) {
      case Bound::Kind::Any:
        break;
      case Bound::Kind::Zero:
        c.equations.push_back(Equation{x, AffineExpr(0)});
        break;
      case Bound::Kind::Pos:
        c.inequalities.push_back(x - 1);
        break;
      case Bound::Kind::Eq:
        c.equations.push_back(Equation{x, AffineExpr(b.value)});
        break;
    }
  }
}

// A sufficient condition for the branch's bounds to fail.
Conditions negated(const std::map<Ref, Bound>& bounds) {
  const auto& [r, b] = *bounds.begin();
  Conditions c;
  AffineExpr x = AffineExpr::ref(r);
  switch (b.kind) {
    case Bound::Kind::Zero:
      c.inequalities.push_back(x - 1);
      break;
    case Bound::Kind::Pos:
      c.equations.push_back(Equation{x, AffineExpr(0)});
      break;
    case Bound::Kind::Eq:
      c.inequalities.push_back(x - (b.value + 1));
      break;
    case Bound::Kind::Any:
      break;
  }
  return c;
}

// Do the conditions so far, at indexes inside the bounds, force c?
bool implied(const Conditions& so_far, const std::map<Ref, Bound>& bounds, const Conditions& c) {
  if (!c.families.empty()) return false;
  Assumptions facts;
  for (const auto& e : so_far.equations) facts.add_eq(e.lhs, e.rhs);
  for (const auto& e : so_far.inequalities) facts.add_nonneg(e);
  for (const auto& [r, b] : bounds) {
    AffineExpr x = AffineExpr::ref(r);
    if (b.kind == Bound::Kind::Zero) facts.add_eq(x, AffineExpr(0));
    if (b.kind == Bound::Kind::Pos) facts.add_ge(x, AffineExpr(1));
    if (b.kind == Bound::Kind::Eq) facts.add_eq(x, AffineExpr(b.value));
  }
  for (const auto& e : c.equations)
    if (!facts.proves_zero(e.diff())) return false;
  for (const auto& e : c.inequalities)
    if (!facts.proves_nonneg(e)) return false;
  return true;
}

bool trivial(const Conditions& c) { return c.equations.empty() && c.inequalities.empty() && c.families.empty(); }

void note_roots(const AffineExpr& e, std::map<std::string, bool>& subscripted) {
  std::set<Ref> refs;
  e.collect_refs(refs, true);
  for (const auto& r : refs)
    if (!r.subs.empty()) subscripted[r.root] = true;
}

}  // namespace

ConditionSystem includes(const SymbolicCharFn& f, const SymbolicCharFn& g) {
  for (const auto& b : f.branches) check_kinds(b.atoms);
  for (const auto& b : g.branches) check_kinds(b.atoms);

  std::set<std::string> taken(f.roots.begin(), f.roots.end());
  Renaming rn;
  std::vector<std::string> g_roots;
  for (const auto& r : g.roots) {
    std::string name = taken.count(r) ? fresh_name(r, taken) : r;
    taken.insert(name);
    rn[r] = name;
    g_roots.push_back(name);
  }
  std::vector<Branch> gb;
  for (const auto& b : g.branches) {
    Branch x;
    x.atoms = rename(b.pinned(), rn);
    for (const auto& [r, bound] : b.bounds) x.bounds[rename(r, rn)] = bound;
    gb.push_back(std::move(x));
  }

  ConditionSystem sys;
  Conditions all;
  auto add = [&](const Conditions& c) {
    all.equations.insert(all.equations.end(), c.equations.begin(), c.equations.end());
    all.inequalities.insert(all.inequalities.end(), c.inequalities.begin(), c.inequalities.end());
    all.families.insert(all.families.end(), c.families.begin(), c.families.end());
  };
  auto first_match = [&](const AtomSet& fa) -> std::optional<Conditions> {
    for (const auto& b : gb) {
      auto c = match_sets(fa, b.atoms);
      if (!c) continue;
      bound_conditions(b.bounds, *c);
      return c;
    }
    return std::nullopt;
  };
  // branches that hold at every index first; the rest only add what the
  // first ones do not already force at their indexes
  for (const auto& fb : f.branches) {
    if (!fb.unconstrained()) continue;
    auto pick = first_match(fb.atoms);
    if (!pick) {
      ConditionSystem u = ConditionSystem::unsat("no branch of the right side matches " + fb.atoms.str());
      for (const auto& r : f.roots) u.declare(r, VarRole::Parameter);
      for (const auto& r : g_roots) u.declare(r, VarRole::Existential);
      return u;
    }
    add(*pick);
  }
  Conditions base = all;
  for (const auto& fb : f.branches) {
    if (fb.unconstrained()) continue;
    auto pick = first_match(fb.pinned());
    if (pick && (trivial(*pick) || implied(base, fb.bounds, *pick))) continue;
    add(negated(fb.bounds));
  }

  for (auto& e : all.equations)
    if (std::find(sys.equations.begin(), sys.equations.end(), e) == sys.equations.end()) sys.equations.push_back(e);
  for (auto& e : all.inequalities)
    if (std::find(sys.inequalities.begin(), sys.inequalities.end(), e) == sys.inequalities.end())
      sys.inequalities.push_back(e);
  for (auto& e : all.families)
    if (std::find(sys.families.begin(), sys.families.end(), e) == sys.families.end()) sys.families.push_back(e);

  std::map<std::string, bool> subscripted;
  auto note_set = [&](const AtomSet& s) {
    std::set<Ref> refs;
    s.collect_refs(refs);
    for (const auto& r : refs) note_roots(AffineExpr::ref(r), subscripted);
    for (const auto& g2 : s.groups)
      for (const auto& a : g2.body) {
        std::set<Ref> inner;
        a.collect_refs(inner);
        for (const auto& r : inner) note_roots(AffineExpr::ref(r), subscripted);
      }
  };
  for (const auto& b : f.branches) note_set(b.atoms);
  for (const auto& b : gb) note_set(b.atoms);
  auto kind = [&](const std::string& r) { return subscripted[r] ? VarKind::MultiIndex : VarKind::Scalar; };
  for (const auto& r : f.roots) sys.declare(r, VarRole::Parameter, kind(r));
  for (const auto& r : g_roots) sys.declare(r, VarRole::Existential, kind(r));
  return sys;
}

ConditionSystem swap_roles(const ConditionSystem& sys) {
  ConditionSystem out = sys;
  for (auto& v : out.vars)
    v.role = v.role == VarRole::Parameter ? VarRole::Existential : VarRole::Parameter;
  std::stable_partition(out.vars.begin(), out.vars.end(), [](const VarDecl& v) { return v.role == VarRole::Parameter; });
  return out;
}

}  // namespace tpc
