#include "tpc/final.hpp"

#include <set>

#include "tpc/error.hpp"

namespace tpc {

namespace {

enum class Outcome { Solved, Deferred, Failed };

struct Count {
  AffineExpr exp;
  Int value;
};

struct Walk {
  Outcome outcome = Outcome::Solved;
  const Term* end = nullptr;
  std::vector<Count> counts;
};

Int repeats(const Term* node, const Step& s) {
  Int n = 0;
  while (!node->is_var() && node->name() == s.functor && node->arity() == s.arity) {
    node = &node->child(s.child);
    ++n;
  }
  return n;
}

// Follow p from start. An unknown run is read off greedily when the next run
// leaves through a different node; the last run is sized so that what is
// left over matches the target.
Walk walk(const SymbolicPath& p, const Term& start, const Term* target) {
  Walk w;
  w.end = &start;
  const auto& runs = p.runs();
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const Run& r = runs[k];
    Int v;
    if (r.exp.is_constant()) {
      v = r.exp.constant();
    } else {
      Int c = repeats(w.end, r.step);
      if (k + 1 == runs.size()) {
        if (!target) return {Outcome::Deferred, nullptr, {}};
        v = c - repeats(target, r.step);
      } else if (c == 0 || !runs[k + 1].step.same_node(r.step)) {
        v = c;
      } else {
        return {Outcome::Deferred, nullptr, {}};
      }
      w.counts.push_back({r.exp, v});
    }
    if (v < 0) return {Outcome::Failed, nullptr, {}};
    for (Int s = 0; s < v; ++s) {
      const Term* n = w.end;
      if (n->is_var() || n->name() != r.step.functor || n->arity() != r.step.arity) return {Outcome::Failed, nullptr, {}};
      w.end = &n->child(r.step.child);
    }
  }
  return w;
}

bool fixed(const SymbolicPath& p) {
  for (const auto& r : p.runs())
    if (!r.exp.is_constant()) return false;
  return true;
}

Walk against(const SymbolicPath& p, const Term& start, const Term& target) {
  Walk w = walk(p, start, &target);
  if (w.outcome == Outcome::Solved && !(*w.end == target)) w.outcome = Outcome::Failed;
  return w;
}

Walk tune_atom(const Atom& a, const Term& t, const Term& d) {
  const Lookup none = [](const Ref&) -> std::optional<Int> { return std::nullopt; };
  switch (a.kind) {
    case AtomKind::EqualsLR: {
      if (fixed(a.left)) {
        auto s = a.left.apply(t, none);
        if (!s) return {Outcome::Failed, nullptr, {}};
        return against(a.right, d, *s);
      }
      if (fixed(a.right)) {
        auto s = a.right.apply(d, none);
        if (!s) return {Outcome::Failed, nullptr, {}};
        return against(a.left, t, *s);
      }
      Walk l = walk(a.left, t, nullptr);
      if (l.outcome == Outcome::Failed) return l;
      if (l.outcome == Outcome::Solved) {
        Walk r = against(a.right, d, *l.end);
        if (r.outcome == Outcome::Solved) r.counts.insert(r.counts.begin(), l.counts.begin(), l.counts.end());
        return r;
      }
      Walk r = walk(a.right, d, nullptr);
      if (r.outcome != Outcome::Solved) return r;
      Walk l2 = against(a.left, t, *r.end);
      if (l2.outcome == Outcome::Solved) l2.counts.insert(l2.counts.end(), r.counts.begin(), r.counts.end());
      return l2;
    }
    case AtomKind::GroundL:
      return against(a.left, t, *a.ground);
    case AtomKind::GroundR:
      return against(a.right, d, *a.ground);
    case AtomKind::MatchL:
      return walk(a.left, t, nullptr);
    case AtomKind::EqualsLL:
    case AtomKind::EqualsRR:
      break;
  }
  throw Unsupported("cannot tune " + a.str());
}

RefMap as_map(const std::map<Ref, Int>& known) {
  RefMap m;
  for (const auto& [r, v] : known) m[r] = AffineExpr(v);
  return m;
}

ConditionSystem equation_system(const std::vector<Count>& counts, const Branch& b, const std::map<Ref, Int>& known) {
  ConditionSystem sys;
  RefMap km = as_map(known);
  std::set<Ref> refs;
  for (const auto& c : counts) {
    AffineExpr e = substitute(c.exp, km);
    if (e.is_constant()) {
      if (e.constant() != c.value) return ConditionSystem::unsat(c.exp.str() + " = " + std::to_string(c.value));
      continue;
    }
    e.collect_refs(refs, false);
    sys.equations.push_back(Equation{e, AffineExpr(c.value)});
  }
  for (const auto& r : refs)
    if (auto it = b.bounds.find(r); it != b.bounds.end() && it->second.kind == Bound::Kind::Pos)
      sys.inequalities.push_back(AffineExpr::ref(r) - AffineExpr(1));
  for (const auto& r : refs) sys.declare(r.root, VarRole::Existential, r.subs.empty() ? VarKind::Scalar : VarKind::MultiIndex);
  // a root seen both bare and subscripted is a multi-index
  for (auto& v : sys.vars)
    for (const auto& r : refs)
      if (r.root == v.name && !r.subs.empty()) v.kind = VarKind::MultiIndex;
  return sys;
}

struct BranchTune {
  std::map<Ref, Int> known;
  std::vector<Count> counts;
};

std::optional<BranchTune> tune_branch(const Branch& b, const Term& t, const Term& d) {
  BranchTune out;
  for (const auto& [r, bound] : b.bounds)
    if (auto v = bound.fixed()) out.known[r] = *v;

  std::vector<Atom> pending = b.atoms.atoms;
  std::vector<bool> done(pending.size(), false);
  std::vector<IterGroup> groups = b.atoms.groups;
  std::vector<bool> expanded(groups.size(), false);
  std::size_t solved_upto = 0;
  bool stuck = false;

  for (;;) {
    bool progress = false;
    RefMap km = as_map(out.known);
    for (std::size_t k = 0; k < pending.size(); ++k) {
      if (done[k]) continue;
      Atom a = pending[k].substituted(km);
      std::set<Ref> refs;
      a.collect_refs(refs);
      if (refs.empty()) {
        done[k] = true;
        continue;
      }
      Walk w = tune_atom(a, t, d);
      if (w.outcome == Outcome::Failed) return std::nullopt;
      if (w.outcome == Outcome::Deferred) continue;
      done[k] = true;
      progress = true;
      out.counts.insert(out.counts.end(), w.counts.begin(), w.counts.end());
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (expanded[g]) continue;
      IterGroup G = groups[g].substituted(km);
      if (!G.lower.is_constant() || !G.upper.is_constant()) continue;
      for (Int i = G.lower.constant(); i <= G.upper.constant(); ++i)
        for (const auto& a : G.body) {
          pending.push_back(a.substituted(single(G.var, AffineExpr(i))));
          done.push_back(false);
        }
      expanded[g] = true;
      progress = true;
    }
    if (out.counts.size() > solved_upto || stuck) {
      ConditionSystem sys = equation_system(out.counts, b, out.known);
      if (sys.contradiction) return std::nullopt;
      if (!sys.equations.empty()) {
        try {
          auto sol = solve_concrete(sys);
          if (!sol) return std::nullopt;
          for (const auto& [r, v] : *sol) out.known[r] = v;
          progress = true;
          stuck = false;
        } catch (const Underdetermined&) {
          stuck = true;
        }
      }
      solved_upto = out.counts.size();
    }
    if (!progress) break;
  }

  RefMap km = as_map(out.known);
  for (std::size_t k = 0; k < pending.size(); ++k) {
    if (done[k]) continue;
    std::set<Ref> refs;
    pending[k].substituted(km).collect_refs(refs);
    if (!refs.empty()) throw Ambiguous("no unambiguous way to tune " + pending[k].substituted(km).str());
  }
  for (std::size_t g = 0; g < groups.size(); ++g)
    if (!expanded[g]) throw Ambiguous("iteration bounds of " + groups[g].str() + " stay unknown");
  if (stuck) throw Ambiguous("equations leave some index free");
  for (const auto& [r, bound] : b.bounds)
    if (!out.known.count(r)) out.known[r] = bound.kind == Bound::Kind::Pos ? 1 : 0;
  return out;
}

}  // namespace

TuneResult tune(const SymbolicCharFn& f, const Term& t, const Term& d) {
  std::optional<Ambiguous> unsettled;
  for (std::size_t k = 0; k < f.branches.size(); ++k) {
    const Branch& b = f.branches[k];
    std::optional<BranchTune> bt;
    try {
      bt = tune_branch(b, t, d);
    } catch (const Ambiguous& e) {
      if (!unsettled) unsettled = e;
      continue;
    }
    if (!bt) continue;
    for (auto& [r, v] : bt->known)
      if (v < 0) bt.reset();
    if (!bt) continue;
    MultiIndex m = unbind(f, bt->known);
    Env env = bind(f, m);
    if (!b.bounds_hold(env.lookup()) || !eval_atomset(b.atoms, env, t, d)) continue;
    TuneResult r;
    r.assignment = m;
    r.branch = k;
    r.values = bt->known;
    r.equations = equation_system(bt->counts, b, {});
    return r;
  }
  if (unsettled) throw *unsettled;
  return {};
}

bool decide(const SymbolicCharFn& f, const Term& t, const Term& d) { return tune(f, t, d).assignment.has_value(); }

std::optional<Proof> extract_proof(const SymbolicCharFn& f, const Theory& th, const Term& t, const Term& d) {
  auto r = tune(f, t, d);
  if (!r.assignment) return std::nullopt;
  Proof p{instantiate(f.scheme, *r.assignment)};
  auto end = replay(th, t, p.steps);
  auto* got = std::get_if<Term>(&end);
  if (!got || !(*got == d))
    throw InternalMismatch("index " + r.assignment->str() + " tuned for " + d.str() + " does not replay to it");
  return p;
}

}  // namespace tpc
