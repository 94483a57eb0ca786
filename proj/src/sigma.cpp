#include "tpc/sigma.hpp"

#include <algorithm>
#include <set>

#include "tpc/error.hpp"

namespace tpc {

bool Bound::admits(Int v) const {
  switch (kind) {
    case Kind::Any:
      return v >= 0;
    case Kind::Zero:
      return v == 0;
    case Kind::Pos:
      return v >= 1;
    case Kind::Eq:
      return v == value;
  }
  return false;
}

bool Bound::within(const Bound& o) const {
  switch (o.kind) {
    case Kind::Any:
      return true;
    case Kind::Zero:
      return kind == Kind::Zero || (kind == Kind::Eq && value == 0);
    case Kind::Pos:
      return kind == Kind::Pos || (kind == Kind::Eq && value >= 1);
    case Kind::Eq:
      return fixed() == o.value;
  }
  return false;
}

std::optional<Int> Bound::fixed() const {
  if (kind == Kind::Zero) return 0;
  if (kind == Kind::Eq) return value;
  return std::nullopt;
}

void Bound::constrain(Assumptions& as, const Ref& r) const {
  auto e = AffineExpr::ref(r);
  if (auto v = fixed()) as.add_eq(e, *v);
  if (kind == Kind::Pos) as.add_ge(e, 1);
}

std::string Bound::str(const Ref& r) const {
  switch (kind) {
    case Kind::Any:
      return r.str() + " >= 0";
    case Kind::Zero:
      return r.str() + " = 0";
    case Kind::Pos:
      return r.str() + " >= 1";
    case Kind::Eq:
      return r.str() + " = " + std::to_string(value);
  }
  return {};
}

bool Branch::bounds_hold(const Lookup& lookup) const {
  for (const auto& [r, b] : bounds) {
    auto v = evaluate(AffineExpr::ref(r), lookup);
    if (!v || !b.admits(*v)) return false;
  }
  return true;
}

Assumptions Branch::assumptions() const {
  Assumptions as;
  for (const auto& [r, b] : bounds) b.constrain(as, r);
  return as;
}

AtomSet Branch::pinned() const {
  RefMap m;
  for (const auto& [r, b] : bounds)
    if (auto v = b.fixed()) m[r] = *v;
  if (m.empty()) return atoms;
  AtomSet s = atoms.substituted(m);
  s.canonicalize();
  return s;
}

std::string Branch::key() const {
  std::string out = atoms.key() + "@";
  for (const auto& [r, b] : bounds) out += b.str(r) + ";";
  return out;
}

std::string SymbolicCharFn::str() const {
  std::string head;
  for (const auto& r : roots) head += "λ" + r + ":M.";
  if (branches.size() == 1 && branches.front().unconstrained()) return head + branches.front().atoms.str();
  std::string out = head + "Or(\n";
  for (std::size_t b = 0; b < branches.size(); ++b) {
    std::string cond;
    for (const auto& [r, bd] : branches[b].bounds) cond += (cond.empty() ? "" : ", ") + bd.str(r);
    std::string body = branches[b].atoms.str();
    std::string indented;
    for (char ch : body) {
      indented += ch;
      if (ch == '\n') indented += "  ";
    }
    out += "  When(" + (cond.empty() ? std::string("true") : cond) + "; " + indented + ")";
    out += b + 1 < branches.size() ? ",\n" : "\n";
  }
  return out + ")";
}

// ---------------------------------------------------------------------------

namespace {

bool complete_trie(const std::vector<Path>& paths, std::size_t depth) {
  bool has_end = false;
  for (const auto& p : paths) has_end |= p.size() == depth;
  if (has_end) return paths.size() == 1;
  const Step& first = paths.front()[depth];
  for (const auto& p : paths)
    if (!p[depth].same_node(first)) return false;
  for (std::size_t c = 0; c < first.arity; ++c) {
    std::vector<Path> sub;
    for (const auto& p : paths)
      if (p[depth].child == c) sub.push_back(p);
    if (sub.empty() || !complete_trie(sub, depth + 1)) return false;
  }
  return true;
}

// Y subsumes X: every index X admits is admitted by Y with the same formula.
bool subsumes(const Branch& y, const Branch& x) {
  for (const auto& [r, b] : y.bounds) {
    auto it = x.bounds.find(r);
    Bound xb = it == x.bounds.end() ? Bound::any() : it->second;
    if (!xb.within(b)) return false;
  }
  RefMap m;
  for (const auto& [r, b] : x.bounds)
    if (auto v = b.fixed()) m[r] = *v;
  AtomSet ys = y.atoms.substituted(m);
  ys.canonicalize();
  return ys.key() == x.pinned().key();
}

// X holds only at v = 0 and Y at v >= 1 with the same formula at 0.
bool absorbs_zero(const Branch& y, const Branch& x, Ref& var) {
  for (const auto& [r, b] : x.bounds) {
    if (b.kind != Bound::Kind::Zero) continue;
    auto it = y.bounds.find(r);
    if (it == y.bounds.end() || it->second.kind != Bound::Kind::Pos) continue;
    auto xo = x.bounds;
    auto yo = y.bounds;
    xo.erase(r);
    yo.erase(r);
    if (xo != yo) continue;
    AtomSet ys = y.atoms.substituted({{r, AffineExpr(0)}});
    ys.canonicalize();
    if (ys.key() == x.pinned().key()) {
      var = r;
      return true;
    }
  }
  return false;
}

}  // namespace

bool is_covering_identity(const AtomSet& s) {
  if (!s.groups.empty() || s.atoms.empty()) return false;
  std::vector<Path> paths;
  for (const auto& a : s.atoms) {
    if (a.kind != AtomKind::EqualsLR || !(a.left == a.right)) return false;
    auto p = a.left.concrete();
    if (!p) return false;
    paths.push_back(*p);
  }
  return complete_trie(paths, 0);
}

std::vector<Branch> merge_branches(std::vector<Branch> branches) {
  for (auto& b : branches) {
    for (auto it = b.bounds.begin(); it != b.bounds.end();)
      it = it->second.kind == Bound::Kind::Any ? b.bounds.erase(it) : std::next(it);
    b.atoms.canonicalize();
  }
  bool changed = true;
  while (changed) {
    changed = false;
    std::set<std::string> seen;
    std::vector<Branch> kept;
    for (auto& b : branches)
      if (seen.insert(b.key()).second) kept.push_back(std::move(b));
    branches = std::move(kept);
    for (std::size_t x = 0; x < branches.size() && !changed; ++x)
      for (std::size_t y = 0; y < branches.size() && !changed; ++y) {
        if (x == y) continue;
        if (subsumes(branches[y], branches[x])) {
          branches.erase(branches.begin() + static_cast<std::ptrdiff_t>(x));
          changed = true;
          break;
        }
        Ref v;
        if (absorbs_zero(branches[y], branches[x], v)) {
          branches[y].bounds.erase(v);
          branches.erase(branches.begin() + static_cast<std::ptrdiff_t>(x));
          changed = true;
          break;
        }
      }
  }
  return branches;
}


// ---------------------------------------------------------------------------
// Star closure: unroll, fit, verify.

namespace {

constexpr Int kSamples = 4;

struct Tagged {
  Int c;  // number of unrolled copies
  const Atom* atom;
};

// Exponents of `p` laid onto the steps of `tmpl`; zero where p skips a run.
std::optional<std::vector<AffineExpr>> align(const SymbolicPath& p, const SymbolicPath& tmpl) {
  std::vector<AffineExpr> out(tmpl.runs().size(), AffineExpr(0));
  std::size_t k = 0;
  for (const auto& r : p.runs()) {
    while (k < tmpl.runs().size() && !(tmpl.runs()[k].step == r.step)) ++k;
    if (k == tmpl.runs().size()) return std::nullopt;
    out[k] = r.exp;
    ++k;
  }
  return out;
}

bool same_form(const Atom& a, const Atom& b) {
  if (a.kind != b.kind) return false;
  if (a.ground.has_value() != b.ground.has_value()) return false;
  return !a.ground || *a.ground == *b.ground;
}

std::size_t run_count(const Atom& a) { return a.left.runs().size() + a.right.runs().size(); }

SymbolicPath rebuild(const SymbolicPath& tmpl, const std::vector<AffineExpr>& exps) {
  std::vector<Run> runs;
  for (std::size_t k = 0; k < exps.size(); ++k) runs.push_back(Run{tmpl.runs()[k].step, exps[k]});
  return SymbolicPath(std::move(runs));
}

NotLinearizable no_fit(const std::string& why) { return NotLinearizable("no affine closure: " + why); }

class ClosureFitter {
 public:
  ClosureFitter(const AtomSet& body, const Ref& count, std::string ivar)
      : body_(body), count_(count), ivar_(std::move(ivar)) {
    for (std::size_t k = 0; k < body_.atoms.size(); ++k) body_.atoms[k].origin = static_cast<int>(k);
  }

  StarClosure run() {
    if (!body_.groups.empty()) throw Unsupported("iterated atoms inside a repeated body");
    std::vector<AtomSet> samples;
    samples.push_back(instance(1));
    for (Int c = 2; c <= kSamples; ++c) {
      auto next = compose_atomsets(samples.back(), instance(c), Assumptions{});
      if (!next) {
        if (c == 2) return StarClosure{instance(1), true};
        throw no_fit("the body repeats " + std::to_string(c - 1) + " times but not " + std::to_string(c));
      }
      samples.push_back(*next);
    }
    samples_ = std::move(samples);
    AtomSet cand = candidate();
    verify(cand);
    return StarClosure{cand, false};
  }

 private:
  AtomSet instance(Int j) const {
    AtomSet s = body_.substituted(single(ivar_, AffineExpr(j)));
    for (auto& a : s.atoms) a.birth = j;
    return s;
  }

  const AtomSet& sample(Int c) const { return samples_[static_cast<std::size_t>(c - 1)]; }

  std::vector<const Atom*> of_origin(Int c, int origin) const {
    std::vector<const Atom*> out;
    for (const auto& a : sample(c).atoms)
      if (a.origin == origin) out.push_back(&a);
    return out;
  }

  AtomSet candidate() {
    std::set<int> origins;
    for (Int c = 1; c <= kSamples; ++c)
      for (const auto& a : sample(c).atoms) origins.insert(a.origin);
    AtomSet out;
    IterGroup fam{ivar_, AffineExpr(1), AffineExpr::ref(count_), {}};
    for (int o : origins) {
      std::vector<std::size_t> counts;
      for (Int c = 2; c <= kSamples; ++c) counts.push_back(of_origin(c, o).size());
      if (counts[0] == counts[1] && counts[1] == counts[2]) {
        for (auto& a : fit_transport(o)) out.atoms.push_back(std::move(a));
      } else if (counts[0] == 2 && counts[1] == 3 && counts[2] == 4) {
        fam.body.push_back(fit_family(o));
      } else {
        throw no_fit("the atoms created by body atom " + std::to_string(o) + " grow irregularly");
      }
    }
    if (!fam.body.empty()) out.groups.push_back(std::move(fam));
    out.canonicalize();
    return out;
  }

  // Atoms carried from copy to copy: exponents alpha + gamma * count.
  std::vector<Atom> fit_transport(int origin) const {
    auto last = of_origin(kSamples, origin);
    std::vector<std::vector<const Atom*>> per_c;
    for (Int c = 2; c <= kSamples; ++c) per_c.push_back(of_origin(c, origin));
    std::vector<Atom> out;
    std::vector<std::set<std::size_t>> used(per_c.size());
    for (const Atom* t : last) {
      std::set<Ref> refs;
      t->collect_refs(refs);
      if (!refs.empty()) throw no_fit("a carried atom depends on a single iteration: " + t->str());
      // exps[c][side][run]
      std::vector<std::vector<AffineExpr>> lefts, rights;
      for (std::size_t ci = 0; ci < per_c.size(); ++ci) {
        bool found = false;
        for (std::size_t k = 0; k < per_c[ci].size() && !found; ++k) {
          if (used[ci].count(k) || !same_form(*per_c[ci][k], *t)) continue;
          auto l = align(per_c[ci][k]->left, t->left);
          auto r = align(per_c[ci][k]->right, t->right);
          if (!l || !r) continue;
          used[ci].insert(k);
          lefts.push_back(*l);
          rights.push_back(*r);
          found = true;
        }
        if (!found) throw no_fit("cannot follow " + t->str() + " across copies");
      }
      auto fit = [&](const std::vector<std::vector<AffineExpr>>& e) {
        std::vector<AffineExpr> res;
        for (std::size_t k = 0; k < e[0].size(); ++k) {
          for (const auto& row : e)
            if (!row[k].is_constant()) throw no_fit("symbolic exponent in a carried atom");
          Int e2 = e[0][k].constant(), e3 = e[1][k].constant(), e4 = e[2][k].constant();
          Int gamma = e3 - e2, alpha = e2 - 2 * gamma;
          if (alpha + 4 * gamma != e4) throw no_fit("exponents of " + t->str() + " are not affine");
          res.push_back(AffineExpr(alpha) + gamma * AffineExpr::ref(count_));
        }
        return res;
      };
      Atom a = *t;
      a.left = rebuild(t->left, fit(lefts));
      a.right = rebuild(t->right, fit(rights));
      out.push_back(std::move(a));
    }
    return out;
  }

  // Rewrites the subscript of the iteration's own element back to ivar.
  AffineExpr own_part(const AffineExpr& e, Int j) const {
    AffineExpr out(0);
    for (const auto& [r, k] : e.terms()) {
      if (r.root != count_.root || r.subs.size() <= count_.subs.size() ||
          !std::equal(count_.subs.begin(), count_.subs.end(), r.subs.begin()))
        throw no_fit("exponent " + e.str() + " refers outside the repeated body");
      const AffineExpr& own = r.subs[count_.subs.size()];
      if (!(own == AffineExpr(j))) throw no_fit("an atom of copy " + std::to_string(j) + " refers to another copy");
      Ref nr = r;
      nr.subs[count_.subs.size()] = AffineExpr::var(ivar_);
      out = out + k * AffineExpr::ref(nr);
    }
    return out;
  }

  // One atom per copy: exponents own refs + alpha + beta * i + gamma * count.
  Atom fit_family(int origin) const {
    struct Sample {
      Int c, j;
      const Atom* atom;
    };
    std::vector<Sample> all;
    for (Int c = 2; c <= kSamples; ++c) {
      auto atoms = of_origin(c, origin);
      std::set<Int> births;
      for (const Atom* a : atoms) births.insert(a->birth);
      if (births.size() != static_cast<std::size_t>(c) || *births.begin() != 1 || *births.rbegin() != c)
        throw no_fit("copies of body atom " + std::to_string(origin) + " are not one per iteration");
      for (const Atom* a : atoms) all.push_back(Sample{c, a->birth, a});
    }
    const Sample* tmpl = &all.front();
    for (const auto& s : all)
      if (run_count(*s.atom) > run_count(*tmpl->atom)) tmpl = &s;
    const Atom& t = *tmpl->atom;
    std::map<std::pair<Int, Int>, std::pair<std::vector<AffineExpr>, std::vector<AffineExpr>>> exps;
    for (const auto& s : all) {
      if (!same_form(*s.atom, t)) throw no_fit("copies of body atom " + std::to_string(origin) + " differ in kind");
      auto l = align(s.atom->left, t.left);
      auto r = align(s.atom->right, t.right);
      if (!l || !r) throw no_fit("copies of body atom " + std::to_string(origin) + " differ in shape");
      exps[{s.c, s.j}] = {*l, *r};
    }
    auto fit = [&](bool left) {
      std::size_t n = (left ? t.left : t.right).runs().size();
      std::vector<AffineExpr> res;
      for (std::size_t k = 0; k < n; ++k) {
        auto at = [&](Int c, Int j) {
          const auto& pr = exps.at({c, j});
          return (left ? pr.first : pr.second)[k];
        };
        AffineExpr own = own_part(at(2, 1), 1);
        auto konst = [&](Int c, Int j) {
          AffineExpr e = at(c, j);
          if (!(own_part(e, j) == own)) throw no_fit("per-iteration exponents change shape");
          AffineExpr rest = e;
          for (const auto& [r, coef] : e.terms()) rest = rest - coef * AffineExpr::ref(r);
          return rest.constant();
        };
        Int e12 = konst(2, 1), e22 = konst(2, 2), e13 = konst(3, 1);
        Int beta = e22 - e12, gamma = e13 - e12, alpha = e12 - beta - 2 * gamma;
        for (const auto& [cj, unused] : exps)
          if (konst(cj.first, cj.second) != alpha + beta * cj.second + gamma * cj.first)
            throw no_fit("per-iteration exponents are not affine");
        res.push_back(own + AffineExpr(alpha) + beta * AffineExpr::var(ivar_) + gamma * AffineExpr::ref(count_));
      }
      return res;
    };
    Atom a = t;
    a.left = rebuild(t.left, fit(true));
    a.right = rebuild(t.right, fit(false));
    return a;
  }

  void verify(const AtomSet& cand) const {
    AffineExpr n = AffineExpr::ref(count_);
    AtomSet base = cand.substituted({{count_, AffineExpr(1)}});
    base.canonicalize();
    AtomSet first = instance(1);
    first.canonicalize();
    if (base.key() != first.key())
      throw no_fit("candidate fails at one copy:\n" + base.str() + "\nexpected\n" + first.str());

    Assumptions as;
    as.add_ge(n, 1);
    auto stepped = compose_atomsets(cand, body_.substituted(single(ivar_, n + 1)), as);
    AtomSet want = cand.substituted({{count_, n + 1}});
    for (auto& g : want.groups) {
      for (const auto& a : g.body) want.atoms.push_back(a.substituted(single(g.var, n + 1)));
      g.upper = n;
    }
    want.canonicalize();
    if (!stepped) throw no_fit("candidate cannot be extended by one more copy");
    stepped->canonicalize();
    if (stepped->key() != want.key())
      throw no_fit("induction step fails:\n" + stepped->str() + "\nexpected\n" + want.str());
  }

  AtomSet body_;
  Ref count_;
  std::string ivar_;
  std::vector<AtomSet> samples_;
};

}  // namespace

StarClosure star_closure(const AtomSet& body, const Ref& count, const std::string& ivar) {
  return ClosureFitter(body, count, ivar).run();
}


// ---------------------------------------------------------------------------

namespace {

Ref sub_ref(const Ref& r, AffineExpr s) {
  Ref out = r;
  out.subs.push_back(std::move(s));
  return out;
}

bool annotated(const std::string& msg) { return !msg.empty() && msg.front() == '['; }

class SigmaBuilder {
 public:
  explicit SigmaBuilder(const Theory& th) : th_(th) {}

  std::vector<Branch> top(const IterExpr& e, const std::vector<Ref>& locs) {
    if (locs.size() > 1) return annotate(e, [&] { return dot(e, locs); });
    return sig(e, locs.empty() ? Ref{"_", {}} : locs.front(), 0);
  }

 private:
  template <class F>
  std::vector<Branch> annotate(const IterExpr& e, F&& f) {
    try {
      return f();
    } catch (const Unsupported& ex) {
      if (annotated(ex.what())) throw;
      throw Unsupported("[" + e.str() + "] " + ex.what());
    } catch (const NotLinearizable& ex) {
      if (annotated(ex.what())) throw;
      throw NotLinearizable("[" + e.str() + "] " + ex.what());
    } catch (const NoCompose& ex) {
      if (annotated(ex.what())) throw;
      throw NoCompose("[" + e.str() + "] " + ex.what());
    }
  }

  std::vector<Branch> sig(const IterExpr& e, const Ref& loc, int level) {
    using K = IterExpr::Kind;
    switch (e.kind()) {
      case K::Axiom:
        return {Branch{split_axiom(th_.axiom(e.name())), {}}};
      case K::Eps:
        return {Branch{identity_atoms(), {}}};
      case K::Dot:
        return annotate(e, [&] {
          std::size_t consumers = 0;
          for (const auto& f : e.items()) consumers += f.is_unit() ? 0 : 1;
          std::vector<Ref> locs;
          for (std::size_t c = 0; c < consumers; ++c)
            locs.push_back(consumers == 1 ? loc : sub_ref(loc, AffineExpr(static_cast<Int>(c + 1))));
          return dot(e, locs, level);
        });
      case K::Star:
        return annotate(e, [&] { return star(e, loc, level); });
      case K::Alt: {
        std::vector<Branch> out;
        for (std::size_t b = 0; b < e.items().size(); ++b)
          for (auto& br : sig(e.items()[b], sub_ref(loc, AffineExpr(2)), level)) {
            br.bounds[sub_ref(loc, AffineExpr(1))] = Bound::eq(static_cast<Int>(b + 1));
            out.push_back(std::move(br));
          }
        return merge_branches(std::move(out));
      }
    }
    return {};
  }

  // locs: one per index-consuming factor.
  std::vector<Branch> dot(const IterExpr& e, const std::vector<Ref>& locs, int level = 0) {
    std::vector<Branch> acc{Branch{identity_atoms(), {}}};
    std::size_t k = 0;
    for (const auto& f : e.items()) {
      Ref loc = f.is_unit() ? Ref{"_", {}} : locs[k++];
      auto next = sig(f, loc, level);
      std::vector<Branch> prod;
      for (const auto& x : acc)
        for (const auto& y : next) {
          Branch b{AtomSet{}, x.bounds};
          bool clash = false;
          for (const auto& [r, bd] : y.bounds) {
            auto [it, fresh] = b.bounds.emplace(r, bd);
            if (!fresh && !(it->second == bd)) clash = true;
          }
          if (clash) continue;
          auto c = compose_atomsets(x.atoms, y.atoms, b.assumptions());
          if (!c) continue;
          b.atoms = std::move(*c);
          b.atoms = b.pinned();
          prod.push_back(std::move(b));
        }
      if (prod.empty()) throw NoCompose("no tree pair is related by " + e.str());
      acc = merge_branches(std::move(prod));
    }
    return acc;
  }

  std::vector<Branch> star(const IterExpr& e, const Ref& loc, int level) {
    if (level >= 2) throw Unsupported("star nesting deeper than 2");
    std::string ivar = level == 0 ? "i" : "i" + std::to_string(level + 1);
    auto body = merge_branches(sig(e.body(), sub_ref(loc, AffineExpr::var(ivar)), level + 1));
    if (body.size() != 1 || !body.front().unconstrained())
      throw Unsupported("[" + e.body().str() + "] the repeated body splits into " + std::to_string(body.size()) +
                        " cases");
    auto cl = star_closure(body.front().atoms, loc, ivar);
    std::vector<Branch> out;
    if (cl.at_most_one) {
      out.push_back(Branch{cl.atoms, {{loc, Bound::eq(1)}}});
    } else {
      AtomSet at_zero = cl.atoms.substituted({{loc, AffineExpr(0)}});
      at_zero.canonicalize();
      Bound b = is_covering_identity(at_zero) ? Bound::any() : Bound::pos();
      Branch main{cl.atoms, {}};
      if (b.kind != Bound::Kind::Any) main.bounds[loc] = b;
      out.push_back(std::move(main));
    }
    out.push_back(Branch{identity_atoms(), {{loc, Bound::zero()}}});
    return merge_branches(std::move(out));
  }

  const Theory& th_;
};

const char* const kScalarPool[] = {"n", "k", "j", "l", "p", "q"};
const char* const kListPool[] = {"m", "u", "w", "v", "s"};

bool scalar_shape(const IndexShape& s) {
  if (s.kind() == IndexShape::Kind::Tuple && s.parts().size() == 1) return scalar_shape(s.parts().front());
  return s.kind() == IndexShape::Kind::ListOf && s.element().kind() == IndexShape::Kind::Unit;
}

std::vector<IndexShape> root_shapes(const IterExpr& e, const IndexShape& shape) {
  if (shape.kind() == IndexShape::Kind::Unit) return {};
  if (e.kind() == IterExpr::Kind::Dot && shape.kind() == IndexShape::Kind::Tuple && shape.parts().size() > 1)
    return shape.parts();
  return {shape};
}

std::vector<std::string> allocate_roots(const std::vector<IndexShape>& shapes, const SigmaOptions& opt) {
  std::vector<std::string> out;
  std::size_t ns = 0, nl = 0;
  for (std::size_t k = 0; k < shapes.size(); ++k) {
    if (k < opt.roots.size()) {
      out.push_back(opt.roots[k]);
      continue;
    }
    std::string name;
    do {
      if (scalar_shape(shapes[k]))
        name = ns < std::size(kScalarPool) ? kScalarPool[ns++] : "n" + std::to_string(ns++);
      else
        name = nl < std::size(kListPool) ? kListPool[nl++] : "m" + std::to_string(nl++);
    } while (std::find(out.begin(), out.end(), name) != out.end() ||
             std::find(opt.roots.begin(), opt.roots.end(), name) != opt.roots.end());
    out.push_back(name);
  }
  return out;
}

}  // namespace

SymbolicCharFn sigma(const Theory& th, const IterExpr& e, const SigmaOptions& opt) {
  check_scheme(th, e);
  if (e.star_depth() > 2) throw Unsupported("[" + e.str() + "] star nesting deeper than 2");
  SymbolicCharFn f;
  f.scheme = e;
  f.shape = shape_of(e);
  auto shapes = root_shapes(e, f.shape);
  f.roots = allocate_roots(shapes, opt);
  std::vector<Ref> locs;
  for (const auto& r : f.roots) locs.push_back(Ref{r, {}});
  f.branches = merge_branches(SigmaBuilder(th).top(e, locs));
  if (f.branches.empty()) throw NoCompose("no tree pair is related by " + e.str());
  return f;
}

// ---------------------------------------------------------------------------

Env bind(const SymbolicCharFn& f, const MultiIndex& m) {
  MultiIndex canon = coerce_index(f.shape, m);
  Env env;
  if (f.roots.size() == 1) {
    env.roots[f.roots.front()] = canon;
  } else {
    for (std::size_t k = 0; k < f.roots.size(); ++k) env.roots[f.roots[k]] = canon.items()[k];
  }
  return env;
}

namespace {

MultiIndex build_index(const IndexShape& s, const Ref& r, const std::map<Ref, Int>& values) {
  auto value = [&](const Ref& x) -> Int {
    auto it = values.find(x);
    return it == values.end() ? 0 : std::max<Int>(it->second, 0);
  };
  switch (s.kind()) {
    case IndexShape::Kind::Unit:
      return MultiIndex::unit();
    case IndexShape::Kind::ListOf: {
      std::vector<MultiIndex> items;
      for (Int k = 1; k <= value(r); ++k) items.push_back(build_index(s.element(), sub_ref(r, AffineExpr(k)), values));
      return MultiIndex::list(std::move(items));
    }
    case IndexShape::Kind::Tuple: {
      if (s.parts().size() == 1) return build_index(s.parts().front(), r, values);
      std::vector<MultiIndex> items;
      for (std::size_t k = 0; k < s.parts().size(); ++k)
        items.push_back(build_index(s.parts()[k], sub_ref(r, AffineExpr(static_cast<Int>(k + 1))), values));
      return MultiIndex::list(std::move(items));
    }
    case IndexShape::Kind::Choice: {
      Int tag = std::clamp<Int>(value(sub_ref(r, AffineExpr(1))), 1, static_cast<Int>(s.parts().size()));
      return MultiIndex::list({MultiIndex::nat(static_cast<std::uint64_t>(tag)),
                               build_index(s.parts()[static_cast<std::size_t>(tag - 1)], sub_ref(r, AffineExpr(2)), values)});
    }
  }
  return MultiIndex::unit();
}

}  // namespace

MultiIndex unbind(const SymbolicCharFn& f, const std::map<Ref, Int>& values) {
  auto shapes = root_shapes(f.scheme, f.shape);
  if (shapes.empty()) return MultiIndex::unit();
  if (f.roots.size() == 1) return build_index(shapes.front(), Ref{f.roots.front(), {}}, values);
  std::vector<MultiIndex> items;
  for (std::size_t k = 0; k < f.roots.size(); ++k) items.push_back(build_index(shapes[k], Ref{f.roots[k], {}}, values));
  return MultiIndex::list(std::move(items));
}

bool eval_charfn(const SymbolicCharFn& f, const Env& env, const Term& t, const Term& d) {
  Lookup lookup = env.lookup();
  for (const auto& b : f.branches)
    if (b.bounds_hold(lookup) && eval_atomset(b.atoms, lookup, t, d)) return true;
  return false;
}

bool eval_charfn(const SymbolicCharFn& f, const MultiIndex& m, const Term& t, const Term& d) {
  return eval_charfn(f, bind(f, m), t, d);
}

}  // namespace tpc
