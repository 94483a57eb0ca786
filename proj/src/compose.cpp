#include <algorithm>
#include <map>

#include "tpc/path.hpp"

namespace tpc {

namespace {

struct Cursor {
  const std::vector<Run>& runs;
  std::size_t i = 0;
  AffineExpr left;  // unconsumed part of runs[i]

  explicit Cursor(const std::vector<Run>& r) : runs(r) {
    if (!runs.empty()) left = runs[0].exp;
  }
  bool done() const { return i >= runs.size(); }
  const Step& step() const { return runs[i].step; }
  void advance() {
    ++i;
    if (i < runs.size()) left = runs[i].exp;
  }
  SymbolicPath rest() const {
    std::vector<Run> out;
    if (i < runs.size()) {
      out.push_back(Run{runs[i].step, left});
      out.insert(out.end(), runs.begin() + static_cast<std::ptrdiff_t>(i) + 1, runs.end());
    }
    return SymbolicPath(std::move(out));
  }
};

bool zero(const AffineExpr& e, const Assumptions& a) {
  if (e.is_constant()) return e.constant() == 0;
  return a.proves_zero(e);
}

}  // namespace

Related relate(const SymbolicPath& p, const SymbolicPath& q, const Assumptions& a) {
  Cursor cp(p.runs()), cq(q.runs());
  while (true) {
    while (!cp.done() && !cp.left.is_constant() && zero(cp.left, a)) cp.advance();
    while (!cq.done() && !cq.left.is_constant() && zero(cq.left, a)) cq.advance();
    if (cp.done()) return {Relation::Prefix, cq.rest()};
    if (cq.done()) return {Relation::Extends, cp.rest()};
    if (cp.step() == cq.step()) {
      AffineExpr d = cp.left - cq.left;
      if (zero(d, a)) {
        cp.advance();
        cq.advance();
      } else if (a.proves_nonneg(d)) {
        cp.left = d;
        cq.advance();
      } else if (a.proves_nonneg(-d)) {
        cq.left = -d;
        cp.advance();
      } else {
        return {Relation::Unknown, {}};
      }
      continue;
    }
    if (a.proves_positive(cp.left) && a.proves_positive(cq.left)) return {Relation::Diverge, {}};
    return {Relation::Unknown, {}};
  }
}

namespace {

void add_range(Assumptions& as, const IterGroup& g) {
  as.add_ge(AffineExpr::var(g.var), g.lower);
  as.add_ge(g.upper, AffineExpr::var(g.var));
}

// q applies whenever p applies.
bool covered_by(const SymbolicPath& q, const SymbolicPath& p, const Assumptions& a) {
  if (q.empty()) return true;
  auto r = relate(q, p, a);
  if (r.rel == Relation::Prefix) return true;
  const Run& last = q.runs().back();
  if (!a.proves_positive(last.exp)) return false;
  std::vector<Run> shorter = q.runs();
  shorter.back().exp = shorter.back().exp - 1;
  auto r2 = relate(SymbolicPath(shorter), p, a);
  if (r2.rel != Relation::Prefix || r2.rest.empty()) return false;
  const Run& next = r2.rest.runs().front();
  return next.step.same_node(last.step) && a.proves_positive(next.exp);
}

std::vector<const SymbolicPath*> left_paths(const std::vector<Atom>& atoms, const Atom* skip) {
  std::vector<const SymbolicPath*> out;
  for (const auto& a : atoms) {
    if (&a == skip) continue;
    if (a.kind == AtomKind::EqualsLR || a.kind == AtomKind::GroundL || a.kind == AtomKind::MatchL)
      out.push_back(&a.left);
    if (a.kind == AtomKind::EqualsLL) {
      out.push_back(&a.left);
      out.push_back(&a.right);
    }
  }
  return out;
}

// Drops MatchL atoms implied by other left-side paths.
void prune_matches(std::vector<Atom>& atoms, const std::vector<Atom>* outer, const Assumptions& a) {
  for (std::size_t k = 0; k < atoms.size();) {
    if (atoms[k].kind != AtomKind::MatchL) {
      ++k;
      continue;
    }
    bool covered = atoms[k].left.empty();
    for (const auto* p : left_paths(atoms, &atoms[k]))
      if (!covered && covered_by(atoms[k].left, *p, a)) covered = true;
    if (outer && !covered)
      for (const auto* p : left_paths(*outer, nullptr))
        if (!covered && covered_by(atoms[k].left, *p, a)) covered = true;
    if (covered)
      atoms.erase(atoms.begin() + static_cast<std::ptrdiff_t>(k));
    else
      ++k;
  }
}

struct Provider {
  const Atom* atom;
  int group;  // index into a.groups, -1 for plain atoms
  bool used = false;
};

struct Hit {
  Provider* prov;
  SymbolicPath rest;
  bool extends;
};

class Composer {
 public:
  Composer(const AtomSet& a, AtomSet b, const Assumptions& ctx) : a_(a), b_(std::move(b)), ctx_(ctx) {
    // Keep group variables of the two sides apart.
    std::set<std::string> avars;
    for (const auto& g : a_.groups) avars.insert(g.var);
    for (auto& g : b_.groups) {
      std::string original = g.var;
      std::string v = g.var;
      while (avars.count(v)) v += "'";
      if (v != g.var) {
        for (auto& at : g.body) at = at.substituted(single(g.var, AffineExpr::var(v)));
        g.var = v;
      }
      b_original_vars_.push_back(original);
    }
    for (const auto& at : a_.atoms)
      if (at.reads_right()) providers_.push_back(Provider{&at, -1});
    for (std::size_t gi = 0; gi < a_.groups.size(); ++gi)
      for (const auto& at : a_.groups[gi].body)
        if (at.reads_right()) providers_.push_back(Provider{&at, static_cast<int>(gi)});
    out_a_groups_.resize(a_.groups.size());
    out_b_groups_.resize(b_.groups.size());
  }

  std::optional<AtomSet> run() {
    for (const auto& p : providers_)
      if (p.atom->kind == AtomKind::EqualsRR)
        throw Unsupported("composition through an EqualsRR atom");
    for (const auto& at : b_.atoms)
      if (!consume(at, -1)) return std::nullopt;
    for (std::size_t gi = 0; gi < b_.groups.size(); ++gi)
      for (const auto& at : b_.groups[gi].body)
        if (!consume(at, static_cast<int>(gi))) return std::nullopt;

    // Left-only atoms of A survive unchanged.
    for (const auto& at : a_.atoms)
      if (!at.reads_right()) plain_.push_back(at);
    for (std::size_t gi = 0; gi < a_.groups.size(); ++gi)
      for (const auto& at : a_.groups[gi].body)
        if (!at.reads_right()) out_a_groups_[gi].push_back(at);
    // Subtrees of the middle tree nobody reads still have to exist.
    for (const auto& p : providers_) {
      if (p.used || p.atom->kind != AtomKind::EqualsLR) continue;
      Atom m = Atom::match_l(p.atom->left);
      m.origin = p.atom->origin;
      m.birth = p.atom->birth;
      (p.group < 0 ? plain_ : out_a_groups_[static_cast<std::size_t>(p.group)]).push_back(std::move(m));
    }

    AtomSet out;
    out.atoms = plain_;
    prune_matches(out.atoms, nullptr, ctx_);
    for (std::size_t gi = 0; gi < a_.groups.size(); ++gi) {
      if (out_a_groups_[gi].empty()) continue;
      const auto& g = a_.groups[gi];
      Assumptions as = ctx_;
      add_range(as, g);
      prune_matches(out_a_groups_[gi], &out.atoms, as);
      if (!out_a_groups_[gi].empty()) out.groups.push_back(IterGroup{g.var, g.lower, g.upper, out_a_groups_[gi]});
    }
    for (std::size_t gi = 0; gi < b_.groups.size(); ++gi) {
      if (out_b_groups_[gi].empty()) continue;
      const auto& g = b_.groups[gi];
      Assumptions as = ctx_;
      add_range(as, g);
      prune_matches(out_b_groups_[gi], &out.atoms, as);
      IterGroup ng{g.var, g.lower, g.upper, out_b_groups_[gi]};
      const std::string& orig = b_original_vars_[gi];
      if (orig != g.var) {
        for (auto& at : ng.body) at = at.substituted(single(g.var, AffineExpr::var(orig)));
        ng.var = orig;
      }
      if (!ng.body.empty()) out.groups.push_back(std::move(ng));
    }
    out.canonicalize();
    return out;
  }

 private:
  std::vector<Atom>& target(const Provider* p, int bgroup) {
    if (p && p->group >= 0) {
      if (bgroup >= 0) throw Unsupported("composition of two iterated atom families");
      return out_a_groups_[static_cast<std::size_t>(p->group)];
    }
    if (bgroup >= 0) return out_b_groups_[static_cast<std::size_t>(bgroup)];
    return plain_;
  }

  // nullopt: the path does not exist in the middle tree (empty relation).
  std::optional<std::vector<Hit>> translate(const SymbolicPath& lb, int bgroup) {
    std::vector<Hit> hits;
    for (auto& p : providers_) {
      Assumptions as = ctx_;
      if (p.group >= 0) add_range(as, a_.groups[static_cast<std::size_t>(p.group)]);
      if (bgroup >= 0) add_range(as, b_.groups[static_cast<std::size_t>(bgroup)]);
      auto r = relate(lb, p.atom->right, as);
      if (r.rel == Relation::Diverge) continue;
      if (r.rel == Relation::Unknown)
        throw Unsupported("path relation depends on index values: " + lb.str() + " against " +
                          p.atom->right.str());
      if (p.group >= 0 && bgroup >= 0)
        throw Unsupported("composition of two iterated atom families");
      bool ext = r.rel == Relation::Extends || r.rest.empty();
      if (ext && p.group >= 0)
        throw Unsupported("a single instance of an iterated atom is selected: " + lb.str());
      hits.push_back(Hit{&p, r.rest, ext});
    }
    if (hits.empty()) return std::nullopt;
    bool any_ext = std::any_of(hits.begin(), hits.end(), [](const Hit& h) { return h.extends; });
    if (any_ext && hits.size() != 1)
      throw Unsupported("ambiguous path translation for " + lb.str());
    return hits;
  }

  static std::optional<Term> ground_at(const Term& g, const SymbolicPath& rest) {
    auto p = rest.concrete();
    if (!p) throw Unsupported("symbolic path into a ground subtree: " + rest.str());
    return apply_path(*p, g);
  }

  bool consume(const Atom& at, int bgroup) {
    if (!at.reads_left()) {
      target(nullptr, bgroup).push_back(at);
      return true;
    }
    if (at.kind == AtomKind::EqualsLL) throw Unsupported("composition through an EqualsLL atom");
    auto hits = translate(at.left, bgroup);
    if (!hits) return false;
    for (auto& h : *hits) {
      h.prov->used = true;
      const Atom& pa = *h.prov->atom;
      auto& out = target(h.prov, bgroup);
      std::size_t before = out.size();
      bool from_ground = pa.kind == AtomKind::GroundR;
      switch (at.kind) {
        case AtomKind::EqualsLR:
          if (h.extends) {
            if (from_ground) {
              auto sub = ground_at(*pa.ground, h.rest);
              if (!sub) return false;
              out.push_back(Atom::ground_r(at.right, *sub));
            } else {
              out.push_back(Atom::equals_lr(pa.left.then(h.rest), at.right));
            }
          } else {
            if (from_ground)
              out.push_back(Atom::ground_r(at.right.then(h.rest), *pa.ground));
            else
              out.push_back(Atom::equals_lr(pa.left, at.right.then(h.rest)));
          }
          break;
        case AtomKind::GroundL:
          if (h.extends) {
            if (from_ground) {
              auto sub = ground_at(*pa.ground, h.rest);
              if (!sub || !(*sub == *at.ground)) return false;
            } else {
              out.push_back(Atom::ground_l(pa.left.then(h.rest), *at.ground));
            }
          } else {
            auto sub = ground_at(*at.ground, h.rest);
            if (!sub) return false;
            if (from_ground) {
              if (!(*sub == *pa.ground)) return false;
            } else {
              out.push_back(Atom::ground_l(pa.left, *sub));
            }
          }
          break;
        case AtomKind::MatchL:
          if (h.extends) {
            if (from_ground) {
              if (!ground_at(*pa.ground, h.rest)) return false;
            } else {
              out.push_back(Atom::match_l(pa.left.then(h.rest)));
            }
          }
          break;
        default:
          break;
      }
      // A path moved deeper keeps its identity; a read through a leaf of the
      // middle tree is a new atom of the reader.
      const Atom& tag = (h.extends || at.kind == AtomKind::GroundL) ? at : pa;
      for (std::size_t k = before; k < out.size(); ++k) {
        out[k].origin = tag.origin;
        out[k].birth = tag.birth;
      }
    }
    return true;
  }

  const AtomSet& a_;
  AtomSet b_;
  const Assumptions& ctx_;
  std::vector<std::string> b_original_vars_;
  std::vector<Provider> providers_;
  std::vector<Atom> plain_;
  std::vector<std::vector<Atom>> out_a_groups_;
  std::vector<std::vector<Atom>> out_b_groups_;
};

}  // namespace

std::optional<AtomSet> compose_atomsets(const AtomSet& a, const AtomSet& b, const Assumptions& ctx) {
  return Composer(a, b, ctx).run();
}

}  // namespace tpc
