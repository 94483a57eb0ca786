#include <algorithm>
#include <numeric>
#include <set>

#include "tpc/error.hpp"
#include "tpc/math.hpp"

namespace tpc {

namespace {

Int floor_mod(Int a, Int q) {
  Int r = a % q;
  return r < 0 ? r + q : r;
}

Int floor_div(Int a, Int b) {
  Int q = a / b;
  return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

// Inverse of a modulo q, gcd(a, q) = 1.
Int mod_inverse(Int a, Int q) {
  Int t = 0, nt = 1, r = q, nr = floor_mod(a, q);
  while (nr != 0) {
    Int k = r / nr;
    std::tie(t, nt) = std::make_pair(nt, t - k * nt);
    std::tie(r, nr) = std::make_pair(nr, r - k * nr);
  }
  return floor_mod(t, q);
}

std::string ineq_text(const AffineExpr& e) {
  AffineExpr left, right(-e.constant());
  for (const auto& [r, c] : e.terms()) {
    if (c > 0)
      left = left + AffineExpr::ref(r, c);
    else
      right = right + AffineExpr::ref(r, -c);
  }
  return left.str() + " >= " + right.str();
}

bool trivially_nonneg(const AffineExpr& e) {
  if (e.constant() < 0) return false;
  for (const auto& [r, c] : e.terms())
    if (c < 0) return false;
  return true;
}

// Divide by the gcd of the coefficients, rounding the bound the right way.
AffineExpr tighten(const AffineExpr& e) {
  Int g = 0;
  for (const auto& [r, c] : e.terms()) g = std::gcd(g, c);
  if (g <= 1) return e;
  AffineExpr out(floor_div(e.constant(), g));
  for (const auto& [r, c] : e.terms()) out = out + AffineExpr::ref(r, c / g);
  return out;
}

// expr = 0 (mod q) in canonical form; nullopt when always true.
// Sets `never` when no integer values satisfy it.
std::optional<Congruence> normalize(const AffineExpr& expr, Int q, bool& never) {
  Int g = q;
  for (const auto& [r, c] : expr.terms()) g = std::gcd(g, floor_mod(c, q));
  if (floor_mod(expr.constant(), g) != 0) {
    never = true;
    return std::nullopt;
  }
  Int m = q / g;
  if (m == 1) return std::nullopt;
  AffineExpr lin;
  for (const auto& [r, c] : expr.terms()) {
    Int k = floor_mod(c / g, m);
    if (k) lin = lin + AffineExpr::ref(r, k);
  }
  Int rhs = floor_mod(-expr.constant() / g, m);
  if (lin.terms().size() == 1) {
    auto [r, c] = lin.terms()[0];
    if (std::gcd(c, m) == 1) return Congruence{AffineExpr::ref(r), floor_mod(rhs * mod_inverse(c, m), m), m};
  }
  return Congruence{lin, rhs, m};
}

// Builds a region from raw parameter conditions: tightens, drops what the
// rest implies and checks feasibility.
Region finish_region(std::vector<AffineExpr> ineqs, std::vector<Congruence> congs, std::vector<std::string> trace) {
  Region out;
  out.trace = std::move(trace);
  std::vector<AffineExpr> kept;
  for (auto& e : ineqs) {
    out.trace.push_back(ineq_text(e));
    if (e.is_constant()) {
      if (e.constant() < 0) return Region::unsat(ineq_text(e));
      continue;
    }
    AffineExpr t = tighten(e);
    if (trivially_nonneg(t)) continue;
    if (std::find(kept.begin(), kept.end(), t) == kept.end()) kept.push_back(t);
  }
  for (std::size_t k = 0; k < kept.size();) {
    Assumptions others;
    for (std::size_t j = 0; j < kept.size(); ++j)
      if (j != k) others.add_nonneg(kept[j]);
    if (others.proves_nonneg(kept[k]))
      kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(k));
    else
      ++k;
  }
  Assumptions all;
  for (const auto& e : kept) all.add_nonneg(e);
  if (!all.feasible()) return Region::unsat("inequalities are infeasible");
  for (const auto& c : congs) {
    out.trace.push_back(c.str());
    // a parameter pinned by the inequalities must meet the congruence
    if (c.expr.terms().size() == 1) {
      const auto& [r, k] = c.expr.terms()[0];
      AffineExpr x = AffineExpr::ref(r);
      for (Int v = 0; v <= 64; ++v)
        if (all.proves_zero(x - v)) {
          if (floor_mod(k * v + c.expr.constant(), c.modulus) != c.residue) return Region::unsat(c.str());
          break;
        }
    }
    if (std::find(out.congruences.begin(), out.congruences.end(), c) == out.congruences.end())
      out.congruences.push_back(c);
  }
  out.inequalities = std::move(kept);
  return out;
}

struct Unknowns {
  std::vector<Ref> order;
  std::set<Ref> set;
  void add(const Ref& r) {
    if (set.insert(r).second) order.push_back(r);
  }
};

void refs_of(const AffineExpr& e, std::set<Ref>& out) { e.collect_refs(out, false); }

// Existential refs in declaration order, then by ref order.
Unknowns existential_refs(const ConditionSystem& sys, bool require_ground) {
  std::set<Ref> all;
  for (const auto& e : sys.equations) refs_of(e.diff(), all);
  for (const auto& e : sys.inequalities) refs_of(e, all);
  for (const auto& c : sys.congruences) refs_of(c.expr, all);
  Unknowns out;
  for (const auto& v : sys.vars) {
    if (v.role != VarRole::Existential) continue;
    for (const auto& r : all) {
      if (r.root != v.name) continue;
      if (require_ground && !r.is_ground())
        throw Unsupported("element " + r.str() + " of an existential has a symbolic position");
      out.add(r);
    }
  }
  return out;
}

bool mentions_any(const LinearRow& row, const std::set<Ref>& refs) {
  for (const auto& [r, c] : row.coef)
    if (refs.count(r)) return true;
  return false;
}

void substitute_row(LinearRow& row, const Ref& x, const LinearRow& value) {
  auto it = row.coef.find(x);
  if (it == row.coef.end()) return;
  Rational k = it->second;
  row.coef.erase(it);
  row.add(value, k);
}

struct Elimination {
  std::vector<std::pair<Ref, LinearRow>> solved;  // x = row
  std::vector<Ref> free;
  std::vector<LinearRow> residual_eqs;  // no unknowns left
  std::vector<LinearRow> ineqs;         // >= 0, unknowns substituted
};

// Gaussian elimination of the unknowns, first usable equation per unknown.
Elimination gauss(const ConditionSystem& sys, const Unknowns& unknowns) {
  std::vector<LinearRow> eqs;
  for (const auto& e : sys.equations) eqs.push_back(LinearRow::from(e.diff()));
  Elimination out;
  for (const auto& e : sys.inequalities) out.ineqs.push_back(LinearRow::from(e));
  for (const auto& x : unknowns.order) out.ineqs.push_back(LinearRow::from(AffineExpr::ref(x)));
  for (const auto& x : unknowns.order) {
    auto pivot = std::find_if(eqs.begin(), eqs.end(), [&](const LinearRow& r) { return r.coef.count(x) > 0; });
    if (pivot == eqs.end()) {
      out.free.push_back(x);
      continue;
    }
    LinearRow row = *pivot;
    eqs.erase(pivot);
    Rational c = row.coef.at(x);
    row.coef.erase(x);
    row.scale(Rational(-1) / c);
    for (auto& r : eqs) substitute_row(r, x, row);
    for (auto& r : out.ineqs) substitute_row(r, x, row);
    for (auto& [y, v] : out.solved) substitute_row(v, x, row);
    out.solved.emplace_back(x, row);
  }
  out.residual_eqs = std::move(eqs);
  return out;
}

}  // namespace

Region eliminate(const ConditionSystem& sys) {
  if (sys.contradiction) return Region::unsat(sys.why);
  sys.validate();
  if (!sys.families.empty()) throw Unsupported("elimination over families of equations");
  Unknowns unknowns = existential_refs(sys, true);
  for (const auto& c : sys.congruences) {
    std::set<Ref> rs;
    refs_of(c.expr, rs);
    for (const auto& r : rs)
      if (unknowns.set.count(r)) throw Unsupported("congruence over an existential: " + c.str());
  }
  Elimination el = gauss(sys, unknowns);

  std::vector<AffineExpr> ineqs;
  std::vector<Congruence> congs;
  std::vector<std::string> trace;
  bool never = false;

  for (const auto& r : el.residual_eqs) {
    auto [e, q] = r.to_integer();
    if (e.is_constant()) {
      if (e.constant() != 0) return Region::unsat("inconsistent equations");
      continue;
    }
    ineqs.push_back(e);
    ineqs.push_back(-e);
  }
  std::set<Ref> free(el.free.begin(), el.free.end());
  for (const auto& [x, v] : el.solved) {
    auto [e, q] = v.to_integer();
    if (q == 1) continue;
    if (mentions_any(v, free)) throw Unsupported("fractional solution for " + x.str() + " with free unknowns");
    if (auto c = normalize(e, q, never)) congs.push_back(*c);
    if (never) return Region::unsat(x.str() + " = (" + e.str() + ")/" + std::to_string(q) + " is never integral");
  }

  // Fourier-Motzkin over free unknowns; exact when every coefficient is +-1.
  std::vector<AffineExpr> rows;
  for (const auto& r : el.ineqs) rows.push_back(tighten(r.to_integer().first));
  for (const auto& y : el.free) {
    std::vector<AffineExpr> lower, upper, rest;
    for (const auto& r : rows) {
      Int c = r.coef(y);
      if (c == 0)
        rest.push_back(r);
      else if (c == 1)
        lower.push_back(r);
      else if (c == -1)
        upper.push_back(r);
      else
        throw Unsupported("free existential " + y.str() + " with coefficient " + std::to_string(c));
    }
    for (const auto& lo : lower)
      for (const auto& hi : upper) rest.push_back(tighten(lo + hi));
    rows = std::move(rest);
  }
  for (auto& r : rows) ineqs.push_back(r);
  return finish_region(std::move(ineqs), std::move(congs), std::move(trace));
}

std::vector<Equation> solved_form(const ConditionSystem& sys) {
  if (sys.contradiction) return {};
  Unknowns unknowns = existential_refs(sys, false);
  Elimination el = gauss(sys, unknowns);
  std::vector<Equation> out;
  for (const auto& [x, v] : el.solved) {
    auto [e, q] = v.to_integer();
    out.push_back(Equation{AffineExpr::ref(x, q), e});
  }
  return out;
}

std::optional<std::map<Ref, Int>> solve_concrete(const ConditionSystem& sys) {
  if (sys.contradiction) return std::nullopt;
  sys.validate();
  if (!sys.names(VarRole::Parameter).empty()) throw Unsupported("solve_concrete expects existentials only");
  if (!sys.families.empty()) throw Unsupported("solve_concrete over families of equations");
  Unknowns unknowns = existential_refs(sys, true);
  Elimination el = gauss(sys, unknowns);
  for (const auto& r : el.residual_eqs)
    if (!r.is_constant() || r.constant != Rational(0)) return std::nullopt;

  // bounds for free unknowns from same-sign equations and inequalities
  std::map<Ref, Int> bound;
  auto offer = [&](const Ref& y, Int b) {
    auto it = bound.find(y);
    if (it == bound.end() || b < it->second) bound[y] = b;
  };
  for (const auto& y : el.free) {
    for (const auto& e : sys.equations) {
      AffineExpr d = e.diff();
      Int c = d.coef(y);
      if (c == 0) continue;
      if (c < 0) d = -d, c = -c;
      bool same = true;
      for (const auto& [r, k] : d.terms()) same = same && k > 0;
      if (same) offer(y, std::max<Int>(-d.constant(), 0) / c);
    }
    for (const auto& e : sys.inequalities) {
      Int c = e.coef(y);
      if (c >= 0) continue;
      bool other_nonpos = true;
      for (const auto& [r, k] : e.terms()) other_nonpos = other_nonpos && k <= 0;
      if (other_nonpos) offer(y, std::max<Int>(e.constant(), 0) / -c);
    }
    if (!bound.count(y)) throw Underdetermined("no bound for " + y.str());
  }

  std::map<Ref, Int> values;
  auto check = [&]() -> bool {
    for (const auto& [x, v] : el.solved) {
      Rational acc = v.constant;
      for (const auto& [r, c] : v.coef) acc += c * Rational(values.at(r));
      if (acc.denominator() != 1 || acc < Rational(0)) return false;
      values[x] = acc.numerator();
    }
    Lookup look = [&](const Ref& r) -> std::optional<Int> {
      auto it = values.find(r);
      if (it == values.end()) return std::nullopt;
      return it->second;
    };
    for (const auto& e : sys.equations) {
      auto v = evaluate(e.diff(), look);
      if (!v || *v != 0) return false;
    }
    for (const auto& e : sys.inequalities) {
      auto v = evaluate(e, look);
      if (!v || *v < 0) return false;
    }
    for (const auto& c : sys.congruences) {
      auto v = evaluate(c.expr, look);
      if (!v || floor_mod(*v, c.modulus) != c.residue) return false;
    }
    return true;
  };
  // lexicographic in declaration order over the free unknowns
  constexpr Int kCap = 10'000'000;
  Int space = 1;
  for (const auto& y : el.free) {
    space *= bound[y] + 1;
    if (space > kCap) throw Underdetermined("search space too large");
  }
  for (const auto& y : el.free) values[y] = 0;
  std::optional<std::map<Ref, Int>> best;
  auto less = [&](const std::map<Ref, Int>& a, const std::map<Ref, Int>& b) {
    for (const auto& x : unknowns.order)
      if (a.at(x) != b.at(x)) return a.at(x) < b.at(x);
    return false;
  };
  while (true) {
    if (check() && (!best || less(values, *best))) best = values;
    std::size_t k = el.free.size();
    while (k > 0) {
      const Ref& y = el.free[k - 1];
      if (values[y] < bound[y]) {
        ++values[y];
        break;
      }
      values[y] = 0;
      --k;
    }
    if (k == 0) return best;
  }
}

namespace {

std::vector<Ref> target_refs(const AffineExpr& e, const std::string& target) {
  std::set<Ref> rs;
  refs_of(e, rs);
  std::vector<Ref> out;
  for (const auto& r : rs)
    if (r.root == target) out.push_back(r);
  return out;
}

// u[s] = value from diff = 0, where u[s] occurs with coefficient +-1.
AffineExpr isolate(const AffineExpr& diff, const Ref& x) {
  Int c = diff.coef(x);
  if (c != 1 && c != -1) throw Unsupported(x.str() + " has coefficient " + std::to_string(c));
  AffineExpr rest = diff - AffineExpr::ref(x, c);
  return c == 1 ? -rest : rest;
}

}  // namespace

MultiIndexSolution solve_multiindex(const ConditionSystem& sys, const std::string& target) {
  sys.validate();
  const VarDecl* decl = sys.find(target);
  if (!decl || decl->role != VarRole::Existential) throw Error("'" + target + "' is not an existential");
  if (sys.contradiction) {
    MultiIndexSolution s;
    s.region = s.domain = Region::unsat(sys.why);
    return s;
  }
  const Ref len{target, {}};
  MultiIndexSolution out;

  // length level
  std::optional<AffineExpr> length;
  std::vector<AffineExpr> ineqs;
  std::vector<Equation> elements;
  for (const auto& e : sys.equations) {
    auto refs = target_refs(e.diff(), target);
    bool only_length = refs.size() == 1 && refs[0] == len;
    if (only_length && !length) {
      length = isolate(e.diff(), len);
      continue;
    }
    elements.push_back(e);
  }
  if (!length) throw Unsupported("no equation fixes the length of " + target);
  RefMap to_len{{len, *length}};
  out.entries.push_back(SolvedEntry{len, *length, std::nullopt, {}, {}});

  // element level
  auto solve_one = [&](const AffineExpr& raw_diff, std::optional<const Family*> fam) {
    AffineExpr diff = substitute(raw_diff, to_len);
    auto refs = target_refs(diff, target);
    if (refs.empty()) {
      if (fam) throw Unsupported("family without an element of " + target);
      ineqs.push_back(diff);
      ineqs.push_back(-diff);
      return;
    }
    if (refs.size() > 1) throw Unsupported("equation mentions several elements of " + target + ": " + raw_diff.str() + " = 0");
    AffineExpr value = isolate(diff, refs[0]);
    SolvedEntry entry{refs[0], value, std::nullopt, {}, {}};
    if (fam) {
      entry.var = (*fam)->var;
      entry.lower = substitute((*fam)->lower, to_len);
      entry.upper = substitute((*fam)->upper, to_len);
    }
    out.entries.push_back(std::move(entry));
  };
  for (const auto& e : elements) solve_one(e.diff(), std::nullopt);
  for (const auto& f : sys.families) solve_one(f.eq.diff(), &f);

  std::vector<Congruence> congs = sys.congruences;
  for (const auto& e : sys.inequalities) {
    AffineExpr s = substitute(e, to_len);
    if (!target_refs(s, target).empty()) throw Unsupported("inequality over elements of " + target);
    ineqs.push_back(s);
  }
  for (const auto& c : congs)
    if (!target_refs(c.expr, target).empty()) throw Unsupported("congruence over " + target);

  // solved values must be natural
  Assumptions known;
  for (const auto& e : ineqs) known.add_nonneg(e);
  for (const auto& entry : out.entries) {
    if (!entry.var) {
      ineqs.push_back(entry.value);
      continue;
    }
    Assumptions inner = known;
    AffineExpr i = AffineExpr::var(*entry.var);
    inner.add_ge(i, entry.lower);
    inner.add_ge(entry.upper, i);
    if (!inner.proves_nonneg(entry.value))
      throw Unsupported("cannot show " + entry.value.str() + " >= 0 for every " + *entry.var);
  }
  out.region = finish_region(ineqs, congs, {});

  // element positions in range, for every ref with a subscript
  std::set<Ref> used;
  auto use = [&](const AffineExpr& e) { e.collect_refs(used, true); };
  for (const auto& e : sys.equations) use(substitute(e.diff(), to_len));
  for (const auto& e : sys.inequalities) use(substitute(e, to_len));
  std::vector<AffineExpr> dom = ineqs;
  auto in_range = [&](const Ref& r, std::vector<AffineExpr>& conds) {
    if (r.subs.empty()) return;
    Ref parent{r.root, {r.subs.begin(), r.subs.end() - 1}};
    AffineExpr parent_len = parent == len ? *length : AffineExpr::ref(parent);
    if (parent != len && !used.count(parent)) return;
    conds.push_back(r.subs.back() - 1);
    conds.push_back(parent_len - r.subs.back());
  };
  for (const auto& r : std::set<Ref>(used)) in_range(r, dom);
  Assumptions dom_known;
  for (const auto& e : dom) dom_known.add_nonneg(e);
  for (const auto& f : sys.families) {
    AffineExpr lo = substitute(f.lower, to_len), hi = substitute(f.upper, to_len);
    if (!dom_known.proves_nonneg(hi - lo)) continue;  // possibly empty
    std::set<Ref> fr;
    substitute(f.eq.diff(), to_len).collect_refs(fr, true);
    for (const auto& end : {lo, hi}) {
      RefMap at = single(f.var, end);
      for (const auto& r : fr) {
        bool has_var = false;
        for (const auto& s : r.subs) has_var = has_var || s.mentions_root(f.var);
        if (has_var) in_range(substitute(r, at), dom);
      }
    }
  }
  out.domain = finish_region(dom, congs, {});
  return out;
}

MultiIndex MultiIndexSolution::build(const Env& params) const {
  std::map<std::vector<Int>, Int> lengths;
  auto look = params.lookup();
  auto place = [&](const SolvedEntry& e, const Lookup& l) {
    std::vector<Int> pos;
    for (const auto& s : e.target.subs) {
      auto v = evaluate(s, l);
      if (!v) throw Error("cannot place " + e.target.str());
      pos.push_back(*v);
    }
    auto v = evaluate(e.value, l);
    if (!v) throw Error("cannot evaluate " + e.value.str());
    lengths[pos] = *v;
  };
  for (const auto& e : entries) {
    if (!e.var) {
      place(e, look);
      continue;
    }
    auto lo = evaluate(e.lower, look), hi = evaluate(e.upper, look);
    if (!lo || !hi) throw Error("cannot evaluate the range of " + e.str());
    Env inner = params;
    for (Int i = *lo; i <= *hi; ++i) {
      inner.scalars[*e.var] = i;
      place(e, inner.lookup());
    }
  }
  auto rec = [&](auto&& self, const std::vector<Int>& pos) -> MultiIndex {
    auto it = lengths.find(pos);
    Int n = it == lengths.end() ? 0 : it->second;
    if (n < 0) throw Error("negative length at a solved position");
    bool has_children = false;
    for (const auto& [p, v] : lengths)
      if (p.size() == pos.size() + 1 && std::equal(pos.begin(), pos.end(), p.begin())) has_children = true;
    if (!has_children && !pos.empty()) return MultiIndex::nat(static_cast<std::uint64_t>(n));
    std::vector<MultiIndex> items;
    for (Int k = 1; k <= n; ++k) {
      auto child = pos;
      child.push_back(k);
      items.push_back(self(self, child));
    }
    return MultiIndex::list(std::move(items));
  };
  return rec(rec, {});
}

std::string MultiIndexSolution::str() const {
  std::string out;
  if (!region.universal_p()) out += region.str() + "\n";
  for (const auto& e : entries) out += e.str() + "\n";
  return out;
}

}  // namespace tpc
