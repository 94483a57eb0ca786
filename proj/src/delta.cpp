#include "tpc/delta.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "tpc/error.hpp"
#include "tpc/inclu.hpp"

namespace tpc {

namespace {

using Kind = IterExpr::Kind;

std::vector<IterExpr> factors(const IterExpr& e) {
  if (e.kind() == Kind::Dot) return e.items();
  if (e.kind() == Kind::Eps) return {};
  return {e};
}

bool is_star_of_axiom(const IterExpr& e) { return e.kind() == Kind::Star && e.body().kind() == Kind::Axiom; }

// x*.x.rest | rest  ->  x*.rest
bool merge_plus(std::vector<IterExpr>& alts) {
  for (std::size_t p = 0; p < alts.size(); ++p) {
    auto fp = factors(alts[p]);
    if (fp.size() < 2 || fp[0].kind() != Kind::Star || !(fp[0].body() == fp[1])) continue;
    std::vector<IterExpr> rest(fp.begin() + 2, fp.end());
    for (std::size_t q = 0; q < alts.size(); ++q) {
      if (q == p || factors(alts[q]) != rest) continue;
      rest.insert(rest.begin(), fp[0]);
      alts[p] = IterExpr::dot(rest);
      alts.erase(alts.begin() + static_cast<std::ptrdiff_t>(q));
      return true;
    }
  }
  return false;
}

IterExpr normalize_alt(std::vector<IterExpr> items) {
  std::vector<IterExpr> flat;
  for (auto& it : items) {
    auto n = normalize(it);
    if (n.kind() == Kind::Alt)
      flat.insert(flat.end(), n.items().begin(), n.items().end());
    else
      flat.push_back(n);
  }
  std::vector<IterExpr> uniq;
  for (auto& f : flat)
    if (std::find(uniq.begin(), uniq.end(), f) == uniq.end()) uniq.push_back(f);
  while (merge_plus(uniq)) {
    for (auto& u : uniq) u = normalize(u);
  }
  bool other_nullable = false;
  for (const auto& u : uniq) other_nullable = other_nullable || (u.kind() != Kind::Eps && u.nullable());
  if (other_nullable) std::erase_if(uniq, [](const IterExpr& u) { return u.kind() == Kind::Eps; });
  if (uniq.size() == 1) return uniq[0];
  return IterExpr::alt(uniq);
}

IterExpr normalize_dot(const std::vector<IterExpr>& items) {
  std::vector<IterExpr> flat;
  for (const auto& it : items) {
    auto n = normalize(it);
    auto fs = factors(n);
    flat.insert(flat.end(), fs.begin(), fs.end());
  }
  for (std::size_t k = 0; k < flat.size(); ++k) {
    if (flat[k].kind() != Kind::Alt) continue;
    std::vector<IterExpr> alts;
    for (const auto& branch : flat[k].items()) {
      std::vector<IterExpr> seq(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(k));
      seq.push_back(branch);
      seq.insert(seq.end(), flat.begin() + static_cast<std::ptrdiff_t>(k) + 1, flat.end());
      alts.push_back(IterExpr::dot(seq));
    }
    return normalize_alt(alts);
  }
  std::vector<IterExpr> out;
  for (auto& f : flat) {
    if (!out.empty() && out.back().kind() == Kind::Star && out.back() == f) continue;
    out.push_back(f);
  }
  return IterExpr::dot(out);
}

const IterExpr& node_at(const IterExpr& e, const std::vector<std::size_t>& at, std::size_t depth = 0) {
  if (depth == at.size()) return e;
  if (e.kind() == Kind::Star) return node_at(e.body(), at, depth + 1);
  if (e.kind() == Kind::Dot || e.kind() == Kind::Alt) {
    if (at[depth] >= e.items().size()) throw Error("rewrite position out of range");
    return node_at(e.items()[at[depth]], at, depth + 1);
  }
  throw Error("rewrite position out of range");
}

// e with the node at `at` replaced; not normalized.
IterExpr replace_at(const IterExpr& e, const std::vector<std::size_t>& at, const IterExpr& with,
                    std::size_t depth = 0) {
  if (depth == at.size()) return with;
  if (e.kind() == Kind::Star) return IterExpr::star(replace_at(e.body(), at, with, depth + 1));
  auto items = e.items();
  items[at[depth]] = replace_at(items[at[depth]], at, with, depth + 1);
  // keep the arity of the parent so later positions stay meaningful
  return e.kind() == Kind::Dot ? IterExpr::dot(items) : IterExpr::alt(items);
}

// (a*.b)* -> b*.a*.b | eps
std::optional<std::pair<std::string, std::string>> r1_site(const IterExpr& n) {
  if (n.kind() != Kind::Star || n.body().kind() != Kind::Dot) return std::nullopt;
  const auto& it = n.body().items();
  if (it.size() != 2 || !is_star_of_axiom(it[0]) || it[1].kind() != Kind::Axiom) return std::nullopt;
  return std::make_pair(it[0].body().name(), it[1].name());
}

// (alpha.c)*, c an axiom and alpha nonempty
std::optional<std::pair<IterExpr, std::string>> r2_site(const IterExpr& n) {
  if (n.kind() != Kind::Star || n.body().kind() != Kind::Dot) return std::nullopt;
  auto it = n.body().items();
  if (it.size() < 2 || it.back().kind() != Kind::Axiom) return std::nullopt;
  std::string c = it.back().name();
  it.pop_back();
  return std::make_pair(IterExpr::dot(it), c);
}

IterExpr rewrite(const std::string& rule, const IterExpr& n, std::size_t index) {
  if (rule == "R1") {
    auto s = r1_site(n);
    if (!s) throw Error("R1 does not apply to " + n.str());
    auto a = IterExpr::axiom(s->first), b = IterExpr::axiom(s->second);
    return IterExpr::alt({IterExpr::dot({IterExpr::star(b), IterExpr::star(a), b}), IterExpr::eps()});
  }
  if (rule == "R2") {
    auto s = r2_site(n);
    if (!s) throw Error("R2 does not apply to " + n.str());
    auto c = IterExpr::star(IterExpr::axiom(s->second));
    return IterExpr::dot({c, s->first, c});
  }
  if (rule == "R3") {
    if (n.kind() != Kind::Dot || index + 1 >= n.items().size() || !is_star_of_axiom(n.items()[index]) ||
        n.items()[index + 1].kind() != Kind::Axiom)
      throw Error("R3 does not apply to " + n.str());
    auto items = n.items();
    std::swap(items[index], items[index + 1]);
    return IterExpr::dot(items);
  }
  throw Error("unknown rule '" + rule + "'");
}

struct Reducer {
  const Theory& th;
  std::map<std::pair<std::string, std::string>, bool> commute;
  std::set<std::string> failed;  // rule + node already rejected
  std::vector<InclusionCheck> rejected;

  bool commutes(const std::string& a, const std::string& b) {
    auto key = std::make_pair(std::min(a, b), std::max(a, b));
    auto it = commute.find(key);
    if (it != commute.end()) return it->second;
    return commute[key] = test_commutation(th, a, b);
  }

  // Try every rule at node n (reached by `at`); the parent Dot and position
  // are given for context-sensitive rules.
  std::optional<ReductionStep> try_node(const IterExpr& n, const std::vector<std::size_t>& at, const IterExpr* parent,
                                        std::size_t pos) {
    if (auto s = r1_site(n)) {
      std::string key = "R1 " + n.str();
      if (!failed.count(key)) {
        auto a = IterExpr::axiom(s->first), b = IterExpr::axiom(s->second);
        auto gamma = IterExpr::dot({b, IterExpr::star(a), b});
        auto chk = check_inclusion(th, IterExpr::dot({a, gamma}), gamma);
        if (chk.holds) return ReductionStep{"R1", at, {chk}, IterExpr::eps(), IterExpr::eps()};
        failed.insert(key);
        rejected.push_back(chk);
      }
    }
    if (n.kind() == Kind::Dot) {
      const auto& it = n.items();
      for (std::size_t k = 0; k + 1 < it.size(); ++k) {
        if (!is_star_of_axiom(it[k]) || it[k + 1].kind() != Kind::Axiom) continue;
        const auto& a = it[k].body().name();
        const auto& b = it[k + 1].name();
        if (a == b || !commutes(a, b)) continue;
        InclusionCheck chk;
        chk.query = a + "." + b + " = " + b + "." + a;
        chk.holds = true;
        chk.region = Region::universal();
        auto where = at;
        where.push_back(k);
        return ReductionStep{"R3", where, {chk}, IterExpr::eps(), IterExpr::eps()};
      }
    }
    if (auto s = r2_site(n); s && parent && parent->kind() == Kind::Dot) {
      // only where the star is followed by alpha, so alpha alone stays covered
      auto alpha = factors(s->first);
      const auto& sib = parent->items();
      bool followed = pos + alpha.size() < sib.size() &&
                      std::equal(alpha.begin(), alpha.end(), sib.begin() + static_cast<std::ptrdiff_t>(pos) + 1);
      std::string key = "R2 " + parent->str() + " @" + std::to_string(pos);
      if (followed && !failed.count(key)) {
        auto body = n.body();
        auto c = IterExpr::axiom(s->second);
        auto left = IterExpr::dot({body, body});
        auto right = IterExpr::alt({IterExpr::dot({c, body}), IterExpr::dot({body, c})});
        auto chk = check_inclusion(th, left, right);
        if (chk.holds) return ReductionStep{"R2", at, {chk}, IterExpr::eps(), IterExpr::eps()};
        failed.insert(key);
        rejected.push_back(chk);
      }
    }
    return std::nullopt;
  }

  std::optional<ReductionStep> search(const IterExpr& n, std::vector<std::size_t>& at, const IterExpr* parent,
                                      std::size_t pos) {
    if (auto s = try_node(n, at, parent, pos)) return s;
    if (n.kind() == Kind::Star) {
      at.push_back(0);
      auto s = search(n.body(), at, &n, 0);
      at.pop_back();
      return s;
    }
    if (n.kind() == Kind::Dot || n.kind() == Kind::Alt) {
      for (std::size_t k = 0; k < n.items().size(); ++k) {
        at.push_back(k);
        auto s = search(n.items()[k], at, &n, k);
        at.pop_back();
        if (s) return s;
      }
    }
    return std::nullopt;
  }
};

}  // namespace

IterExpr normalize(const IterExpr& e) {
  switch (e.kind()) {
    case Kind::Axiom:
    case Kind::Eps:
      return e;
    case Kind::Star: {
      auto b = normalize(e.body());
      if (b.kind() == Kind::Eps) return b;
      if (b.kind() == Kind::Star) return b;
      return IterExpr::star(b);
    }
    case Kind::Alt:
      return normalize_alt(e.items());
    case Kind::Dot:
      return normalize_dot(e.items());
  }
  return e;
}

InclusionCheck check_inclusion(const Theory& th, const IterExpr& left, const IterExpr& right) {
  InclusionCheck c;
  c.query = left.str() + " <= " + right.str();
  try {
    auto f = sigma(th, left);
    auto g = sigma(th, right);
    c.system = includes(f, g);
    c.region = eliminate(c.system);
    c.holds = c.region.universal_p();
  } catch (const Error& e) {
    c.error = e.what();
    c.holds = false;
  }
  return c;
}

bool test_absorption(const Theory& th, const std::string& a, const IterExpr& gamma) {
  th.axiom(a);
  return check_inclusion(th, IterExpr::dot({IterExpr::axiom(a), gamma}), gamma).holds;
}

bool test_commutation(const Theory& th, const std::string& a, const std::string& b) {
  const Clause& ca = th.axiom(a);
  const Clause& cb = th.axiom(b);
  if (a == b) return true;
  auto ab = compose_clauses(ca, cb);
  auto ba = compose_clauses(cb, ca);
  if (ab && ba && equal_up_to_renaming(*ab, *ba)) return true;
  auto x = IterExpr::dot({IterExpr::axiom(a), IterExpr::axiom(b)});
  auto y = IterExpr::dot({IterExpr::axiom(b), IterExpr::axiom(a)});
  return check_inclusion(th, x, y).holds && check_inclusion(th, y, x).holds;
}

IterExpr apply_rule(const std::string& rule, const IterExpr& e, const std::vector<std::size_t>& at) {
  if (rule == "R3") {
    if (at.empty()) throw Error("R3 needs a position inside a concatenation");
    std::vector<std::size_t> parent(at.begin(), at.end() - 1);
    const IterExpr& n = node_at(e, parent);
    return normalize(replace_at(e, parent, rewrite(rule, n, at.back())));
  }
  const IterExpr& n = node_at(e, at);
  return normalize(replace_at(e, at, rewrite(rule, n, 0)));
}

ReduceResult reduce_scheme(const Theory& th, const IterExpr& e, std::size_t max_steps) {
  Reducer r{th, {}, {}, {}};
  ReduceResult out{normalize(e), {}};
  for (std::size_t step = 0; step < max_steps; ++step) {
    std::vector<std::size_t> at;
    auto s = r.search(out.scheme, at, nullptr, 0);
    if (!s) break;
    s->before = out.scheme;
    s->after = apply_rule(s->rule, out.scheme, s->at);
    if (s->after == s->before) break;
    out.scheme = s->after;
    out.trace.steps.push_back(std::move(*s));
  }
  out.trace.rejected = std::move(r.rejected);
  return out;
}

IterExpr replay_trace(const IterExpr& original, const ReductionTrace& trace) {
  IterExpr e = normalize(original);
  for (const auto& s : trace.steps) e = apply_rule(s.rule, e, s.at);
  return e;
}

std::string ReductionTrace::str() const {
  std::ostringstream out;
  auto check = [&](const InclusionCheck& c) {
    out << "  query " << c.query << "\n";
    if (!c.error.empty()) {
      out << "  undecided: " << c.error << "\n";
      return;
    }
    std::string region = c.region.str(c.system.names(VarRole::Parameter));
    for (char& ch : region)
      if (ch == '\n') ch = ';';
    out << "  region " << region << "\n";
  };
  for (const auto& s : steps) {
    out << s.rule << ": " << s.before.str() << "  ->  " << s.after.str() << "\n";
    for (const auto& c : s.checks) check(c);
  }
  for (const auto& c : rejected) {
    out << "blocked:\n";
    check(c);
  }
  return out.str();
}

AxiomOrder order_axioms(const Theory& th) {
  auto names = th.axiom_names();
  std::size_t n = names.size();
  // before[i][j]: i should come before j
  std::vector<std::vector<bool>> before(n, std::vector<bool>(n, false));
  auto linear = [&](const std::string& x, const std::string& y) {
    try {
      sigma(th, build_scheme({x, y}));
      return true;
    } catch (const Error&) {
      return false;
    }
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (test_commutation(th, names[i], names[j])) continue;
      bool ij = linear(names[i], names[j]);
      bool ji = linear(names[j], names[i]);
      if (ij && !ji) before[i][j] = true;
      if (ji && !ij) before[j][i] = true;
    }
  AxiomOrder out;
  auto tie = [&](std::size_t a, std::size_t b) { return !before[a][b] && !before[b][a]; };
  for (std::size_t a = 0; a < n && out.weak; ++a)
    for (std::size_t b = 0; b < n && out.weak; ++b)
      for (std::size_t c = 0; c < n && out.weak; ++c)
        if (a != b && b != c && a != c && tie(a, b) && tie(b, c) && !tie(a, c)) {
          out.weak = false;
          out.warning = "axiom order is not a weak order (" + names[a] + ", " + names[b] + ", " + names[c] +
                        "); falling back to declaration order where it conflicts";
        }
  std::vector<bool> placed(n, false);
  for (std::size_t round = 0; round < n; ++round) {
    std::size_t pick = n;
    for (std::size_t k = 0; k < n && pick == n; ++k) {
      if (placed[k]) continue;
      bool ready = true;
      for (std::size_t p = 0; p < n; ++p)
        if (!placed[p] && p != k && before[p][k]) ready = false;
      if (ready) pick = k;
    }
    if (pick == n) {  // cycle
      if (out.weak) {
        out.weak = false;
        out.warning = "axiom order has a cycle; falling back to declaration order";
      }
      for (std::size_t k = 0; k < n && pick == n; ++k)
        if (!placed[k]) pick = k;
    }
    placed[pick] = true;
    out.order.push_back(names[pick]);
  }
  return out;
}

}  // namespace tpc
