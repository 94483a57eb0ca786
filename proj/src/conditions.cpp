#include <algorithm>
#include <set>
#include <sstream>

#include "tpc/error.hpp"
#include "tpc/math.hpp"

namespace tpc {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// "m[1]-1 >= 0" printed as "m[1] >= 1": positive terms left, the rest right.
std::string ineq_str(const AffineExpr& e) {
  AffineExpr left, right(-e.constant());
  for (const auto& [r, c] : e.terms()) {
    if (c > 0)
      left = left + AffineExpr::ref(r, c);
    else
      right = right + AffineExpr::ref(r, -c);
  }
  return left.str() + " >= " + right.str();
}

Int floor_mod(Int a, Int q) {
  Int r = a % q;
  return r < 0 ? r + q : r;
}

void collect_roots(const AffineExpr& e, std::set<std::string>& out) {
  std::set<Ref> refs;
  e.collect_refs(refs, true);
  for (const auto& r : refs) out.insert(r.root);
}

}  // namespace

std::string Equation::str() const { return lhs.str() + " = " + rhs.str(); }

std::string Congruence::str() const {
  std::string e = expr.str();
  bool bare = expr.terms().size() == 1 && expr.constant() == 0 && expr.terms()[0].second == 1;
  if (!bare) e = "(" + e + ")";
  return e + " mod " + std::to_string(modulus) + " = " + std::to_string(residue);
}

std::string Family::str() const {
  return eq.str() + ", for " + var + " = " + lower.str() + ".." + upper.str();
}

ConditionSystem ConditionSystem::unsat(std::string why) {
  ConditionSystem s;
  s.contradiction = true;
  s.why = std::move(why);
  return s;
}

void ConditionSystem::declare(const std::string& name, VarRole role, VarKind kind) {
  if (!find(name)) vars.push_back(VarDecl{name, role, kind});
}

const VarDecl* ConditionSystem::find(const std::string& name) const {
  for (const auto& v : vars)
    if (v.name == name) return &v;
  return nullptr;
}

std::vector<std::string> ConditionSystem::names(VarRole role) const {
  std::vector<std::string> out;
  for (const auto& v : vars)
    if (v.role == role) out.push_back(v.name);
  return out;
}

void ConditionSystem::validate() const {
  std::set<std::string> declared;
  for (const auto& v : vars)
    if (!declared.insert(v.name).second) throw Error("variable '" + v.name + "' declared twice");
  auto check = [&](const std::set<std::string>& roots, const std::string& bound) {
    for (const auto& r : roots)
      if (r != bound && !declared.count(r)) throw Error("undeclared variable '" + r + "'");
  };
  std::set<std::string> roots;
  for (const auto& e : equations) {
    collect_roots(e.lhs, roots);
    collect_roots(e.rhs, roots);
  }
  for (const auto& e : inequalities) collect_roots(e, roots);
  for (const auto& c : congruences) collect_roots(c.expr, roots);
  check(roots, "");
  for (const auto& f : families) {
    std::set<std::string> fr;
    collect_roots(f.eq.lhs, fr);
    collect_roots(f.eq.rhs, fr);
    check(fr, f.var);
    std::set<std::string> br;
    collect_roots(f.lower, br);
    collect_roots(f.upper, br);
    check(br, "");
  }
}

bool ConditionSystem::holds(const Env& env) const {
  if (contradiction) return false;
  auto look = env.lookup();
  for (const auto& e : equations) {
    auto v = evaluate(e.diff(), look);
    if (!v || *v != 0) return false;
  }
  for (const auto& e : inequalities) {
    auto v = evaluate(e, look);
    if (!v || *v < 0) return false;
  }
  for (const auto& c : congruences) {
    auto v = evaluate(c.expr, look);
    if (!v || floor_mod(*v, c.modulus) != c.residue) return false;
  }
  for (const auto& f : families) {
    auto lo = evaluate(f.lower, look);
    auto hi = evaluate(f.upper, look);
    if (!lo || !hi) return false;
    Env inner = env;
    for (Int i = *lo; i <= *hi; ++i) {
      inner.scalars[f.var] = i;
      auto v = evaluate(f.eq.diff(), inner.lookup());
      if (!v || *v != 0) return false;
    }
  }
  return true;
}

std::string ConditionSystem::str() const {
  std::ostringstream out;
  for (const auto& v : vars) {
    out << (v.role == VarRole::Parameter ? "param " : "exists ") << v.name;
    if (v.kind == VarKind::MultiIndex) out << " : M";
    out << "\n";
  }
  if (contradiction) {
    out << "false";
    if (!why.empty()) out << "  # " << why;
    out << "\n";
    return out.str();
  }
  for (const auto& e : equations) out << e.str() << "\n";
  for (const auto& e : inequalities) out << ineq_str(e) << "\n";
  for (const auto& c : congruences) out << c.str() << "\n";
  for (const auto& f : families) out << f.str() << "\n";
  return out.str();
}

ConditionSystem parse_system(std::string_view text) {
  ConditionSystem sys;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    try {
      auto decl = [&](std::string_view rest, VarRole role) {
        std::string body = trim(rest);
        VarKind kind = VarKind::Scalar;
        if (auto c = body.find(':'); c != std::string::npos) {
          if (trim(body.substr(c + 1)) != "M") throw SyntaxError(line_no, c + 1, "expected ': M'");
          kind = VarKind::MultiIndex;
          body = trim(body.substr(0, c));
        }
        std::istringstream names(body);
        std::string name;
        while (std::getline(names, name, ',')) {
          name = trim(name);
          if (name.empty()) throw SyntaxError(line_no, 1, "empty variable name");
          if (sys.find(name)) throw Error("variable '" + name + "' declared twice");
          sys.vars.push_back(VarDecl{name, role, kind});
        }
      };
      if (line.rfind("param ", 0) == 0) {
        decl(std::string_view(line).substr(6), VarRole::Parameter);
        continue;
      }
      if (line.rfind("exists ", 0) == 0) {
        decl(std::string_view(line).substr(7), VarRole::Existential);
        continue;
      }
      if (line == "false") {
        sys.contradiction = true;
        if (auto h = raw.find('#'); h != std::string::npos) sys.why = trim(std::string_view(raw).substr(h + 1));
        continue;
      }
      auto equation = [&](const std::string& s) {
        auto eq = s.find('=');
        if (eq == std::string::npos) throw SyntaxError(line_no, 1, "expected '='");
        return Equation{parse_affine(trim(s.substr(0, eq))), parse_affine(trim(s.substr(eq + 1)))};
      };
      if (auto f = line.find(", for "); f != std::string::npos) {
        std::string range = trim(line.substr(f + 6));
        auto eq = range.find('=');
        auto dots = range.find("..");
        if (eq == std::string::npos || dots == std::string::npos || dots < eq)
          throw SyntaxError(line_no, f + 1, "expected 'for i = lo..hi'");
        Family fam;
        fam.var = trim(range.substr(0, eq));
        fam.lower = parse_affine(trim(range.substr(eq + 1, dots - eq - 1)));
        fam.upper = parse_affine(trim(range.substr(dots + 2)));
        fam.eq = equation(line.substr(0, f));
        sys.families.push_back(std::move(fam));
        continue;
      }
      if (auto m = line.find(" mod "); m != std::string::npos) {
        Equation rest = equation(line.substr(m + 5));
        if (!rest.lhs.is_constant() || !rest.rhs.is_constant() || rest.lhs.constant() < 2)
          throw SyntaxError(line_no, m + 1, "expected 'E mod q = r'");
        Int q = rest.lhs.constant();
        sys.congruences.push_back(Congruence{parse_affine(trim(line.substr(0, m))), floor_mod(rest.rhs.constant(), q), q});
        continue;
      }
      std::size_t ge = line.find(">="), le = line.find("<=");
      std::size_t width = 2;
      if (ge == std::string::npos && le == std::string::npos) {
        ge = line.find("≥");
        le = line.find("≤");
        width = std::string("≥").size();
      }
      if (ge != std::string::npos) {
        sys.inequalities.push_back(parse_affine(trim(line.substr(0, ge))) - parse_affine(trim(line.substr(ge + width))));
        continue;
      }
      if (le != std::string::npos) {
        sys.inequalities.push_back(parse_affine(trim(line.substr(le + width))) - parse_affine(trim(line.substr(0, le))));
        continue;
      }
      sys.equations.push_back(equation(line));
    } catch (const SyntaxError& e) {
      if (e.line() == line_no) throw;
      std::string msg = e.what();
      if (auto c = msg.find(": "); c != std::string::npos) msg.erase(0, c + 2);
      throw SyntaxError(line_no, e.column(), msg);
    }
  }
  return sys;
}

Region Region::unsat(std::string why) {
  Region r;
  r.empty = true;
  if (!why.empty()) r.trace.push_back(std::move(why));
  return r;
}

bool Region::contains(const Lookup& lookup) const {
  if (empty) return false;
  for (const auto& e : inequalities) {
    auto v = evaluate(e, lookup);
    if (!v || *v < 0) return false;
  }
  for (const auto& c : congruences) {
    auto v = evaluate(c.expr, lookup);
    if (!v || floor_mod(*v, c.modulus) != c.residue) return false;
  }
  return true;
}

std::string Region::str(const std::vector<std::string>& params) const {
  if (empty) return "none";
  if (universal_p()) {
    std::string s = "all";
    for (std::size_t k = 0; k < params.size(); ++k) s += (k ? ", " : " ") + params[k];
    return s;
  }
  std::string out;
  for (const auto& e : inequalities) out += (out.empty() ? "" : "\n") + ineq_str(e);
  for (const auto& c : congruences) out += (out.empty() ? "" : "\n") + c.str();
  return out;
}

std::string SolvedEntry::str() const {
  std::string s = target.str() + " = " + value.str();
  if (var) s += ", for " + *var + " = " + lower.str() + ".." + upper.str();
  return s;
}

}  // namespace tpc
