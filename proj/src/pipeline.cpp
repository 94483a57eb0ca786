#include "tpc/pipeline.hpp"

#include <exception>
#include <set>

#include "tpc/error.hpp"

namespace tpc {

namespace {

// Goals near d that are unlikely to be reachable: children swapped, one leaf
// relabelled.
void perturb(const Term& d, const std::vector<std::string>& leaves, std::vector<Term>& out) {
  if (d.is_var()) return;
  std::vector<Term> kids(d.children().begin(), d.children().end());
  if (kids.empty()) {
    for (const auto& l : leaves)
      if (l != d.name()) out.push_back(Term::app(l));
    return;
  }
  if (kids.size() == 2 && !(kids[0] == kids[1])) out.push_back(Term::app(d.name(), {kids[1], kids[0]}));
  for (std::size_t k = 0; k < kids.size(); ++k) {
    std::vector<Term> sub;
    perturb(kids[k], leaves, sub);
    for (auto& s : sub) {
      auto copy = kids;
      copy[k] = s;
      out.push_back(Term::app(d.name(), copy));
    }
  }
}

void leaves_of(const Term& t, std::set<std::string>& out) {
  if (t.is_var()) return;
  if (t.arity() == 0) out.insert(t.name());
  for (const auto& c : t.children()) leaves_of(c, out);
}

template <class E>
[[noreturn]] void rethrow_with(const E& e, const std::string& where) {
  throw E(where + ": " + e.what());
}

}  // namespace

bool DecisionProcedure::decide(const Term& d) const { return tpc::decide(charfn, theory.start, d); }

std::optional<Proof> DecisionProcedure::prove(const Term& d) const {
  return extract_proof(charfn, theory, theory.start, d);
}

DecisionProcedure pipeline(const Theory& th, const PipelineOptions& opt) {
  DecisionProcedure dp;
  dp.theory = th;
  dp.order = order_axioms(th);

  IterExpr current = IterExpr::eps();
  for (const auto& x : dp.order.order) {
    Stage s;
    s.axiom = x;
    auto ax = IterExpr::axiom(x);
    s.built = current.kind() == IterExpr::Kind::Eps
                  ? IterExpr::star(ax)
                  : IterExpr::dot({IterExpr::star(IterExpr::dot({current, ax})), current});
    s.reduced = reduce_scheme(th, s.built);
    current = s.reduced.scheme;
    for (const auto& step : s.reduced.trace.steps) dp.trace.steps.push_back(step);
    for (const auto& r : s.reduced.trace.rejected) dp.trace.rejected.push_back(r);
    dp.stages.push_back(std::move(s));
  }
  dp.reduced_scheme = current;

  try {
    dp.charfn = sigma(th, current);
  } catch (const Error& first) {
    // the reduced form can leave alternatives under a star; the plain
    // scheme may still go through
    IterExpr plain = build_scheme(dp.order.order);
    try {
      if (plain == current) throw;
      dp.charfn = sigma(th, plain);
      dp.reduced_scheme = plain;
    } catch (const Error&) {
      // report the first stage that no longer goes through, with its own error
      std::string where = "scheme " + current.str();
      std::exception_ptr cause = std::current_exception();
      for (const auto& s : dp.stages) {
        try {
          sigma(th, s.reduced.scheme);
        } catch (const Error&) {
          where = "after adding " + s.axiom + ", scheme " + s.reduced.scheme.str();
          cause = std::current_exception();
          break;
        }
      }
      try {
        std::rethrow_exception(cause);
      } catch (const NotLinearizable& e) {
        rethrow_with(e, where);
      } catch (const Unsupported& e) {
        rethrow_with(e, where);
      } catch (const NoCompose& e) {
        rethrow_with(e, where);
      }
    }
  }

  if (!opt.selfcheck) return dp;
  dp.check.ran = true;
  auto members = reachable_set(th, th.start, SearchBudget{opt.check_depth, opt.check_size, 1'000'000});
  std::set<Term> in(members.begin(), members.end());
  std::set<std::string> leaves;
  for (const auto& m : members) {
    leaves_of(m, leaves);
    if (!dp.decide(m)) throw InternalMismatch("self-check: " + m.str() + " is reachable but was rejected");
    ++dp.check.members;
  }
  std::vector<std::string> leaf_list(leaves.begin(), leaves.end());
  std::set<Term> seen;
  for (const auto& m : members) {
    std::vector<Term> near;
    perturb(m, leaf_list, near);
    for (const auto& d : near) {
      if (in.count(d) || d.size() > opt.check_size || !seen.insert(d).second) continue;
      ++dp.check.others;
      if (!dp.decide(d)) continue;
      // a positive answer must come with a proof
      auto p = dp.prove(d);
      if (!p) throw InternalMismatch("self-check: " + d.str() + " accepted without a proof");
    }
  }
  return dp;
}

}  // namespace tpc
