#include "tpc/oracle.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace tpc {

namespace {

void check_frontier(std::size_t n, const SearchBudget& b) {
  if (n > b.max_frontier)
    throw BudgetExceeded("search frontier exceeded " + std::to_string(b.max_frontier) + " trees");
}

}  // namespace

std::vector<Term> reachable_set(const Theory& th, const Term& from, const SearchBudget& b) {
  std::unordered_set<Term, TermHash> seen{from};
  std::vector<Term> frontier{from};
  for (std::size_t depth = 0; depth < b.max_depth && !frontier.empty(); ++depth) {
    std::vector<Term> next;
    for (const auto& t : frontier) {
      for (const auto& ax : th.axioms) {
        auto d = apply_clause(ax, t);
        if (!d || d->size() > b.max_tree_size) continue;
        if (seen.insert(*d).second) next.push_back(*d);
      }
      check_frontier(next.size(), b);
    }
    frontier = std::move(next);
  }
  std::vector<Term> out(seen.begin(), seen.end());
  std::sort(out.begin(), out.end());
  return out;
}

bool decide_oracle(const Theory& th, const Term& t, const Term& d, const SearchBudget& b) {
  if (t == d) return true;
  auto all = reachable_set(th, t, b);
  return std::binary_search(all.begin(), all.end(), d);
}

std::optional<Proof> find_proof(const Theory& th, const Term& goal, const SearchBudget& b) {
  // parent[child] = (parent tree, axiom index); first discovery wins, and
  // frontier/axiom order makes that the lexicographically least shortest proof.
  struct Edge {
    Term parent;
    std::size_t axiom;
  };
  std::unordered_map<Term, std::optional<Edge>, TermHash> parent;
  parent.emplace(th.start, std::nullopt);
  auto build = [&](const Term& end) {
    Proof p;
    Term cur = end;
    while (auto e = parent.at(cur)) {
      p.steps.push_back(th.axioms[e->axiom].name);
      cur = e->parent;
    }
    std::reverse(p.steps.begin(), p.steps.end());
    return p;
  };
  if (th.start == goal) return Proof{};
  std::vector<Term> frontier{th.start};
  for (std::size_t depth = 0; depth < b.max_depth && !frontier.empty(); ++depth) {
    std::vector<Term> next;
    for (const auto& t : frontier) {
      for (std::size_t i = 0; i < th.axioms.size(); ++i) {
        auto d = apply_clause(th.axioms[i], t);
        if (!d || d->size() > b.max_tree_size) continue;
        if (!parent.emplace(*d, Edge{t, i}).second) continue;
        if (*d == goal) return build(*d);
        next.push_back(*d);
      }
      check_frontier(next.size(), b);
    }
    frontier = std::move(next);
  }
  return std::nullopt;
}

}  // namespace tpc
