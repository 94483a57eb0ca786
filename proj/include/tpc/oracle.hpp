#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "tpc/term.hpp"

namespace tpc {

// Bounds for the exhaustive breadth-first search. Trees larger than
// max_tree_size are pruned; exceeding max_frontier raises BudgetExceeded.
struct SearchBudget {
  std::size_t max_depth = 8;
  std::size_t max_tree_size = 64;
  std::size_t max_frontier = 1'000'000;
};

// All trees reachable from `from` by at most max_depth root applications,
// in canonical order.
std::vector<Term> reachable_set(const Theory& th, const Term& from, const SearchBudget& b);

bool decide_oracle(const Theory& th, const Term& t, const Term& d, const SearchBudget& b);

// Shortest proof from th.start; ties resolved by axiom declaration order.
std::optional<Proof> find_proof(const Theory& th, const Term& goal, const SearchBudget& b);

}  // namespace tpc
