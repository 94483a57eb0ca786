#pragma once

#include <random>
#include <string>
#include <vector>

#include "tpc/oracle.hpp"
#include "tpc/scheme.hpp"
#include "tpc/term.hpp"

namespace tpc::testing {

inline Theory theory(const std::string& name) { return load_theory(std::string(TPC_THEORY_DIR) + "/" + name + ".tpc"); }

inline Term T(const std::string& s) { return parse_term(s); }

// F(F(...F(base)))
inline Term tower(const std::string& f, std::size_t n, Term base) {
  for (std::size_t k = 0; k < n; ++k) base = Term::app(f, {base});
  return base;
}

// Result of running the specific expression from t, or nothing.
inline std::optional<Term> run(const Theory& th, const Term& t, const std::vector<std::string>& steps) {
  auto r = replay(th, t, steps);
  if (auto* out = std::get_if<Term>(&r)) return *out;
  return std::nullopt;
}

// All ground trees over the given signature (name, arity) up to size.
inline std::vector<Term> trees_up_to(const std::vector<std::pair<std::string, std::size_t>>& sig, std::size_t size) {
  std::vector<std::vector<Term>> by_size(size + 1);
  for (std::size_t s = 1; s <= size; ++s) {
    for (const auto& [f, ar] : sig) {
      if (ar == 0) {
        if (s == 1) by_size[1].push_back(Term::app(f));
        continue;
      }
      // distribute s-1 nodes over ar children
      std::vector<Term> kids;
      auto rec = [&](auto&& self, std::size_t k, std::size_t left) -> void {
        if (k == ar) {
          if (left == 0) by_size[s].push_back(Term::app(f, kids));
          return;
        }
        for (std::size_t c = 1; c <= left; ++c)
          for (const auto& t : by_size[c]) {
            kids.push_back(t);
            self(self, k + 1, left - c);
            kids.pop_back();
          }
      };
      rec(rec, 0, s - 1);
    }
  }
  std::vector<Term> out;
  for (auto& v : by_size)
    for (auto& t : v) out.push_back(t);
  return out;
}

}  // namespace tpc::testing
