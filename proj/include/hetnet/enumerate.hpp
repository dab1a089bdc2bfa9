#pragma once

// Exhaustive enumeration of capacity-feasible associations, shared by the
// brute-force oracles. Rows are visited in user order; within a row the
// choices are visited in increasing lexicographic order of the row of x:
// "unassigned" (all zeros) first, then BS J-1 down to BS 0.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hetnet/assignment.hpp"

namespace hetnet {

inline constexpr std::size_t kMaxOracleUsers = 10;
inline constexpr std::size_t kMaxOracleBss = 4;

class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

inline void check_oracle_size(std::size_t users, std::size_t bss) {
  if (users > kMaxOracleUsers || bss > kMaxOracleBss)
    throw SizeError("oracle enumeration limited to K <= " + std::to_string(kMaxOracleUsers) +
                    " and J <= " + std::to_string(kMaxOracleBss));
}

namespace detail {

/// Calls `visit(choices)` for every feasible vector of row choices, where
/// choices[k] is the BS of user k or nullopt. Visit order is lexicographic in x.
template <typename Visit>
void enumerate_assignments(std::size_t users, std::size_t bss, const std::vector<int>& capacities,
                           const Mask& allowed, AssociationMode mode, Visit&& visit) {
  std::vector<std::optional<std::size_t>> choices(users);
  std::vector<int> residual = capacities;
  auto recurse = [&](auto&& self, std::size_t k) -> void {
    if (k == users) {
      visit(std::as_const(choices));
      return;
    }
    if (mode == AssociationMode::optional) {
      choices[k].reset();
      self(self, k + 1);
    }
    for (std::size_t jj = bss; jj-- > 0;) {
      if (!allowed(k, jj) || residual[jj] == 0) continue;
      --residual[jj];
      choices[k] = jj;
      self(self, k + 1);
      ++residual[jj];
    }
    choices[k].reset();
  };
  recurse(recurse, 0);
}

inline Assignment to_assignment(const std::vector<std::optional<std::size_t>>& choices, std::size_t bss) {
  Assignment a(choices.size(), bss);
  for (std::size_t k = 0; k < choices.size(); ++k)
    if (choices[k]) a.assign(k, *choices[k]);
  return a;
}

}  // namespace detail
}  // namespace hetnet
