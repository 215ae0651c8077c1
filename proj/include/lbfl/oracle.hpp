#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "lbfl/core.hpp"
#include "lbfl/flow.hpp"

namespace lbfl {

struct OracleConfig {
  int max_facilities = 16;  // refuse larger instances rather than truncate
};

struct OracleResult {
  CostBreakdown cost;
  std::vector<int> open;        // lexicographically smallest optimum on ties
  std::vector<int> assignment;  // client -> facility
  std::uint64_t subsets_tried = 0;
};

namespace detail {

inline bool lex_less(const std::vector<int>& a, const std::vector<int>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Gray-code walk over all subsets; toggles one element per step so the
// opening-cost sum can be maintained incrementally.
template <typename Visit>
void for_each_subset(int n, const Visit& visit) {
  std::vector<char> in_set(n, 0);
  std::vector<int> members;
  visit(members);  // empty set
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t it = 1; it < count; ++it) {
    const int bit = std::countr_zero(it);
    in_set[bit] ^= 1;
    members.clear();
    for (int i = 0; i < n; ++i) {
      if (in_set[i]) members.push_back(i);
    }
    visit(members);
  }
}

}  // namespace detail

/// Exhaustive LBFL optimum: min over nonempty open sets S with M|S| <= |D|
/// of opening cost plus the lower-bounded assignment cost.
inline OracleResult exact_lbfl(const LbflInstance& inst, const OracleConfig& config = {}) {
  if (inst.num_facilities() > config.max_facilities) {
    throw SizeLimitError("exact_lbfl: " + std::to_string(inst.num_facilities()) +
                         " facilities exceed the cap of " + std::to_string(config.max_facilities));
  }
  if (inst.num_clients() < inst.lower_bound()) {
    throw InfeasibleError("exact_lbfl: fewer clients than the lower bound");
  }
  OracleResult best;
  bool found = false;
  detail::for_each_subset(inst.num_facilities(), [&](const std::vector<int>& open) {
    if (open.empty()) return;
    if (inst.lower_bound() * static_cast<std::int64_t>(open.size()) > inst.num_clients()) return;
    ++best.subsets_tried;
    double facility = 0.0;
    for (int i : open) facility += inst.opening_cost(i);
    if (found && facility > best.cost.total + kTolerance) return;  // cannot win
    const auto assigned = assign_lower_bounded(inst, open);
    const double total = facility + assigned.cost;
    const bool better = !found || total < best.cost.total - kTolerance;
    const bool tie = found && std::abs(total - best.cost.total) <= kTolerance &&
                     detail::lex_less(open, best.open);
    if (better || tie) {
      found = true;
      best.cost = {facility, assigned.cost, total};
      best.open = open;
      best.assignment = to_assignment_vector(assigned.assignment, inst.num_clients());
    }
  });
  if (!found) throw InfeasibleError("exact_lbfl: no feasible open set");
  return best;
}

/// Exhaustive UFL optimum with nearest-open-facility assignment.
inline OracleResult exact_ufl(const UflInstance& inst, const OracleConfig& config = {}) {
  if (inst.num_facilities() > config.max_facilities) {
    throw SizeLimitError("exact_ufl: " + std::to_string(inst.num_facilities()) +
                         " facilities exceed the cap of " + std::to_string(config.max_facilities));
  }
  OracleResult best;
  bool found = false;
  detail::for_each_subset(inst.num_facilities(), [&](const std::vector<int>& open) {
    if (open.empty()) return;
    ++best.subsets_tried;
    double facility = 0.0;
    for (int i : open) facility += inst.opening_cost(i);
    if (found && facility > best.cost.total + kTolerance) return;
    double assign_cost = 0.0;
    for (int j = 0; j < inst.num_clients(); ++j) {
      double nearest = inst.facility_client(open.front(), j);
      for (int i : open) nearest = std::min(nearest, inst.facility_client(i, j));
      assign_cost += nearest;
    }
    const double total = facility + assign_cost;
    const bool better = !found || total < best.cost.total - kTolerance;
    const bool tie = found && std::abs(total - best.cost.total) <= kTolerance &&
                     detail::lex_less(open, best.open);
    if (better || tie) {
      found = true;
      best.cost = {facility, assign_cost, total};
      best.open = open;
      best.assignment = assign_nearest(inst, open);
    }
  });
  if (!found) throw InfeasibleError("exact_ufl: no facilities");
  return best;
}

struct CduflOracleResult {
  double facility_cost = 0.0;
  double assignment_cost = 0.0;
  double total = 0.0;
  std::vector<int> open_uncap;
  Assignment assignment;
  std::uint64_t subsets_tried = 0;
};

/// Exhaustive CDUFL optimum over subsets of the uncapacitated points; the
/// capacitated points are always available at zero cost.
inline CduflOracleResult exact_cdufl(const CduflInstance& inst, const OracleConfig& config = {}) {
  if (inst.num_uncap() > config.max_facilities) {
    throw SizeLimitError("exact_cdufl: " + std::to_string(inst.num_uncap()) +
                         " uncapacitated points exceed the cap of " +
                         std::to_string(config.max_facilities));
  }
  const std::int64_t demand = inst.total_demand();
  CduflOracleResult best;
  bool found = false;
  detail::for_each_subset(inst.num_uncap(), [&](const std::vector<int>& open) {
    if (open.empty() && inst.total_capacity() < demand) return;
    ++best.subsets_tried;
    double facility = 0.0;
    for (int u : open) facility += inst.uncap()[u].opening_cost;
    if (found && facility > best.total + kTolerance) return;
    const auto assigned = cdufl_best_assignment(inst, open);
    const double total = facility + assigned.cost;
    const bool better = !found || total < best.total - kTolerance;
    const bool tie = found && std::abs(total - best.total) <= kTolerance &&
                     detail::lex_less(open, best.open_uncap);
    if (better || tie) {
      found = true;
      best.facility_cost = facility;
      best.assignment_cost = assigned.cost;
      best.total = total;
      best.open_uncap = open;
      best.assignment = assigned.assignment;
    }
  });
  if (!found) throw InfeasibleError("exact_cdufl: infeasible instance");
  return best;
}

}  // namespace lbfl
