#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "lbfl/core.hpp"
#include "lbfl/flow.hpp"

namespace lbfl {

struct LocalSearchConfig {
  double epsilon_ls = 1e-6;   // relative improvement threshold
  double sigma = 1.0;         // facility-cost scaling applied during the search
  int max_iterations = 100000;
};

struct Move {
  enum class Kind { Add, Drop, Swap };
  Kind kind;
  int drop = -1;  // open facility leaving (Drop/Swap)
  int add = -1;   // closed facility entering (Add/Swap)
};

namespace detail {

// Best-improvement descent over add/drop/swap with scaled facility costs.
// `price` returns the assignment cost of an open set, or nullopt when the
// set is infeasible. Moves are accepted while they improve the scaled cost
// by at least epsilon_ls * current / num_candidates.
template <typename PriceFn>
std::vector<int> descend(int num_candidates, const std::vector<double>& scaled_cost,
                         std::vector<int> open, const LocalSearchConfig& config,
                         const PriceFn& price, bool allow_empty) {
  std::vector<char> is_open(num_candidates, 0);
  for (int i : open) is_open[i] = 1;
  double facility_total = 0.0;
  for (int i : open) facility_total += scaled_cost[i];
  auto priced = price(open);
  if (!priced) throw InfeasibleError("local search: initial open set is infeasible");
  double current = facility_total + *priced;

  auto apply = [&](const Move& m) {
    if (m.drop >= 0) {
      is_open[m.drop] = 0;
      facility_total -= scaled_cost[m.drop];
    }
    if (m.add >= 0) {
      is_open[m.add] = 1;
      facility_total += scaled_cost[m.add];
    }
    open.clear();
    for (int i = 0; i < num_candidates; ++i) {
      if (is_open[i]) open.push_back(i);
    }
  };

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    const double threshold =
        config.epsilon_ls * std::abs(current) / std::max(1, num_candidates);
    std::optional<Move> best;
    double best_cost = current;

    auto consider = [&](const Move& m) {
      std::vector<int> candidate;
      candidate.reserve(open.size() + 1);
      for (int i : open) {
        if (i != m.drop) candidate.push_back(i);
      }
      if (m.add >= 0) {
        candidate.insert(std::lower_bound(candidate.begin(), candidate.end(), m.add), m.add);
      }
      if (candidate.empty() && !allow_empty) return;
      const auto assignment_cost = price(candidate);
      if (!assignment_cost) return;
      double total = facility_total + *assignment_cost;
      if (m.drop >= 0) total -= scaled_cost[m.drop];
      if (m.add >= 0) total += scaled_cost[m.add];
      // Strictly better than the incumbent move; move ordering breaks ties.
      if (total < best_cost - 1e-15 && current - total >= threshold) {
        best = m;
        best_cost = total;
      }
    };

    for (int i = 0; i < num_candidates; ++i) {
      if (!is_open[i]) consider({Move::Kind::Add, -1, i});
    }
    for (int i : open) consider({Move::Kind::Drop, i, -1});
    for (int i : open) {
      for (int j = 0; j < num_candidates; ++j) {
        if (!is_open[j]) consider({Move::Kind::Swap, i, j});
      }
    }

    if (!best) break;
    apply(*best);
    current = best_cost;
  }
  return open;
}

}  // namespace detail

/// Add/drop/swap local search for UFL with facility costs scaled by
/// config.sigma during the search. The returned assignment is
/// nearest-open-facility under the true distances.
inline UflSolution ufl_local_search(const UflInstance& inst, const LocalSearchConfig& config = {}) {
  if (inst.num_facilities() == 0) throw std::invalid_argument("ufl_local_search: no facilities");
  std::vector<double> scaled(inst.num_facilities());
  for (int i = 0; i < inst.num_facilities(); ++i) scaled[i] = config.sigma * inst.opening_cost(i);

  auto price = [&](const std::vector<int>& open) -> std::optional<double> {
    if (open.empty()) return std::nullopt;
    double total = 0.0;
    for (int j = 0; j < inst.num_clients(); ++j) {
      double best = inst.facility_client(open.front(), j);
      for (int i : open) best = std::min(best, inst.facility_client(i, j));
      total += best;
    }
    return total;
  };

  std::vector<int> open(inst.num_facilities());
  for (int i = 0; i < inst.num_facilities(); ++i) open[i] = i;
  open = detail::descend(inst.num_facilities(), scaled, std::move(open), config, price,
                         /*allow_empty=*/false);
  UflSolution sol;
  sol.open = std::move(open);
  sol.assignment = assign_nearest(inst, sol.open);
  return sol;
}

/// True iff no single add/drop/swap improves the sigma-scaled cost by more
/// than the epsilon_ls threshold. Used as the termination certificate.
inline bool ufl_is_local_optimum(const UflInstance& inst, const std::vector<int>& open,
                                 const LocalSearchConfig& config = {}) {
  LocalSearchConfig probe = config;
  probe.max_iterations = 1;
  std::vector<int> after = open;
  std::vector<double> scaled(inst.num_facilities());
  for (int i = 0; i < inst.num_facilities(); ++i) scaled[i] = config.sigma * inst.opening_cost(i);
  auto price = [&](const std::vector<int>& o) -> std::optional<double> {
    if (o.empty()) return std::nullopt;
    double total = 0.0;
    for (int j = 0; j < inst.num_clients(); ++j) {
      double best = inst.facility_client(o.front(), j);
      for (int i : o) best = std::min(best, inst.facility_client(i, j));
      total += best;
    }
    return total;
  };
  after = detail::descend(inst.num_facilities(), scaled, after, probe, price, false);
  return after == open;
}

/// Executes every strictly improving single-facility deletion (with
/// nearest-facility reassignment) until none remains. Never increases cost;
/// the last facility is never dropped.
inline UflSolution make_delete_optimal(const UflInstance& inst, UflSolution sol) {
  auto assignment_cost = [&](const std::vector<int>& open) {
    double total = 0.0;
    for (int j = 0; j < inst.num_clients(); ++j) {
      double best = inst.facility_client(open.front(), j);
      for (int i : open) best = std::min(best, inst.facility_client(i, j));
      total += best;
    }
    return total;
  };
  double facility_total = 0.0;
  for (int i : sol.open) facility_total += inst.opening_cost(i);
  double current = facility_total + assignment_cost(sol.open);

  while (sol.open.size() > 1) {
    int best_drop = -1;
    double best_total = current;
    for (int i : sol.open) {
      std::vector<int> candidate;
      candidate.reserve(sol.open.size() - 1);
      for (int k : sol.open) {
        if (k != i) candidate.push_back(k);
      }
      const double total = facility_total - inst.opening_cost(i) + assignment_cost(candidate);
      if (total < best_total - 1e-15) {
        best_total = total;
        best_drop = i;
      }
    }
    if (best_drop < 0) break;
    facility_total -= inst.opening_cost(best_drop);
    sol.open.erase(std::find(sol.open.begin(), sol.open.end(), best_drop));
    current = best_total;
  }
  sol.assignment = assign_nearest(inst, sol.open);
  return sol;
}

/// CDUFL solution: which uncapacitated supply points are open plus the
/// flow-derived shipment plan. Costs are unscaled.
struct CduflSolution {
  std::vector<int> open_uncap;     // sorted indices into instance.uncap()
  Assignment assignment;           // (global supplier, demand point) -> units
  double facility_cost = 0.0;      // F^S
  double assignment_cost = 0.0;    // C^S
  std::vector<double> supplier_cost;  // C^S_i per global supplier
};

namespace detail {

inline CduflSolution finish_cdufl_solution(const CduflInstance& inst, std::vector<int> open,
                                           AssignResult assigned) {
  CduflSolution sol;
  sol.open_uncap = std::move(open);
  sol.assignment = std::move(assigned.assignment);
  sol.assignment_cost = assigned.cost;
  for (int u : sol.open_uncap) sol.facility_cost += inst.uncap()[u].opening_cost;
  sol.supplier_cost.assign(inst.num_suppliers(), 0.0);
  for (const auto& e : sol.assignment.entries()) {
    sol.supplier_cost[e.supplier] +=
        static_cast<double>(e.units) * inst.supplier_demand_dist(e.supplier, e.receiver);
  }
  return sol;
}

}  // namespace detail

/// Add/drop/swap local search over the uncapacitated supply points of a
/// CDUFL instance. Capacitated points carry no opening cost and are always
/// usable; the client assignment for every candidate open set is recomputed
/// exactly via a min-cost flow.
inline CduflSolution cdufl_local_search(const CduflInstance& inst,
                                        const LocalSearchConfig& config = {}) {
  const std::int64_t demand = inst.total_demand();
  if (inst.num_uncap() == 0 && inst.total_capacity() < demand) {
    throw InfeasibleError("cdufl_local_search: instance is infeasible for every open set");
  }
  std::vector<double> scaled(inst.num_uncap());
  for (int u = 0; u < inst.num_uncap(); ++u) {
    scaled[u] = config.sigma * inst.uncap()[u].opening_cost;
  }
  auto price = [&](const std::vector<int>& open) -> std::optional<double> {
    if (open.empty() && inst.total_capacity() < demand) return std::nullopt;
    return cdufl_best_assignment(inst, open).cost;
  };
  std::vector<int> open(inst.num_uncap());
  for (int u = 0; u < inst.num_uncap(); ++u) open[u] = u;
  open = detail::descend(inst.num_uncap(), scaled, std::move(open), config, price,
                         /*allow_empty=*/true);
  auto assigned = cdufl_best_assignment(inst, open);
  return detail::finish_cdufl_solution(inst, std::move(open), std::move(assigned));
}

inline bool cdufl_is_local_optimum(const CduflInstance& inst, const std::vector<int>& open,
                                   const LocalSearchConfig& config = {}) {
  LocalSearchConfig probe = config;
  probe.max_iterations = 1;
  const std::int64_t demand = inst.total_demand();
  std::vector<double> scaled(inst.num_uncap());
  for (int u = 0; u < inst.num_uncap(); ++u) {
    scaled[u] = config.sigma * inst.uncap()[u].opening_cost;
  }
  auto price = [&](const std::vector<int>& o) -> std::optional<double> {
    if (o.empty() && inst.total_capacity() < demand) return std::nullopt;
    return cdufl_best_assignment(inst, o).cost;
  };
  return detail::descend(inst.num_uncap(), scaled, open, probe, price, true) == open;
}

/// The (1 + sqrt 2) specialization: facility costs scaled by sigma = sqrt 2
/// before the search, true costs reported.
inline CduflSolution cdufl_sqrt2(const CduflInstance& inst, LocalSearchConfig config = {}) {
  config.sigma = std::sqrt(2.0);
  return cdufl_local_search(inst, config);
}

}  // namespace lbfl
