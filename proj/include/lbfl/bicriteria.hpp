#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "lbfl/core.hpp"
#include "lbfl/local_search.hpp"

namespace lbfl {

/// ceil(alpha * m) computed with a small snap so that rational alpha = k/m
/// lands exactly on its breakpoint k despite floating rounding.
inline std::int64_t ceil_alpha_count(double alpha, std::int64_t m) {
  if (alpha <= 0.0 || alpha > 1.0) {
    throw std::domain_error("ceil_alpha_count: alpha must lie in (0, 1]");
  }
  const double raw = alpha * static_cast<double>(m);
  auto k = static_cast<std::int64_t>(std::ceil(raw - 1e-9));
  if (k < 1) k = 1;
  if (k > m) k = m;
  return k;
}

/// Per-facility table of the M smallest client distances, sorted ascending.
/// radius(i, alpha) is the distance from i to its ceil(alpha*M)-closest
/// client.
class RadiusTable {
 public:
  explicit RadiusTable(const LbflInstance& inst) : m_(inst.lower_bound()) {
    if (inst.num_clients() < m_) {
      throw InfeasibleError("RadiusTable: fewer clients than the lower bound");
    }
    sorted_.resize(inst.num_facilities());
    for (int i = 0; i < inst.num_facilities(); ++i) {
      std::vector<std::pair<double, int>> by_dist(inst.num_clients());
      for (int j = 0; j < inst.num_clients(); ++j) {
        by_dist[j] = {inst.facility_client(i, j), j};
      }
      // Ties among equidistant clients break toward the lower client id.
      std::sort(by_dist.begin(), by_dist.end());
      sorted_[i].reserve(m_);
      nearest_ids_.emplace_back();
      nearest_ids_.back().reserve(m_);
      for (std::int64_t k = 0; k < m_; ++k) {
        sorted_[i].push_back(by_dist[k].first);
        nearest_ids_.back().push_back(by_dist[k].second);
      }
    }
  }

  std::int64_t lower_bound() const { return m_; }

  /// k-th smallest client distance from facility i, k in [1, M].
  double radius_by_rank(int facility, std::int64_t k) const {
    return sorted_.at(facility).at(k - 1);
  }

  double radius(int facility, double alpha) const {
    return radius_by_rank(facility, ceil_alpha_count(alpha, m_));
  }

  /// Sum of the M smallest client distances from i; equals
  /// M * integral_0^1 R_i(alpha) d alpha.
  double sum_m_nearest(int facility) const {
    double s = 0.0;
    for (double d : sorted_.at(facility)) s += d;
    return s;
  }

  /// Client ids of D(i) in the tie-broken nearest order.
  const std::vector<int>& nearest_clients(int facility) const { return nearest_ids_.at(facility); }

 private:
  std::int64_t m_;
  std::vector<std::vector<double>> sorted_;
  std::vector<std::vector<int>> nearest_ids_;
};

inline double radius(const LbflInstance& inst, int facility, double alpha) {
  return RadiusTable(inst).radius(facility, alpha);
}

/// UFL instance with opening costs f_i + 2 alpha M R_i(alpha) and the
/// original distances.
inline UflInstance build_bicriteria_ufl(const LbflInstance& inst, double alpha) {
  const RadiusTable radii(inst);
  const double m = static_cast<double>(inst.lower_bound());
  std::vector<double> costs(inst.num_facilities());
  for (int i = 0; i < inst.num_facilities(); ++i) {
    costs[i] = inst.opening_cost(i) + 2.0 * alpha * m * radii.radius(i, alpha);
  }
  return UflInstance(std::move(costs), inst.num_clients(), inst.dist());
}

struct BicriteriaSolution {
  std::vector<int> open;             // F'
  std::vector<int> assignment;       // nearest-open under the true metric
  std::vector<std::int64_t> served;  // per entry of open
  double facility_cost = 0.0;        // F_b: modified opening costs over F'
  double assignment_cost = 0.0;      // C_b
  // Costs of the scaled local optimum before the service-floor deletions.
  // The local-search guarantees (and their checks) speak about this stage;
  // the deletions below only decrease the facility part.
  double search_facility_cost = 0.0;
  double search_assignment_cost = 0.0;
};

/// Step (1) of the pipeline: scaled local search on the modified UFL
/// instance, delete-optimal cleanup at the search's own (scaled) objective,
/// then deletion of facilities serving fewer than ceil(alpha*M) clients.
/// Each such deletion improves the true modified cost, which is exactly the
/// delete-optimality argument behind the service guarantee; unrestricted
/// true-cost deletions would instead drift away from the scaled local
/// optimum and void its cost guarantees.
inline BicriteriaSolution solve_bicriteria(const LbflInstance& inst, double alpha, double gamma,
                                           const LocalSearchConfig& ls = {}) {
  if (gamma <= 0.0) throw std::domain_error("solve_bicriteria: gamma must be positive");
  if (inst.num_clients() < inst.lower_bound()) {
    throw InfeasibleError("solve_bicriteria: fewer clients than the lower bound");
  }
  const UflInstance modified = build_bicriteria_ufl(inst, alpha);
  LocalSearchConfig config = ls;
  config.sigma = gamma;
  UflSolution sol = ufl_local_search(modified, config);
  {
    // Exact delete-optimality at the scaled objective (the search stops at
    // an approximate optimum).
    std::vector<double> scaled_costs(modified.num_facilities());
    for (int i = 0; i < modified.num_facilities(); ++i) {
      scaled_costs[i] = gamma * modified.opening_cost(i);
    }
    const UflInstance scaled(std::move(scaled_costs), modified.num_clients(), modified.dist());
    sol = make_delete_optimal(scaled, std::move(sol));
  }

  BicriteriaSolution out;
  {
    const CostBreakdown search_cost = evaluate_ufl(modified, sol);
    out.search_facility_cost = search_cost.facility_cost;
    out.search_assignment_cost = search_cost.assignment_cost;
  }

  // Service floor: delete any facility serving < ceil(alpha*M) clients,
  // cheapest-deletion first. Such a deletion never increases the true
  // modified cost (some client within R_i(alpha) is served elsewhere).
  const std::int64_t need = ceil_alpha_count(alpha, inst.lower_bound());
  while (true) {
    std::vector<std::int64_t> served_by(inst.num_facilities(), 0);
    for (int f : sol.assignment) ++served_by[f];
    int victim = -1;
    double victim_delta = 0.0;
    for (int i : sol.open) {
      if (served_by[i] >= need || sol.open.size() <= 1) continue;
      std::vector<int> rest;
      for (int k : sol.open) {
        if (k != i) rest.push_back(k);
      }
      double delta = -modified.opening_cost(i);
      for (int j = 0; j < modified.num_clients(); ++j) {
        double nearest = modified.facility_client(rest.front(), j);
        for (int k : rest) nearest = std::min(nearest, modified.facility_client(k, j));
        delta += nearest - modified.facility_client(sol.assignment[j], j);
      }
      if (victim == -1 || delta < victim_delta) {
        victim = i;
        victim_delta = delta;
      }
    }
    if (victim == -1) break;
    if (victim_delta > kTolerance) {
      throw std::logic_error("solve_bicriteria: deleting an underserved facility raised cost");
    }
    sol.open.erase(std::find(sol.open.begin(), sol.open.end(), victim));
    sol.assignment = assign_nearest(modified, sol.open);
  }

  out.open = sol.open;
  out.assignment = sol.assignment;
  out.served.assign(out.open.size(), 0);
  const CostBreakdown cost = evaluate_ufl(modified, sol);
  out.facility_cost = cost.facility_cost;
  out.assignment_cost = cost.assignment_cost;

  std::vector<std::int64_t> served_by(inst.num_facilities(), 0);
  for (int j = 0; j < inst.num_clients(); ++j) ++served_by[sol.assignment[j]];
  for (std::size_t k = 0; k < out.open.size(); ++k) {
    out.served[k] = served_by[out.open[k]];
    if (out.served[k] < need) {
      throw std::logic_error("solve_bicriteria: facility " + std::to_string(out.open[k]) +
                             " serves " + std::to_string(out.served[k]) + " < " +
                             std::to_string(need) + " clients");
    }
  }
  return out;
}

}  // namespace lbfl
