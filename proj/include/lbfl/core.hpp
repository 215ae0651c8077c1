#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace lbfl {

/// Tolerance shared by metric validation and cost comparisons.
inline constexpr double kTolerance = 1e-9;

/// The problem (or a subproblem) admits no feasible solution.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An exact solver was asked to exceed its configured size cap.
class SizeLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense square matrix of pairwise distances.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;

  explicit DistanceMatrix(int n, double fill = 0.0)
      : n_(n), values_(static_cast<std::size_t>(n) * n, fill) {
    if (n < 0) throw std::invalid_argument("DistanceMatrix: negative size");
  }

  static DistanceMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    const int n = static_cast<int>(rows.size());
    DistanceMatrix m(n);
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(rows[i].size()) != n) {
        throw std::invalid_argument("DistanceMatrix: matrix is not square");
      }
      for (int j = 0; j < n; ++j) m.at(i, j) = rows[i][j];
    }
    return m;
  }

  int size() const { return n_; }

  double operator()(int i, int j) const {
    return values_[static_cast<std::size_t>(i) * n_ + j];
  }

  double& at(int i, int j) { return values_[static_cast<std::size_t>(i) * n_ + j]; }

  /// Restriction to a subset of points, in the given order.
  DistanceMatrix restrict(const std::vector<int>& points) const {
    DistanceMatrix out(static_cast<int>(points.size()));
    for (int a = 0; a < out.size(); ++a)
      for (int b = 0; b < out.size(); ++b) out.at(a, b) = (*this)(points[a], points[b]);
    return out;
  }

 private:
  int n_ = 0;
  std::vector<double> values_;
};

/// Violations found while checking that a matrix is a metric.
struct MetricReport {
  struct SymmetryViolation {
    int i, j;
    double forward, backward;
  };
  struct DiagonalViolation {
    int i;
    double value;
  };
  struct NegativeEntry {
    int i, j;
    double value;
  };
  struct TriangleViolation {
    int i, k;   // offending pair
    int via;    // witness j with c(i,k) > c(i,j) + c(j,k)
    double direct, through;
  };

  std::vector<SymmetryViolation> symmetry;
  std::vector<DiagonalViolation> diagonal;
  std::vector<NegativeEntry> negative;
  std::vector<TriangleViolation> triangle;

  bool ok() const {
    return symmetry.empty() && diagonal.empty() && negative.empty() && triangle.empty();
  }
};

/// Checks symmetry, zero diagonal, nonnegativity, and the triangle
/// inequality at tolerance kTolerance. Empty report iff the matrix is a metric.
inline MetricReport validate_metric(const DistanceMatrix& dist) {
  MetricReport report;
  const int n = dist.size();
  for (int i = 0; i < n; ++i) {
    if (std::abs(dist(i, i)) > kTolerance) report.diagonal.push_back({i, dist(i, i)});
    for (int j = 0; j < n; ++j) {
      if (dist(i, j) < -kTolerance) report.negative.push_back({i, j, dist(i, j)});
      if (j > i && std::abs(dist(i, j) - dist(j, i)) > kTolerance) {
        report.symmetry.push_back({i, j, dist(i, j), dist(j, i)});
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      if (i == k) continue;
      // Report each violated pair once, with the worst witness.
      int worst = -1;
      double slack = kTolerance;
      for (int j = 0; j < n; ++j) {
        if (j == i || j == k) continue;
        const double through = dist(i, j) + dist(j, k);
        if (dist(i, k) - through > slack) {
          slack = dist(i, k) - through;
          worst = j;
        }
      }
      if (worst >= 0 && i < k) {
        report.triangle.push_back({i, k, worst, dist(i, k), dist(i, worst) + dist(worst, k)});
      }
    }
  }
  return report;
}

struct WeightedEdge {
  int a, b;
  double weight;
};

/// All-pairs shortest-path closure of a weighted graph. The result is the
/// metric completion and always passes validate_metric.
inline DistanceMatrix metric_completion(int num_points, const std::vector<WeightedEdge>& edges) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  DistanceMatrix dist(num_points, kInf);
  for (int i = 0; i < num_points; ++i) dist.at(i, i) = 0.0;
  for (const auto& e : edges) {
    if (e.a < 0 || e.a >= num_points || e.b < 0 || e.b >= num_points) {
      throw std::invalid_argument("metric_completion: edge endpoint out of range");
    }
    if (e.weight < 0) throw std::invalid_argument("metric_completion: negative edge weight");
    dist.at(e.a, e.b) = std::min(dist(e.a, e.b), e.weight);
    dist.at(e.b, e.a) = dist(e.a, e.b);
  }
  for (int k = 0; k < num_points; ++k)
    for (int i = 0; i < num_points; ++i)
      for (int j = 0; j < num_points; ++j)
        if (dist(i, k) + dist(k, j) < dist(i, j)) dist.at(i, j) = dist(i, k) + dist(k, j);
  for (int i = 0; i < num_points; ++i)
    for (int j = 0; j < num_points; ++j)
      if (std::isinf(dist(i, j))) {
        throw InfeasibleError("metric_completion: points " + std::to_string(i) + " and " +
                              std::to_string(j) + " are not connected");
      }
  return dist;
}

/// Lower-bounded facility location instance. Point indices run over
/// facilities first (0..F-1), then clients (F..F+D-1); `dist` covers all
/// points. Immutable after construction.
class LbflInstance {
 public:
  LbflInstance(std::vector<double> opening_costs, int num_clients, DistanceMatrix dist,
               std::int64_t lower_bound)
      : opening_costs_(std::move(opening_costs)),
        num_clients_(num_clients),
        dist_(std::move(dist)),
        lower_bound_(lower_bound) {
    if (opening_costs_.empty()) throw std::invalid_argument("LbflInstance: no facilities");
    if (num_clients_ < 0) throw std::invalid_argument("LbflInstance: negative client count");
    if (lower_bound_ < 1) throw std::invalid_argument("LbflInstance: lower bound must be >= 1");
    if (dist_.size() != num_facilities() + num_clients_) {
      throw std::invalid_argument("LbflInstance: distance matrix size mismatch");
    }
    for (double f : opening_costs_) {
      if (f < 0) throw std::invalid_argument("LbflInstance: negative opening cost");
    }
    if (!validate_metric(dist_).ok()) {
      throw std::invalid_argument("LbflInstance: distances are not a metric");
    }
  }

  int num_facilities() const { return static_cast<int>(opening_costs_.size()); }
  int num_clients() const { return num_clients_; }
  std::int64_t lower_bound() const { return lower_bound_; }
  double opening_cost(int i) const { return opening_costs_.at(i); }
  const std::vector<double>& opening_costs() const { return opening_costs_; }
  const DistanceMatrix& dist() const { return dist_; }

  int facility_point(int i) const { return i; }
  int client_point(int j) const { return num_facilities() + j; }

  /// c_ij between facility i and client j.
  double facility_client(int i, int j) const { return dist_(i, client_point(j)); }
  double facility_facility(int i, int k) const { return dist_(i, k); }

 private:
  std::vector<double> opening_costs_;
  int num_clients_;
  DistanceMatrix dist_;
  std::int64_t lower_bound_;
};

struct LbflSolution {
  std::vector<int> open;        // sorted facility ids
  std::vector<int> assignment;  // assignment[j] = facility serving client j
};

/// UFL instance: same shape as LBFL without the lower bound.
class UflInstance {
 public:
  UflInstance(std::vector<double> opening_costs, int num_clients, DistanceMatrix dist)
      : opening_costs_(std::move(opening_costs)), num_clients_(num_clients), dist_(std::move(dist)) {
    if (opening_costs_.empty()) throw std::invalid_argument("UflInstance: no facilities");
    if (dist_.size() != num_facilities() + num_clients_) {
      throw std::invalid_argument("UflInstance: distance matrix size mismatch");
    }
    if (!validate_metric(dist_).ok()) {
      throw std::invalid_argument("UflInstance: distances are not a metric");
    }
  }

  int num_facilities() const { return static_cast<int>(opening_costs_.size()); }
  int num_clients() const { return num_clients_; }
  double opening_cost(int i) const { return opening_costs_.at(i); }
  const DistanceMatrix& dist() const { return dist_; }
  double facility_client(int i, int j) const { return dist_(i, num_facilities() + j); }

 private:
  std::vector<double> opening_costs_;
  int num_clients_;
  DistanceMatrix dist_;
};

struct UflSolution {
  std::vector<int> open;
  std::vector<int> assignment;
};

struct CostBreakdown {
  double facility_cost = 0.0;
  double assignment_cost = 0.0;
  double total = 0.0;
};

namespace detail {

template <typename Instance>
void check_solution_ids(const Instance& inst, const std::vector<int>& open,
                        const std::vector<int>& assignment) {
  for (int i : open) {
    if (i < 0 || i >= inst.num_facilities()) {
      throw std::out_of_range("solution references unknown facility " + std::to_string(i));
    }
  }
  if (static_cast<int>(assignment.size()) != inst.num_clients()) {
    throw std::out_of_range("solution must assign every client exactly once");
  }
  for (int f : assignment) {
    if (f < 0 || f >= inst.num_facilities()) {
      throw std::out_of_range("client assigned to unknown facility " + std::to_string(f));
    }
  }
}

}  // namespace detail

/// Facility-opening plus connection cost. Does not check feasibility.
inline CostBreakdown evaluate_lbfl(const LbflInstance& inst, const LbflSolution& sol) {
  detail::check_solution_ids(inst, sol.open, sol.assignment);
  CostBreakdown out;
  for (int i : sol.open) out.facility_cost += inst.opening_cost(i);
  for (int j = 0; j < inst.num_clients(); ++j) {
    out.assignment_cost += inst.facility_client(sol.assignment[j], j);
  }
  out.total = out.facility_cost + out.assignment_cost;
  return out;
}

inline CostBreakdown evaluate_ufl(const UflInstance& inst, const UflSolution& sol) {
  detail::check_solution_ids(inst, sol.open, sol.assignment);
  CostBreakdown out;
  for (int i : sol.open) out.facility_cost += inst.opening_cost(i);
  for (int j = 0; j < inst.num_clients(); ++j) {
    out.assignment_cost += inst.facility_client(sol.assignment[j], j);
  }
  out.total = out.facility_cost + out.assignment_cost;
  return out;
}

/// Nearest-open-facility assignment, ties to the lowest facility id.
inline std::vector<int> assign_nearest(const UflInstance& inst, const std::vector<int>& open) {
  if (open.empty()) throw std::invalid_argument("assign_nearest: empty open set");
  std::vector<int> assignment(inst.num_clients());
  for (int j = 0; j < inst.num_clients(); ++j) {
    int best = open.front();
    for (int i : open) {
      if (inst.facility_client(i, j) < inst.facility_client(best, j)) best = i;
    }
    assignment[j] = best;
  }
  return assignment;
}

struct FeasibilityReport {
  bool feasible = true;
  struct UnderservedFacility {
    int facility;
    std::int64_t served;
  };
  std::vector<UnderservedFacility> underserved;  // open facilities with < M clients
  std::vector<int> misassigned;                  // clients assigned to a closed facility
};

/// True iff every client is assigned to an open facility and every open
/// facility serves at least M clients.
inline FeasibilityReport check_feasible(const LbflInstance& inst, const LbflSolution& sol) {
  detail::check_solution_ids(inst, sol.open, sol.assignment);
  FeasibilityReport report;
  std::vector<char> is_open(inst.num_facilities(), 0);
  for (int i : sol.open) is_open[i] = 1;
  std::vector<std::int64_t> served(inst.num_facilities(), 0);
  for (int j = 0; j < inst.num_clients(); ++j) {
    const int f = sol.assignment[j];
    if (!is_open[f]) {
      report.misassigned.push_back(j);
    } else {
      ++served[f];
    }
  }
  for (int i : sol.open) {
    if (served[i] < inst.lower_bound()) report.underserved.push_back({i, served[i]});
  }
  report.feasible = report.misassigned.empty() && report.underserved.empty();
  return report;
}

/// Capacity-discounted UFL instance: supply points are either uncapacitated
/// with an opening cost, or capacitated with zero opening cost. Points live
/// at locations of a shared metric; co-located points are at distance zero.
class CduflInstance {
 public:
  struct UncapSupply {
    int location;
    double opening_cost;
  };
  struct CapSupply {
    int location;
    std::int64_t capacity;
  };
  struct DemandPoint {
    int location;
    std::int64_t demand;
  };

  CduflInstance(DistanceMatrix location_dist, std::vector<UncapSupply> uncap,
                std::vector<CapSupply> cap, std::vector<DemandPoint> demands)
      : dist_(std::move(location_dist)),
        uncap_(std::move(uncap)),
        cap_(std::move(cap)),
        demands_(std::move(demands)) {
    if (!validate_metric(dist_).ok()) {
      throw std::invalid_argument("CduflInstance: location distances are not a metric");
    }
    auto check_loc = [&](int loc) {
      if (loc < 0 || loc >= dist_.size()) {
        throw std::invalid_argument("CduflInstance: location out of range");
      }
    };
    for (const auto& u : uncap_) {
      check_loc(u.location);
      if (u.opening_cost < 0) throw std::invalid_argument("CduflInstance: negative opening cost");
    }
    for (const auto& c : cap_) {
      check_loc(c.location);
      if (c.capacity < 0) throw std::invalid_argument("CduflInstance: negative capacity");
    }
    for (const auto& d : demands_) {
      check_loc(d.location);
      if (d.demand < 0) throw std::invalid_argument("CduflInstance: negative demand");
    }
  }

  int num_locations() const { return dist_.size(); }
  const DistanceMatrix& location_dist() const { return dist_; }
  const std::vector<UncapSupply>& uncap() const { return uncap_; }
  const std::vector<CapSupply>& cap() const { return cap_; }
  const std::vector<DemandPoint>& demands() const { return demands_; }

  int num_uncap() const { return static_cast<int>(uncap_.size()); }
  int num_cap() const { return static_cast<int>(cap_.size()); }
  int num_demands() const { return static_cast<int>(demands_.size()); }

  /// Suppliers share one index space: uncapacitated first, then capacitated.
  int num_suppliers() const { return num_uncap() + num_cap(); }
  bool supplier_is_uncap(int s) const { return s < num_uncap(); }
  int supplier_location(int s) const {
    return supplier_is_uncap(s) ? uncap_[s].location : cap_[s - num_uncap()].location;
  }

  double supplier_demand_dist(int s, int d) const {
    return dist_(supplier_location(s), demands_[d].location);
  }

  std::int64_t total_demand() const {
    std::int64_t t = 0;
    for (const auto& d : demands_) t += d.demand;
    return t;
  }

  std::int64_t total_capacity() const {
    std::int64_t t = 0;
    for (const auto& c : cap_) t += c.capacity;
    return t;
  }

 private:
  DistanceMatrix dist_;
  std::vector<UncapSupply> uncap_;
  std::vector<CapSupply> cap_;
  std::vector<DemandPoint> demands_;
};

}  // namespace lbfl
