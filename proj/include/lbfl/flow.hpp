#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "lbfl/core.hpp"

namespace lbfl {

/// Integral shipment plan between suppliers and receivers.
class Assignment {
 public:
  struct Entry {
    int supplier;
    int receiver;
    std::int64_t units;
  };

  void add(int supplier, int receiver, std::int64_t units) {
    if (units == 0) return;
    units_[{supplier, receiver}] += units;
    if (units_[{supplier, receiver}] == 0) units_.erase({supplier, receiver});
    supplier_totals_[supplier] += units;
    receiver_totals_[receiver] += units;
  }

  std::int64_t units(int supplier, int receiver) const {
    auto it = units_.find({supplier, receiver});
    return it == units_.end() ? 0 : it->second;
  }

  std::int64_t supplier_total(int supplier) const {
    auto it = supplier_totals_.find(supplier);
    return it == supplier_totals_.end() ? 0 : it->second;
  }

  std::int64_t receiver_total(int receiver) const {
    auto it = receiver_totals_.find(receiver);
    return it == receiver_totals_.end() ? 0 : it->second;
  }

  /// Entries sorted by (supplier, receiver); zero entries are dropped.
  std::vector<Entry> entries() const {
    std::vector<Entry> out;
    out.reserve(units_.size());
    for (const auto& [key, units] : units_) out.push_back({key.first, key.second, units});
    return out;
  }

  bool empty() const { return units_.empty(); }

 private:
  std::map<std::pair<int, int>, std::int64_t> units_;
  std::map<int, std::int64_t> supplier_totals_;
  std::map<int, std::int64_t> receiver_totals_;
};

/// Successive-shortest-path min-cost flow with node potentials. Capacities
/// and flows are integral; costs are real. Dijkstra uses a linear scan with
/// ties broken toward the lowest node id, so results are deterministic.
class MinCostFlow {
 public:
  explicit MinCostFlow(int num_nodes) : adj_(num_nodes) {}

  int num_nodes() const { return static_cast<int>(adj_.size()); }

  int add_node() {
    adj_.emplace_back();
    return num_nodes() - 1;
  }

  /// Returns an arc id usable with flow_on().
  int add_arc(int from, int to, std::int64_t capacity, double cost) {
    if (capacity < 0) throw std::invalid_argument("MinCostFlow: negative capacity");
    const int id = static_cast<int>(edges_.size() / 2);
    adj_[from].push_back(static_cast<int>(edges_.size()));
    edges_.push_back({to, capacity, cost});
    adj_[to].push_back(static_cast<int>(edges_.size()));
    edges_.push_back({from, 0, -cost});
    if (cost < 0) has_negative_costs_ = true;
    return id;
  }

  struct Outcome {
    std::int64_t sent = 0;
    double cost = 0.0;
  };

  /// Pushes up to `limit` units from source to sink along cheapest paths.
  /// Stops early when the sink becomes unreachable (i.e. at the max flow).
  Outcome send(int source, int sink, std::int64_t limit) {
    Outcome out;
    if (limit <= 0 || source == sink) return out;
    init_potentials(source);
    while (out.sent < limit && shortest_path(source, sink)) {
      std::int64_t push = limit - out.sent;
      for (int v = sink; v != source;) {
        const int e = parent_edge_[v];
        push = std::min(push, edges_[e].capacity);
        v = edges_[e ^ 1].to;
      }
      double path_cost = 0.0;
      for (int v = sink; v != source;) {
        const int e = parent_edge_[v];
        edges_[e].capacity -= push;
        edges_[e ^ 1].capacity += push;
        path_cost += edges_[e].cost;
        v = edges_[e ^ 1].to;
      }
      out.sent += push;
      out.cost += path_cost * static_cast<double>(push);
    }
    return out;
  }

  /// Flow currently on arc `id` (reverse residual capacity).
  std::int64_t flow_on(int id) const { return edges_[2 * id + 1].capacity; }

 private:
  struct Edge {
    int to;
    std::int64_t capacity;
    double cost;
  };

  static constexpr double kInf = std::numeric_limits<double>::infinity();

  void init_potentials(int source) {
    potential_.assign(num_nodes(), 0.0);
    if (!has_negative_costs_) return;
    // Bellman-Ford over arcs with residual capacity.
    std::vector<double> d(num_nodes(), kInf);
    d[source] = 0.0;
    for (int round = 0; round + 1 < num_nodes(); ++round) {
      bool changed = false;
      for (int u = 0; u < num_nodes(); ++u) {
        if (d[u] == kInf) continue;
        for (int e : adj_[u]) {
          if (edges_[e].capacity <= 0) continue;
          if (d[u] + edges_[e].cost < d[edges_[e].to] - 1e-15) {
            d[edges_[e].to] = d[u] + edges_[e].cost;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    for (int v = 0; v < num_nodes(); ++v) potential_[v] = d[v] == kInf ? 0.0 : d[v];
  }

  bool shortest_path(int source, int sink) {
    const int n = num_nodes();
    dist_.assign(n, kInf);
    parent_edge_.assign(n, -1);
    std::vector<char> done(n, 0);
    dist_[source] = 0.0;
    for (int round = 0; round < n; ++round) {
      int u = -1;
      for (int v = 0; v < n; ++v) {
        if (!done[v] && dist_[v] < kInf && (u == -1 || dist_[v] < dist_[u])) u = v;
      }
      if (u == -1) break;
      done[u] = 1;
      for (int e : adj_[u]) {
        if (edges_[e].capacity <= 0) continue;
        const int v = edges_[e].to;
        // Reduced costs are nonnegative up to floating drift; clamp.
        const double rc = std::max(0.0, edges_[e].cost + potential_[u] - potential_[v]);
        if (dist_[u] + rc < dist_[v]) {
          dist_[v] = dist_[u] + rc;
          parent_edge_[v] = e;
        }
      }
    }
    if (dist_[sink] == kInf) return false;
    for (int v = 0; v < n; ++v) {
      if (dist_[v] < kInf) potential_[v] += dist_[v];
    }
    return true;
  }

  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adj_;
  std::vector<double> potential_, dist_;
  std::vector<int> parent_edge_;
  bool has_negative_costs_ = false;
};

struct FlowArc {
  int from, to;
  std::int64_t capacity;
  double cost;
};

struct FlowNetwork {
  int num_nodes = 0;
  std::vector<FlowArc> arcs;
  int source = 0;
  int sink = 0;
  std::int64_t required = 0;
};

struct FlowSolveResult {
  Assignment assignment;  // (from, to) -> units over the given arcs
  double cost = 0.0;
  std::vector<std::int64_t> arc_flow;
};

/// Min-cost flow of exactly `network.required` units. Throws
/// InfeasibleError carrying the max-flow value when the requirement cannot
/// be met.
inline FlowSolveResult min_cost_flow(const FlowNetwork& network) {
  MinCostFlow mcf(network.num_nodes);
  std::vector<int> ids;
  ids.reserve(network.arcs.size());
  for (const auto& a : network.arcs) ids.push_back(mcf.add_arc(a.from, a.to, a.capacity, a.cost));
  const auto outcome = mcf.send(network.source, network.sink, network.required);
  if (outcome.sent < network.required) {
    throw InfeasibleError("min_cost_flow: required " + std::to_string(network.required) +
                          " units but max flow is " + std::to_string(outcome.sent));
  }
  FlowSolveResult result;
  result.cost = outcome.cost;
  result.arc_flow.reserve(network.arcs.size());
  for (std::size_t k = 0; k < network.arcs.size(); ++k) {
    const std::int64_t f = mcf.flow_on(ids[k]);
    result.arc_flow.push_back(f);
    result.assignment.add(network.arcs[k].from, network.arcs[k].to, f);
  }
  return result;
}

struct AssignResult {
  Assignment assignment;
  double cost = 0.0;
};

/// Minimum-cost assignment of unit clients to the open facilities so that
/// every open facility receives at least `min_per_open` clients. Lower
/// bounds are realized by splitting each facility->sink arc into a mandatory
/// arc (fed by a super source) and an optional residual arc.
///
/// `cost[f][c]` gives the connection cost for every facility (open or not).
inline AssignResult assign_lower_bounded(const std::vector<std::vector<double>>& cost,
                                         std::int64_t min_per_open, const std::vector<int>& open) {
  const int num_clients = cost.empty() ? 0 : static_cast<int>(cost.front().size());
  AssignResult result;
  if (num_clients == 0 && (open.empty() || min_per_open == 0)) return result;
  if (open.empty()) throw InfeasibleError("assign_lower_bounded: no open facility");
  const std::int64_t needed = min_per_open * static_cast<std::int64_t>(open.size());
  if (needed > num_clients) {
    throw InfeasibleError("assign_lower_bounded: " + std::to_string(open.size()) +
                          " open facilities require " + std::to_string(needed) +
                          " clients but only " + std::to_string(num_clients) + " exist");
  }

  // Nodes: source, sink, clients, open facilities, super source/sink.
  const int source = 0, sink = 1;
  const int client_base = 2;
  const int facility_base = client_base + num_clients;
  const int super_source = facility_base + static_cast<int>(open.size());
  const int super_sink = super_source + 1;
  MinCostFlow mcf(super_sink + 1);

  for (int j = 0; j < num_clients; ++j) mcf.add_arc(source, client_base + j, 1, 0.0);
  std::vector<std::vector<int>> client_arcs(open.size());
  for (std::size_t oi = 0; oi < open.size(); ++oi) {
    client_arcs[oi].reserve(num_clients);
    for (int j = 0; j < num_clients; ++j) {
      client_arcs[oi].push_back(
          mcf.add_arc(client_base + j, facility_base + static_cast<int>(oi), 1, cost[open[oi]][j]));
    }
    // facility -> sink with lower bound min_per_open: optional residual part
    // plus the mandatory part rerouted through the super nodes.
    mcf.add_arc(facility_base + static_cast<int>(oi), sink, num_clients - min_per_open, 0.0);
    mcf.add_arc(facility_base + static_cast<int>(oi), super_sink, min_per_open, 0.0);
  }
  mcf.add_arc(super_source, sink, needed, 0.0);
  // source -> sink demand of num_clients units, also via the super nodes.
  mcf.add_arc(super_source, source, num_clients, 0.0);
  mcf.add_arc(sink, super_sink, num_clients, 0.0);

  const std::int64_t required = needed + num_clients;
  const auto outcome = mcf.send(super_source, super_sink, required);
  if (outcome.sent < required) {
    throw InfeasibleError("assign_lower_bounded: lower bounds cannot be met (flow " +
                          std::to_string(outcome.sent) + " of " + std::to_string(required) + ")");
  }
  for (std::size_t oi = 0; oi < open.size(); ++oi) {
    for (int j = 0; j < num_clients; ++j) {
      const std::int64_t f = mcf.flow_on(client_arcs[oi][j]);
      if (f > 0) {
        result.assignment.add(open[oi], j, f);
        result.cost += static_cast<double>(f) * cost[open[oi]][j];
      }
    }
  }
  return result;
}

/// Instance variant; `min_per_open` overrides the instance lower bound when
/// nonnegative (used by the relaxed bicriteria searches).
inline AssignResult assign_lower_bounded(const LbflInstance& inst, const std::vector<int>& open,
                                         std::int64_t min_per_open = -1) {
  std::vector<std::vector<double>> cost(inst.num_facilities(),
                                        std::vector<double>(inst.num_clients()));
  for (int i = 0; i < inst.num_facilities(); ++i)
    for (int j = 0; j < inst.num_clients(); ++j) cost[i][j] = inst.facility_client(i, j);
  return assign_lower_bounded(cost, min_per_open < 0 ? inst.lower_bound() : min_per_open, open);
}

/// Assignment vector (client -> facility) from a unit-client Assignment.
inline std::vector<int> to_assignment_vector(const Assignment& assignment, int num_clients) {
  std::vector<int> out(num_clients, -1);
  for (const auto& e : assignment.entries()) {
    for (std::int64_t u = 0; u < e.units; ++u) {
      if (out[e.receiver] != -1) throw std::logic_error("client assigned twice");
      out[e.receiver] = e.supplier;
    }
  }
  for (int f : out) {
    if (f == -1) throw std::logic_error("client left unassigned");
  }
  return out;
}

/// Cheapest way to serve all demand from the open uncapacitated supply
/// points plus the always-usable capacitated ones.
inline AssignResult cdufl_best_assignment(const CduflInstance& inst,
                                          const std::vector<int>& open_uncap) {
  AssignResult result;
  const std::int64_t total_demand = inst.total_demand();
  if (total_demand == 0) return result;
  if (open_uncap.empty() && inst.total_capacity() < total_demand) {
    throw InfeasibleError("cdufl_best_assignment: open capacity " +
                          std::to_string(inst.total_capacity()) + " cannot cover demand " +
                          std::to_string(total_demand));
  }

  const int source = 0, sink = 1;
  const int supplier_base = 2;
  const int num_suppliers = static_cast<int>(open_uncap.size()) + inst.num_cap();
  const int demand_base = supplier_base + num_suppliers;
  MinCostFlow mcf(demand_base + inst.num_demands());

  // Supplier node k: open uncap points first, then every capacitated point.
  std::vector<int> supplier_global;  // node -> global supplier index
  supplier_global.reserve(num_suppliers);
  for (int u : open_uncap) supplier_global.push_back(u);
  for (int c = 0; c < inst.num_cap(); ++c) supplier_global.push_back(inst.num_uncap() + c);

  for (int k = 0; k < num_suppliers; ++k) {
    const int g = supplier_global[k];
    const std::int64_t cap =
        inst.supplier_is_uncap(g) ? total_demand : inst.cap()[g - inst.num_uncap()].capacity;
    mcf.add_arc(source, supplier_base + k, cap, 0.0);
  }
  std::vector<std::vector<int>> ship_arcs(num_suppliers);
  for (int k = 0; k < num_suppliers; ++k) {
    for (int d = 0; d < inst.num_demands(); ++d) {
      ship_arcs[k].push_back(mcf.add_arc(supplier_base + k, demand_base + d,
                                         inst.demands()[d].demand,
                                         inst.supplier_demand_dist(supplier_global[k], d)));
    }
  }
  for (int d = 0; d < inst.num_demands(); ++d) {
    mcf.add_arc(demand_base + d, sink, inst.demands()[d].demand, 0.0);
  }

  const auto outcome = mcf.send(source, sink, total_demand);
  if (outcome.sent < total_demand) {
    throw InfeasibleError("cdufl_best_assignment: served only " + std::to_string(outcome.sent) +
                          " of " + std::to_string(total_demand) + " demand units");
  }
  result.cost = outcome.cost;
  for (int k = 0; k < num_suppliers; ++k) {
    for (int d = 0; d < inst.num_demands(); ++d) {
      const std::int64_t f = mcf.flow_on(ship_arcs[k][d]);
      if (f > 0) result.assignment.add(supplier_global[k], d, f);
    }
  }
  return result;
}

}  // namespace lbfl
