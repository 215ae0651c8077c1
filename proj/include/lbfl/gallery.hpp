#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <queue>
#include <random>
#include <vector>

#include "lbfl/core.hpp"
#include "lbfl/flow.hpp"
#include "lbfl/local_search.hpp"

namespace lbfl {

namespace detail {
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}
}  // namespace detail

/// Random Euclidean instance: facilities and clients are uniform points in
/// the unit square, opening costs uniform in [cost_min, cost_max].
/// Deterministic per seed.
inline LbflInstance gen_random(std::uint64_t seed, int n_f, int n_d, std::int64_t m,
                               double cost_min, double cost_max) {
  if (n_d < m) throw InfeasibleError("gen_random: fewer clients than the lower bound");
  if (n_f < 1) throw std::invalid_argument("gen_random: need at least one facility");
  if (cost_max < cost_min) throw std::invalid_argument("gen_random: empty cost range");
  std::mt19937_64 rng(seed);
  const int num_points = n_f + n_d;
  std::vector<std::pair<double, double>> pts(num_points);
  for (auto& p : pts) {
    p.first = detail::uniform01(rng);
    p.second = detail::uniform01(rng);
  }
  std::vector<double> costs(n_f);
  for (double& c : costs) c = cost_min + (cost_max - cost_min) * detail::uniform01(rng);
  DistanceMatrix dist(num_points);
  for (int a = 0; a < num_points; ++a) {
    for (int b = 0; b < num_points; ++b) {
      dist.at(a, b) = std::hypot(pts[a].first - pts[b].first, pts[a].second - pts[b].second);
    }
  }
  return LbflInstance(std::move(costs), n_d, std::move(dist), m);
}

/// An instance together with its designated local and global optima.
struct LocalityGapInstance {
  LbflInstance instance;
  LbflSolution designated_local;  // S
  LbflSolution designated_opt;
  double expected_ratio = 0.0;
  std::int64_t certification_bound = 0;  // lower bound under which S is locally optimal
};

/// Star family: facilities {o, s_1..s_M}, client groups D_1..D_M of size
/// ceil(alpha*M) each, c(o, j) = 1 and c(s_i, j) = M for j in D_i, metric
/// completion. S = {s_1..s_M} is locally optimal; the optimum opens {o}.
inline LocalityGapInstance gen_locality_star(std::int64_t m, double eps = 1e-3,
                                             double alpha = 1.0) {
  if (m < 2) throw std::invalid_argument("gen_locality_star: M must be at least 2");
  if (eps <= 0) throw std::invalid_argument("gen_locality_star: eps must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("gen_locality_star: alpha must lie in (0, 1]");
  }
  const std::int64_t group = static_cast<std::int64_t>(std::ceil(alpha * static_cast<double>(m) - 1e-9));
  const int num_facilities = static_cast<int>(m) + 1;  // o = 0, s_i = i
  const int num_clients = static_cast<int>(m * group);
  const int num_points = num_facilities + num_clients;

  std::vector<WeightedEdge> edges;
  for (int c = 0; c < num_clients; ++c) {
    const int group_idx = c / static_cast<int>(group);  // client of D_{group_idx+1}
    const int point = num_facilities + c;
    edges.push_back({0, point, 1.0});
    edges.push_back({1 + group_idx, point, static_cast<double>(m)});
  }
  DistanceMatrix dist = metric_completion(num_points, edges);

  std::vector<double> costs(num_facilities);
  costs[0] = static_cast<double>(m) * static_cast<double>(m) + eps;
  for (int i = 1; i < num_facilities; ++i) costs[i] = static_cast<double>(m);

  LocalityGapInstance out{LbflInstance(std::move(costs), num_clients, std::move(dist), m),
                          {}, {}, 0.0, group};
  for (int i = 1; i < num_facilities; ++i) out.designated_local.open.push_back(i);
  out.designated_local.assignment.resize(num_clients);
  for (int c = 0; c < num_clients; ++c) {
    out.designated_local.assignment[c] = 1 + c / static_cast<int>(group);
  }
  out.designated_opt.open = {0};
  out.designated_opt.assignment.assign(num_clients, 0);

  const double local_cost = evaluate_lbfl(out.instance, out.designated_local).total;
  const double opt_cost = evaluate_lbfl(out.instance, out.designated_opt).total;
  out.expected_ratio = local_cost / opt_cost;
  return out;
}

/// Cycle family (M = 2): 4k nodes o_0, j_0, s_0, j_1, o_1, ... around a
/// cycle, o-edges of weight 1 and s-edges of weight k - eps, zero opening
/// costs. S = {s_0..s_{k-1}} is locally optimal with ratio k - eps.
inline LocalityGapInstance gen_locality_cycle(int k, double eps = 1e-3) {
  if (k < 2) throw std::invalid_argument("gen_locality_cycle: k must be at least 2");
  if (!(eps > 0 && eps < 1)) throw std::invalid_argument("gen_locality_cycle: eps in (0,1)");
  const int num_facilities = 2 * k;  // o_i = i, s_i = k + i
  const int num_clients = 2 * k;     // j_t = facility count + t
  const int num_points = num_facilities + num_clients;
  auto o_pt = [&](int i) { return i; };
  auto s_pt = [&](int i) { return k + i; };
  auto j_pt = [&](int t) { return num_facilities + t; };

  std::vector<WeightedEdge> edges;
  const double far = static_cast<double>(k) - eps;
  for (int i = 0; i < k; ++i) {
    edges.push_back({o_pt(i), j_pt(2 * i), 1.0});
    edges.push_back({o_pt(i), j_pt((2 * i - 1 + 2 * k) % (2 * k)), 1.0});
    edges.push_back({s_pt(i), j_pt(2 * i), far});
    edges.push_back({s_pt(i), j_pt(2 * i + 1), far});
  }
  DistanceMatrix dist = metric_completion(num_points, edges);

  LocalityGapInstance out{
      LbflInstance(std::vector<double>(num_facilities, 0.0), num_clients, std::move(dist), 2),
      {}, {}, 0.0, 2};
  for (int i = 0; i < k; ++i) out.designated_local.open.push_back(k + i);
  out.designated_local.assignment.resize(num_clients);
  for (int i = 0; i < k; ++i) {
    out.designated_local.assignment[2 * i] = k + i;
    out.designated_local.assignment[2 * i + 1] = k + i;
  }
  for (int i = 0; i < k; ++i) out.designated_opt.open.push_back(i);
  out.designated_opt.assignment.resize(num_clients);
  for (int i = 0; i < k; ++i) {
    out.designated_opt.assignment[2 * i] = i;
    out.designated_opt.assignment[(2 * i - 1 + 2 * k) % (2 * k)] = i;
  }
  const double local_cost = evaluate_lbfl(out.instance, out.designated_local).total;
  const double opt_cost = evaluate_lbfl(out.instance, out.designated_opt).total;
  out.expected_ratio = local_cost / opt_cost;
  return out;
}

/// Bipartite graph on s-side and o-side vertices 0..side-1 each.
struct BipartiteGraph {
  int side = 0;
  std::vector<std::pair<int, int>> edges;  // (s index, o index)
};

/// Shortest cycle length of the bipartite graph (in graph edges);
/// returns a large value for forests.
inline int bipartite_girth(const BipartiteGraph& g) {
  const int n = 2 * g.side;  // s_i = i, o_i = side + i
  std::vector<std::vector<int>> adj(n);
  for (auto [s, o] : g.edges) {
    adj[s].push_back(g.side + o);
    adj[g.side + o].push_back(s);
  }
  int best = std::numeric_limits<int>::max();
  // BFS from every vertex; a cross or back edge closes a shortest cycle.
  for (int src = 0; src < n; ++src) {
    std::vector<int> dist(n, -1), par(n, -1);
    std::queue<int> q;
    dist[src] = 0;
    q.push(src);
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int w : adj[v]) {
        if (w == par[v]) continue;
        if (dist[w] == -1) {
          dist[w] = dist[v] + 1;
          par[w] = v;
          q.push(w);
        } else {
          best = std::min(best, dist[v] + dist[w] + 1);
        }
      }
    }
  }
  return best;
}

/// General locality-gap family from an M-regular bipartite graph with girth
/// at least T: one client per edge with c(s_n, j) = T - eps, c(o_m, j) = 1,
/// zero opening costs.
inline LocalityGapInstance gen_locality_bipartite(const BipartiteGraph& g, int girth_req,
                                                  double eps = 1e-3) {
  if (g.side < 1 || g.edges.empty()) {
    throw std::invalid_argument("gen_locality_bipartite: empty graph");
  }
  std::vector<int> deg_s(g.side, 0), deg_o(g.side, 0);
  for (auto [s, o] : g.edges) {
    if (s < 0 || s >= g.side || o < 0 || o >= g.side) {
      throw std::invalid_argument("gen_locality_bipartite: vertex out of range");
    }
    ++deg_s[s];
    ++deg_o[o];
  }
  const int m = deg_s[0];
  for (int d : deg_s) {
    if (d != m) throw std::invalid_argument("gen_locality_bipartite: graph is not regular");
  }
  for (int d : deg_o) {
    if (d != m) throw std::invalid_argument("gen_locality_bipartite: graph is not regular");
  }
  const int girth = bipartite_girth(g);
  if (girth < girth_req) {
    throw std::invalid_argument("gen_locality_bipartite: girth " + std::to_string(girth) +
                                " is below the required " + std::to_string(girth_req));
  }

  // Facilities: o_1..o_l first (ids 0..l-1), then s_1..s_l (ids l..2l-1).
  const int num_facilities = 2 * g.side;
  const int num_clients = static_cast<int>(g.edges.size());
  const int num_points = num_facilities + num_clients;
  const double far = static_cast<double>(girth_req) - eps;
  std::vector<WeightedEdge> wedges;
  for (int e = 0; e < num_clients; ++e) {
    const auto [s, o] = g.edges[e];
    wedges.push_back({g.side + s, num_facilities + e, far});
    wedges.push_back({o, num_facilities + e, 1.0});
  }
  DistanceMatrix dist = metric_completion(num_points, wedges);

  LocalityGapInstance out{
      LbflInstance(std::vector<double>(num_facilities, 0.0), num_clients, std::move(dist), m),
      {}, {}, 0.0, m};
  for (int i = 0; i < g.side; ++i) out.designated_local.open.push_back(g.side + i);
  for (int i = 0; i < g.side; ++i) out.designated_opt.open.push_back(i);
  out.designated_local.assignment.resize(num_clients);
  out.designated_opt.assignment.resize(num_clients);
  for (int e = 0; e < num_clients; ++e) {
    out.designated_local.assignment[e] = g.side + g.edges[e].first;
    out.designated_opt.assignment[e] = g.edges[e].second;
  }
  const double local_cost = evaluate_lbfl(out.instance, out.designated_local).total;
  const double opt_cost = evaluate_lbfl(out.instance, out.designated_opt).total;
  out.expected_ratio = local_cost / opt_cost;
  return out;
}

/// The CDUFL integrality-gap instance: an uncapacitated point of cost f, a
/// free point of capacity u, and u+1 unit demands, all co-located. The LP
/// value f/(u+1) is analytic; any integral solution pays f.
struct CduflGapInstance {
  CduflInstance instance;
  double lp_value = 0.0;
  double integral_value = 0.0;
  double expected_gap = 0.0;
};

inline CduflGapInstance gen_cdufl_gap(double f, std::int64_t u) {
  if (f <= 0) throw std::invalid_argument("gen_cdufl_gap: f must be positive");
  if (u < 1) throw std::invalid_argument("gen_cdufl_gap: u must be at least 1");
  CduflInstance inst(DistanceMatrix(1), {{0, f}}, {{0, u}}, {{0, u + 1}});
  return {std::move(inst), f / static_cast<double>(u + 1), f,
          static_cast<double>(u + 1)};
}

struct NaiveSearchResult {
  LbflSolution solution;
  double cost = 0.0;
  bool locally_optimal = false;  // certificate from the final exhaustive scan
  int moves = 0;
};

/// The add/drop/swap local search for LBFL itself, with every candidate open
/// set priced by a lower-bounded assignment flow. Adds are permitted only
/// when the enlarged open set stays feasible. This search exists to exhibit
/// the locality gaps; it is not an approximation algorithm.
inline NaiveSearchResult naive_lbfl_local_search(const LbflInstance& inst,
                                                 const LbflSolution& initial,
                                                 std::int64_t bound = -1) {
  const std::int64_t b = bound < 0 ? inst.lower_bound() : bound;
  auto price = [&](const std::vector<int>& open) -> std::optional<double> {
    if (open.empty()) return std::nullopt;
    if (b * static_cast<std::int64_t>(open.size()) > inst.num_clients()) return std::nullopt;
    double facility = 0.0;
    for (int i : open) facility += inst.opening_cost(i);
    return facility + assign_lower_bounded(inst, open, b).cost;
  };

  std::vector<int> open = initial.open;
  std::sort(open.begin(), open.end());
  auto current = price(open);
  if (!current) throw InfeasibleError("naive_lbfl_local_search: initial solution infeasible");

  NaiveSearchResult result;
  std::vector<char> is_open(inst.num_facilities(), 0);
  for (int i : open) is_open[i] = 1;

  auto candidates = [&](auto&& consider) {
    for (int i = 0; i < inst.num_facilities(); ++i) {
      if (!is_open[i]) consider(-1, i);  // add
    }
    for (int i : open) consider(i, -1);  // drop
    for (int i : open) {
      for (int j = 0; j < inst.num_facilities(); ++j) {
        if (!is_open[j]) consider(i, j);  // swap
      }
    }
  };

  while (true) {
    double best_cost = *current;
    int best_drop = -2, best_add = -2;
    candidates([&](int drop, int add) {
      std::vector<int> cand;
      for (int i : open) {
        if (i != drop) cand.push_back(i);
      }
      if (add >= 0) cand.insert(std::lower_bound(cand.begin(), cand.end(), add), add);
      const auto c = price(cand);
      if (c && *c < best_cost - 1e-12) {
        best_cost = *c;
        best_drop = drop;
        best_add = add;
      }
    });
    if (best_drop == -2) break;
    if (best_drop >= 0) {
      is_open[best_drop] = 0;
      open.erase(std::find(open.begin(), open.end(), best_drop));
    }
    if (best_add >= 0) {
      is_open[best_add] = 1;
      open.insert(std::lower_bound(open.begin(), open.end(), best_add), best_add);
    }
    current = best_cost;
    ++result.moves;
  }

  // Certificate: exhaustive re-scan finds nothing better.
  result.locally_optimal = true;
  candidates([&](int drop, int add) {
    std::vector<int> cand;
    for (int i : open) {
      if (i != drop) cand.push_back(i);
    }
    if (add >= 0) cand.insert(std::lower_bound(cand.begin(), cand.end(), add), add);
    const auto c = price(cand);
    if (c && *c < *current - 1e-12) result.locally_optimal = false;
  });

  result.cost = *current;
  result.solution.open = open;
  const auto assigned = assign_lower_bounded(inst, open, b);
  result.solution.assignment = to_assignment_vector(assigned.assignment, inst.num_clients());
  return result;
}

}  // namespace lbfl
