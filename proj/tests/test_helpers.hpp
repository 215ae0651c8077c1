#pragma once

#include <random>
#include <vector>

#include "lbfl/core.hpp"

namespace test_helpers {

inline double u01(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

/// Random connected weighted graph: a random spanning tree plus extra edges.
inline std::vector<lbfl::WeightedEdge> random_connected_graph(std::mt19937_64& rng, int n,
                                                              int extra_edges) {
  std::vector<lbfl::WeightedEdge> edges;
  for (int v = 1; v < n; ++v) {
    const int u = static_cast<int>(rng() % v);
    edges.push_back({u, v, 0.1 + 5.0 * u01(rng)});
  }
  for (int e = 0; e < extra_edges; ++e) {
    const int a = static_cast<int>(rng() % n);
    const int b = static_cast<int>(rng() % n);
    if (a != b) edges.push_back({a, b, 0.1 + 5.0 * u01(rng)});
  }
  return edges;
}

/// Random CDUFL instance on Euclidean locations; always feasible when
/// n_uncap >= 1.
inline lbfl::CduflInstance random_cdufl(std::uint64_t seed, int max_uncap = 6, int max_cap = 3,
                                        std::int64_t max_demand_units = 12) {
  std::mt19937_64 rng(seed);
  const int n_uncap = 1 + static_cast<int>(rng() % max_uncap);
  const int n_cap = static_cast<int>(rng() % (max_cap + 1));
  const int n_dem = 1 + static_cast<int>(rng() % 4);
  const int n_loc = n_uncap + n_cap + n_dem;
  std::vector<std::pair<double, double>> pts(n_loc);
  for (auto& p : pts) p = {u01(rng), u01(rng)};
  lbfl::DistanceMatrix d(n_loc);
  for (int a = 0; a < n_loc; ++a)
    for (int b = 0; b < n_loc; ++b)
      d.at(a, b) = std::hypot(pts[a].first - pts[b].first, pts[a].second - pts[b].second);
  std::vector<lbfl::CduflInstance::UncapSupply> uncap;
  std::vector<lbfl::CduflInstance::CapSupply> cap;
  std::vector<lbfl::CduflInstance::DemandPoint> dem;
  int loc = 0;
  for (int i = 0; i < n_uncap; ++i) uncap.push_back({loc++, 2.0 * u01(rng)});
  for (int i = 0; i < n_cap; ++i) cap.push_back({loc++, 1 + static_cast<std::int64_t>(rng() % 4)});
  std::int64_t total = 0;
  for (int i = 0; i < n_dem; ++i) {
    std::int64_t units = 1 + static_cast<std::int64_t>(rng() % 4);
    units = std::min(units, max_demand_units - total);
    if (units < 0) units = 0;
    total += units;
    dem.push_back({loc++, units});
  }
  return lbfl::CduflInstance(std::move(d), std::move(uncap), std::move(cap), std::move(dem));
}

}  // namespace test_helpers
