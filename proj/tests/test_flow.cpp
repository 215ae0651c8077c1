#include <catch2/catch_amalgamated.hpp>

#include <functional>
#include <random>

#include "lbfl/core.hpp"
#include "lbfl/flow.hpp"
#include "lbfl/gallery.hpp"
#include "test_helpers.hpp"

using namespace lbfl;

namespace {

// Independent oracle: enumerate every integral flow on a tiny network and
// return the cheapest one meeting the required value.
double brute_force_min_cost(const FlowNetwork& net) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::int64_t> flow(net.arcs.size(), 0);
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k == net.arcs.size()) {
      std::vector<std::int64_t> balance(net.num_nodes, 0);
      double cost = 0.0;
      for (std::size_t e = 0; e < net.arcs.size(); ++e) {
        balance[net.arcs[e].from] -= flow[e];
        balance[net.arcs[e].to] += flow[e];
        cost += static_cast<double>(flow[e]) * net.arcs[e].cost;
      }
      if (balance[net.source] != -net.required || balance[net.sink] != net.required) return;
      for (int v = 0; v < net.num_nodes; ++v) {
        if (v != net.source && v != net.sink && balance[v] != 0) return;
      }
      best = std::min(best, cost);
      return;
    }
    for (std::int64_t f = 0; f <= net.arcs[k].capacity; ++f) {
      flow[k] = f;
      rec(k + 1);
    }
    flow[k] = 0;
  };
  rec(0);
  return best;
}

// Independent transportation oracle: assign demand units one at a time over
// all supplier choices, respecting capacities.
double brute_force_transport(const CduflInstance& inst, const std::vector<int>& open_uncap) {
  std::vector<int> units;       // demand index per unit
  for (int d = 0; d < inst.num_demands(); ++d) {
    for (std::int64_t k = 0; k < inst.demands()[d].demand; ++k) units.push_back(d);
  }
  std::vector<int> suppliers;
  for (int u : open_uncap) suppliers.push_back(u);
  for (int c = 0; c < inst.num_cap(); ++c) suppliers.push_back(inst.num_uncap() + c);
  std::vector<std::int64_t> remaining(suppliers.size());
  for (std::size_t s = 0; s < suppliers.size(); ++s) {
    remaining[s] = inst.supplier_is_uncap(suppliers[s])
                       ? static_cast<std::int64_t>(units.size())
                       : inst.cap()[suppliers[s] - inst.num_uncap()].capacity;
  }
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, double)> rec = [&](std::size_t k, double cost) {
    if (cost >= best) return;
    if (k == units.size()) {
      best = cost;
      return;
    }
    for (std::size_t s = 0; s < suppliers.size(); ++s) {
      if (remaining[s] == 0) continue;
      --remaining[s];
      rec(k + 1, cost + inst.supplier_demand_dist(suppliers[s], units[k]));
      ++remaining[s];
    }
  };
  rec(0, 0.0);
  return best;
}

}  // namespace

TEST_CASE("min_cost_flow on a single arc") {
  FlowNetwork net{2, {{0, 1, 5, 2.0}}, 0, 1, 3};
  const auto result = min_cost_flow(net);
  CHECK(result.cost == Catch::Approx(6.0));
  CHECK(result.arc_flow[0] == 3);
}

TEST_CASE("min_cost_flow splits across parallel arcs") {
  FlowNetwork net{2, {{0, 1, 1, 1.0}, {0, 1, 1, 3.0}}, 0, 1, 2};
  const auto result = min_cost_flow(net);
  CHECK(result.cost == Catch::Approx(4.0));
  CHECK(result.assignment.units(0, 1) == 2);
}

TEST_CASE("min_cost_flow reports the max flow on infeasible demand") {
  FlowNetwork net{3, {{0, 1, 2, 1.0}, {1, 2, 1, 1.0}}, 0, 2, 2};
  try {
    min_cost_flow(net);
    FAIL("expected InfeasibleError");
  } catch (const InfeasibleError& e) {
    CHECK(std::string(e.what()).find("max flow is 1") != std::string::npos);
  }
}

TEST_CASE("min_cost_flow matches brute force on random 6-node networks") {
  std::mt19937_64 rng(2024);
  for (int round = 0; round < 30; ++round) {
    FlowNetwork net;
    net.num_nodes = 6;
    net.source = 0;
    net.sink = 5;
    const int arcs = 7 + static_cast<int>(rng() % 2);
    for (int e = 0; e < arcs; ++e) {
      int a = static_cast<int>(rng() % 5);
      int b = 1 + static_cast<int>(rng() % 5);
      if (a == b) b = (b % 5) + 1;
      net.arcs.push_back({a, b, 1 + static_cast<std::int64_t>(rng() % 3),
                          std::round(10.0 * test_helpers::u01(rng)) / 2.0});
    }
    const double brute = brute_force_min_cost(net);
    net.required = 1 + static_cast<std::int64_t>(rng() % 2);
    const double brute_at = brute_force_min_cost(net);
    if (std::isinf(brute_at)) {
      CHECK_THROWS_AS(min_cost_flow(net), InfeasibleError);
    } else {
      CHECK(min_cost_flow(net).cost == Catch::Approx(brute_at).margin(1e-9));
    }
    (void)brute;
  }
}

TEST_CASE("flows are integral whenever capacities are") {
  std::mt19937_64 rng(5);
  for (int round = 0; round < 10; ++round) {
    FlowNetwork net;
    net.num_nodes = 5;
    net.source = 0;
    net.sink = 4;
    for (int e = 0; e < 8; ++e) {
      net.arcs.push_back({static_cast<int>(rng() % 4), 1 + static_cast<int>(rng() % 4),
                          1 + static_cast<std::int64_t>(rng() % 4), test_helpers::u01(rng)});
    }
    net.required = 0;
    const auto result = min_cost_flow(net);
    for (std::int64_t f : net.arcs.size() ? result.arc_flow : std::vector<std::int64_t>{}) {
      CHECK(f >= 0);  // int64 by construction; nonnegativity is the invariant
    }
  }
}

TEST_CASE("assign_lower_bounded with M=1 is nearest-facility assignment") {
  const auto inst = gen_random(9, 3, 7, 1, 0.0, 1.0);
  const std::vector<int> open{0, 1, 2};
  const auto result = assign_lower_bounded(inst, open);
  double nearest_total = 0.0;
  for (int j = 0; j < inst.num_clients(); ++j) {
    double nearest = inst.facility_client(0, j);
    for (int i : open) nearest = std::min(nearest, inst.facility_client(i, j));
    nearest_total += nearest;
  }
  CHECK(result.cost == Catch::Approx(nearest_total).margin(1e-9));
}

TEST_CASE("assign_lower_bounded gives each facility its co-located pair") {
  // Two facilities, two co-located client pairs, M = 2.
  std::vector<WeightedEdge> edges{{0, 2, 0.0}, {0, 3, 0.0}, {1, 4, 0.0}, {1, 5, 0.0},
                                  {0, 1, 7.0}};
  const auto d = metric_completion(6, edges);
  const LbflInstance inst({0.0, 0.0}, 4, d, 2);
  const auto result = assign_lower_bounded(inst, {0, 1});
  CHECK(result.cost == Catch::Approx(0.0).margin(1e-12));
  CHECK(result.assignment.supplier_total(0) == 2);
  CHECK(result.assignment.supplier_total(1) == 2);
}

TEST_CASE("assign_lower_bounded matches exhaustive assignment enumeration") {
  std::mt19937_64 rng(31);
  for (int round = 0; round < 8; ++round) {
    const auto inst = gen_random(100 + round, 3, 9, 3, 0.0, 1.0);
    const std::vector<int> open{0, 1, 2};
    const auto result = assign_lower_bounded(inst, open);
    // 3^9 assignments, keep those serving every facility >= 3 clients.
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> pick(9, 0);
    std::function<void(int, double)> rec = [&](int j, double cost) {
      if (j == 9) {
        std::vector<int> served(3, 0);
        for (int c = 0; c < 9; ++c) ++served[pick[c]];
        if (served[0] >= 3 && served[1] >= 3 && served[2] >= 3) best = std::min(best, cost);
        return;
      }
      for (int f = 0; f < 3; ++f) {
        pick[j] = f;
        rec(j + 1, cost + inst.facility_client(f, j));
      }
    };
    rec(0, 0.0);
    CHECK(result.cost == Catch::Approx(best).margin(1e-9));
  }
}

TEST_CASE("assign_lower_bounded refuses too few clients") {
  const auto inst = gen_random(1, 3, 5, 2, 0.0, 1.0);
  CHECK_THROWS_AS(assign_lower_bounded(inst, {0, 1, 2}), InfeasibleError);
}

TEST_CASE("assign_lower_bounded cost never rises when a client moves closer") {
  std::mt19937_64 rng(77);
  for (int round = 0; round < 15; ++round) {
    const int nf = 3, nd = 7;
    std::vector<std::vector<double>> cost(nf, std::vector<double>(nd));
    for (auto& row : cost) {
      for (double& c : row) c = test_helpers::u01(rng);
    }
    const std::vector<int> open{0, 1, 2};
    const double before = assign_lower_bounded(cost, 2, open).cost;
    const int j = static_cast<int>(rng() % nd);
    for (int i = 0; i < nf; ++i) cost[i][j] *= 0.5;  // closer to every facility
    const double after = assign_lower_bounded(cost, 2, open).cost;
    CHECK(after <= before + 1e-9);
  }
}

TEST_CASE("cdufl_best_assignment serves co-located demand for free") {
  const auto gap = gen_cdufl_gap(7.0, 4);
  const auto result = cdufl_best_assignment(gap.instance, {0});
  CHECK(result.cost == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("cdufl_best_assignment prices distance times units") {
  DistanceMatrix d(2);
  d.at(0, 1) = d.at(1, 0) = 2.0;
  const CduflInstance inst(d, {{0, 1.0}}, {}, {{1, 3}});
  const auto result = cdufl_best_assignment(inst, {0});
  CHECK(result.cost == Catch::Approx(6.0));
}

TEST_CASE("cdufl_best_assignment is infeasible without enough open capacity") {
  const auto gap = gen_cdufl_gap(7.0, 4);
  CHECK_THROWS_AS(cdufl_best_assignment(gap.instance, {}), InfeasibleError);
}

TEST_CASE("cdufl_best_assignment matches the unit-enumeration oracle") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const auto inst = test_helpers::random_cdufl(seed * 17 + 3, 2, 2, 12);
    std::vector<int> open;
    for (int u = 0; u < inst.num_uncap(); ++u) open.push_back(u);
    const auto result = cdufl_best_assignment(inst, open);
    CHECK(result.cost == Catch::Approx(brute_force_transport(inst, open)).margin(1e-9));
  }
}

TEST_CASE("cdufl_best_assignment with only uncapacitated points is nearest assignment") {
  std::mt19937_64 rng(13);
  const int n_loc = 6;
  std::vector<std::pair<double, double>> pts(n_loc);
  for (auto& p : pts) p = {test_helpers::u01(rng), test_helpers::u01(rng)};
  DistanceMatrix d(n_loc);
  for (int a = 0; a < n_loc; ++a)
    for (int b = 0; b < n_loc; ++b)
      d.at(a, b) = std::hypot(pts[a].first - pts[b].first, pts[a].second - pts[b].second);
  const CduflInstance inst(d, {{0, 1.0}, {1, 1.0}, {2, 1.0}}, {},
                           {{3, 2}, {4, 1}, {5, 3}});
  const auto result = cdufl_best_assignment(inst, {0, 1, 2});
  double nearest_total = 0.0;
  for (int dd = 0; dd < inst.num_demands(); ++dd) {
    double nearest = inst.supplier_demand_dist(0, dd);
    for (int u = 1; u < 3; ++u) nearest = std::min(nearest, inst.supplier_demand_dist(u, dd));
    nearest_total += nearest * static_cast<double>(inst.demands()[dd].demand);
  }
  CHECK(result.cost == Catch::Approx(nearest_total).margin(1e-9));
}

TEST_CASE("assignment totals stay consistent with entries") {
  Assignment a;
  a.add(2, 5, 3);
  a.add(2, 6, 1);
  a.add(1, 5, 2);
  CHECK(a.supplier_total(2) == 4);
  CHECK(a.receiver_total(5) == 5);
  CHECK(a.units(2, 5) == 3);
  std::int64_t sum = 0;
  for (const auto& e : a.entries()) sum += e.units;
  CHECK(sum == 6);
}
