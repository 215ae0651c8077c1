#include <catch2/catch_amalgamated.hpp>

#include <functional>

#include "lbfl/gallery.hpp"
#include "lbfl/oracle.hpp"
#include "lbfl/reduction.hpp"
#include "test_helpers.hpp"

using namespace lbfl;

TEST_CASE("exact_lbfl on the star instance opens the hub") {
  const int m = 4;
  const double eps = 1e-3;
  const auto g = gen_locality_star(m, eps);
  const auto opt = exact_lbfl(g.instance);
  CHECK(opt.open == std::vector<int>{0});
  CHECK(opt.cost.total == Catch::Approx(2.0 * m * m + eps));
}

TEST_CASE("exact_lbfl on the cycle instance opens the o side") {
  const int k = 3;
  const auto g = gen_locality_cycle(k, 0.1);
  const auto opt = exact_lbfl(g.instance);
  CHECK(opt.open == std::vector<int>{0, 1, 2});
  CHECK(opt.cost.total == Catch::Approx(2.0 * k));
}

TEST_CASE("exact_lbfl trivial single facility") {
  const auto d = metric_completion(4, {{0, 1, 0.0}, {0, 2, 0.0}, {0, 3, 0.0}});
  const LbflInstance inst({5.0}, 3, d, 3);
  const auto opt = exact_lbfl(inst);
  CHECK(opt.cost.total == Catch::Approx(5.0));
  CHECK(opt.open == std::vector<int>{0});
}

TEST_CASE("exact_lbfl refuses oversized instances without truncating") {
  const auto inst = gen_random(3, 5, 10, 2, 0.0, 1.0);
  OracleConfig cfg;
  cfg.max_facilities = 4;
  CHECK_THROWS_AS(exact_lbfl(inst, cfg), SizeLimitError);
}

TEST_CASE("exact_lbfl rejects infeasible demand") {
  DistanceMatrix d(3);
  const LbflInstance inst({1.0, 2.0}, 1, d, 2);
  CHECK_THROWS_AS(exact_lbfl(inst), InfeasibleError);
}

TEST_CASE("exact_lbfl result is always feasible") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = gen_random(seed + 11, 5, 11, 3, 0.0, 1.0);
    const auto opt = exact_lbfl(inst);
    CHECK(check_feasible(inst, {opt.open, opt.assignment}).feasible);
  }
}

TEST_CASE("exact_ufl opens a single facility when it dominates") {
  const auto d = metric_completion(3, {{0, 2, 0.0}, {0, 1, 1.0}});
  const UflInstance inst({1.0, 1.0}, 1, d);
  const auto opt = exact_ufl(inst);
  CHECK(opt.open == std::vector<int>{0});
}

TEST_CASE("exact_ufl breaks ties toward the lexicographically smallest set") {
  const auto d = metric_completion(3, {{0, 2, 1.0}, {1, 2, 1.0}, {0, 1, 2.0}});
  const UflInstance inst({3.0, 3.0}, 1, d);
  const auto opt = exact_ufl(inst);
  CHECK(opt.open == std::vector<int>{0});
}

TEST_CASE("exact_ufl matches an independent direct-sum evaluation") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto base = gen_random(seed + 70, 6, 10, 1, 0.0, 1.0);
    const UflInstance inst(base.opening_costs(), 10, base.dist());
    const auto opt = exact_ufl(inst);
    // Recompute by plain subset recursion with a fresh cost evaluator.
    double best = std::numeric_limits<double>::infinity();
    for (unsigned mask = 1; mask < (1u << 6); ++mask) {
      double cost = 0.0;
      for (int i = 0; i < 6; ++i) {
        if (mask & (1u << i)) cost += inst.opening_cost(i);
      }
      for (int j = 0; j < 10; ++j) {
        double nearest = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 6; ++i) {
          if (mask & (1u << i)) nearest = std::min(nearest, inst.facility_client(i, j));
        }
        cost += nearest;
      }
      best = std::min(best, cost);
    }
    CHECK(opt.cost.total == Catch::Approx(best).margin(1e-9));
  }
}

TEST_CASE("exact_lbfl equals exact_ufl when M = 1") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto inst = gen_random(seed + 21, 5, 9, 1, 0.0, 1.0);
    const UflInstance ufl(inst.opening_costs(), 9, inst.dist());
    CHECK(exact_lbfl(inst).cost.total == Catch::Approx(exact_ufl(ufl).cost.total).margin(1e-9));
  }
}

TEST_CASE("exact_cdufl on the gap instance pays the uncapacitated cost") {
  const auto gap = gen_cdufl_gap(9.0, 3);
  const auto opt = exact_cdufl(gap.instance);
  CHECK(opt.total == Catch::Approx(9.0));
  CHECK(opt.open_uncap == std::vector<int>{0});
}

TEST_CASE("exact_cdufl with zero demand opens nothing") {
  DistanceMatrix d(2);
  d.at(0, 1) = d.at(1, 0) = 1.0;
  const CduflInstance inst(d, {{0, 5.0}}, {{1, 2}}, {});
  const auto opt = exact_cdufl(inst);
  CHECK(opt.total == Catch::Approx(0.0));
  CHECK(opt.open_uncap.empty());
}

TEST_CASE("exact_cdufl matches an independent subset re-enumeration") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto inst = test_helpers::random_cdufl(seed * 13 + 1, 4, 2, 10);
    const auto opt = exact_cdufl(inst);
    double best = std::numeric_limits<double>::infinity();
    for (unsigned mask = 0; mask < (1u << inst.num_uncap()); ++mask) {
      std::vector<int> open;
      double facility = 0.0;
      for (int u = 0; u < inst.num_uncap(); ++u) {
        if (mask & (1u << u)) {
          open.push_back(u);
          facility += inst.uncap()[u].opening_cost;
        }
      }
      if (open.empty() && inst.total_capacity() < inst.total_demand()) continue;
      best = std::min(best, facility + cdufl_best_assignment(inst, open).cost);
    }
    CHECK(opt.total == Catch::Approx(best).margin(1e-9));
  }
}

TEST_CASE("oracle subset counters report the enumeration effort") {
  const auto inst = gen_random(2, 4, 8, 2, 0.0, 1.0);
  const auto opt = exact_lbfl(inst);
  CHECK(opt.subsets_tried == 15);  // 2^4 - 1 nonempty subsets, all feasible
}

TEST_CASE("exact_lbfl on an aggregated instance yields the I2 optimum") {
  // The I2 optimum as LBFL with zero opening costs; sanity: assignment-only.
  const auto inst = gen_random(15, 4, 12, 3, 0.0, 1.0);
  const auto b = solve_bicriteria(inst, 1.0, 0.15);
  const auto i2 = build_i2(inst, b);
  const auto opt = exact_lbfl(i2_to_lbfl(i2));
  CHECK(opt.cost.facility_cost == Catch::Approx(0.0));
  CHECK(opt.cost.total >= 0.0);
}
