#include <catch2/catch_amalgamated.hpp>

#include "lbfl/bicriteria.hpp"
#include "lbfl/gallery.hpp"
#include "lbfl/oracle.hpp"
#include "lbfl/pipeline.hpp"
#include "test_helpers.hpp"

using namespace lbfl;

namespace {

LbflInstance line_instance(const std::vector<double>& client_offsets, double f_cost,
                           std::int64_t m) {
  // Facility 0 at the origin of a line, clients at the given offsets.
  std::vector<WeightedEdge> edges;
  for (std::size_t c = 0; c < client_offsets.size(); ++c) {
    edges.push_back({0, 1 + static_cast<int>(c), client_offsets[c]});
  }
  const auto d = metric_completion(1 + static_cast<int>(client_offsets.size()), edges);
  return LbflInstance({f_cost}, static_cast<int>(client_offsets.size()), d, m);
}

}  // namespace

TEST_CASE("ceil_alpha_count lands on breakpoints exactly") {
  CHECK(ceil_alpha_count(0.5, 4) == 2);
  CHECK(ceil_alpha_count(0.26, 4) == 2);   // ceil(1.04) = 2
  CHECK(ceil_alpha_count(1.0, 4) == 4);
  CHECK(ceil_alpha_count(0.7, 10) == 7);
  CHECK(ceil_alpha_count(0.8, 10) == 8);   // 0.8*10 rounds just above 8
  CHECK(ceil_alpha_count(0.67, 100) == 67);
  CHECK(ceil_alpha_count(0.670000001, 100) == 68);
}

TEST_CASE("radius picks the ceil(alpha M)-closest client") {
  const auto inst = line_instance({1, 2, 3, 4}, 0.0, 4);
  CHECK(radius(inst, 0, 0.5) == Catch::Approx(2.0));
  CHECK(radius(inst, 0, 1.0) == Catch::Approx(4.0));
  CHECK(radius(inst, 0, 0.26) == Catch::Approx(2.0));
  CHECK(radius(inst, 0, 0.25) == Catch::Approx(1.0));
}

TEST_CASE("radius table step integral identity") {
  // M * integral of R_i equals the sum of the M nearest distances, summed
  // exactly as the sorted list.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = gen_random(seed, 4, 9, 4, 0.0, 1.0);
    const RadiusTable radii(inst);
    for (int i = 0; i < inst.num_facilities(); ++i) {
      double rank_sum = 0.0;
      for (std::int64_t k = 1; k <= inst.lower_bound(); ++k) {
        rank_sum += radii.radius_by_rank(i, k);
      }
      CHECK(rank_sum == Catch::Approx(radii.sum_m_nearest(i)).margin(1e-12));
    }
  }
}

TEST_CASE("radius is non-decreasing in alpha") {
  const auto inst = gen_random(3, 5, 12, 4, 0.0, 1.0);
  const RadiusTable radii(inst);
  for (int i = 0; i < inst.num_facilities(); ++i) {
    for (std::int64_t k = 1; k < inst.lower_bound(); ++k) {
      CHECK(radii.radius_by_rank(i, k) <= radii.radius_by_rank(i, k + 1));
    }
  }
}

TEST_CASE("r_star over any facility set is non-decreasing in alpha") {
  const auto inst = gen_random(8, 5, 15, 5, 0.0, 1.0);
  const RadiusTable radii(inst);
  const std::vector<int> open{0, 2, 4};
  double prev = 0.0;
  for (std::int64_t k = 1; k <= inst.lower_bound(); ++k) {
    double r_star = 0.0;
    for (int i : open) r_star += radii.radius_by_rank(i, k);
    CHECK(r_star >= prev - 1e-12);
    prev = r_star;
  }
}

TEST_CASE("build_bicriteria_ufl applies the 2 alpha M R surcharge") {
  const auto inst = line_instance({3, 5}, 0.0, 2);
  const auto modified = build_bicriteria_ufl(inst, 1.0);
  CHECK(modified.opening_cost(0) == Catch::Approx(2.0 * 1.0 * 2.0 * 5.0));  // 20
}

TEST_CASE("zero radius leaves the opening cost unchanged") {
  const auto inst = line_instance({0.0, 4.0}, 1.5, 2);
  // alpha with ceil(alpha M) = 1 and the nearest client co-located.
  const auto modified = build_bicriteria_ufl(inst, 0.5);
  CHECK(modified.opening_cost(0) == Catch::Approx(1.5));
}

TEST_CASE("co-located clients leave every opening cost unchanged") {
  const auto d = metric_completion(4, {{0, 1, 0.0}, {0, 2, 0.0}, {0, 3, 0.0}});
  const LbflInstance inst({2.0, 3.0}, 2, d, 2);
  const auto modified = build_bicriteria_ufl(inst, 1.0);
  CHECK(modified.opening_cost(0) == Catch::Approx(2.0));
  CHECK(modified.opening_cost(1) == Catch::Approx(3.0));
}

TEST_CASE("solve_bicriteria on a single facility") {
  const auto inst = line_instance({1, 2, 3}, 2.0, 3);
  const auto b = solve_bicriteria(inst, 1.0, 0.5);
  CHECK(b.open == std::vector<int>{0});
  CHECK(b.served == std::vector<std::int64_t>{3});
}

TEST_CASE("solve_bicriteria meets the service floor on the star instance") {
  const auto g = gen_locality_star(4);
  const auto b = solve_bicriteria(g.instance, 1.0, 1.0);
  for (std::int64_t s : b.served) CHECK(s >= 4);
}

TEST_CASE("solve_bicriteria service floor and Lemma bounds on random instances") {
  LocalSearchConfig ls;
  ls.epsilon_ls = 1e-9;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto inst = gen_random(seed * 13 + 1, 5, 14, 3, 0.0, 1.5);
    const auto opt = exact_lbfl(inst);
    const RadiusTable radii(inst);
    for (double alpha : enumerate_alphas(3, 0.67)) {
      const double gamma = gamma_schedule(alpha, 0.67);
      const auto b = solve_bicriteria(inst, alpha, gamma, ls);
      const std::int64_t need = ceil_alpha_count(alpha, 3);
      std::int64_t total_served = 0;
      for (std::int64_t s : b.served) {
        CHECK(s >= need);
        total_served += s;
      }
      CHECK(total_served == inst.num_clients());

      double r_star = 0.0;
      for (int i : opt.open) r_star += radii.radius(i, alpha);
      const double modified = opt.cost.facility_cost + 2.0 * alpha * 3.0 * r_star;
      CHECK(b.search_facility_cost <=
            (modified + 2.0 * opt.cost.assignment_cost / gamma) * (1.0 + 1e-3) + 1e-9);
      CHECK(b.search_assignment_cost <=
            (gamma * modified + opt.cost.assignment_cost) * (1.0 + 1e-3) + 1e-9);
      CHECK(b.facility_cost <= b.search_facility_cost + 1e-9);
    }
  }
}

TEST_CASE("delete-optimal solutions of the modified instance meet the service floor") {
  // The guarantee behind the bicriteria step, in its pure form: whenever a
  // solution of the surcharged instance admits no improving deletion, every
  // open facility serves at least ceil(alpha*M) clients.
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = gen_random(seed * 29 + 3, 6, 13, 4, 0.0, 1.2);
    for (double alpha : {0.75, 1.0}) {
      const auto modified = build_bicriteria_ufl(inst, alpha);
      UflSolution sol;
      for (int i = 0; i < modified.num_facilities(); ++i) sol.open.push_back(i);
      sol.assignment = assign_nearest(modified, sol.open);
      sol = make_delete_optimal(modified, std::move(sol));
      std::vector<std::int64_t> served(modified.num_facilities(), 0);
      for (int f : sol.assignment) ++served[f];
      const std::int64_t need = ceil_alpha_count(alpha, inst.lower_bound());
      for (int i : sol.open) CHECK(served[i] >= need);
    }
  }
}

TEST_CASE("solve_bicriteria propagates infeasibility") {
  const auto inst = line_instance({1, 2}, 1.0, 2);
  CHECK_THROWS_AS(solve_bicriteria(inst, 1.0, 0.0), std::domain_error);
  DistanceMatrix d(3);
  const LbflInstance small({1.0}, 2, d, 3);
  CHECK_THROWS_AS(solve_bicriteria(small, 1.0, 1.0), InfeasibleError);
}
