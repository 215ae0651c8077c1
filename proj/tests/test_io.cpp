#include <catch2/catch_amalgamated.hpp>

#include "lbfl/gallery.hpp"
#include "lbfl/io.hpp"

using namespace lbfl;

namespace {

nlohmann::json tiny_points_instance() {
  return nlohmann::json{
      {"format", 1},
      {"M", 2},
      {"facilities",
       {{{"id", "depot_a"}, {"opening_cost", 1.25}}, {{"id", "depot_b"}, {"opening_cost", 0.5}}}},
      {"clients", {{{"id", "c0"}}, {{"id", "c1"}}, {{"id", "c2"}}, {{"id", "c3"}}}},
      {"points",
       {{"depot_a", {0.0, 0.0}},
        {"depot_b", {1.0, 0.0}},
        {"c0", {0.1, 0.1}},
        {"c1", {0.2, 0.0}},
        {"c2", {0.9, 0.1}},
        {"c3", {1.0, 0.2}}}}};
}

}  // namespace

TEST_CASE("points instance parses with Euclidean distances") {
  const auto named = instance_from_json(tiny_points_instance());
  CHECK(named.instance.num_facilities() == 2);
  CHECK(named.instance.num_clients() == 4);
  CHECK(named.instance.lower_bound() == 2);
  CHECK(named.facility_names[0] == "depot_a");
  CHECK(named.instance.facility_client(0, 0) == Catch::Approx(std::hypot(0.1, 0.1)));
}

TEST_CASE("instance round-trips through JSON bit-exactly") {
  const auto named = instance_from_json(tiny_points_instance());
  const auto serialized = instance_to_json(named);
  const auto reparsed = instance_from_json(serialized);
  REQUIRE(reparsed.instance.dist().size() == named.instance.dist().size());
  for (int a = 0; a < named.instance.dist().size(); ++a) {
    for (int b = 0; b < named.instance.dist().size(); ++b) {
      CHECK(reparsed.instance.dist()(a, b) == named.instance.dist()(a, b));
    }
  }
  for (int i = 0; i < named.instance.num_facilities(); ++i) {
    CHECK(reparsed.instance.opening_cost(i) == named.instance.opening_cost(i));
  }
  CHECK(instance_to_json(reparsed) == serialized);
}

TEST_CASE("distance-matrix instances round-trip as well") {
  auto named = with_default_names(gen_random(5, 3, 6, 2, 0.0, 1.0));
  const auto serialized = instance_to_json(named);
  const auto reparsed = instance_from_json(serialized);
  CHECK(instance_to_json(reparsed) == serialized);
  for (int a = 0; a < named.instance.dist().size(); ++a) {
    for (int b = 0; b < named.instance.dist().size(); ++b) {
      CHECK(reparsed.instance.dist()(a, b) == named.instance.dist()(a, b));
    }
  }
}

TEST_CASE("schema violations are rejected with clear errors") {
  auto missing_m = tiny_points_instance();
  missing_m.erase("M");
  CHECK_THROWS_AS(instance_from_json(missing_m), std::invalid_argument);

  auto both = tiny_points_instance();
  both["distances"] = nlohmann::json::array();
  CHECK_THROWS_AS(instance_from_json(both), std::invalid_argument);

  auto dup = tiny_points_instance();
  dup["clients"][0]["id"] = "depot_a";
  CHECK_THROWS_AS(instance_from_json(dup), std::invalid_argument);

  auto missing_point = tiny_points_instance();
  missing_point["points"].erase("c3");
  CHECK_THROWS_AS(instance_from_json(missing_point), std::invalid_argument);
}

TEST_CASE("non-metric distance matrices are rejected") {
  nlohmann::json j{
      {"format", 1},
      {"M", 1},
      {"facilities", {{{"id", 0}, {"opening_cost", 1.0}}}},
      {"clients", {{{"id", 1}}, {{"id", 2}}}},
      {"distances", {{0.0, 1.0, 3.0}, {1.0, 0.0, 1.0}, {3.0, 1.0, 0.0}}}};
  CHECK_THROWS_AS(instance_from_json(j), std::invalid_argument);
}

TEST_CASE("reports embed solution, parameters, and checks") {
  const auto named = instance_from_json(tiny_points_instance());
  PipelineConfig cfg;
  cfg.oracle_diagnostics = true;
  const auto out = solve(named.instance, cfg);
  const auto j = report_to_json(named, out.report, out.solution);
  CHECK(j["format"] == 1);
  CHECK(j["tool"] == "lbfl");
  CHECK(j.contains("solution"));
  CHECK(j["solution"]["open"].size() == out.solution.open.size());
  CHECK(j["solution"]["assignment"].size() == 4);
  CHECK(j.contains("oracle"));
  for (const auto& c : j["checks"]) CHECK(c["holds"].get<bool>());
  // Embedded costs re-derivable from the embedded solution.
  const double embedded = j["cost"]["total"].get<double>();
  CHECK(embedded == Catch::Approx(evaluate_lbfl(named.instance, out.solution).total).margin(1e-9));
}

TEST_CASE("integer ids are accepted and stringified") {
  nlohmann::json j{{"format", 1},
                   {"M", 1},
                   {"facilities", {{{"id", 7}, {"opening_cost", 0.0}}}},
                   {"clients", {{{"id", 8}}}},
                   {"distances", {{0.0, 1.0}, {1.0, 0.0}}}};
  const auto named = instance_from_json(j);
  CHECK(named.facility_names[0] == "7");
  CHECK(named.client_names[0] == "8");
}
