#pragma once

#include <array>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lbfl/core.hpp"
#include "lbfl/pipeline.hpp"

namespace lbfl {

inline constexpr int kFileFormatVersion = 1;
inline constexpr const char* kToolName = "lbfl";
inline constexpr const char* kToolVersion = "1.0.0";

/// An instance together with the external names used in its file form.
/// Internal ids are dense and ordered as the file listed them.
struct NamedInstance {
  LbflInstance instance;
  std::vector<std::string> facility_names;
  std::vector<std::string> client_names;
  bool has_points = false;
  std::vector<std::array<double, 2>> points;  // facilities then clients
};

namespace detail {

inline std::string name_of(const nlohmann::json& id) {
  if (id.is_string()) return id.get<std::string>();
  if (id.is_number_integer()) return std::to_string(id.get<long long>());
  throw std::invalid_argument("instance file: ids must be strings or integers");
}

}  // namespace detail

/// Parses the JSON instance schema:
///   {"format":1, "M":int, "facilities":[{"id","opening_cost"}],
///    "clients":[{"id"}], "points":{id:[x,y]} XOR "distances":[[...]]}
/// The distance matrix is ordered facilities first, then clients.
inline NamedInstance instance_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("instance file: not a JSON object");
  if (!j.contains("M") || !j["M"].is_number_integer()) {
    throw std::invalid_argument("instance file: missing integer field 'M'");
  }
  if (!j.contains("facilities") || !j["facilities"].is_array() || j["facilities"].empty()) {
    throw std::invalid_argument("instance file: missing nonempty 'facilities' array");
  }
  if (!j.contains("clients") || !j["clients"].is_array()) {
    throw std::invalid_argument("instance file: missing 'clients' array");
  }
  const bool has_points = j.contains("points");
  const bool has_dist = j.contains("distances");
  if (has_points == has_dist) {
    throw std::invalid_argument("instance file: exactly one of 'points'/'distances' required");
  }

  std::vector<std::string> facility_names;
  std::vector<double> costs;
  for (const auto& f : j["facilities"]) {
    if (!f.contains("id") || !f.contains("opening_cost")) {
      throw std::invalid_argument("instance file: facility needs 'id' and 'opening_cost'");
    }
    facility_names.push_back(detail::name_of(f["id"]));
    costs.push_back(f["opening_cost"].get<double>());
  }
  std::vector<std::string> client_names;
  for (const auto& c : j["clients"]) {
    if (!c.contains("id")) throw std::invalid_argument("instance file: client needs 'id'");
    client_names.push_back(detail::name_of(c["id"]));
  }
  {
    std::vector<std::string> all = facility_names;
    all.insert(all.end(), client_names.begin(), client_names.end());
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end()) {
      throw std::invalid_argument("instance file: duplicate point id");
    }
  }

  const int num_points = static_cast<int>(facility_names.size() + client_names.size());
  DistanceMatrix dist(num_points);
  std::vector<std::array<double, 2>> points;
  if (has_points) {
    const auto& pj = j["points"];
    if (!pj.is_object()) throw std::invalid_argument("instance file: 'points' must be an object");
    auto lookup = [&](const std::string& name) {
      if (!pj.contains(name)) {
        throw std::invalid_argument("instance file: no coordinates for point '" + name + "'");
      }
      const auto& arr = pj[name];
      if (!arr.is_array() || arr.size() != 2) {
        throw std::invalid_argument("instance file: point '" + name + "' must be [x, y]");
      }
      return std::array<double, 2>{arr[0].get<double>(), arr[1].get<double>()};
    };
    for (const auto& n : facility_names) points.push_back(lookup(n));
    for (const auto& n : client_names) points.push_back(lookup(n));
    for (int a = 0; a < num_points; ++a) {
      for (int b = 0; b < num_points; ++b) {
        dist.at(a, b) = std::hypot(points[a][0] - points[b][0], points[a][1] - points[b][1]);
      }
    }
  } else {
    const auto& dj = j["distances"];
    if (!dj.is_array() || static_cast<int>(dj.size()) != num_points) {
      throw std::invalid_argument("instance file: 'distances' must be a full square matrix");
    }
    for (int a = 0; a < num_points; ++a) {
      if (!dj[a].is_array() || static_cast<int>(dj[a].size()) != num_points) {
        throw std::invalid_argument("instance file: 'distances' must be a full square matrix");
      }
      for (int b = 0; b < num_points; ++b) dist.at(a, b) = dj[a][b].get<double>();
    }
    const MetricReport report = validate_metric(dist);
    if (!report.ok()) {
      throw std::invalid_argument("instance file: distances are not a metric (" +
                                  std::to_string(report.symmetry.size()) + " symmetry, " +
                                  std::to_string(report.diagonal.size()) + " diagonal, " +
                                  std::to_string(report.triangle.size()) + " triangle issues)");
    }
  }

  NamedInstance out{
      LbflInstance(std::move(costs), static_cast<int>(client_names.size()), std::move(dist),
                   j["M"].get<std::int64_t>()),
      std::move(facility_names), std::move(client_names), has_points, std::move(points)};
  return out;
}

inline nlohmann::json instance_to_json(const NamedInstance& named) {
  nlohmann::json j;
  j["format"] = kFileFormatVersion;
  j["M"] = named.instance.lower_bound();
  j["facilities"] = nlohmann::json::array();
  for (int i = 0; i < named.instance.num_facilities(); ++i) {
    j["facilities"].push_back(
        {{"id", named.facility_names[i]}, {"opening_cost", named.instance.opening_cost(i)}});
  }
  j["clients"] = nlohmann::json::array();
  for (const auto& name : named.client_names) j["clients"].push_back({{"id", name}});
  if (named.has_points) {
    nlohmann::json pts = nlohmann::json::object();
    for (int i = 0; i < named.instance.num_facilities(); ++i) {
      pts[named.facility_names[i]] = {named.points[i][0], named.points[i][1]};
    }
    const int base = named.instance.num_facilities();
    for (std::size_t c = 0; c < named.client_names.size(); ++c) {
      pts[named.client_names[c]] = {named.points[base + c][0], named.points[base + c][1]};
    }
    j["points"] = std::move(pts);
  } else {
    const int n = named.instance.dist().size();
    nlohmann::json rows = nlohmann::json::array();
    for (int a = 0; a < n; ++a) {
      nlohmann::json row = nlohmann::json::array();
      for (int b = 0; b < n; ++b) row.push_back(named.instance.dist()(a, b));
      rows.push_back(std::move(row));
    }
    j["distances"] = std::move(rows);
  }
  return j;
}

/// Default names f0..fN / c0..cM for instances born in memory.
inline NamedInstance with_default_names(LbflInstance instance) {
  NamedInstance named{std::move(instance), {}, {}, false, {}};
  for (int i = 0; i < named.instance.num_facilities(); ++i) {
    named.facility_names.push_back("f" + std::to_string(i));
  }
  for (int c = 0; c < named.instance.num_clients(); ++c) {
    named.client_names.push_back("c" + std::to_string(c));
  }
  return named;
}

inline nlohmann::json checks_to_json(const std::vector<BoundCheck>& checks) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks) {
    arr.push_back({{"name", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"holds", c.holds}});
  }
  return arr;
}

/// Machine-readable mirror of a SolveReport plus the solution itself.
inline nlohmann::json report_to_json(const NamedInstance& named, const SolveReport& report,
                                     const LbflSolution& solution) {
  nlohmann::json j;
  j["format"] = kFileFormatVersion;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["seed"] = report.seed;
  j["parameters"] = {{"alpha", report.alpha}, {"gamma", report.gamma},
                     {"delta", report.delta}, {"beta", report.beta},
                     {"alpha_mode", report.alpha_mode}};
  j["stage_costs"] = {{"bicriteria_facility", report.bicriteria_facility_cost},
                      {"bicriteria_assignment", report.bicriteria_assignment_cost},
                      {"cdufl_facility", report.cdufl_facility_cost},
                      {"cdufl_assignment", report.cdufl_assignment_cost},
                      {"i2_constructive", report.i2_constructive_cost},
                      {"i2_final", report.i2_cost}};
  j["cost"] = {{"facility", report.final_cost.facility_cost},
               {"assignment", report.final_cost.assignment_cost},
               {"total", report.final_cost.total}};
  j["checks"] = checks_to_json(report.checks);
  nlohmann::json branches = nlohmann::json::array();
  for (const auto& b : report.branches) {
    branches.push_back(
        {{"alpha", b.alpha}, {"gamma", b.gamma}, {"delta", b.delta}, {"total", b.total}});
  }
  j["branches"] = std::move(branches);
  if (report.has_oracle) {
    j["oracle"] = {{"opt_total", report.opt_total},     {"opt_facility", report.opt_facility},
                   {"opt_assignment", report.opt_assignment}, {"r_star", report.r_star},
                   {"i2_opt_cost", report.i2_opt_cost}, {"ratio", report.ratio}};
  }
  nlohmann::json open = nlohmann::json::array();
  for (int i : solution.open) open.push_back(named.facility_names[i]);
  nlohmann::json assignment = nlohmann::json::array();
  for (int c = 0; c < named.instance.num_clients(); ++c) {
    assignment.push_back({{"client", named.client_names[c]},
                          {"facility", named.facility_names[solution.assignment[c]]}});
  }
  j["solution"] = {{"open", std::move(open)}, {"assignment", std::move(assignment)}};
  return j;
}

inline nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  nlohmann::json j;
  in >> j;
  return j;
}

inline NamedInstance load_instance(const std::string& path) {
  return instance_from_json(load_json(path));
}

inline void save_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

}  // namespace lbfl
