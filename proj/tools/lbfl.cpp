// Command-line front end for the LBFL solver toolkit.
//
// Subcommands: solve, exact, compare, gen, gapdemo. All diagnostics go to
// stderr; reports are JSON on stdout unless --out is given. Exit codes:
// 0 success, 1 usage/schema/internal error, 2 infeasible instance,
// 3 oracle size cap exceeded.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lbfl/gallery.hpp"
#include "lbfl/io.hpp"
#include "lbfl/lbfl.hpp"

namespace {

using nlohmann::json;

struct SolveFlags {
  std::string instance_path;
  std::string mode = "derand";
  std::optional<double> alpha, gamma, delta;
  double beta = 0.67;
  double epsilon_ls = 1e-6;
  std::uint64_t seed = 0;
  bool oracle = false;
  int max_facilities = 16;
  std::string out;
};

void add_solve_flags(CLI::App* cmd, SolveFlags& flags, bool with_oracle_toggle) {
  cmd->add_option("instance", flags.instance_path, "Instance file (JSON)")->required();
  cmd->add_option("--mode", flags.mode, "Alpha mode: fixed, random, or derand")
      ->check(CLI::IsMember({"fixed", "random", "derand"}));
  cmd->add_option_function<double>(
      "--alpha", [&flags](double v) { flags.alpha = v; },
      "Fixed alpha in (0.5, 1] (snapped to its breakpoint)");
  cmd->add_option_function<double>(
      "--gamma", [&flags](double v) { flags.gamma = v; },
      "Facility-cost scaling for the bicriteria search (default per mode)");
  cmd->add_option_function<double>(
      "--delta", [&flags](double v) { flags.delta = v; },
      "CDUFL opening-cost factor (default delta(alpha))");
  cmd->add_option("--beta", flags.beta, "Lower end of the alpha range (default 0.67)");
  cmd->add_option("--epsilon-ls", flags.epsilon_ls,
                  "Relative local-search improvement threshold (default 1e-6)");
  cmd->add_option("--seed", flags.seed, "Seed for random mode (default 0)");
  if (with_oracle_toggle) {
    cmd->add_flag("--oracle", flags.oracle, "Also compute exact-oracle diagnostics");
  }
  cmd->add_option("--max-facilities", flags.max_facilities,
                  "Exact-oracle facility cap (default 16)");
  cmd->add_option("--out", flags.out, "Write the report here instead of stdout");
}

lbfl::PipelineConfig to_config(const SolveFlags& flags) {
  lbfl::PipelineConfig cfg;
  if (flags.mode == "fixed") {
    cfg.alpha_mode = lbfl::PipelineConfig::AlphaMode::Fixed;
    cfg.alpha = flags.alpha.value_or(0.75);
  } else if (flags.mode == "random") {
    cfg.alpha_mode = lbfl::PipelineConfig::AlphaMode::Random;
  } else {
    cfg.alpha_mode = lbfl::PipelineConfig::AlphaMode::Derandomized;
  }
  cfg.beta = flags.beta;
  cfg.gamma = flags.gamma;
  cfg.delta = flags.delta;
  cfg.epsilon_ls = flags.epsilon_ls;
  cfg.seed = flags.seed;
  cfg.oracle_diagnostics = flags.oracle;
  cfg.oracle_max_facilities = flags.max_facilities;
  cfg.validate();
  return cfg;
}

void emit(const json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    lbfl::save_json(j, out);
  }
}

int run_solve(const SolveFlags& flags) {
  const auto named = lbfl::load_instance(flags.instance_path);
  const auto result = lbfl::solve(named.instance, to_config(flags));
  emit(lbfl::report_to_json(named, result.report, result.solution), flags.out);
  return 0;
}

int run_exact(const std::string& path, int max_facilities, const std::string& out) {
  const auto named = lbfl::load_instance(path);
  lbfl::OracleConfig cfg{max_facilities};
  const auto opt = lbfl::exact_lbfl(named.instance, cfg);
  json j;
  j["format"] = lbfl::kFileFormatVersion;
  j["tool"] = lbfl::kToolName;
  j["version"] = lbfl::kToolVersion;
  j["cost"] = {{"facility", opt.cost.facility_cost},
               {"assignment", opt.cost.assignment_cost},
               {"total", opt.cost.total}};
  j["subsets_tried"] = opt.subsets_tried;
  json open = json::array();
  for (int i : opt.open) open.push_back(named.facility_names[i]);
  json assignment = json::array();
  for (int c = 0; c < named.instance.num_clients(); ++c) {
    assignment.push_back(
        {{"client", named.client_names[c]}, {"facility", named.facility_names[opt.assignment[c]]}});
  }
  j["solution"] = {{"open", std::move(open)}, {"assignment", std::move(assignment)}};
  emit(j, out);
  return 0;
}

int run_compare(const SolveFlags& flags_in) {
  SolveFlags flags = flags_in;
  flags.oracle = true;
  const auto named = lbfl::load_instance(flags.instance_path);
  const auto result = lbfl::solve(named.instance, to_config(flags));
  const auto& r = result.report;
  std::printf("alpha=%.6g gamma=%.6g delta=%.6g mode=%s\n", r.alpha, r.gamma, r.delta,
              r.alpha_mode.c_str());
  std::printf("%-28s %14s\n", "quantity", "value");
  auto row = [](const char* name, double v) { std::printf("%-28s %14.6f\n", name, v); };
  row("bicriteria facility (F_b)", r.bicriteria_facility_cost);
  row("bicriteria assignment (C_b)", r.bicriteria_assignment_cost);
  row("cdufl facility (F^S)", r.cdufl_facility_cost);
  row("cdufl assignment (C^S)", r.cdufl_assignment_cost);
  row("i2 constructive cost", r.i2_constructive_cost);
  row("i2 final cost", r.i2_cost);
  row("final facility cost", r.final_cost.facility_cost);
  row("final assignment cost", r.final_cost.assignment_cost);
  row("final total", r.final_cost.total);
  if (r.has_oracle) {
    row("optimum (OPT)", r.opt_total);
    row("optimum facility (F*)", r.opt_facility);
    row("optimum assignment (C*)", r.opt_assignment);
    row("R*(alpha)", r.r_star);
    row("I2 optimum", r.i2_opt_cost);
    row("cost / OPT", r.ratio);
  } else {
    std::printf("%-28s %14s\n", "oracle", "skipped (cap)");
  }
  std::printf("\n%-28s %14s %14s  verdict\n", "check", "lhs", "rhs");
  for (const auto& c : r.checks) {
    std::printf("%-28s %14.6f %14.6f  %s\n", c.name.c_str(), c.lhs, c.rhs,
                c.holds ? "holds" : "VIOLATED");
  }
  for (const auto& c : r.checks) {
    if (!c.holds) return 1;
  }
  return 0;
}

int run_gen(const std::string& family, std::uint64_t seed, int nf, int nd, std::int64_t m,
            double cost_min, double cost_max, double eps, double alpha, int k,
            const std::string& out) {
  lbfl::NamedInstance named = [&] {
    if (family == "random") {
      return lbfl::with_default_names(lbfl::gen_random(seed, nf, nd, m, cost_min, cost_max));
    }
    if (family == "star") {
      return lbfl::with_default_names(lbfl::gen_locality_star(m, eps, alpha).instance);
    }
    if (family == "cycle") {
      return lbfl::with_default_names(lbfl::gen_locality_cycle(k, eps).instance);
    }
    throw CLI::ValidationError("gen: unknown family '" + family + "'");
  }();
  emit(lbfl::instance_to_json(named), out);
  return 0;
}

int run_gapdemo(const std::string& family, std::int64_t m, int k, double eps, double f,
                std::int64_t u) {
  if (family == "star") {
    const auto g = lbfl::gen_locality_star(m, eps);
    const auto cert = lbfl::naive_lbfl_local_search(g.instance, g.designated_local);
    const auto opt = lbfl::exact_lbfl(g.instance);
    const double ratio = cert.cost / opt.cost.total;
    const double floor = static_cast<double>(m) / 2.0;
    const bool pass = cert.locally_optimal && cert.moves == 0 && ratio >= floor;
    std::printf("star M=%lld: local-search cost %.6f, optimum %.6f, ratio %.6f\n",
                static_cast<long long>(m), cert.cost, opt.cost.total, ratio);
    std::printf("designated solution locally optimal: %s\n", cert.locally_optimal ? "yes" : "NO");
    std::printf("ratio >= M/2 = %.6f: %s\n", floor, pass ? "PASS" : "FAIL");
    return pass ? 0 : 1;
  }
  if (family == "cycle") {
    const auto g = lbfl::gen_locality_cycle(k, eps);
    const auto cert = lbfl::naive_lbfl_local_search(g.instance, g.designated_local);
    const auto opt = lbfl::exact_lbfl(g.instance);
    const double ratio = cert.cost / opt.cost.total;
    const bool pass = cert.locally_optimal && cert.moves == 0 &&
                      std::abs(ratio - (k - eps)) <= 1e-9;
    std::printf("cycle k=%d: local-search cost %.6f, optimum %.6f, ratio %.6f (k - eps = %.6f)\n",
                k, cert.cost, opt.cost.total, ratio, k - eps);
    std::printf("designated solution locally optimal: %s\n", cert.locally_optimal ? "yes" : "NO");
    std::printf("ratio matches k - eps: %s\n", pass ? "PASS" : "FAIL");
    return pass ? 0 : 1;
  }
  if (family == "cdufl") {
    const auto g = lbfl::gen_cdufl_gap(f, u);
    const auto sol = lbfl::cdufl_local_search(g.instance);
    const double integral = sol.facility_cost + sol.assignment_cost;
    const double gap = integral / g.lp_value;
    const bool pass = std::abs(integral - g.integral_value) <= 1e-9 &&
                      std::abs(gap - g.expected_gap) <= 1e-9;
    std::printf("cdufl f=%.6f u=%lld: integral %.6f, LP value %.6f, gap %.6f (u + 1 = %lld)\n", f,
                static_cast<long long>(u), integral, g.lp_value, gap,
                static_cast<long long>(u + 1));
    std::printf("gap equals u + 1: %s\n", pass ? "PASS" : "FAIL");
    return pass ? 0 : 1;
  }
  throw CLI::ValidationError("gapdemo: unknown family '" + family + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lower-bounded facility location solver toolkit"};
  app.require_subcommand(1);

  SolveFlags solve_flags;
  auto* solve_cmd = app.add_subcommand("solve", "Solve an instance end to end");
  add_solve_flags(solve_cmd, solve_flags, /*with_oracle_toggle=*/true);

  std::string exact_path, exact_out;
  int exact_cap = 16;
  auto* exact_cmd = app.add_subcommand("exact", "Brute-force optimum of an instance");
  exact_cmd->add_option("instance", exact_path, "Instance file (JSON)")->required();
  exact_cmd->add_option("--max-facilities", exact_cap, "Facility cap (default 16)");
  exact_cmd->add_option("--out", exact_out, "Write the report here instead of stdout");

  SolveFlags compare_flags;
  auto* compare_cmd =
      app.add_subcommand("compare", "Solve, compute the optimum, and print the ratio table");
  add_solve_flags(compare_cmd, compare_flags, /*with_oracle_toggle=*/false);

  std::string gen_family, gen_out;
  std::uint64_t gen_seed = 0;
  int gen_nf = 5, gen_nd = 15, gen_k = 3;
  std::int64_t gen_m = 3;
  double gen_cmin = 0.0, gen_cmax = 1.0, gen_eps = 1e-3, gen_alpha = 1.0;
  auto* gen_cmd = app.add_subcommand("gen", "Generate an instance file");
  gen_cmd->add_option("family", gen_family, "random, star, or cycle")->required();
  gen_cmd->add_option("--seed", gen_seed, "Random-family seed");
  gen_cmd->add_option("--nf", gen_nf, "Facilities (random family)");
  gen_cmd->add_option("--nd", gen_nd, "Clients (random family)");
  gen_cmd->add_option("--M", gen_m, "Lower bound (random/star families)");
  gen_cmd->add_option("--cost-min", gen_cmin, "Opening-cost range lower end");
  gen_cmd->add_option("--cost-max", gen_cmax, "Opening-cost range upper end");
  gen_cmd->add_option("--eps", gen_eps, "Gallery epsilon (default 1e-3)");
  gen_cmd->add_option("--alpha", gen_alpha, "Star variant group size factor");
  gen_cmd->add_option("--k", gen_k, "Cycle parameter");
  gen_cmd->add_option("--out", gen_out, "Write the instance here instead of stdout");

  std::string demo_family;
  std::int64_t demo_m = 6, demo_u = 4;
  int demo_k = 4;
  double demo_eps = 1e-3, demo_f = 10.0;
  auto* demo_cmd = app.add_subcommand("gapdemo", "Run a locality/integrality gap demonstration");
  demo_cmd->add_option("family", demo_family, "star, cycle, or cdufl")->required();
  demo_cmd->add_option("--M", demo_m, "Star parameter");
  demo_cmd->add_option("--k", demo_k, "Cycle parameter");
  demo_cmd->add_option("--eps", demo_eps, "Epsilon (default 1e-3)");
  demo_cmd->add_option("--f", demo_f, "CDUFL uncapacitated opening cost");
  demo_cmd->add_option("--u", demo_u, "CDUFL capacity");

  try {
    app.parse(argc, argv);
    if (*solve_cmd) return run_solve(solve_flags);
    if (*exact_cmd) return run_exact(exact_path, exact_cap, exact_out);
    if (*compare_cmd) return run_compare(compare_flags);
    if (*gen_cmd) {
      return run_gen(gen_family, gen_seed, gen_nf, gen_nd, gen_m, gen_cmin, gen_cmax, gen_eps,
                     gen_alpha, gen_k, gen_out);
    }
    if (*demo_cmd) return run_gapdemo(demo_family, demo_m, demo_k, demo_eps, demo_f, demo_u);
    return 1;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const lbfl::SizeLimitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const lbfl::InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
