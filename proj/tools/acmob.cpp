// acmob: command-line front end.
//
//   acmob run <config.ini>
//   acmob preset <name> [--emit-config]
//   acmob converge <preset|config.ini> --ns 20,40,80 --steps uniform|random [--scheme dsbe|dscn]
//                  [--mobility constant|two_sided] [--jobs N] [--seed S]
//   acmob check <diagnostics.csv> [--initial-energy E0]
//
// Exit status: 0 ok, 1 other failure, 2 monitor abort, 3 solver failure, 4 config error.

#include "acmob/config.hpp"
#include "acmob/driver.hpp"
#include "acmob/io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

using namespace acmob;

namespace {

RunConfig load_config(const std::string& source) {
  const auto& names = preset_names();
  if (std::find(names.begin(), names.end(), source) != names.end())
    return preset_experiment(source);
  std::ifstream in(source);
  if (!in) throw IoError(source, "cannot open config");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void log_line(const std::string& msg) { std::cerr << "acmob: " << msg << '\n'; }

int run_config(const RunConfig& cfg) {
  const auto dir = resolve_output_dir(cfg);
  const auto res = run_experiment(cfg, dir, log_line);
  const auto& last = res.records;
  std::printf("steps=%zu t_end=%.6g energy0=%.10g energy=%.10g max_norm=%.12g "
              "mbp_warnings=%d energy_warnings=%d output=%s\n",
              last.size(), last.empty() ? 0.0 : last.back().t, res.initial_energy,
              last.empty() ? res.initial_energy : last.back().energy,
              last.empty() ? max_norm(res.final_state) : last.back().max_norm, res.mbp_warnings,
              res.energy_warnings, dir.string().c_str());
  return 0;
}

int converge(const std::string& source, const std::vector<int>& ns, const std::string& steps,
             const std::string& scheme, const std::string& mobility, unsigned jobs,
             std::uint64_t seed) {
  RunConfig cfg = load_config(source);
  if (!cfg.forcing) throw ConfigError("converge: the configuration must enable forcing");
  if (scheme == "dsbe") cfg.scheme = SchemeKind::DsBE;
  if (scheme == "dscn") cfg.scheme = SchemeKind::DsCN;
  if (mobility == "constant") cfg.mobility = Mobility::constant(1.0);
  if (mobility == "two_sided") cfg.mobility = Mobility::two_sided(1.0);
  cfg.validate();

  const auto table = convergence_study(to_simulation_config(cfg), build_initial_condition(cfg), ns,
                                       steps == "random", seed, jobs);
  const auto orders = estimate_order(table);

  const auto dir = resolve_output_dir(cfg);
  std::filesystem::create_directories(dir);
  const auto path = dir / ("converge_" + to_string(cfg.scheme) + "_" + steps + ".csv");
  std::ofstream out(path);
  if (!out) throw IoError(path, "cannot open for writing");
  out << "N,mean_tau,error,order\n";
  std::printf("%8s %14s %14s %8s\n", "N", "mean_tau", "error", "order");
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    char order[32] = "-";
    if (i > 0) std::snprintf(order, sizeof order, "%.3f", orders[i - 1]);
    std::printf("%8d %14.6e %14.6e %8s\n", r.steps, r.mean_tau, r.error, order);
    char line[128];
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%s\n", r.steps, r.mean_tau, r.error,
                  i > 0 ? order : "");
    out << line;
  }
  std::printf("written %s\n", path.string().c_str());
  return 0;
}

int check(const std::string& csv, std::optional<double> e0, double mbp_slack, double rel_slack,
          double bound_slack) {
  const auto rows = read_csv(csv);
  const auto c = check_records(rows, mbp_slack, rel_slack, e0, bound_slack);
  std::printf("rows=%d mbp_failures=%d (worst %.3e) energy_failures=%d (worst %.3e) -> %s\n",
              c.rows, c.mbp_failures, c.worst_mbp, c.energy_failures, c.worst_energy,
              c.ok() ? "OK" : "VIOLATION");
  return c.ok() ? 0 : static_cast<int>(ExitCode::MonitorAbort);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Allen-Cahn solver with mobility-aware stabilized schemes"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "run a simulation from a config file");
  run->add_option("config", config_path, "config file")->required();

  std::string preset_name;
  bool emit = false;
  auto* preset = app.add_subcommand("preset", "run or print a named experiment preset");
  preset->add_option("name", preset_name)->required()->check(CLI::IsMember(preset_names()));
  preset->add_flag("--emit-config", emit, "print the preset as a config file and exit");

  std::string conv_source;
  std::vector<int> ns{20, 40, 80, 160, 320};
  std::string steps = "uniform";
  std::string scheme;
  std::string mobility;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  std::uint64_t seed = 1;
  auto* conv = app.add_subcommand("converge", "temporal convergence study on a forced problem");
  conv->add_option("source", conv_source, "preset name or config file")->required();
  conv->add_option("--ns", ns, "step counts")->delimiter(',');
  conv->add_option("--steps", steps)->check(CLI::IsMember({"uniform", "random"}));
  conv->add_option("--scheme", scheme, "override the scheme")
      ->check(CLI::IsMember({"dsbe", "dscn"}));
  conv->add_option("--mobility", mobility, "override the mobility (two_sided uses m = 1)")
      ->check(CLI::IsMember({"constant", "two_sided"}));
  conv->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  conv->add_option("--seed", seed, "seed for random steps");

  std::string csv_path;
  std::optional<double> e0;
  double mbp_slack = 1e-8, rel_slack = 1e-8, bound_slack = 1e-6;
  auto* chk = app.add_subcommand("check", "re-verify MBP and energy decay from a diagnostics CSV");
  chk->add_option("csv", csv_path)->required();
  chk->add_option("--initial-energy", e0, "check E <= E0 + bound slack instead of per-step decay");
  chk->add_option("--mbp-slack", mbp_slack);
  chk->add_option("--energy-rel-slack", rel_slack);
  chk->add_option("--energy-bound-slack", bound_slack);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitCode::ConfigError);
  }

  try {
    if (*run) return run_config(load_config(config_path));
    if (*preset) {
      const auto cfg = preset_experiment(preset_name);
      if (emit) {
        std::cout << serialize_config(cfg);
        return 0;
      }
      return run_config(cfg);
    }
    if (*conv) return converge(conv_source, ns, steps, scheme, mobility, jobs, seed);
    if (*chk) return check(csv_path, e0, mbp_slack, rel_slack, bound_slack);
  } catch (const MonitorAbort& e) {
    log_line(std::string("monitor abort: ") + e.what());
    return static_cast<int>(ExitCode::MonitorAbort);
  } catch (const SolveFailure& e) {
    log_line(std::string("solver failure: ") + e.what());
    return static_cast<int>(ExitCode::SolverFailure);
  } catch (const ParseError& e) {
    log_line(std::string("config error: ") + e.what());
    return static_cast<int>(ExitCode::ConfigError);
  } catch (const ConfigError& e) {
    log_line(std::string("config error: ") + e.what());
    return static_cast<int>(ExitCode::ConfigError);
  } catch (const std::exception& e) {
    log_line(e.what());
    return static_cast<int>(ExitCode::Failure);
  }
  return 0;
}
