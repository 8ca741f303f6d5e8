#include "acmob/driver.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>

namespace acmob {

std::filesystem::path resolve_output_dir(const RunConfig& cfg) {
  if (const char* env = std::getenv("ACMOB_OUTPUT_DIR"); env && *env) return env;
  return cfg.output.dir;
}

SimulationResult run_experiment(const RunConfig& cfg, const std::filesystem::path& dir,
                                std::function<void(const std::string&)> log) {
  cfg.validate();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(dir, "cannot create directory: " + ec.message());
  {
    std::ofstream f(dir / "config.ini");
    if (!f) throw IoError(dir / "config.ini", "cannot open for writing");
    f << serialize_config(cfg);
  }

  SimulationConfig sim = to_simulation_config(cfg);
  sim.log = std::move(log);
  std::unique_ptr<CsvWriter> csv;
  if (cfg.output.csv_every > 0) csv = std::make_unique<CsvWriter>(dir / "diagnostics.csv");

  const double horizon = cfg.horizon;
  sim.observer = [&](const StepRecord& r, const Field& phi) {
    const bool last = r.t == horizon;
    if (csv && (r.n % cfg.output.csv_every == 0 || last)) csv->append(r);
    if (cfg.output.snapshot_every > 0 && r.n % cfg.output.snapshot_every == 0) {
      char name[32];
      std::snprintf(name, sizeof name, "snap_%06d.bin", r.n);
      write_snapshot(phi, {r.t, cfg.eps}, dir / name);
    }
  };

  const Field initial = build_initial_condition(cfg);
  write_snapshot(initial, {0.0, cfg.eps}, dir / "initial.bin");
  auto result = run_simulation(sim, initial);
  const double t_end = result.records.empty() ? 0.0 : result.records.back().t;
  write_snapshot(result.final_state, {t_end, cfg.eps}, dir / "final.bin");
  return result;
}

CsvCheck check_records(const std::vector<StepRecord>& rows, double mbp_slack, double rel_slack,
                       std::optional<double> initial_energy, double bound_slack) {
  CsvCheck c;
  c.rows = static_cast<int>(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto mbp = check_mbp(rows[i], mbp_slack);
    if (!mbp.pass) ++c.mbp_failures;
    c.worst_mbp = std::max(c.worst_mbp, mbp.violation);
    Verdict e;
    if (initial_energy)
      e = check_energy_dissipation(*initial_energy, rows[i].energy, bound_slack);
    else if (i > 0)
      e = check_energy_dissipation(rows[i - 1].energy, rows[i].energy,
                                   energy_slack(rows[i - 1].energy, rel_slack));
    if (!e.pass) ++c.energy_failures;
    c.worst_energy = std::max(c.worst_energy, e.violation);
  }
  return c;
}

}  // namespace acmob
