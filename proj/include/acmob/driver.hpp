#pragma once

#include "acmob/config.hpp"
#include "acmob/io.hpp"
#include "acmob/timestepping.hpp"

#include <filesystem>
#include <functional>
#include <string>

namespace acmob {

/// Exit status shared by the command-line verbs.
enum class ExitCode : int { Ok = 0, Failure = 1, MonitorAbort = 2, SolverFailure = 3, ConfigError = 4 };

/// Output directory for a run: ACMOB_OUTPUT_DIR when set, else cfg.output.dir.
std::filesystem::path resolve_output_dir(const RunConfig& cfg);

/// Runs one configured simulation, writing into `dir`:
///   config.ini, diagnostics.csv (every csv_every-th step plus the last one),
///   snap_NNNNNN.bin every snapshot_every steps, and the final state in final.bin.
SimulationResult run_experiment(const RunConfig& cfg, const std::filesystem::path& dir,
                                std::function<void(const std::string&)> log = {});

/// Re-verification of a diagnostics CSV.
struct CsvCheck {
  int rows = 0;
  int mbp_failures = 0;
  int energy_failures = 0;
  double worst_mbp = 0.0;
  double worst_energy = 0.0;
  bool ok() const { return mbp_failures == 0 && energy_failures == 0; }
};

/// With initial_energy empty, energy must be nonincreasing row to row with
/// slack rel (1 + |E_prev|); otherwise every row must satisfy E ≤ E0 + bound_slack.
CsvCheck check_records(const std::vector<StepRecord>& rows, double mbp_slack, double rel_slack,
                       std::optional<double> initial_energy, double bound_slack);

}  // namespace acmob
