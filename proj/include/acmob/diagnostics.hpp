#pragma once

#include "acmob/grid.hpp"

#include <array>
#include <functional>
#include <vector>

namespace acmob {

/// One row of per-step diagnostics.
struct StepRecord {
  int n = 0;
  double t = 0.0;
  double tau = 0.0;
  double energy = 0.0;
  double max_val = 0.0;
  double min_val = 0.0;
  double max_norm = 0.0;
  int solver_iters = 0;
  double solver_residual = 0.0;
  double mbp_violation = 0.0;    // max(0, max_norm - 1)
  double energy_increase = 0.0;  // max(0, E^n - E^{n-1})

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct Verdict {
  bool pass = true;
  double violation = 0.0;
};

StepRecord make_record(int n, double t, double tau, double energy, double prev_energy,
                       const Field& phi, int iters, double residual);

Verdict check_mbp(const StepRecord& record, double slack);
Verdict check_energy_dissipation(double prev_energy, double curr_energy, double slack);
/// Default dissipation slack 1e-8 (1 + |E_prev|).
double energy_slack(double prev_energy, double rel = 1e-8);

using ExactSolution = std::function<double(const std::array<double, 3>& x, double t)>;

/// max_i |φ_i − exact(x_i, t)|.
double error_vs_exact(const Field& phi, const ExactSolution& exact, double t);

struct ConvergenceRow {
  int steps = 0;          // N
  double mean_tau = 0.0;  // T / N
  double error = 0.0;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
};

/// Pairwise log(e_i/e_{i+1}) / log(τ_i/τ_{i+1}) with τ the mean stepsize.
std::vector<double> estimate_order(const ConvergenceTable& table);

/// Connected components of {u > level} (periodic, face neighbours).
int count_components(const Field& u, double level = 0.0);

/// Area of {u > level} over the area of its convex hull, 2D only. Each node
/// owns the h-by-h square centred on it. The region must not wrap across the
/// periodic boundary.
double solidity_2d(const Field& u, double level = 0.0);

}  // namespace acmob
