#pragma once

#include "acmob/diagnostics.hpp"
#include "acmob/grid.hpp"
#include "acmob/linsolve.hpp"
#include "acmob/physics.hpp"
#include "acmob/schemes.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace acmob {

struct UniformSteps {
  double tau = 0.1;
  friend bool operator==(const UniformSteps&, const UniformSteps&) = default;
};

/// τ_k = tau_mean (1 + amplitude u_k), u_k ~ U[-1, 1], rescaled to sum to T.
struct RandomSteps {
  double tau_mean = 0.1;
  double amplitude = 0.3;
  std::uint64_t seed = 1;
  friend bool operator==(const RandomSteps&, const RandomSteps&) = default;
};

/// Energy-variation-driven step selection.
struct AdaptiveSteps {
  double tau_max = 0.25;
  double tau_min = 0.025;
  double alpha = 1e10;
  friend bool operator==(const AdaptiveSteps&, const AdaptiveSteps&) = default;
};

using StepMode = std::variant<UniformSteps, RandomSteps, AdaptiveSteps>;

/// max{τ_min, τ_max / sqrt(1 + α |dE/dt|²)}, clamped to [τ_min, τ_max].
double next_tau_adaptive(double tau_max, double tau_min, double alpha, double dE_dt);

/// Step list of round(T / tau_mean) perturbed steps summing to T.
std::vector<double> build_random_steps(double tau_mean, double amplitude, double horizon,
                                       std::uint64_t seed);

/// Generates the time grid on [0, T]. The final step is truncated so the
/// steps sum to T; for adaptive mode that final step may fall below τ_min.
class StepController {
public:
  StepController(StepMode mode, double horizon);

  struct Step {
    double tau;
    bool final;
  };

  bool done() const { return done_; }
  /// Next step from time t.
  Step next(double t);
  /// Feed the energy after a step of size tau (or the initial energy).
  void observe_initial_energy(double energy);
  void observe(double energy, double tau);

  /// Backward difference (Eⁿ − Eⁿ⁻¹)/τ_n used by the adaptive rule, if known.
  std::optional<double> energy_rate() const { return rate_; }
  const StepMode& mode() const { return mode_; }
  double horizon() const { return horizon_; }

private:
  StepMode mode_;
  double horizon_;
  std::vector<double> planned_;
  std::size_t taken_ = 0;
  std::optional<double> last_energy_;
  std::optional<double> rate_;
  bool done_ = false;
};

/// Manufactured solution φ = e^{−t} sin x sin y (2D) with matching source g.
struct ForcingSpec {
  enum class Exact { ExpDecaySinSin };
  Exact exact = Exact::ExpDecaySinSin;
  double eps = 0.01;
};

double exact_solution(const ForcingSpec& spec, const std::array<double, 3>& x, double t);
/// g = φ_t + M(φ) μ with μ = −ε²Δφ − f(φ), evaluated analytically.
double forcing_eval(const ForcingSpec& spec, const Mobility& mob, const std::array<double, 3>& x,
                    double t);
ForcingFn<double> make_forcing(const ForcingSpec& spec, const Mobility& mob, const GridSpec& g);

enum class MonitorPolicy { Off, Warn, Abort };

struct MonitorConfig {
  MonitorPolicy mbp = MonitorPolicy::Warn;
  MonitorPolicy energy = MonitorPolicy::Warn;
  double mbp_slack = 1e-8;
  /// DsBE: E^{n+1} ≤ E^n + energy_rel_slack (1 + |E^n|).
  double energy_rel_slack = 1e-8;
  /// DsCN: E^n ≤ E^0 + energy_bound_slack.
  double energy_bound_slack = 1e-6;
  friend bool operator==(const MonitorConfig&, const MonitorConfig&) = default;
};

class MonitorAbort : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct SimulationConfig {
  SchemeParams scheme;
  Mobility mobility = Mobility::constant(1.0);
  KrylovConfig solver;
  StepMode steps = UniformSteps{};
  double horizon = 1.0;
  std::optional<ForcingSpec> forcing;
  MonitorConfig monitors;
  /// Called after every step with the new record and state.
  std::function<void(const StepRecord&, const Field&)> observer;
  std::function<void(const std::string&)> log;
};

struct SimulationResult {
  Field final_state;
  std::vector<StepRecord> records;
  double initial_energy = 0.0;
  int mbp_warnings = 0;
  int energy_warnings = 0;
};

/// Advances φ⁰ from t = 0 to T. DsCN bootstraps with one DsBE step.
SimulationResult run_simulation(const SimulationConfig& cfg, const Field& initial);

/// Final-time max-norm errors against the manufactured solution for each N.
/// Runs execute on up to `jobs` worker threads.
ConvergenceTable convergence_study(const SimulationConfig& base, const Field& initial,
                                   const std::vector<int>& ns, bool random_steps,
                                   std::uint64_t seed = 1, unsigned jobs = 1);

}  // namespace acmob
