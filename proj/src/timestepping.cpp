#include "acmob/timestepping.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

namespace acmob {

double next_tau_adaptive(double tau_max, double tau_min, double alpha, double dE_dt) {
  if (!(tau_min > 0.0) || !(tau_min <= tau_max))
    throw std::invalid_argument("next_tau_adaptive: need 0 < tau_min <= tau_max");
  if (!(alpha >= 0.0)) throw std::invalid_argument("next_tau_adaptive: alpha must be >= 0");
  const double raw = tau_max / std::sqrt(1.0 + alpha * dE_dt * dE_dt);
  // alpha * dE² overflow gives raw = 0, which the clamp turns into tau_min
  const double tau = std::isfinite(raw) ? std::max(tau_min, raw) : tau_min;
  return std::clamp(tau, tau_min, tau_max);
}

namespace {

// Uniform draw in [-1, 1] from the top 53 bits; independent of the standard
// library's distribution implementation.
double symmetric_unit(std::mt19937_64& rng) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return 2.0 * u - 1.0;
}

}  // namespace

std::vector<double> build_random_steps(double tau_mean, double amplitude, double horizon,
                                       std::uint64_t seed) {
  if (!(amplitude >= 0.0 && amplitude < 1.0))
    throw std::invalid_argument("build_random_steps: amplitude must be in [0, 1)");
  if (!(tau_mean > 0.0) || !(horizon > 0.0))
    throw std::invalid_argument("build_random_steps: tau_mean and T must be positive");
  const auto count = std::max<long long>(1, std::llround(horizon / tau_mean));
  std::mt19937_64 rng(seed);
  std::vector<double> steps(static_cast<std::size_t>(count));
  double sum = 0.0;
  for (auto& s : steps) {
    s = tau_mean * (1.0 + amplitude * symmetric_unit(rng));
    sum += s;
  }
  const double scale = horizon / sum;
  double partial = 0.0;
  for (std::size_t k = 0; k + 1 < steps.size(); ++k) {
    steps[k] *= scale;
    partial += steps[k];
  }
  steps.back() = horizon - partial;
  return steps;
}

StepController::StepController(StepMode mode, double horizon)
    : mode_(std::move(mode)), horizon_(horizon) {
  if (!(horizon >= 0.0) || !std::isfinite(horizon))
    throw std::invalid_argument("StepController: horizon must be >= 0");
  if (const auto* r = std::get_if<RandomSteps>(&mode_); r && horizon > 0.0)
    planned_ = build_random_steps(r->tau_mean, r->amplitude, horizon, r->seed);
  if (const auto* u = std::get_if<UniformSteps>(&mode_); u && !(u->tau > 0.0))
    throw std::invalid_argument("StepController: tau must be positive");
  if (const auto* a = std::get_if<AdaptiveSteps>(&mode_)) {
    if (!(a->tau_min > 0.0) || !(a->tau_min <= a->tau_max) || !(a->alpha >= 0.0))
      throw std::invalid_argument("StepController: need 0 < tau_min <= tau_max, alpha >= 0");
  }
  done_ = horizon == 0.0;
}

StepController::Step StepController::next(double t) {
  if (done_) throw std::logic_error("StepController: horizon already reached");
  const double remaining = horizon_ - t;
  Step step{0.0, false};
  if (!planned_.empty()) {
    step.tau = planned_[taken_];
    step.final = taken_ + 1 == planned_.size();
  } else {
    double tau = 0.0;
    if (const auto* u = std::get_if<UniformSteps>(&mode_)) {
      tau = u->tau;
    } else {
      const auto& a = std::get<AdaptiveSteps>(mode_);
      tau = rate_ ? next_tau_adaptive(a.tau_max, a.tau_min, a.alpha, *rate_) : a.tau_max;
    }
    // within round-off of the remaining interval: keep τ and land on T
    if (remaining <= tau * (1.0 + 1e-9)) {
      step.final = true;
      step.tau = std::abs(remaining - tau) <= 1e-9 * tau ? tau : remaining;
    } else {
      step.tau = tau;
    }
  }
  ++taken_;
  done_ = step.final;
  return step;
}

void StepController::observe_initial_energy(double energy) {
  last_energy_ = energy;
  rate_.reset();
}

void StepController::observe(double energy, double tau) {
  if (last_energy_) rate_ = (energy - *last_energy_) / tau;
  last_energy_ = energy;
}

double exact_solution(const ForcingSpec& spec, const std::array<double, 3>& x, double t) {
  switch (spec.exact) {
    case ForcingSpec::Exact::ExpDecaySinSin:
      return std::exp(-t) * std::sin(x[0]) * std::sin(x[1]);
  }
  throw std::invalid_argument("exact_solution: unsupported selector");
}

double forcing_eval(const ForcingSpec& spec, const Mobility& mob, const std::array<double, 3>& x,
                    double t) {
  switch (spec.exact) {
    case ForcingSpec::Exact::ExpDecaySinSin: {
      const double phi = exact_solution(spec, x, t);
      // φ_t = −φ, Δφ = −2φ  ⇒  μ = (2ε² − 1)φ + φ³
      const double mu = (2.0 * spec.eps * spec.eps - 1.0) * phi + phi * phi * phi;
      return -phi + mob(phi) * mu;
    }
  }
  throw std::invalid_argument("forcing_eval: unsupported selector");
}

ForcingFn<double> make_forcing(const ForcingSpec& spec, const Mobility& mob, const GridSpec& g) {
  if (g.dim() != 2) throw std::invalid_argument("manufactured forcing requires a 2D grid");
  return [spec, mob, g](double t) {
    return Field::sample(g, [&](const std::array<double, 3>& x) {
      return forcing_eval(spec, mob, x, t);
    });
  };
}

namespace {

void default_log(const std::string& msg) { std::clog << msg << '\n'; }

void raise(MonitorPolicy policy, const std::string& msg,
           const std::function<void(const std::string&)>& log, int& warnings) {
  if (policy == MonitorPolicy::Abort) throw MonitorAbort(msg);
  if (policy == MonitorPolicy::Warn) {
    ++warnings;
    log(msg);
  }
}

}  // namespace

SimulationResult run_simulation(const SimulationConfig& cfg, const Field& initial) {
  cfg.scheme.validate();
  cfg.solver.validate();
  if (!initial.all_finite()) throw std::domain_error("run_simulation: initial field not finite");
  const auto& grid = initial.spec();
  const auto log = cfg.log ? cfg.log : std::function<void(const std::string&)>(default_log);

  SchemeParams params = cfg.scheme;
  params.s2 = resolve_s2(params, cfg.mobility, grid);

  const bool forced = cfg.forcing.has_value();
  const ForcingFn<double> forcing =
      forced ? make_forcing(*cfg.forcing, cfg.mobility, grid) : ForcingFn<double>{};
  const bool monitor_mbp = !forced && cfg.monitors.mbp != MonitorPolicy::Off;
  const bool monitor_energy = !forced && cfg.monitors.energy != MonitorPolicy::Off;

  if (monitor_mbp && max_norm(initial) > 1.0 + cfg.monitors.mbp_slack)
    throw std::invalid_argument("run_simulation: initial field violates |phi| <= 1");

  SimulationResult result;
  result.initial_energy = discrete_energy(initial, params.eps);
  result.final_state = initial;

  StepController controller(cfg.steps, cfg.horizon);
  controller.observe_initial_energy(result.initial_energy);

  Field phi = initial;
  std::optional<Field> phi_prev;
  std::optional<double> tau_prev;
  double t = 0.0;
  double energy_prev = result.initial_energy;
  int n = 0;

  while (!controller.done()) {
    const auto step = controller.next(t);
    StepInput<double> in{phi, phi_prev, step.tau, tau_prev, t, forcing};
    StepResult<double> out;
    if (params.kind == SchemeKind::DsBE || !phi_prev) {
      in.phi_nm1.reset();
      in.tau_prev.reset();
      out = dsbe_step(params, cfg.mobility, in, cfg.solver);
    } else {
      out = dscn_step(params, cfg.mobility, in, cfg.solver);
    }
    ++n;
    t = step.final ? cfg.horizon : t + step.tau;
    const double energy = discrete_energy(out.phi, params.eps);
    auto rec = make_record(n, t, step.tau, energy, energy_prev, out.phi, out.report.iterations,
                           out.report.final_residual);

    if (monitor_mbp) {
      const auto v = check_mbp(rec, cfg.monitors.mbp_slack);
      if (!v.pass) {
        std::ostringstream msg;
        msg << "MBP violation at step " << n << " (t=" << t << "): max|phi| - 1 = "
            << v.violation;
        raise(cfg.monitors.mbp, msg.str(), log, result.mbp_warnings);
      }
    }
    if (monitor_energy) {
      // DsBE dissipates every step; DsCN (and its DsBE first step) stays below E^0.
      const bool per_step = params.kind == SchemeKind::DsBE;
      const Verdict v =
          per_step ? check_energy_dissipation(energy_prev, energy,
                                              energy_slack(energy_prev, cfg.monitors.energy_rel_slack))
                   : check_energy_dissipation(result.initial_energy, energy,
                                              cfg.monitors.energy_bound_slack);
      if (!v.pass) {
        std::ostringstream msg;
        msg << "energy " << (per_step ? "increase" : "above initial") << " at step " << n
            << " (t=" << t << "): " << v.violation;
        raise(cfg.monitors.energy, msg.str(), log, result.energy_warnings);
      }
    }

    controller.observe(energy, step.tau);
    if (cfg.observer) cfg.observer(rec, out.phi);
    result.records.push_back(rec);
    energy_prev = energy;
    phi_prev = std::move(phi);
    phi = std::move(out.phi);
    tau_prev = step.tau;
  }
  result.final_state = std::move(phi);
  return result;
}

ConvergenceTable convergence_study(const SimulationConfig& base, const Field& initial,
                                   const std::vector<int>& ns, bool random_steps,
                                   std::uint64_t seed, unsigned jobs) {
  if (!base.forcing) throw std::invalid_argument("convergence_study: forcing spec required");
  if (ns.size() < 2) throw std::invalid_argument("convergence_study: need at least two N");
  for (std::size_t i = 0; i + 1 < ns.size(); ++i)
    if (!(ns[i] > 0 && ns[i] < ns[i + 1]))
      throw std::invalid_argument("convergence_study: N must be positive and increasing");

  const ForcingSpec spec = *base.forcing;
  auto run_one = [&](int N) {
    SimulationConfig cfg = base;
    cfg.observer = nullptr;
    const double tau = base.horizon / N;
    if (random_steps)
      cfg.steps = RandomSteps{tau, 0.3, seed};
    else
      cfg.steps = UniformSteps{tau};
    const auto res = run_simulation(cfg, initial);
    const double err = error_vs_exact(
        res.final_state,
        [&](const std::array<double, 3>& x, double t) { return exact_solution(spec, x, t); },
        base.horizon);
    return ConvergenceRow{N, tau, err};
  };

  ConvergenceTable table;
  table.rows.resize(ns.size());
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(ns.size())));
  if (jobs == 1) {
    for (std::size_t i = 0; i < ns.size(); ++i) table.rows[i] = run_one(ns[i]);
    return table;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::future<void>> workers;
  for (unsigned w = 0; w < jobs; ++w)
    workers.push_back(std::async(std::launch::async, [&] {
      for (std::size_t i = next++; i < ns.size(); i = next++) table.rows[i] = run_one(ns[i]);
    }));
  for (auto& w : workers) w.get();
  return table;
}

}  // namespace acmob
