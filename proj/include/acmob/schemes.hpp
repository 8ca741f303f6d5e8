#pragma once

#include "acmob/grid.hpp"
#include "acmob/linsolve.hpp"
#include "acmob/physics.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace acmob {

enum class SchemeKind { DsBE, DsCN };

inline std::string to_string(SchemeKind k) { return k == SchemeKind::DsBE ? "dsbe" : "dscn"; }

class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Interface width, stabilization constants and scheme selector.
/// An empty s2 means "auto": the smallest value that makes DsCN MBP-preserving
/// for every step size.
struct SchemeParams {
  double eps = 0.01;
  double s1 = 2.0;
  std::optional<double> s2;
  SchemeKind kind = SchemeKind::DsCN;

  SchemeParams() = default;
  SchemeParams(double eps_, double s1_, std::optional<double> s2_, SchemeKind kind_)
      : eps(eps_), s1(s1_), s2(s2_), kind(kind_) {
    validate();
  }

  void validate() const {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigError("eps must be > 0");
    if (!(s1 >= kReactionLipschitz) || !std::isfinite(s1))
      throw ConfigError("S₁ ≥ 2 required (S1 = " + std::to_string(s1) + ")");
    if (s2 && (!(*s2 >= 0.0) || !std::isfinite(*s2)))
      throw ConfigError("S2 must be >= 0");
  }

  friend bool operator==(const SchemeParams&, const SchemeParams&) = default;
};

/// (S1 K/4 + d eps^2 K / (2 h^2))^2
inline double compute_s2_min(const SchemeParams& p, const Mobility& mob, const GridSpec& g) {
  const double k = mob.max_on_unit_interval();
  const double h = g.spacing();
  const double root = p.s1 * k / 4.0 + g.dim() * p.eps * p.eps * k / (2.0 * h * h);
  return root * root;
}

inline double resolve_s2(const SchemeParams& p, const Mobility& mob, const GridSpec& g) {
  return p.s2 ? *p.s2 : compute_s2_min(p, mob, g);
}

/// Largest DsCN step preserving the MBP when S2 = 0.
inline double mbp_tau_bound(const SchemeParams& p, const Mobility& mob, const GridSpec& g) {
  const double k = mob.max_on_unit_interval();
  if (k == 0.0) return std::numeric_limits<double>::infinity();
  const double h = g.spacing();
  return 2.0 / (p.s1 * k + 2.0 * g.dim() * k * p.eps * p.eps / (h * h));
}

/// min{1, 1/(4 K (1 + S2))}; S2 must already be resolved.
inline double energy_stable_tau_bound(const SchemeParams& p, const Mobility& mob) {
  const double k = mob.max_on_unit_interval();
  if (k == 0.0) return std::numeric_limits<double>::infinity();
  if (!p.s2) throw std::logic_error("energy_stable_tau_bound: S2 is unresolved (auto)");
  return std::min(1.0, 1.0 / (4.0 * k * (1.0 + *p.s2)));
}

template <typename Scalar>
using ForcingFn = std::function<GridField<Scalar>(double t)>;

template <typename Scalar>
struct StepInput {
  GridField<Scalar> phi_n;
  std::optional<GridField<Scalar>> phi_nm1;
  double tau = 0.0;
  std::optional<double> tau_prev;
  double t_n = 0.0;
  ForcingFn<Scalar> forcing;  // empty = unforced

  void validate() const {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("StepInput: tau must be > 0");
    if (phi_nm1 && (!tau_prev || !(*tau_prev > 0.0)))
      throw std::invalid_argument("StepInput: tau_prev > 0 required with phi_nm1");
    if (!phi_n.all_finite()) throw std::domain_error("StepInput: phi_n has non-finite values");
  }
};

template <typename Scalar>
struct StepResult {
  GridField<Scalar> phi;
  SolveReport report;
  std::optional<GridField<Scalar>> predictor;  // DsCN only
};

namespace detail {

template <typename Scalar>
void add_forcing(const ForcingFn<Scalar>& forcing, double t, VectorX<Scalar>& rhs,
                 const GridSpec& g) {
  if (!forcing) return;
  const auto gval = forcing(t);
  require_same_grid(gval.spec(), g, "forcing");
  rhs += gval.values();
}

template <typename Scalar>
void require_finite(const GridField<Scalar>& f, const char* where) {
  if (!f.all_finite()) throw std::domain_error(std::string(where) + ": non-finite state");
}

}  // namespace detail

/// Builds the DsBE system  [(1/τ)I + S1 M(φⁿ) − ε² M(φⁿ) Δ_h] x = rhs.
template <typename Scalar>
std::pair<MobilityOperator<Scalar>, GridField<Scalar>> dsbe_system(
    const SchemeParams& p, const Mobility& mob, const StepInput<Scalar>& in) {
  in.validate();
  const auto& g = in.phi_n.spec();
  const auto& phi = in.phi_n.values();
  const VectorX<Scalar> m = evaluate_mobility(mob, phi);
  const auto inv_tau = static_cast<Scalar>(1.0 / in.tau);
  const auto s1 = static_cast<Scalar>(p.s1);
  const auto eps2 = static_cast<Scalar>(p.eps * p.eps);

  VectorX<Scalar> rhs(phi.size());
  for (Eigen::Index i = 0; i < phi.size(); ++i)
    rhs[i] = inv_tau * phi[i] + m[i] * (reaction(phi[i]) + s1 * phi[i]);
  detail::add_forcing(in.forcing, in.t_n + in.tau, rhs, g);

  MobilityOperator<Scalar> op(g, inv_tau, (s1 * m.array()).matrix(), (eps2 * m.array()).matrix());
  return {std::move(op), GridField<Scalar>(g, std::move(rhs))};
}

template <typename Scalar>
StepResult<Scalar> dsbe_step(const SchemeParams& p, const Mobility& mob,
                             const StepInput<Scalar>& in, const KrylovConfig& cfg = {}) {
  auto [op, rhs] = dsbe_system(p, mob, in);
  auto [phi, report] = krylov_solve(op, rhs, in.phi_n, cfg);
  detail::require_finite(phi, "dsbe_step");
  return {std::move(phi), report, std::nullopt};
}

/// DsCN bootstrap step: one DsBE step from φ⁰.
template <typename Scalar>
GridField<Scalar> first_step(const SchemeParams& p, const Mobility& mob,
                             const GridField<Scalar>& phi0, double tau1,
                             const KrylovConfig& cfg = {}) {
  StepInput<Scalar> in{phi0, std::nullopt, tau1, std::nullopt, 0.0, {}};
  return dsbe_step(p, mob, in, cfg).phi;
}

/// Cut-off extrapolation clamp((1 + r/2)φⁿ − (r/2)φⁿ⁻¹, −1, 1).
template <typename Scalar>
GridField<Scalar> dscn_predict(const GridField<Scalar>& phi_n, const GridField<Scalar>& phi_nm1,
                               double ratio) {
  require_same_grid(phi_n.spec(), phi_nm1.spec(), "dscn_predict");
  if (!(ratio > 0.0) || !std::isfinite(ratio))
    throw std::invalid_argument("dscn_predict: ratio must be > 0");
  const auto a = static_cast<Scalar>(1.0 + ratio / 2.0);
  const auto b = static_cast<Scalar>(ratio / 2.0);
  GridField<Scalar> out(phi_n.spec());
  for (Eigen::Index i = 0; i < out.size(); ++i)
    out[i] = std::clamp(a * phi_n[i] - b * phi_nm1[i], Scalar(-1), Scalar(1));
  return out;
}

/// Builds the DsCN system
///   [(1/τ + S2 τ)I + (S1/2)M(φ̂) − (ε²/2)M(φ̂)Δ_h] x = Qⁿφⁿ + M(φ̂)(f(φ̂) + S1 φ̂)
/// and returns it together with the predictor φ̂.
template <typename Scalar>
struct DscnSystem {
  MobilityOperator<Scalar> op;
  GridField<Scalar> rhs;
  GridField<Scalar> predictor;
};

template <typename Scalar>
DscnSystem<Scalar> dscn_system(const SchemeParams& p, const Mobility& mob,
                               const StepInput<Scalar>& in) {
  in.validate();
  if (!in.phi_nm1 || !in.tau_prev)
    throw std::invalid_argument("dscn_step: phi_nm1 and tau_prev are required");
  const auto& g = in.phi_n.spec();
  require_same_grid(g, in.phi_nm1->spec(), "dscn_step");
  detail::require_finite(*in.phi_nm1, "dscn_step");

  auto hat = dscn_predict(in.phi_n, *in.phi_nm1, in.tau / *in.tau_prev);
  const VectorX<Scalar> m = evaluate_mobility(mob, hat.values());
  const double s2 = resolve_s2(p, mob, g);
  const auto shift = static_cast<Scalar>(1.0 / in.tau + s2 * in.tau);
  const auto half_s1 = static_cast<Scalar>(p.s1 / 2.0);
  const auto s1 = static_cast<Scalar>(p.s1);
  const auto half_eps2 = static_cast<Scalar>(p.eps * p.eps / 2.0);

  const auto& phi = in.phi_n.values();
  VectorX<Scalar> lap;
  apply_laplacian(g, phi, lap);
  VectorX<Scalar> rhs(phi.size());
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    const Scalar q = shift * phi[i] - half_s1 * m[i] * phi[i] + half_eps2 * m[i] * lap[i];
    rhs[i] = q + m[i] * (reaction(hat[i]) + s1 * hat[i]);
  }
  detail::add_forcing(in.forcing, in.t_n + 0.5 * in.tau, rhs, g);

  MobilityOperator<Scalar> op(g, shift, (half_s1 * m.array()).matrix(),
                              (half_eps2 * m.array()).matrix());
  return {std::move(op), GridField<Scalar>(g, std::move(rhs)), std::move(hat)};
}

template <typename Scalar>
StepResult<Scalar> dscn_step(const SchemeParams& p, const Mobility& mob,
                             const StepInput<Scalar>& in, const KrylovConfig& cfg = {}) {
  auto sys = dscn_system(p, mob, in);
  auto [phi, report] = krylov_solve(sys.op, sys.rhs, in.phi_n, cfg);
  detail::require_finite(phi, "dscn_step");
  return {std::move(phi), report, std::move(sys.predictor)};
}

}  // namespace acmob
