#include "acmob/schemes.hpp"
#include "support.hpp"

#include <doctest.h>

#include <numbers>

using namespace acmob;
using acmob::test::dense_laplacian;
using acmob::test::random_field;

namespace {

double max_diff(const Field& a, const Field& b) {
  return (a.values() - b.values()).cwiseAbs().maxCoeff();
}

KrylovConfig tight() {
  KrylovConfig c;
  c.rel_tol = 1e-13;
  c.abs_tol = 1e-15;
  return c;
}

}  // namespace

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(SchemeParams(0.01, 1.5, std::nullopt, SchemeKind::DsBE), ConfigError);
  try {
    SchemeParams(0.01, 1.5, std::nullopt, SchemeKind::DsBE);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("S₁ ≥ 2") != std::string::npos);
  }
  CHECK_THROWS_AS(SchemeParams(0.0, 2.0, std::nullopt, SchemeKind::DsBE), ConfigError);
  CHECK_THROWS_AS(SchemeParams(0.01, 2.0, -1.0, SchemeKind::DsBE), ConfigError);
}

TEST_CASE("stabilization constant S2") {
  const SchemeParams p(0.01, 2.0, std::nullopt, SchemeKind::DsCN);
  const auto one = Mobility::constant(1.0);
  CHECK(compute_s2_min(p, one, GridSpec(2, 400, 2.0 * std::numbers::pi)) ==
        doctest::Approx(0.8195).epsilon(5e-5 / 0.8195));
  CHECK(compute_s2_min(p, one, GridSpec(2, 128, 1.0)) == doctest::Approx(4.5728).epsilon(5e-5 / 4.5728));
  const SchemeParams p3(0.03, 2.0, std::nullopt, SchemeKind::DsCN);
  CHECK(compute_s2_min(p3, one, GridSpec(3, 64, 1.0)) ==
        doctest::Approx(36.3561).epsilon(5e-5 / 36.3561));
  // explicit value is passed through
  const SchemeParams fixed(0.01, 2.0, 3.0, SchemeKind::DsCN);
  CHECK(resolve_s2(fixed, one, GridSpec(2, 128, 1.0)) == 3.0);
}

TEST_CASE("step-size bounds") {
  const SchemeParams p(0.01, 2.0, std::nullopt, SchemeKind::DsCN);
  const GridSpec g(2, 128, 1.0);
  // 2 / (2 + 4 * 0.01^2 * 128^2) evaluated directly
  const double direct = 2.0 / (2.0 + 4.0 * 1e-4 * 128.0 * 128.0);
  CHECK(mbp_tau_bound(p, Mobility::constant(1.0), g) == doctest::Approx(direct).epsilon(1e-14));
  CHECK(mbp_tau_bound(p, Mobility::constant(1.0), g) == doctest::Approx(0.233820).epsilon(1e-5));
  CHECK(std::isinf(mbp_tau_bound(p, Mobility::constant(0.0), g)));
  CHECK(mbp_tau_bound(p, Mobility::constant(2.0), g) ==
        doctest::Approx(mbp_tau_bound(p, Mobility::constant(1.0), g) / 2.0).epsilon(1e-15));

  const SchemeParams zero(0.01, 2.0, 0.0, SchemeKind::DsCN);
  CHECK(energy_stable_tau_bound(zero, Mobility::constant(1.0)) == 0.25);
  const SchemeParams s(0.01, 2.0, 4.5728, SchemeKind::DsCN);
  CHECK(energy_stable_tau_bound(s, Mobility::constant(1.0)) ==
        doctest::Approx(1.0 / (4.0 * 5.5728)).epsilon(1e-14));
  CHECK(energy_stable_tau_bound(s, Mobility::constant(1.0)) == doctest::Approx(0.04486).epsilon(1e-4));
  CHECK(std::isinf(energy_stable_tau_bound(s, Mobility::constant(0.0))));
  CHECK_THROWS_AS(energy_stable_tau_bound(p, Mobility::constant(1.0)), std::logic_error);
}

TEST_CASE("DsBE examples") {
  std::mt19937_64 rng(1);
  const SchemeParams p(0.05, 2.0, std::nullopt, SchemeKind::DsBE);
  const GridSpec g(2, 10, 1.0);

  SUBCASE("zero mobility freezes the state") {
    const auto phi = random_field(g, rng);
    for (double tau : {1e-3, 0.1, 5.0}) {
      const auto out = dsbe_step(p, Mobility::constant(0.0), StepInput<double>{phi, {}, tau, {}, 0.0, {}}, tight());
      CHECK(max_diff(out.phi, phi) <= 1e-14);
    }
  }
  SUBCASE("pure phase is a fixed point") {
    for (const auto& mob : acmob::test::mobility_families()) {
      const auto out = dsbe_step(p, mob, StepInput<double>{Field(g, 1.0), {}, 0.3, {}, 0.0, {}});
      CHECK(max_diff(out.phi, Field(g, 1.0)) <= 1e-14);
    }
  }
  SUBCASE("1D random state against an independently assembled system") {
    const GridSpec line(1, 16, 1.0);
    const auto phi = random_field(line, rng);
    const auto mob = Mobility::two_sided(1.0);
    const double tau = 0.1;
    // [(1/τ)I + S1 M − ε² M L] x = φ/τ + M(f(φ) + S1 φ)
    const Eigen::MatrixXd L = dense_laplacian(line);
    Eigen::VectorXd m(16), rhs(16);
    for (int i = 0; i < 16; ++i) {
      m[i] = 1.0 - phi[i] * phi[i];
      rhs[i] = phi[i] / tau + m[i] * (phi[i] - phi[i] * phi[i] * phi[i] + 2.0 * phi[i]);
    }
    const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(16, 16) / tau +
                              Eigen::MatrixXd(m.asDiagonal()) * (2.0 * Eigen::MatrixXd::Identity(16, 16) - 0.05 * 0.05 * L);
    const Eigen::VectorXd expect = A.partialPivLu().solve(rhs);
    const auto out = dsbe_step(p, mob, StepInput<double>{phi, {}, tau, {}, 0.0, {}});
    CHECK((out.phi.values() - expect).cwiseAbs().maxCoeff() <= 1e-9);
    const auto [op, b] = dsbe_system(p, mob, StepInput<double>{phi, {}, tau, {}, 0.0, {}});
    CHECK(max_diff(out.phi, dense_solve_oracle(op, b)) <= 1e-9);
  }
}

TEST_CASE("constant mobility reduces to the scaled classical stabilized system") {
  std::mt19937_64 rng(2);
  const GridSpec g(2, 8, 1.0);
  const SchemeParams p(0.1, 3.0, std::nullopt, SchemeKind::DsBE);
  const auto phi = random_field(g, rng);
  const double c = 2.5, tau = 0.07;
  const auto [op, rhs] = dsbe_system(p, Mobility::constant(c), StepInput<double>{phi, {}, tau, {}, 0.0, {}});
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(g.size(), g.size());
  const Eigen::MatrixXd classical = I / tau + c * (3.0 * I - 0.01 * dense_laplacian(g));
  CHECK((assemble_dense(op) - classical).cwiseAbs().maxCoeff() <= 1e-10);
  for (Eigen::Index i = 0; i < phi.size(); ++i)
    CHECK(rhs[i] == doctest::Approx(phi[i] / tau + c * (reaction(phi[i]) + 3.0 * phi[i])).epsilon(1e-14));
}

TEST_CASE("cut-off predictor") {
  const GridSpec g(1, 1, 1.0);
  auto one = [&](double v) { return Field(g, v); };
  CHECK(dscn_predict(one(0.4), one(0.4), 1.7)[0] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(dscn_predict(one(0.9), one(0.5), 1.0)[0] == 1.0);
  CHECK(dscn_predict(one(-0.2), one(0.2), 2.0)[0] == doctest::Approx(-0.6).epsilon(1e-15));
  CHECK_THROWS_AS(dscn_predict(one(0.1), one(0.1), 0.0), std::invalid_argument);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> r(0.05, 20.0);
  for (int k = 0; k < 200; ++k) {
    const GridSpec gg(2, 5, 1.0);
    const auto hat = dscn_predict(random_field(gg, rng, -3, 3), random_field(gg, rng, -3, 3), r(rng));
    CHECK(max_norm(hat) <= 1.0);
  }
}

TEST_CASE("DsCN examples") {
  std::mt19937_64 rng(4);
  const GridSpec g(2, 8, 1.0);
  const SchemeParams p(0.05, 2.0, std::nullopt, SchemeKind::DsCN);

  SUBCASE("zero mobility freezes the state") {
    const auto phi = random_field(g, rng);
    const auto prev = random_field(g, rng);
    const auto out = dscn_step(p, Mobility::constant(0.0), StepInput<double>{phi, prev, 0.2, 0.1, 0.0, {}}, tight());
    CHECK(max_diff(out.phi, phi) <= 1e-14);
  }
  SUBCASE("pure phase is a fixed point") {
    for (const auto& mob : acmob::test::mobility_families()) {
      const auto out = dscn_step(p, mob, StepInput<double>{Field(g, -1.0), Field(g, -1.0), 0.3, 0.3, 0.0, {}});
      CHECK(max_diff(out.phi, Field(g, -1.0)) <= 1e-14);
    }
  }
  SUBCASE("one-sided mobility against an independently assembled system") {
    const auto phi = random_field(g, rng);
    const auto prev = random_field(g, rng);
    const double tau = 0.05;
    const auto mob = Mobility::one_sided();
    const double s2 = compute_s2_min(p, mob, g);
    const Eigen::Index n = g.size();
    const Eigen::MatrixXd L = dense_laplacian(g);
    Eigen::VectorXd hat(n), m(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      hat[i] = std::clamp(1.5 * phi[i] - 0.5 * prev[i], -1.0, 1.0);
      m[i] = 0.5 * (1.0 + hat[i]);
    }
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd M = m.asDiagonal();
    const Eigen::MatrixXd half = M * (1.0 * I - 0.5 * 0.05 * 0.05 * L);  // (S1/2)M − (ε²/2)M L
    const Eigen::MatrixXd A = (1.0 / tau + s2 * tau) * I + half;
    const Eigen::MatrixXd Q = (1.0 / tau + s2 * tau) * I - half;
    Eigen::VectorXd rhs = Q * phi.values();
    for (Eigen::Index i = 0; i < n; ++i)
      rhs[i] += m[i] * (hat[i] - hat[i] * hat[i] * hat[i] + 2.0 * hat[i]);
    const Eigen::VectorXd expect = A.partialPivLu().solve(rhs);
    const auto out = dscn_step(p, mob, StepInput<double>{phi, prev, tau, tau, 0.0, {}});
    CHECK((out.phi.values() - expect).cwiseAbs().maxCoeff() <= 1e-9);
    REQUIRE(out.predictor.has_value());
    CHECK((out.predictor->values() - hat).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("missing history is rejected") {
    CHECK_THROWS_AS(dscn_step(p, Mobility::constant(1.0), StepInput<double>{Field(g), {}, 0.1, {}, 0.0, {}}),
                    std::invalid_argument);
  }
}

TEST_CASE("first step is one DsBE step") {
  std::mt19937_64 rng(5);
  const GridSpec line(1, 16, 1.0);
  const SchemeParams p(0.05, 2.0, std::nullopt, SchemeKind::DsCN);
  const auto phi0 = random_field(line, rng);
  const auto mob = Mobility::two_sided(1.0);
  const auto a = first_step(p, mob, phi0, 0.1);
  const auto b = dsbe_step(p, mob, StepInput<double>{phi0, {}, 0.1, {}, 0.0, {}});
  CHECK(a.values() == b.phi.values());
  const auto [op, rhs] = dsbe_system(p, mob, StepInput<double>{phi0, {}, 0.1, {}, 0.0, {}});
  CHECK(max_diff(a, dense_solve_oracle(op, rhs)) <= 1e-9);

  const GridSpec g(2, 16, 1.0);
  const auto z = first_step(SchemeParams(0.01, 2.0, std::nullopt, SchemeKind::DsCN),
                            Mobility::constant(1.0), Field(g), 0.1);
  CHECK(max_norm(z) == 0.0);
}

TEST_CASE("forcing enters at the scheme's time level") {
  const GridSpec g(1, 4, 1.0);
  const SchemeParams p(0.05, 2.0, std::nullopt, SchemeKind::DsCN);
  double seen = -1.0;
  ForcingFn<double> probe = [&](double t) {
    seen = t;
    return Field(g, 0.0);
  };
  (void)dsbe_system(p, Mobility::constant(1.0), StepInput<double>{Field(g), {}, 0.2, {}, 1.0, probe});
  CHECK(seen == doctest::Approx(1.2));
  (void)dscn_system(p, Mobility::constant(1.0), StepInput<double>{Field(g), Field(g), 0.2, 0.2, 1.0, probe});
  CHECK(seen == doctest::Approx(1.1));
}

TEST_CASE("property: unconditional MBP of DsBE") {
  std::mt19937_64 rng(6);
  const KrylovConfig cfg;
  for (const auto& mob : acmob::test::mobility_families()) {
    for (double tau : {1e-3, 0.1, 0.5, 5.0}) {
      for (int trial = 0; trial < 3; ++trial) {
        const GridSpec g(1 + trial % 2, 12, 1.0);
        const SchemeParams p(0.02, 2.0, std::nullopt, SchemeKind::DsBE);
        const auto out = dsbe_step(p, mob, StepInput<double>{random_field(g, rng), {}, tau, {}, 0.0, {}}, cfg);
        CHECK(max_norm(out.phi) <= 1.0 + 10.0 * cfg.rel_tol);
      }
    }
  }
}

TEST_CASE("property: DsCN MBP under either sufficient condition") {
  std::mt19937_64 rng(7);
  const KrylovConfig cfg;
  const GridSpec g(2, 12, 1.0);
  for (const auto& mob : acmob::test::mobility_families()) {
    const SchemeParams auto_s2(0.02, 2.0, std::nullopt, SchemeKind::DsCN);
    for (double tau : {1e-3, 0.1, 0.5, 5.0}) {
      for (double r : {0.5, 1.0, 2.0}) {
        const auto out = dscn_step(auto_s2, mob,
                                   StepInput<double>{random_field(g, rng), random_field(g, rng), tau, tau / r, 0.0, {}}, cfg);
        CHECK(max_norm(out.phi) <= 1.0 + 10.0 * cfg.rel_tol);
      }
    }
    const SchemeParams no_s2(0.02, 2.0, 0.0, SchemeKind::DsCN);
    const double bound = mbp_tau_bound(no_s2, mob, g);
    for (double frac : {0.1, 0.5, 1.0}) {
      const double tau = frac * bound;
      const auto out = dscn_step(no_s2, mob,
                                 StepInput<double>{random_field(g, rng), random_field(g, rng), tau, tau, 0.0, {}}, cfg);
      CHECK(max_norm(out.phi) <= 1.0 + 10.0 * cfg.rel_tol);
    }
  }
}

TEST_CASE("property: DsBE dissipates the energy on unforced trajectories") {
  std::mt19937_64 rng(8);
  const GridSpec g(2, 24, 1.0);
  for (const auto& mob : acmob::test::mobility_families()) {
    const SchemeParams p(0.03, 2.0, std::nullopt, SchemeKind::DsBE);
    Field phi = random_field(g, rng, -0.8, 0.8);
    double e = discrete_energy(phi, p.eps);
    for (int n = 0; n < 30; ++n) {
      phi = dsbe_step(p, mob, StepInput<double>{phi, {}, 0.2, {}, 0.0, {}}).phi;
      const double e_new = discrete_energy(phi, p.eps);
      CHECK(e_new <= e + 1e-8 * (1.0 + std::abs(e)));
      e = e_new;
    }
  }
}
