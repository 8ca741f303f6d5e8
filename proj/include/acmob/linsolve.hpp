#pragma once

#include "acmob/grid.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <concepts>
#include <stdexcept>
#include <string>
#include <utility>

namespace acmob {

/// Matrix-free operator on grid functions: out = A v, plus the diagonal of A.
template <typename Op>
concept LinearOperator = requires(const Op& op, const VectorX<typename Op::Scalar>& v,
                                  VectorX<typename Op::Scalar>& out) {
  typename Op::Scalar;
  { op.grid() } -> std::convertible_to<const GridSpec&>;
  op.apply(v, out);
  { op.diagonal() } -> std::convertible_to<VectorX<typename Op::Scalar>>;
};

struct KrylovConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  int max_iter = 500;

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
      throw std::invalid_argument("KrylovConfig: tolerances must be positive");
    if (max_iter < 1)
      throw std::invalid_argument("KrylovConfig: max_iter must be >= 1");
  }

  friend bool operator==(const KrylovConfig&, const KrylovConfig&) = default;
};

struct SolveReport {
  int iterations = 0;
  double final_residual = 0.0;  // ‖b - Ax‖ / ‖b‖ (absolute if b = 0)
  bool converged = false;
  int restarts = 0;
};

class SolveFailure : public std::runtime_error {
public:
  SolveFailure(const std::string& what, SolveReport report)
      : std::runtime_error(what), report_(report) {}
  const SolveReport& report() const { return report_; }

private:
  SolveReport report_;
};

/// Scheme operator  A v = shift v + reaction∘v − diffusion∘(Δ_h v),
/// with pointwise coefficient fields. Both schemes produce this shape.
template <typename ScalarT>
class MobilityOperator {
public:
  using Scalar = ScalarT;

  MobilityOperator(const GridSpec& g, Scalar shift, VectorX<Scalar> reaction,
                   VectorX<Scalar> diffusion)
      : grid_(g), shift_(shift), reaction_(std::move(reaction)),
        diffusion_(std::move(diffusion)) {
    if (reaction_.size() != g.size() || diffusion_.size() != g.size())
      throw ShapeError("MobilityOperator: coefficient size mismatch");
  }

  const GridSpec& grid() const { return grid_; }

  void apply(const VectorX<Scalar>& v, VectorX<Scalar>& out) const {
    apply_laplacian(grid_, v, out);
    out = (shift_ * v.array() + reaction_.array() * v.array() -
           diffusion_.array() * out.array())
              .matrix();
  }

  VectorX<Scalar> diagonal() const {
    const Scalar center = Scalar(2 * grid_.dim()) /
                          static_cast<Scalar>(grid_.spacing() * grid_.spacing());
    return (shift_ + reaction_.array() + center * diffusion_.array()).matrix();
  }

  Scalar shift() const { return shift_; }
  const VectorX<Scalar>& reaction() const { return reaction_; }
  const VectorX<Scalar>& diffusion() const { return diffusion_; }

private:
  GridSpec grid_;
  Scalar shift_;
  VectorX<Scalar> reaction_;
  VectorX<Scalar> diffusion_;
};

/// Jacobi-preconditioned BiCGStab. Restarts once from the current iterate on
/// breakdown; a second breakdown or hitting max_iter throws SolveFailure.
template <LinearOperator Op>
std::pair<GridField<typename Op::Scalar>, SolveReport> krylov_solve(
    const Op& A, const GridField<typename Op::Scalar>& b,
    const GridField<typename Op::Scalar>& x0, const KrylovConfig& cfg) {
  using Scalar = typename Op::Scalar;
  using Vec = VectorX<Scalar>;
  using std::abs;
  using std::sqrt;
  cfg.validate();
  require_same_grid(A.grid(), b.spec(), "krylov_solve");
  require_same_grid(A.grid(), x0.spec(), "krylov_solve");

  const Vec inv_diag = A.diagonal().cwiseInverse();
  if (!inv_diag.allFinite() || (A.diagonal().array() <= Scalar(0)).any())
    throw std::invalid_argument("krylov_solve: operator diagonal must be positive");

  const Vec& rhs = b.values();
  const Scalar b_norm = rhs.norm();
  const auto rel_tol = static_cast<Scalar>(cfg.rel_tol);
  const auto abs_tol = static_cast<Scalar>(cfg.abs_tol);
  auto converged = [&](Scalar r_norm) {
    return r_norm <= abs_tol || (b_norm > Scalar(0) && r_norm <= rel_tol * b_norm);
  };
  auto relative = [&](Scalar r_norm) {
    return static_cast<double>(b_norm > Scalar(0) ? r_norm / b_norm : r_norm);
  };

  SolveReport report;
  Vec x = x0.values();
  Vec tmp(x.size());
  auto true_residual = [&](Vec& r) {
    A.apply(x, tmp);
    r = rhs - tmp;
  };

  Vec r, r_hat, p, v, s, t, y, z;
  true_residual(r);
  Scalar r_norm = r.norm();
  if (converged(r_norm)) {
    report.converged = true;
    report.final_residual = relative(r_norm);
    return {GridField<Scalar>(A.grid(), std::move(x)), report};
  }

  int breakdowns = 0;
  Scalar rho(1), alpha(1), omega(1);
  auto reset = [&]() {
    r_hat = r;
    rho = alpha = omega = Scalar(1);
    p = Vec::Zero(x.size());
    v = Vec::Zero(x.size());
  };
  auto breakdown = [&](const char* where) {
    if (++breakdowns > 1) {
      true_residual(r);
      report.final_residual = relative(r.norm());
      throw SolveFailure(std::string("BiCGStab breakdown (") + where + ") after restart",
                         report);
    }
    ++report.restarts;
    true_residual(r);
    reset();
  };
  reset();

  const Scalar tiny = std::numeric_limits<Scalar>::epsilon() *
                      std::numeric_limits<Scalar>::epsilon();
  while (report.iterations < cfg.max_iter) {
    ++report.iterations;
    const Scalar rho_new = r_hat.dot(r);
    if (abs(rho_new) <= tiny * r_hat.squaredNorm()) {
      breakdown("rho");
      continue;
    }
    const Scalar beta = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    p = r + beta * (p - omega * v);
    y = inv_diag.cwiseProduct(p);
    A.apply(y, v);
    const Scalar rv = r_hat.dot(v);
    if (rv == Scalar(0) || !std::isfinite(static_cast<double>(rv))) {
      breakdown("r_hat.v");
      continue;
    }
    alpha = rho / rv;
    s = r - alpha * v;
    if (converged(s.norm())) {
      x += alpha * y;
      true_residual(r);
      r_norm = r.norm();
      if (converged(r_norm)) break;
      reset();
      continue;
    }
    z = inv_diag.cwiseProduct(s);
    A.apply(z, t);
    const Scalar tt = t.squaredNorm();
    if (tt == Scalar(0)) {
      x += alpha * y;
      breakdown("omega");
      continue;
    }
    omega = t.dot(s) / tt;
    x += alpha * y + omega * z;
    r = s - omega * t;
    if (omega == Scalar(0)) {
      breakdown("omega");
      continue;
    }
    if (converged(r.norm())) {
      true_residual(r);
      r_norm = r.norm();
      if (converged(r_norm)) break;
      reset();
    }
  }

  true_residual(r);
  r_norm = r.norm();
  report.final_residual = relative(r_norm);
  report.converged = converged(r_norm);
  if (!report.converged)
    throw SolveFailure("BiCGStab did not converge in " +
                           std::to_string(cfg.max_iter) + " iterations (residual " +
                           std::to_string(report.final_residual) + ")",
                       report);
  return {GridField<Scalar>(A.grid(), std::move(x)), report};
}

inline constexpr Eigen::Index kDenseOracleLimit = 4096;

/// Assembles A column by column and solves by LU with partial pivoting.
/// Test oracle only.
template <LinearOperator Op>
Eigen::Matrix<typename Op::Scalar, Eigen::Dynamic, Eigen::Dynamic> assemble_dense(
    const Op& A) {
  using Scalar = typename Op::Scalar;
  const Eigen::Index n = A.grid().size();
  if (n > kDenseOracleLimit)
    throw std::length_error("assemble_dense: grid has " + std::to_string(n) +
                            " cells, limit is " + std::to_string(kDenseOracleLimit));
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> mat(n, n);
  VectorX<Scalar> e = VectorX<Scalar>::Zero(n), col;
  for (Eigen::Index j = 0; j < n; ++j) {
    e[j] = Scalar(1);
    A.apply(e, col);
    mat.col(j) = col;
    e[j] = Scalar(0);
  }
  return mat;
}

template <LinearOperator Op>
GridField<typename Op::Scalar> dense_solve_oracle(
    const Op& A, const GridField<typename Op::Scalar>& b) {
  using Scalar = typename Op::Scalar;
  using std::abs;
  require_same_grid(A.grid(), b.spec(), "dense_solve_oracle");
  const auto mat = assemble_dense(A);
  Eigen::PartialPivLU<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> lu(mat);
  const auto udiag = lu.matrixLU().diagonal().cwiseAbs();
  if (udiag.minCoeff() <= std::numeric_limits<Scalar>::epsilon() * udiag.maxCoeff())
    throw std::runtime_error("dense_solve_oracle: matrix is singular");
  return GridField<Scalar>(A.grid(), lu.solve(b.values()));
}

}  // namespace acmob
