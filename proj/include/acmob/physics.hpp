#pragma once

#include "acmob/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace acmob {

// Standard double well F(s) = (1 - s^2)^2 / 4 and its reaction term f = -F'.

template <typename Scalar>
constexpr Scalar potential(Scalar s) {
  const Scalar a = Scalar(1) - s * s;
  return Scalar(0.25) * a * a;
}

template <typename Scalar>
constexpr Scalar reaction(Scalar s) {
  return s - s * s * s;
}

/// max |f'| on [-1, 1]; the smallest admissible S1.
inline constexpr double kReactionLipschitz = 2.0;

/// Phase-dependent mobility: constant c, (1 - s^2)^m, or (1 + s)/2.
class Mobility {
public:
  enum class Kind { Constant, TwoSidedDegenerate, OneSided };

  static Mobility constant(double c) {
    if (!(c >= 0.0) || !std::isfinite(c))
      throw std::invalid_argument("Mobility: constant must be >= 0");
    return Mobility(Kind::Constant, c);
  }
  static Mobility two_sided(double m) {
    if (!(m > 0.0) || !std::isfinite(m))
      throw std::invalid_argument("Mobility: exponent m must be > 0");
    return Mobility(Kind::TwoSidedDegenerate, m);
  }
  static Mobility one_sided() { return Mobility(Kind::OneSided, 0.0); }

  Kind kind() const { return kind_; }
  /// The constant for Constant, the exponent m for TwoSidedDegenerate.
  double parameter() const { return param_; }

  template <typename Scalar>
  Scalar operator()(Scalar s) const {
    switch (kind_) {
      case Kind::Constant:
        return static_cast<Scalar>(param_);
      case Kind::TwoSidedDegenerate: {
        const Scalar base = Scalar(1) - s * s;
        if (param_ == 1.0) return base;
        if (param_ == std::floor(param_) && param_ <= 16.0) {
          Scalar r(1);
          for (int k = 0; k < static_cast<int>(param_); ++k) r *= base;
          return r;
        }
        using std::pow;
        return base <= Scalar(0) ? Scalar(0)
                                 : static_cast<Scalar>(pow(base, param_));
      }
      case Kind::OneSided:
        return Scalar(0.5) * (Scalar(1) + s);
    }
    return Scalar(0);
  }

  /// K_M = max over [-1, 1].
  double max_on_unit_interval() const {
    switch (kind_) {
      case Kind::Constant:
        return param_;
      case Kind::TwoSidedDegenerate:
      case Kind::OneSided:
        return 1.0;
    }
    return 0.0;
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::Constant:
        return "constant(" + std::to_string(param_) + ")";
      case Kind::TwoSidedDegenerate:
        return "two_sided(m=" + std::to_string(param_) + ")";
      case Kind::OneSided:
        return "one_sided";
    }
    return "?";
  }

  friend bool operator==(const Mobility& a, const Mobility& b) {
    return a.kind_ == b.kind_ && a.param_ == b.param_;
  }

private:
  Mobility(Kind k, double p) : kind_(k), param_(p) {}
  Kind kind_ = Kind::Constant;
  double param_ = 1.0;
};

template <typename Scalar>
VectorX<Scalar> evaluate_mobility(const Mobility& mob, const VectorX<Scalar>& s) {
  VectorX<Scalar> out(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) out[i] = mob(s[i]);
  return out;
}

/// E_h[u] = -(eps^2/2) ⟨Δ_h u, u⟩ + ⟨F(u), 1⟩.
template <typename Scalar>
Scalar discrete_energy(const GridField<Scalar>& u, Scalar eps) {
  VectorX<Scalar> lap;
  apply_laplacian(u.spec(), u.values(), lap);
  Scalar grad(0), bulk(0);
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    grad += lap[i] * u[i];
    bulk += potential(u[i]);
  }
  const auto vol = static_cast<Scalar>(u.spec().cell_volume());
  return vol * (-Scalar(0.5) * eps * eps * grad + bulk);
}

}  // namespace acmob
