#pragma once

// Shared helpers for the unit tests: random states and independent dense oracles.

#include "acmob/grid.hpp"
#include "acmob/physics.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

namespace acmob::test {

inline Field random_field(const GridSpec& g, std::mt19937_64& rng, double lo = -1.0,
                          double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Field f(g);
  for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = d(rng);
  return f;
}

/// Periodic Laplacian as a dense matrix, built row by row from neighbour
/// index arithmetic on the multi-index (no shared code with apply_laplacian).
inline Eigen::MatrixXd dense_laplacian(const GridSpec& g) {
  const Eigen::Index n = g.size();
  const auto m = g.cells_per_dim();
  const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index row = 0; row < n; ++row) {
    std::array<std::ptrdiff_t, 3> idx{0, 0, 0};
    Eigen::Index rest = row;
    for (int a = 0; a < g.dim(); ++a) {
      idx[a] = rest % m;
      rest /= m;
    }
    for (int a = 0; a < g.dim(); ++a) {
      for (int dir : {-1, 1}) {
        auto nb = idx;
        nb[a] = ((nb[a] + dir) % m + m) % m;
        Eigen::Index col = 0;
        for (int b = g.dim() - 1; b >= 0; --b) col = col * m + nb[b];
        L(row, col) += inv_h2;
      }
      L(row, row) -= 2.0 * inv_h2;
    }
  }
  return L;
}

inline std::vector<Mobility> mobility_families() {
  return {Mobility::constant(1.0), Mobility::two_sided(1.0), Mobility::one_sided()};
}

}  // namespace acmob::test
