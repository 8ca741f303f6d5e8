#include "acmob/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace acmob {

StepRecord make_record(int n, double t, double tau, double energy, double prev_energy,
                       const Field& phi, int iters, double residual) {
  StepRecord r;
  r.n = n;
  r.t = t;
  r.tau = tau;
  r.energy = energy;
  r.max_val = max_value(phi);
  r.min_val = min_value(phi);
  r.max_norm = std::max(std::abs(r.max_val), std::abs(r.min_val));
  r.solver_iters = iters;
  r.solver_residual = residual;
  r.mbp_violation = std::max(0.0, r.max_norm - 1.0);
  r.energy_increase = std::max(0.0, energy - prev_energy);
  return r;
}

Verdict check_mbp(const StepRecord& record, double slack) {
  const double v = std::max(0.0, record.max_norm - 1.0);
  return {v <= slack, v};
}

Verdict check_energy_dissipation(double prev_energy, double curr_energy, double slack) {
  const double v = std::max(0.0, curr_energy - prev_energy);
  return {v <= slack, v};
}

double energy_slack(double prev_energy, double rel) { return rel * (1.0 + std::abs(prev_energy)); }

double error_vs_exact(const Field& phi, const ExactSolution& exact, double t) {
  double err = 0.0;
  const auto& g = phi.spec();
  for (Eigen::Index i = 0; i < phi.size(); ++i)
    err = std::max(err, std::abs(phi[i] - exact(g.node(i), t)));
  return err;
}

std::vector<double> estimate_order(const ConvergenceTable& table) {
  if (table.rows.size() < 2) throw std::invalid_argument("estimate_order: need at least two rows");
  std::vector<double> orders;
  for (std::size_t i = 0; i + 1 < table.rows.size(); ++i) {
    const auto& a = table.rows[i];
    const auto& b = table.rows[i + 1];
    if (!(a.error > 0.0) || !(b.error > 0.0))
      throw std::domain_error("estimate_order: errors must be positive");
    if (!(a.mean_tau > 0.0) || !(b.mean_tau > 0.0) || a.mean_tau == b.mean_tau)
      throw std::domain_error("estimate_order: step sizes must be positive and distinct");
    orders.push_back(std::log(a.error / b.error) / std::log(a.mean_tau / b.mean_tau));
  }
  return orders;
}

int count_components(const Field& u, double level) {
  const auto& g = u.spec();
  const Eigen::Index n = g.size();
  const Eigen::Index m = g.cells_per_dim();
  std::vector<int> label(static_cast<std::size_t>(n), -1);
  std::vector<Eigen::Index> stack;
  int count = 0;
  for (Eigen::Index seed = 0; seed < n; ++seed) {
    if (label[seed] >= 0 || !(u[seed] > level)) continue;
    label[seed] = count;
    stack.push_back(seed);
    while (!stack.empty()) {
      const Eigen::Index cur = stack.back();
      stack.pop_back();
      const auto idx = g.multi_index(cur);
      for (int a = 0; a < g.dim(); ++a) {
        const Eigen::Index stride = g.stride(a);
        for (int dir : {-1, 1}) {
          const Eigen::Index c = (idx[a] + dir + m) % m;
          const Eigen::Index nb = cur + (c - idx[a]) * stride;
          if (label[nb] < 0 && u[nb] > level) {
            label[nb] = count;
            stack.push_back(nb);
          }
        }
      }
    }
    ++count;
  }
  return count;
}

namespace {

using Point = std::pair<double, double>;

double cross(const Point& o, const Point& a, const Point& b) {
  return (a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first);
}

double hull_area(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return 0.0;
  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lo = k + 1; i-- > 0;) {
    while (k >= lo && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  double area = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    area += a.first * b.second - b.first * a.second;
  }
  return 0.5 * std::abs(area);
}

}  // namespace

double solidity_2d(const Field& u, double level) {
  const auto& g = u.spec();
  if (g.dim() != 2) throw std::invalid_argument("solidity_2d: 2D fields only");
  std::vector<Point> corners;
  std::size_t cells = 0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (!(u[i] > level)) continue;
    ++cells;
    const auto idx = g.multi_index(i);
    const double x = static_cast<double>(idx[0]);
    const double y = static_cast<double>(idx[1]);
    for (double dx : {-0.5, 0.5})
      for (double dy : {-0.5, 0.5}) corners.emplace_back(x + dx, y + dy);
  }
  if (cells == 0) return 0.0;
  const double hull = hull_area(std::move(corners));
  return static_cast<double>(cells) / hull;
}

}  // namespace acmob
