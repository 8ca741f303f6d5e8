#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace acmob {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

class ShapeError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Periodic uniform Cartesian grid on [origin, origin + L)^dim with M cells per
/// axis. Node i along an axis sits at origin + i*h, i = 0..M-1.
class GridSpec {
public:
  GridSpec() = default;

  GridSpec(int dim, std::ptrdiff_t cells_per_dim, double domain_length,
           double origin = 0.0)
      : dim_(dim), cells_(cells_per_dim), length_(domain_length),
        origin_(origin) {
    if (dim < 1 || dim > 3)
      throw std::invalid_argument("GridSpec: dim must be 1, 2 or 3");
    if (cells_per_dim < 1)
      throw std::invalid_argument("GridSpec: cells_per_dim must be positive");
    if (!(domain_length > 0.0) || !std::isfinite(domain_length))
      throw std::invalid_argument("GridSpec: domain_length must be positive");
    if (!std::isfinite(origin))
      throw std::invalid_argument("GridSpec: origin must be finite");
    std::ptrdiff_t total = 1;
    for (int a = 0; a < dim; ++a) {
      if (total > std::numeric_limits<Eigen::Index>::max() / cells_per_dim)
        throw std::overflow_error("GridSpec: cell count overflows index type");
      total *= cells_per_dim;
    }
    size_ = total;
    spacing_ = domain_length / static_cast<double>(cells_per_dim);
  }

  int dim() const { return dim_; }
  std::ptrdiff_t cells_per_dim() const { return cells_; }
  double domain_length() const { return length_; }
  double origin() const { return origin_; }
  double spacing() const { return spacing_; }
  Eigen::Index size() const { return size_; }

  /// Stride of axis a in the flat (x fastest) layout.
  Eigen::Index stride(int axis) const {
    Eigen::Index s = 1;
    for (int a = 0; a < axis; ++a) s *= cells_;
    return s;
  }

  std::array<std::ptrdiff_t, 3> multi_index(Eigen::Index flat) const {
    std::array<std::ptrdiff_t, 3> idx{0, 0, 0};
    for (int a = 0; a < dim_; ++a) {
      idx[a] = flat % cells_;
      flat /= cells_;
    }
    return idx;
  }

  std::array<double, 3> node(Eigen::Index flat) const {
    const auto idx = multi_index(flat);
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int a = 0; a < dim_; ++a)
      x[a] = origin_ + spacing_ * static_cast<double>(idx[a]);
    return x;
  }

  /// Cell volume h^dim used by the discrete inner product.
  double cell_volume() const { return std::pow(spacing_, dim_); }

  friend bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.dim_ == b.dim_ && a.cells_ == b.cells_ && a.length_ == b.length_ &&
           a.origin_ == b.origin_;
  }

private:
  int dim_ = 1;
  std::ptrdiff_t cells_ = 1;
  double length_ = 1.0;
  double origin_ = 0.0;
  double spacing_ = 1.0;
  Eigen::Index size_ = 1;
};

/// Real-valued periodic grid function stored flat, x fastest.
template <typename Scalar>
class GridField {
public:
  using Vector = VectorX<Scalar>;

  GridField() = default;
  explicit GridField(const GridSpec& spec)
      : spec_(spec), values_(Vector::Zero(spec.size())) {}
  GridField(const GridSpec& spec, Scalar fill)
      : spec_(spec), values_(Vector::Constant(spec.size(), fill)) {}
  GridField(const GridSpec& spec, Vector values)
      : spec_(spec), values_(std::move(values)) {
    if (values_.size() != spec_.size())
      throw ShapeError("GridField: value count " +
                       std::to_string(values_.size()) + " != grid size " +
                       std::to_string(spec_.size()));
  }

  template <typename Fn>
  static GridField sample(const GridSpec& spec, Fn&& fn) {
    GridField out(spec);
    for (Eigen::Index i = 0; i < spec.size(); ++i)
      out.values_[i] = static_cast<Scalar>(fn(spec.node(i)));
    return out;
  }

  const GridSpec& spec() const { return spec_; }
  Eigen::Index size() const { return values_.size(); }
  const Vector& values() const { return values_; }
  Vector& values() { return values_; }
  Scalar operator[](Eigen::Index i) const { return values_[i]; }
  Scalar& operator[](Eigen::Index i) { return values_[i]; }

  bool all_finite() const { return values_.allFinite(); }

private:
  GridSpec spec_;
  Vector values_;
};

using Field = GridField<double>;

inline void require_same_grid(const GridSpec& a, const GridSpec& b,
                              const char* where) {
  if (!(a == b)) throw ShapeError(std::string(where) + ": mismatched grids");
}

/// out = Δ_h u, second-order central differences with periodic wraparound.
/// `in` and `out` must not alias.
template <typename Scalar>
void apply_laplacian(const GridSpec& g, const VectorX<Scalar>& in,
                     VectorX<Scalar>& out) {
  const Eigen::Index m = g.cells_per_dim();
  const Eigen::Index n = g.size();
  const Scalar inv_h2 = Scalar(1) / static_cast<Scalar>(g.spacing() * g.spacing());
  out.resize(n);
  const Scalar* u = in.data();
  Scalar* o = out.data();

  // axis 0: contiguous lines
  for (Eigen::Index line = 0; line < n; line += m) {
    const Scalar* ul = u + line;
    Scalar* ol = o + line;
    if (m == 1) {
      ol[0] = Scalar(0);
      continue;
    }
    ol[0] = ul[m - 1] + ul[1] - Scalar(2) * ul[0];
    for (Eigen::Index c = 1; c + 1 < m; ++c)
      ol[c] = ul[c - 1] + ul[c + 1] - Scalar(2) * ul[c];
    ol[m - 1] = ul[m - 2] + ul[0] - Scalar(2) * ul[m - 1];
  }

  for (int axis = 1; axis < g.dim(); ++axis) {
    const Eigen::Index stride = g.stride(axis);
    const Eigen::Index block = stride * m;
    for (Eigen::Index base = 0; base < n; base += block) {
      for (Eigen::Index c = 0; c < m; ++c) {
        const Eigen::Index cp = (c + 1 == m) ? 0 : c + 1;
        const Eigen::Index cm = (c == 0) ? m - 1 : c - 1;
        const Scalar* uc = u + base + c * stride;
        const Scalar* up = u + base + cp * stride;
        const Scalar* um = u + base + cm * stride;
        Scalar* oc = o + base + c * stride;
        for (Eigen::Index i = 0; i < stride; ++i)
          oc[i] += up[i] + um[i] - Scalar(2) * uc[i];
      }
    }
  }
  out *= inv_h2;
}

template <typename Scalar>
GridField<Scalar> laplacian(const GridField<Scalar>& u) {
  VectorX<Scalar> out;
  apply_laplacian(u.spec(), u.values(), out);
  return GridField<Scalar>(u.spec(), std::move(out));
}

/// ⟨u, v⟩ = h^d Σ u_i v_i. The sum runs sequentially so results are
/// reproducible bit for bit.
template <typename Scalar>
Scalar inner_product(const GridField<Scalar>& u, const GridField<Scalar>& v) {
  require_same_grid(u.spec(), v.spec(), "inner_product");
  Scalar acc(0);
  const Eigen::Index n = u.size();
  for (Eigen::Index i = 0; i < n; ++i) acc += u[i] * v[i];
  return static_cast<Scalar>(u.spec().cell_volume()) * acc;
}

template <typename Scalar>
Scalar max_norm(const GridField<Scalar>& u) {
  return u.values().cwiseAbs().maxCoeff();
}

template <typename Scalar>
Scalar max_value(const GridField<Scalar>& u) {
  return u.values().maxCoeff();
}

template <typename Scalar>
Scalar min_value(const GridField<Scalar>& u) {
  return u.values().minCoeff();
}

template <typename Scalar>
Scalar l2_norm(const GridField<Scalar>& u) {
  using std::sqrt;
  return sqrt(inner_product(u, u));
}

}  // namespace acmob
