#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "exkin/error.hpp"

namespace exkin {

/// Uniform cell-centred grid on [-L, L]^d with N points per axis.
/// Node i sits at -L + (i + 1/2) h, so nodes are symmetric about the origin.
struct VelocityGrid {
  int dim = 1;
  double extent = 8.0;
  int points = 64;

  VelocityGrid() = default;
  VelocityGrid(int d, double L, int n) : dim(d), extent(L), points(n) {
    if (d != 1 && d != 2) throw ConfigError("velocity grid dimension must be 1 or 2");
    if (!(L > 0.0)) throw ConfigError("velocity grid extent must be positive");
    if (n <= 0 || n % 2 != 0) throw ConfigError("velocity grid needs an even positive number of points per axis");
  }

  double spacing() const { return 2.0 * extent / points; }
  double weight() const { return std::pow(spacing(), dim); }
  double node(int i) const { return -extent + (i + 0.5) * spacing(); }
  std::size_t size() const { return dim == 1 ? points : static_cast<std::size_t>(points) * points; }
  double max_speed() const { return extent - 0.5 * spacing(); }

  /// Coordinates of flat index `k` (row-major, first axis slowest).
  std::array<double, 2> coords(std::size_t k) const {
    if (dim == 1) return {node(static_cast<int>(k)), 0.0};
    return {node(static_cast<int>(k / points)), node(static_cast<int>(k % points))};
  }

  friend bool operator==(const VelocityGrid&, const VelocityGrid&) = default;
};

/// Three-state discrete velocity model: (f+, f0, f-) with multiplicities (1, 2, 1).
struct DvmLayout {
  static constexpr std::size_t size() { return 3; }
  static constexpr std::array<double, 3> multiplicity{1.0, 2.0, 1.0};
  friend bool operator==(const DvmLayout&, const DvmLayout&) = default;
};

using Layout = std::variant<VelocityGrid, DvmLayout>;

/// Distribution values on a velocity grid or on the three Broadwell states.
struct DistState {
  Layout layout;
  std::vector<double> values;

  DistState() = default;
  DistState(Layout l, std::vector<double> v) : layout(std::move(l)), values(std::move(v)) {
    if (values.size() != layout_size(layout)) throw ConfigError("distribution size does not match its layout");
  }
  static DistState zeros(const Layout& l) { return DistState(l, std::vector<double>(layout_size(l), 0.0)); }
  static DistState dvm(double plus, double zero, double minus) { return DistState(DvmLayout{}, {plus, zero, minus}); }

  static std::size_t layout_size(const Layout& l) {
    return std::visit([](const auto& x) { return static_cast<std::size_t>(x.size()); }, l);
  }

  bool is_grid() const { return std::holds_alternative<VelocityGrid>(layout); }
  bool is_dvm() const { return std::holds_alternative<DvmLayout>(layout); }
  const VelocityGrid& grid() const {
    if (!is_grid()) throw ConfigError("expected a grid distribution");
    return std::get<VelocityGrid>(layout);
  }
  std::size_t size() const { return values.size(); }

  double min_value() const { return *std::min_element(values.begin(), values.end()); }
  double max_abs() const {
    double m = 0.0;
    for (double x : values) m = std::max(m, std::abs(x));
    return m;
  }
  bool finite() const {
    return std::all_of(values.begin(), values.end(), [](double x) { return std::isfinite(x); });
  }

  DistState& operator+=(const DistState& o) {
    require_same_layout(*this, o);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    return *this;
  }
  DistState& operator-=(const DistState& o) {
    require_same_layout(*this, o);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
    return *this;
  }
  DistState& operator*=(double s) {
    for (double& x : values) x *= s;
    return *this;
  }
  /// this += s * o
  DistState& axpy(double s, const DistState& o) {
    require_same_layout(*this, o);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += s * o.values[i];
    return *this;
  }

  friend DistState operator+(DistState a, const DistState& b) { return a += b; }
  friend DistState operator-(DistState a, const DistState& b) { return a -= b; }
  friend DistState operator*(double s, DistState a) { return a *= s; }

  static void require_same_layout(const DistState& a, const DistState& b) {
    if (!(a.layout == b.layout)) throw ConfigError("distribution layouts differ");
  }
};

inline double sup_distance(const DistState& a, const DistState& b) {
  DistState::require_same_layout(a, b);
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

/// Conserved moments (rho, rho u, E). For the three-state model the
/// momentum is m = f+ - f- and E = rho / 2 (every state has unit speed).
struct MomentVector {
  int dim = 1;
  double rho = 0.0;
  std::array<double, 2> momentum{0.0, 0.0};
  double energy = 0.0;

  static MomentVector from_primitive(int d, double rho, std::array<double, 2> u, double temperature) {
    MomentVector U;
    U.dim = d;
    U.rho = rho;
    double u2 = 0.0;
    for (int a = 0; a < d; ++a) {
      U.momentum[a] = rho * u[a];
      u2 += u[a] * u[a];
    }
    U.energy = 0.5 * rho * (u2 + d * temperature);
    return U;
  }

  std::array<double, 2> velocity() const {
    std::array<double, 2> u{0.0, 0.0};
    for (int a = 0; a < dim; ++a) u[a] = momentum[a] / rho;
    return u;
  }
  double speed_squared() const {
    const auto u = velocity();
    return u[0] * u[0] + u[1] * u[1];
  }
  /// T = (2E/rho - |u|^2) / d.
  double temperature() const { return (2.0 * energy / rho - speed_squared()) / dim; }

  std::array<double, 4> as_array() const { return {rho, momentum[0], momentum[1], energy}; }

  /// Largest componentwise difference, relative to max(1, |component|).
  double relative_difference(const MomentVector& o) const {
    const auto a = as_array(), b = o.as_array();
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      m = std::max(m, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(a[i])));
    return m;
  }
};

} // namespace exkin
