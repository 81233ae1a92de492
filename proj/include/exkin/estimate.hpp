#pragma once

// Estimates of the collision-frequency bound mu and the Fourier distance d2.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "exkin/error.hpp"
#include "exkin/maxwellian.hpp"
#include "exkin/model.hpp"
#include "exkin/state.hpp"

namespace exkin {

enum class MuKind { loss_sup, particle_bound, average, linearized, fixed };

inline std::string to_string(MuKind k) {
  switch (k) {
  case MuKind::loss_sup: return "loss_sup";
  case MuKind::particle_bound: return "particle_bound";
  case MuKind::average: return "average";
  case MuKind::linearized: return "linearized";
  case MuKind::fixed: return "fixed";
  }
  return "unknown";
}

struct MuEstimate {
  double value = 0.0;
  MuKind kind = MuKind::loss_sup;
  bool guarantees_positivity = false;

  static MuEstimate make(double value, MuKind kind) {
    if (!(value >= 0.0) || !std::isfinite(value)) throw NumericalError("mu estimate is negative or non-finite");
    return {value, kind, kind == MuKind::loss_sup || kind == MuKind::particle_bound};
  }
};

namespace detail {

inline void require_grid_density(const DistState& f, const char* who, double tolerance) {
  if (!f.is_grid()) throw ConfigError(std::string(who) + ": expected a grid distribution");
  if (f.min_value() < -tolerance * f.max_abs())
    throw NumericalError(std::string(who) + ": distribution has negative values beyond tolerance");
}

inline void require_kernel_exponent(double gamma) {
  if (!(gamma >= 0.0 && gamma < 3.0)) throw ConfigError("kernel exponent must lie in [0, 3)");
}

// Same summation as grid_moments, so the gamma = 0 cases match rho bitwise.
inline double grid_mass(const DistState& f) { return grid_moments(f).rho; }

} // namespace detail

/// mu_p = max_i sum_j h^d |v_i - v_j|^gamma f_j over nodes i with f_i > 0.
/// At gamma = 0 this is the mass.
inline MuEstimate mu_p(const DistState& f, double gamma, double tolerance = negativity_tolerance) {
  detail::require_grid_density(f, "mu_p", tolerance);
  detail::require_kernel_exponent(gamma);
  if (gamma == 0.0) return MuEstimate::make(detail::grid_mass(f), MuKind::loss_sup);
  const VelocityGrid& g = f.grid();
  double best = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!(f.values[i] > 0.0)) continue;
    const auto vi = g.coords(i);
    double s = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) {
      const auto vj = g.coords(j);
      const double r = std::hypot(vi[0] - vj[0], vi[1] - vj[1]);
      s += std::pow(r, gamma) * f.values[j];
    }
    best = std::max(best, s);
  }
  return MuEstimate::make(g.weight() * best, MuKind::loss_sup);
}

/// 2^gamma max_i |v_i - u|^gamma with u the sample mean; bounds the mean
/// kernel (1/N) sum_j |v_i - v_j|^gamma for every sample i.
template <std::size_t D>
MuEstimate mu_p_particle_bound(std::span<const std::array<double, D>> velocities, double gamma) {
  if (velocities.empty()) throw ConfigError("mu_p_particle_bound: empty particle list");
  detail::require_kernel_exponent(gamma);
  std::array<double, D> u{};
  for (const auto& v : velocities)
    for (std::size_t a = 0; a < D; ++a) u[a] += v[a];
  for (auto& x : u) x /= static_cast<double>(velocities.size());
  double rmax = 0.0;
  for (const auto& v : velocities) {
    double r2 = 0.0;
    for (std::size_t a = 0; a < D; ++a) r2 += (v[a] - u[a]) * (v[a] - u[a]);
    rmax = std::max(rmax, std::sqrt(r2));
  }
  return MuEstimate::make(std::pow(2.0, gamma) * std::pow(rmax, gamma), MuKind::particle_bound);
}

inline MuEstimate mu_p_particle_bound(std::span<const double> velocities, double gamma) {
  std::vector<std::array<double, 1>> v(velocities.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = {velocities[i]};
  return mu_p_particle_bound(std::span<const std::array<double, 1>>(v), gamma);
}

/// mu_a = sum_i sum_j h^{2d} |v_i - v_j|^gamma f_i f_j. At gamma = 0 this is rho^2.
inline MuEstimate mu_a(const DistState& f, double gamma, double tolerance = negativity_tolerance) {
  detail::require_grid_density(f, "mu_a", tolerance);
  detail::require_kernel_exponent(gamma);
  const double rho = detail::grid_mass(f);
  if (gamma == 0.0) return MuEstimate::make(rho * rho, MuKind::average);
  const VelocityGrid& g = f.grid();
  double total = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto vi = g.coords(i);
    double s = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) {
      const auto vj = g.coords(j);
      s += std::pow(std::hypot(vi[0] - vj[0], vi[1] - vj[1]), gamma) * f.values[j];
    }
    total += s * f.values[i];
  }
  const double w = g.weight();
  return MuEstimate::make(w * w * total, MuKind::average);
}

/// Relative threshold on |f - M| below which a node is treated as equilibrium.
inline constexpr double linearized_threshold = 1e-10;

/// mu_s = max |Q(f, f) / (f - M)| over nodes away from equilibrium.
inline MuEstimate mu_s(const KineticModel& model, const DistState& f) {
  const DistState q = model.collision(f);
  const DistState m = model.equilibrium(model.moments(f));
  const DistState diff = f - m;
  const double cut = linearized_threshold * diff.max_abs();
  double best = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double d = diff.values[i];
    if (std::abs(d) > cut && d != 0.0) best = std::max(best, std::abs(q.values[i] / d));
  }
  return MuEstimate::make(best, MuKind::linearized);
}

/// Tolerance on the moment mismatch accepted by d2_distance.
inline constexpr double d2_moment_tolerance = 1e-8;

/// sup over nonzero discrete modes xi = pi k / L of |f^(xi) - g^(xi)| / |xi|^2,
/// with f^(xi) = sum_j h^d f_j exp(-i xi . v_j).
inline double d2_distance(const DistState& f, const DistState& g) {
  if (!f.is_grid() || !g.is_grid()) throw ConfigError("d2_distance: expected grid distributions");
  DistState::require_same_layout(f, g);
  if (grid_moments(f).relative_difference(grid_moments(g)) > d2_moment_tolerance)
    throw NumericalError("d2_distance: states do not share mass, momentum and energy");

  const VelocityGrid& grid = f.grid();
  const int n = grid.points;
  const double L = grid.extent;
  // Modes k = -n/2 .. n/2 - 1 on each axis.
  std::vector<std::complex<double>> e(static_cast<std::size_t>(n) * n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) {
      const double arg = -std::numbers::pi * (k - n / 2) / L * grid.node(j);
      e[static_cast<std::size_t>(k) * n + j] = {std::cos(arg), std::sin(arg)};
    }
  const double w = grid.weight();
  const double unit = std::numbers::pi / L;
  double best = 0.0;

  if (grid.dim == 1) {
    for (int k = 0; k < n; ++k) {
      if (k == n / 2) continue;
      std::complex<double> s = 0.0;
      for (int j = 0; j < n; ++j) s += e[static_cast<std::size_t>(k) * n + j] * (f.values[j] - g.values[j]);
      const double xi = unit * (k - n / 2);
      best = std::max(best, w * std::abs(s) / (xi * xi));
    }
    return best;
  }

  // Separable transform: first axis, then second.
  std::vector<std::complex<double>> tmp(static_cast<std::size_t>(n) * n);
  for (int k1 = 0; k1 < n; ++k1)
    for (int j2 = 0; j2 < n; ++j2) {
      std::complex<double> s = 0.0;
      for (int j1 = 0; j1 < n; ++j1) {
        const std::size_t idx = static_cast<std::size_t>(j1) * n + j2;
        s += e[static_cast<std::size_t>(k1) * n + j1] * (f.values[idx] - g.values[idx]);
      }
      tmp[static_cast<std::size_t>(k1) * n + j2] = s;
    }
  for (int k1 = 0; k1 < n; ++k1)
    for (int k2 = 0; k2 < n; ++k2) {
      if (k1 == n / 2 && k2 == n / 2) continue;
      std::complex<double> s = 0.0;
      for (int j2 = 0; j2 < n; ++j2) s += e[static_cast<std::size_t>(k2) * n + j2] * tmp[static_cast<std::size_t>(k1) * n + j2];
      const double x1 = unit * (k1 - n / 2), x2 = unit * (k2 - n / 2);
      best = std::max(best, w * std::abs(s) / (x1 * x1 + x2 * x2));
    }
  return best;
}

/// Config-selectable rule for choosing mu at the start of each step.
struct MuPolicy {
  MuKind kind = MuKind::loss_sup;
  double fixed_value = 0.0;

  /// Accepts loss_sup, particle_bound, average, linearized or fixed(<value>).
  static MuPolicy parse(const std::string& text) {
    if (text == "loss_sup") return {MuKind::loss_sup, 0.0};
    if (text == "particle_bound") return {MuKind::particle_bound, 0.0};
    if (text == "average") return {MuKind::average, 0.0};
    if (text == "linearized") return {MuKind::linearized, 0.0};
    if (text.rfind("fixed(", 0) == 0 && text.size() > 7 && text.back() == ')') {
      const std::string body = text.substr(6, text.size() - 7);
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(body, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != body.size() || !(v > 0.0) || !std::isfinite(v))
        throw ConfigError("mu policy fixed(<value>) needs a positive number, got '" + text + "'");
      return fixed(v);
    }
    throw ConfigError("unknown mu policy '" + text +
                      "' (expected loss_sup, particle_bound, average, linearized or fixed(<value>))");
  }
  static MuPolicy fixed(double v) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("fixed mu must be positive");
    return {MuKind::fixed, v};
  }
  std::string name() const {
    if (kind != MuKind::fixed) return to_string(kind);
    char buf[64];
    std::snprintf(buf, sizeof buf, "fixed(%.17g)", fixed_value);
    return buf;
  }
};

namespace detail {

// Nodes with f above a relative threshold, used as particles on grids.
inline std::vector<std::array<double, 2>> grid_particles(const DistState& f, double tolerance) {
  const VelocityGrid& g = f.grid();
  const double cut = tolerance * f.max_abs();
  std::vector<std::array<double, 2>> out;
  for (std::size_t k = 0; k < f.size(); ++k)
    if (f.values[k] > cut) out.push_back(g.coords(k));
  return out;
}

} // namespace detail

/// Loss-part bound for `model`: mu0 (BGK), rho (Broadwell), S mu_p (spectral).
/// With kernel exponent 0 the spectral bound is S rho, taken from the moments.
inline MuEstimate loss_sup(const KineticModel& model, const DistState& f) {
  if (model.is_bgk()) return MuEstimate::make(model.reference_mu(f), MuKind::loss_sup);
  if (model.is_broadwell()) return MuEstimate::make(model.moments(f).rho, MuKind::loss_sup);
  if (model.kernel_exponent() == 0.0) return MuEstimate::make(model.reference_mu(f), MuKind::loss_sup);
  return MuEstimate::make(model.loss_scale() * mu_p(f, model.kernel_exponent(), model.negativity_tolerance()).value,
                          MuKind::loss_sup);
}

/// Evaluates `policy` on the state at the start of a step.
inline MuEstimate estimate_mu(const MuPolicy& policy, const KineticModel& model, const DistState& f) {
  model.require_layout(f);
  switch (policy.kind) {
  case MuKind::loss_sup: return loss_sup(model, f);
  case MuKind::particle_bound: {
    if (model.is_bgk()) return MuEstimate::make(model.reference_mu(f), MuKind::particle_bound);
    const double rho = model.moments(f).rho;
    if (model.is_broadwell()) return MuEstimate::make(rho, MuKind::particle_bound);
    const auto particles = detail::grid_particles(f, model.negativity_tolerance());
    const double bound = mu_p_particle_bound(std::span<const std::array<double, 2>>(particles), model.kernel_exponent()).value;
    return MuEstimate::make(model.loss_scale() * rho * bound, MuKind::particle_bound);
  }
  case MuKind::average: {
    if (model.is_bgk()) return MuEstimate::make(model.reference_mu(f), MuKind::average);
    const double rho = model.moments(f).rho;
    if (model.is_broadwell()) return MuEstimate::make(rho, MuKind::average);
    return MuEstimate::make(
        model.loss_scale() * mu_a(f, model.kernel_exponent(), model.negativity_tolerance()).value / rho,
        MuKind::average);
  }
  case MuKind::linearized: return mu_s(model, f);
  case MuKind::fixed: return MuEstimate::make(policy.fixed_value, MuKind::fixed);
  }
  throw ConfigError("unknown mu policy");
}

} // namespace exkin
