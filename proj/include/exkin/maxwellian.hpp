#pragma once

// Quadrature of conserved moments on velocity grids, Maxwellian equilibria
// and the Boltzmann H functional.

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "exkin/error.hpp"
#include "exkin/state.hpp"

namespace exkin {

inline MomentVector grid_moments(const DistState& f) {
  const VelocityGrid& g = f.grid();
  const double w = g.weight();
  MomentVector U;
  U.dim = g.dim;
  for (std::size_t k = 0; k < f.size(); ++k) {
    const auto v = g.coords(k);
    const double m = w * f.values[k];
    U.rho += m;
    U.momentum[0] += m * v[0];
    U.momentum[1] += m * v[1];
    U.energy += 0.5 * m * (v[0] * v[0] + v[1] * v[1]);
  }
  return U;
}

/// Pointwise Maxwellian rho / (2 pi T)^{d/2} exp(-|v - u|^2 / (2T)).
inline double maxwellian_value(const MomentVector& U, std::array<double, 2> v) {
  const double T = U.temperature();
  const auto u = U.velocity();
  double r2 = 0.0;
  for (int a = 0; a < U.dim; ++a) r2 += (v[a] - u[a]) * (v[a] - u[a]);
  return U.rho / std::pow(2.0 * std::numbers::pi * T, 0.5 * U.dim) * std::exp(-r2 / (2.0 * T));
}

inline void require_admissible_moments(const MomentVector& U) {
  if (!(U.rho > 0.0) || !std::isfinite(U.rho)) throw ConfigError("Maxwellian requires positive density");
  const double T = U.temperature();
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("Maxwellian requires positive temperature");
}

/// Analytic Maxwellian sampled at the grid nodes.
inline DistState sample_maxwellian(const VelocityGrid& g, const MomentVector& U) {
  require_admissible_moments(U);
  if (U.dim != g.dim) throw ConfigError("moment dimension does not match grid");
  DistState f = DistState::zeros(g);
  for (std::size_t k = 0; k < f.size(); ++k) f.values[k] = maxwellian_value(U, g.coords(k));
  return f;
}

/// Grid equilibrium: the discrete exponential exp(a + b.v + c|v|^2/2) whose
/// grid moments equal U to round-off. Starts from the sampled Maxwellian and
/// runs Newton on the (d + 2) exponent parameters.
inline DistState grid_equilibrium(const VelocityGrid& g, const MomentVector& U) {
  require_admissible_moments(U);
  if (U.dim != g.dim) throw ConfigError("moment dimension does not match grid");
  const int d = g.dim;
  const int np = d + 2;
  const double T = U.temperature();
  const auto u = U.velocity();

  Eigen::VectorXd theta(np);
  theta(0) = std::log(U.rho) - 0.5 * d * std::log(2.0 * std::numbers::pi * T) - U.speed_squared() / (2.0 * T);
  for (int a = 0; a < d; ++a) theta(1 + a) = u[a] / T;
  theta(np - 1) = -1.0 / T;

  Eigen::VectorXd target(np), scale(np);
  target(0) = U.rho;
  scale(0) = U.rho;
  for (int a = 0; a < d; ++a) {
    target(1 + a) = U.momentum[a];
    scale(1 + a) = U.rho * std::sqrt(T + U.speed_squared());
  }
  target(np - 1) = U.energy;
  scale(np - 1) = U.energy;

  const double w = g.weight();
  DistState f = DistState::zeros(g);
  auto features = [&](std::size_t k) {
    const auto v = g.coords(k);
    Eigen::VectorXd phi(np);
    phi(0) = 1.0;
    for (int a = 0; a < d; ++a) phi(1 + a) = v[a];
    phi(np - 1) = 0.5 * (v[0] * v[0] + v[1] * v[1]);
    return phi;
  };

  double residual = 0.0, previous = INFINITY;
  for (int iter = 0; iter < 50; ++iter) {
    Eigen::VectorXd G = Eigen::VectorXd::Zero(np);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(np, np);
    for (std::size_t k = 0; k < f.size(); ++k) {
      const Eigen::VectorXd phi = features(k);
      const double m = std::exp(theta.dot(phi));
      f.values[k] = m;
      G += (w * m) * phi;
      J += (w * m) * phi * phi.transpose();
    }
    residual = ((target - G).array() / scale.array()).abs().maxCoeff();
    if (!std::isfinite(residual)) break;
    // Converged, or stalled at round-off.
    if (residual <= 1e-15 || (residual <= 1e-13 && residual >= 0.5 * previous)) return f;
    previous = residual;
    theta += J.ldlt().solve(target - G);
  }
  if (std::isfinite(residual) && residual <= 1e-13) return f;
  throw NumericalError("grid equilibrium did not converge (relative moment residual " + std::to_string(residual) +
                       "); the velocity grid cannot resolve this temperature");
}

/// Relative size of negative values accepted in a grid density.
inline constexpr double negativity_tolerance = 1e-8;

/// H(f) = sum w f log f with 0 log 0 := 0; negatives down to
/// -tolerance * max|f| are clipped, larger ones are an error.
inline double grid_entropy(const DistState& f, double tolerance = negativity_tolerance) {
  const VelocityGrid& g = f.grid();
  const double floor = -tolerance * f.max_abs();
  double h = 0.0;
  for (double x : f.values) {
    if (x < floor) throw NumericalError("entropy: distribution has negative values beyond tolerance");
    if (x > 1e-300) h += x * std::log(x);
  }
  return g.weight() * h;
}

/// <|v|^4 f>, the fourth moment diagnostic.
inline double fourth_moment(const DistState& f) {
  const VelocityGrid& g = f.grid();
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    const auto v = g.coords(k);
    const double v2 = v[0] * v[0] + v[1] * v[1];
    s += v2 * v2 * f.values[k];
  }
  return g.weight() * s;
}

} // namespace exkin
