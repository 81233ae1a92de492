#pragma once

// One space dimension on [0, 1]: upwind free transport, Lie and Strang
// splitting with cell-wise relaxation, and the Sod shock-tube data.

#include <cmath>
#include <string>
#include <vector>

#include "exkin/error.hpp"
#include "exkin/exprk.hpp"
#include "exkin/maxwellian.hpp"
#include "exkin/state.hpp"

namespace exkin {

enum class Boundary { outflow };
enum class Splitting { lie, strang };

inline Splitting parse_splitting(const std::string& s) {
  if (s == "lie") return Splitting::lie;
  if (s == "strang") return Splitting::strang;
  throw ConfigError("unknown splitting '" + s + "' (expected lie or strang)");
}

/// Per-cell distributions on a shared d = 1 velocity grid.
struct PhaseState {
  VelocityGrid grid;
  std::vector<DistState> cells;
  Boundary boundary = Boundary::outflow;

  PhaseState() = default;
  PhaseState(VelocityGrid g, int nx) : grid(g) {
    if (g.dim != 1) throw ConfigError("phase space needs a 1-D velocity grid");
    if (nx <= 0) throw ConfigError("number of spatial cells must be positive");
    cells.assign(static_cast<std::size_t>(nx), DistState::zeros(g));
  }

  int nx() const { return static_cast<int>(cells.size()); }
  double dx() const { return 1.0 / nx(); }
  double x(int i) const { return (i + 0.5) * dx(); }

  double total_mass() const {
    double m = 0.0;
    for (const auto& c : cells) m += grid_moments(c).rho;
    return m * dx();
  }
};

/// Largest stable transport step for the upwind scheme.
inline double max_transport_step(const PhaseState& s) { return s.dx() / s.grid.max_speed(); }

/// First-order upwind update of f_t + v f_x = 0 with zero-gradient ghost cells.
inline PhaseState advect(const PhaseState& s, double dt) {
  if (!(dt > 0.0)) throw ConfigError("transport step must be positive");
  const double limit = max_transport_step(s);
  if (dt > limit * (1.0 + 1e-12))
    throw ConfigError("transport CFL violated: dt = " + std::to_string(dt) + " exceeds the admissible " +
                      std::to_string(limit));
  PhaseState out = s;
  const int nx = s.nx();
  for (int j = 0; j < s.grid.points; ++j) {
    const double v = s.grid.node(j);
    const double nu = v * dt / s.dx();
    for (int i = 0; i < nx; ++i) {
      const double fi = s.cells[i].values[j];
      if (v > 0.0) {
        const double up = s.cells[i > 0 ? i - 1 : 0].values[j];
        out.cells[i].values[j] = fi - nu * (fi - up);
      } else if (v < 0.0) {
        const double up = s.cells[i + 1 < nx ? i + 1 : nx - 1].values[j];
        out.cells[i].values[j] = fi - nu * (up - fi);
      }
    }
  }
  return out;
}

/// Advects over `dt` in equal substeps no longer than `max_substep`
/// (0 selects the CFL limit).
inline PhaseState advect_substeps(const PhaseState& s, double dt, double max_substep = 0.0) {
  if (max_substep <= 0.0) max_substep = max_transport_step(s);
  const int n = std::max(1, static_cast<int>(std::ceil(dt / max_substep - 1e-9)));
  PhaseState out = s;
  for (int k = 0; k < n; ++k) out = advect(out, dt / n);
  return out;
}

/// Relaxation over `dt` applied cell by cell.
inline PhaseState relax(const PhaseState& s, const Stepper& stepper_full, double dt) {
  Stepper stepper(stepper_full.model(), stepper_full.spec(), dt, stepper_full.eps(), stepper_full.policy());
  PhaseState out = s;
  for (std::size_t i = 0; i < s.cells.size(); ++i) out.cells[i] = stepper.step(s.cells[i]).f_next;
  return out;
}

/// One splitting step of length stepper.dt(). Lie: relaxation then transport.
/// Strang: half relaxation, transport, half relaxation.
inline PhaseState split_step(const PhaseState& s, const Stepper& stepper, Splitting kind, double max_substep = 0.0) {
  if (!(stepper.model().layout() == Layout(s.grid))) throw ConfigError("relaxation model and phase grid differ");
  const double dt = stepper.dt();
  if (kind == Splitting::lie) return advect_substeps(relax(s, stepper, dt), dt, max_substep);
  PhaseState out = relax(s, stepper, 0.5 * dt);
  out = advect_substeps(out, dt, max_substep);
  return relax(out, stepper, 0.5 * dt);
}

/// Sod data with the third component read as total energy E:
/// (1, 0, 5) on x < 1/2 and (0.125, 0, 4) on x >= 1/2.
inline PhaseState sod_setup(const VelocityGrid& grid, int nx = 150) {
  PhaseState s(grid, nx);
  auto state = [](double rho, double u, double E) {
    MomentVector U;
    U.dim = 1;
    U.rho = rho;
    U.momentum[0] = rho * u;
    U.energy = E;
    if (!(U.temperature() > 0.0)) throw ConfigError("Sod state has nonpositive temperature");
    return U;
  };
  const MomentVector left = state(1.0, 0.0, 5.0), right = state(0.125, 0.0, 4.0);
  const double tmax = std::max(left.temperature(), right.temperature());
  if (grid.extent < 8.0 * std::sqrt(tmax) * (1.0 - 1e-12))
    throw ConfigError("velocity grid too narrow for the Sod temperatures (need L >= 8 sqrt(T_max))");
  const DistState fl = grid_equilibrium(grid, left), fr = grid_equilibrium(grid, right);
  for (int i = 0; i < nx; ++i) s.cells[i] = s.x(i) < 0.5 ? fl : fr;
  return s;
}

struct CellProfile {
  double x, rho, u, T, q;
};

/// Density, velocity, temperature and heat flux q = <(v - u)^3 f> / 2 per cell.
inline std::vector<CellProfile> profiles(const PhaseState& s) {
  std::vector<CellProfile> out;
  out.reserve(s.cells.size());
  const double w = s.grid.weight();
  for (int i = 0; i < s.nx(); ++i) {
    const MomentVector U = grid_moments(s.cells[i]);
    const double u = U.velocity()[0];
    double q = 0.0;
    for (int j = 0; j < s.grid.points; ++j) {
      const double c = s.grid.node(j) - u;
      q += c * c * c * s.cells[i].values[j];
    }
    out.push_back({s.x(i), U.rho, u, U.temperature(), 0.5 * w * q});
  }
  return out;
}

} // namespace exkin
