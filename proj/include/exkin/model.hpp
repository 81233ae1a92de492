#pragma once

// Collision models behind a common interface: exact BGK relaxation, the
// three-velocity Broadwell model and the 2-D spectral Maxwell-molecule
// operator. Every model supplies Q(f, f) = P(f, f) - mu_ref(f) f with a
// nonnegative gain P, so P / mu_ref is a density with the moments of f.

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <variant>

#include "exkin/error.hpp"
#include "exkin/maxwellian.hpp"
#include "exkin/spectral.hpp"
#include "exkin/state.hpp"

namespace exkin {

/// Q = mu0 (M[f] - f).
struct BgkModel {
  VelocityGrid grid;
  double relaxation_rate = 1.0;
};

/// 1-D Broadwell model; the zero-velocity state carries multiplicity 2.
struct BroadwellModel {};

/// Negativity tolerance for states of the spectral model.
inline constexpr double spectral_negativity_tolerance = 1e-5;

struct SpectralMaxwellModel {
  std::shared_ptr<const SpectralMaxwellOperator> op;
};

inline MomentVector dvm_moments(const DistState& f) {
  if (!f.is_dvm()) throw ConfigError("expected a three-state distribution");
  MomentVector U;
  U.dim = 1;
  U.rho = f.values[0] + 2.0 * f.values[1] + f.values[2];
  U.momentum[0] = f.values[0] - f.values[2];
  U.energy = 0.5 * U.rho;
  return U;
}

/// Unique nonnegative (f+, f0, f-) with the given (rho, m) and f0^2 = f+ f-.
inline DistState dvm_equilibrium(const MomentVector& U) {
  const double rho = U.rho, m = U.momentum[0];
  if (!(rho > 0.0)) throw ConfigError("Broadwell equilibrium requires positive density");
  if (!(std::abs(m) < rho)) throw ConfigError("Broadwell equilibrium requires |m| < rho");
  const double f0 = (rho * rho - m * m) / (4.0 * rho);
  return DistState::dvm(0.5 * (rho - 2.0 * f0 + m), f0, 0.5 * (rho - 2.0 * f0 - m));
}

class KineticModel {
public:
  using Kind = std::variant<BgkModel, BroadwellModel, SpectralMaxwellModel>;

  static KineticModel bgk(VelocityGrid grid, double relaxation_rate) {
    if (!(relaxation_rate > 0.0)) throw ConfigError("BGK relaxation rate must be positive");
    return KineticModel(BgkModel{grid, relaxation_rate});
  }
  static KineticModel broadwell() { return KineticModel(BroadwellModel{}); }
  static KineticModel spectral_maxwell_2d(VelocityGrid grid, int modes, double cross_section,
                                          double truncation_radius = 0.0) {
    if (truncation_radius <= 0.0) truncation_radius = SpectralMaxwellOperator::default_radius(grid);
    return KineticModel(SpectralMaxwellModel{
        std::make_shared<const SpectralMaxwellOperator>(grid, modes, cross_section, truncation_radius)});
  }

  const Kind& kind() const { return kind_; }
  bool is_bgk() const { return std::holds_alternative<BgkModel>(kind_); }
  bool is_broadwell() const { return std::holds_alternative<BroadwellModel>(kind_); }
  bool is_spectral() const { return std::holds_alternative<SpectralMaxwellModel>(kind_); }
  bool bilinear() const { return !is_bgk(); }

  std::string name() const {
    if (is_bgk()) return "bgk";
    if (is_broadwell()) return "broadwell";
    return "spectral_maxwell_2d";
  }

  /// Kernel exponent used by the mu estimators; 0 for all shipped models.
  double kernel_exponent() const { return gamma_; }
  void set_kernel_exponent(double gamma) {
    if (!(gamma >= 0.0 && gamma < 3.0)) throw ConfigError("kernel exponent must lie in [0, 3)");
    gamma_ = gamma;
  }

  Layout layout() const {
    if (auto* b = std::get_if<BgkModel>(&kind_)) return b->grid;
    if (auto* s = std::get_if<SpectralMaxwellModel>(&kind_)) return s->op->grid();
    return DvmLayout{};
  }

  void require_layout(const DistState& f) const {
    if (!(f.layout == layout())) throw ConfigError("distribution does not match the " + name() + " model layout");
  }

  MomentVector moments(const DistState& f) const {
    require_layout(f);
    return is_broadwell() ? dvm_moments(f) : grid_moments(f);
  }

  DistState equilibrium(const MomentVector& U) const {
    if (is_broadwell()) return dvm_equilibrium(U);
    return grid_equilibrium(std::get<VelocityGrid>(layout()), U);
  }

  /// Gain rate scale: mu_ref = scale * rho for the bilinear models.
  double loss_scale() const {
    if (auto* b = std::get_if<BgkModel>(&kind_)) return b->relaxation_rate;
    if (auto* s = std::get_if<SpectralMaxwellModel>(&kind_)) return s->op->cross_section();
    return 1.0;
  }

  /// The model's own mu, for which gain(f, f) >= 0.
  double reference_mu(const DistState& f) const {
    if (auto* b = std::get_if<BgkModel>(&kind_)) return b->relaxation_rate;
    return loss_scale() * moments(f).rho;
  }

  /// P(f, f) with mu = reference_mu(f).
  DistState gain(const DistState& f) const { return gain(f, f); }

  /// Symmetric bilinear gain P(f, g); BGK only accepts f == g.
  DistState gain(const DistState& f, const DistState& g) const {
    require_layout(f);
    require_layout(g);
    if (auto* b = std::get_if<BgkModel>(&kind_)) {
      if (&f != &g && f.values != g.values) throw ConfigError("model not bilinear");
      DistState p = grid_equilibrium(b->grid, grid_moments(f));
      return p *= b->relaxation_rate;
    }
    const double rf = moments(f).rho, rg = (&f == &g) ? rf : moments(g).rho;
    DistState p = collide(f, g);
    // + (mu/2)(rho_g f + rho_f g)
    p.axpy(0.5 * loss_scale() * rg, f);
    p.axpy(0.5 * loss_scale() * rf, g);
    return p;
  }

  /// Q(f, f) = P(f, f) - mu_ref f.
  DistState collision(const DistState& f) const {
    if (is_bgk()) {
      DistState q = gain(f);
      return q.axpy(-reference_mu(f), f);
    }
    return collide(f, f);
  }

  /// Negative values accepted in states of this model, relative to max|f|.
  /// Fourier truncation leaves spectral states with tail negatives near 1e-6.
  double negativity_tolerance() const { return is_spectral() ? spectral_negativity_tolerance : exkin::negativity_tolerance; }

  double entropy(const DistState& f) const {
    require_layout(f);
    if (!is_broadwell()) return grid_entropy(f, negativity_tolerance());
    double h = 0.0;
    const double floor = -negativity_tolerance() * f.max_abs();
    for (std::size_t i = 0; i < 3; ++i) {
      const double x = f.values[i];
      if (x < floor) throw NumericalError("entropy: distribution has negative values beyond tolerance");
      if (x > 1e-300) h += DvmLayout::multiplicity[i] * x * std::log(x);
    }
    return h;
  }

private:
  explicit KineticModel(Kind k) : kind_(std::move(k)) {}

  // Symmetrised bilinear Q(f, g) for the bilinear models.
  DistState collide(const DistState& f, const DistState& g) const {
    if (is_broadwell()) {
      const auto& a = f.values;
      const auto& b = g.values;
      const double q = a[1] * b[1] - 0.5 * (a[0] * b[2] + b[0] * a[2]);
      return DistState::dvm(q, -q, q);
    }
    if (auto* s = std::get_if<SpectralMaxwellModel>(&kind_))
      return DistState(f.layout, s->op->collide(f.values, g.values));
    throw ConfigError("model not bilinear");
  }

  Kind kind_;
  double gamma_ = 0.0;
};

} // namespace exkin
