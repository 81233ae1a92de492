#pragma once

// Exponential Runge-Kutta steps for df/dt = (1/eps) Q(f, f), written with
// Q = P - mu f and lambda = mu dt / eps:
//
//   F_i    = e^{-c_i lambda} f + lambda sum_j A_ij (P(F_j)/mu - M) + (1 - e^{-c_i lambda}) M
//   f_next = e^{-lambda} f + lambda sum_i W_i (P(F_i)/mu - M) + (1 - e^{-lambda}) M
//
// M is the equilibrium of f and stays fixed for the whole step. The code
// uses the equivalent form (dt/eps) A_ij (P - mu M), which stays finite at mu = 0.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "exkin/error.hpp"
#include "exkin/estimate.hpp"
#include "exkin/model.hpp"
#include "exkin/state.hpp"
#include "exkin/tableau.hpp"

namespace exkin {

struct StepContext {
  KineticModel model;
  SchemeSpec spec;
  double dt = 0.0;
  double eps = 1.0;
  MuEstimate mu;
  bool retain_stages = false;

  double lambda() const { return mu.value * dt / eps; }

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time step must be positive");
    if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigError("eps must be positive");
    if (!(mu.value >= 0.0) || !std::isfinite(lambda())) throw ConfigError("mu dt / eps must be finite and nonnegative");
  }
};

struct StepReport {
  DistState f_next;
  std::vector<DistState> stages;
  double moment_drift = 0.0;
  double min_value = 0.0;
  double entropy_delta = std::numeric_limits<double>::quiet_NaN(); ///< NaN when H is undefined
  double mu = 0.0;
  bool convexity_warning = false;
  int retries = 0;
};

/// Largest negative value a step may produce before it counts as a positivity loss.
inline double positivity_floor(const KineticModel& model, const DistState& f) {
  return -(f.is_dvm() ? 1e-14 : model.negativity_tolerance()) * f.max_abs();
}

namespace detail {

inline void require_finite(const DistState& f, const SchemeSpec& spec, const std::string& where) {
  if (!f.finite()) throw NumericalError(spec.name + ": non-finite values in " + where);
}

inline std::string stage_label(std::size_t i) { return "stage " + std::to_string(i + 1); }

// Q(F, F) + mu F.
inline DistState shifted_gain(const KineticModel& model, const DistState& F, double mu) {
  DistState p = model.gain(F);
  const double mu_ref = model.reference_mu(F);
  if (mu != mu_ref) p.axpy(mu - mu_ref, F);
  return p;
}

// Bilinear gain with mu in place of the model's own shift:
// P_mu(f, g) = Q(f, g) + (mu / (2 rho0)) (rho_g f + rho_f g).
inline DistState shifted_gain(const KineticModel& model, const DistState& f, const DistState& g, double mu,
                              double rho0) {
  DistState p = model.gain(f, g);
  const double c = 0.5 * (mu / rho0 - model.loss_scale());
  if (c != 0.0) {
    p.axpy(c * model.moments(g).rho, f);
    p.axpy(c * model.moments(f).rho, g);
  }
  return p;
}

inline void finish_report(const KineticModel& model, const DistState& f, StepReport& r) {
  r.moment_drift = model.moments(r.f_next).relative_difference(model.moments(f));
  r.min_value = r.f_next.min_value();
  try {
    r.entropy_delta = model.entropy(r.f_next) - model.entropy(f);
  } catch (const NumericalError&) {
    // Left as NaN: one of the states is outside the entropy's domain.
  }
}

// Shared IF stage loop; `gain` returns the shifted gain P(F) used with `mu`.
template <class Gain>
StepReport if_stages(const StepContext& ctx, const DistState& f, double mu, Gain&& gain) {
  const ButcherTableau& t = ctx.spec.tableau;
  const std::size_t nu = t.stages();
  const double lambda = mu * ctx.dt / ctx.eps;
  const double h = ctx.dt / ctx.eps;
  const auto co = if_coeff(t, lambda);
  const DistState M = ctx.model.equilibrium(ctx.model.moments(f));

  // D_j = P(F_j) - mu M
  std::vector<DistState> D;
  D.reserve(nu);
  StepReport r;
  for (std::size_t i = 0; i < nu; ++i) {
    const double ci = t.c(i);
    DistState F = std::exp(-ci * lambda) * f;
    for (std::size_t j = 0; j < i; ++j) {
      const double a = co.A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (a != 0.0) F.axpy(h * a, D[j]);
    }
    F.axpy(-std::expm1(-ci * lambda), M);
    require_finite(F, ctx.spec, stage_label(i));
    DistState d = gain(F);
    d.axpy(-mu, M);
    require_finite(d, ctx.spec, "gain of " + stage_label(i));
    D.push_back(std::move(d));
    if (ctx.retain_stages) r.stages.push_back(std::move(F));
  }

  DistState out = std::exp(-lambda) * f;
  for (std::size_t i = 0; i < nu; ++i) {
    const double w = co.W(static_cast<Eigen::Index>(i));
    if (w != 0.0) out.axpy(h * w, D[i]);
  }
  out.axpy(-std::expm1(-lambda), M);
  require_finite(out, ctx.spec, "update");
  r.f_next = std::move(out);
  r.mu = mu;
  finish_report(ctx.model, f, r);
  return r;
}

inline void require_family(const StepContext& ctx, SchemeFamily family, const char* op) {
  ctx.validate();
  if (ctx.spec.family != family) throw ConfigError(std::string(op) + ": scheme '" + ctx.spec.name + "' has the wrong family");
}

} // namespace detail

/// One integrating-factor step with mu = ctx.mu.
inline StepReport step_if(const StepContext& ctx, const DistState& f) {
  detail::require_family(ctx, SchemeFamily::integrating_factor, "step_if");
  ctx.model.require_layout(f);
  const double mu = ctx.mu.value;
  return detail::if_stages(ctx, f, mu, [&](const DistState& F) { return detail::shifted_gain(ctx.model, F, mu); });
}

/// IF step for an arbitrary mu <= mu_p, evaluated through P_p = Q + mu_p F and
/// the (lambda_p - lambda) correction. Values of mu above mu_p are clamped.
/// Flags a convexity warning when dt > eps / (mu_p - mu).
inline StepReport step_if_general_mu(const StepContext& ctx, const MuEstimate& mu_p_est, const DistState& f) {
  detail::require_family(ctx, SchemeFamily::integrating_factor, "step_if_general_mu");
  ctx.model.require_layout(f);
  const double mu_p = mu_p_est.value;
  if (!(mu_p > 0.0) || !std::isfinite(mu_p)) throw ConfigError("step_if_general_mu: mu_p must be positive");
  const double mu = std::min(ctx.mu.value, mu_p);
  const double gap = mu_p - mu;
  StepReport r = detail::if_stages(ctx, f, mu, [&](const DistState& F) {
    DistState p = detail::shifted_gain(ctx.model, F, mu_p);
    if (gap != 0.0) p.axpy(-gap, F);
    return p;
  });
  r.convexity_warning = gap > 0.0 && ctx.dt > ctx.eps / gap;
  return r;
}

/// f_next = e^{-lambda} f + lambda phi(lambda) P(f, f) / mu.
inline StepReport step_etd1(const StepContext& ctx, const DistState& f) {
  detail::require_family(ctx, SchemeFamily::etd1, "step_etd1");
  ctx.model.require_layout(f);
  const double mu = ctx.mu.value;
  if (!(mu > 0.0)) throw ConfigError("step_etd1: mu must be positive");
  const double lambda = ctx.lambda();
  DistState p = detail::shifted_gain(ctx.model, f, mu);
  detail::require_finite(p, ctx.spec, "gain");
  StepReport r;
  // lambda phi(lambda) = 1 - e^{-lambda}
  DistState out = std::exp(-lambda) * f;
  out.axpy(-std::expm1(-lambda) / mu, p);
  detail::require_finite(out, ctx.spec, "update");
  r.f_next = std::move(out);
  r.mu = mu;
  detail::finish_report(ctx.model, f, r);
  return r;
}

/// Wild coefficients f_0 .. f_m: f_{k+1} = (1/(k+1)) sum_{h=0}^{k} P(f_h, f_{k-h}) / mu.
/// mu <= 0 selects the model's own mu for f_0.
inline std::vector<DistState> wild_coeffs(const KineticModel& model, const DistState& f0, int m, double mu = 0.0) {
  if (!model.bilinear()) throw ConfigError("model not bilinear");
  if (m < 0 || m > 16) throw ConfigError("Wild truncation must lie in 0..16");
  model.require_layout(f0);
  const double rho0 = model.moments(f0).rho;
  if (mu <= 0.0) mu = model.reference_mu(f0);
  std::vector<DistState> out{f0};
  out.reserve(static_cast<std::size_t>(m) + 1);
  for (int k = 0; k < m; ++k) {
    // P is symmetric, so pair (h, k-h) with (k-h, h).
    DistState sum = DistState::zeros(f0.layout);
    for (int h = 0; 2 * h <= k; ++h) {
      const DistState p = detail::shifted_gain(model, out[h], out[k - h], mu, rho0);
      sum.axpy(2 * h == k ? 1.0 : 2.0, p);
    }
    sum *= 1.0 / ((k + 1) * mu);
    out.push_back(std::move(sum));
  }
  return out;
}

/// Weights (e^{-lambda} tau^0, ..., e^{-lambda} tau^m, tau^{m+1}), tau = 1 - e^{-lambda}.
inline std::vector<double> tr_weights(double lambda, int m) {
  require_nonnegative_lambda(lambda);
  if (m < 0) throw ConfigError("Wild truncation must be nonnegative");
  const double e = std::exp(-lambda), tau = -std::expm1(-lambda);
  std::vector<double> w(static_cast<std::size_t>(m) + 2);
  double tk = 1.0;
  for (int k = 0; k <= m; ++k, tk *= tau) w[k] = e * tk;
  w[m + 1] = tk;
  return w;
}

/// Truncated Wild sum: e^{-lambda} sum_k tau^k f_k + tau^{m+1} M.
inline StepReport step_tr(const StepContext& ctx, const DistState& f) {
  detail::require_family(ctx, SchemeFamily::time_relaxed, "step_tr");
  ctx.model.require_layout(f);
  if (!ctx.model.bilinear()) throw ConfigError("model not bilinear");
  const double mu = ctx.mu.value;
  if (!(mu > 0.0)) throw ConfigError("step_tr: mu must be positive");
  const int m = ctx.spec.truncation;
  const auto fk = wild_coeffs(ctx.model, f, m, mu);
  for (std::size_t k = 1; k < fk.size(); ++k) detail::require_finite(fk[k], ctx.spec, "Wild coefficient " + std::to_string(k));
  const auto w = tr_weights(ctx.lambda(), m);
  const DistState M = ctx.model.equilibrium(ctx.model.moments(f));
  DistState out = DistState::zeros(f.layout);
  for (int k = 0; k <= m; ++k)
    if (w[k] != 0.0) out.axpy(w[k], fk[k]);
  out.axpy(w[m + 1], M);
  detail::require_finite(out, ctx.spec, "update");
  StepReport r;
  if (ctx.retain_stages) r.stages.assign(fk.begin() + 1, fk.end());
  r.f_next = std::move(out);
  r.mu = mu;
  detail::finish_report(ctx.model, f, r);
  return r;
}

/// Dispatches on the scheme family. IF steps whose mu lies below the loss
/// bound and carries no positivity guarantee go through step_if_general_mu.
inline StepReport step(const StepContext& ctx, const DistState& f) {
  switch (ctx.spec.family) {
  case SchemeFamily::etd1: return step_etd1(ctx, f);
  case SchemeFamily::time_relaxed: return step_tr(ctx, f);
  case SchemeFamily::integrating_factor: break;
  }
  if (!ctx.mu.guarantees_positivity) {
    const MuEstimate bound = loss_sup(ctx.model, f);
    if (ctx.mu.value < bound.value) return step_if_general_mu(ctx, bound, f);
  }
  return step_if(ctx, f);
}

/// Fixed-step driver: refreshes mu from the policy at the start of each step.
class Stepper {
public:
  Stepper(KineticModel model, SchemeSpec spec, double dt, double eps, MuPolicy policy)
      : model_(std::move(model)), spec_(std::move(spec)), dt_(dt), eps_(eps), policy_(policy) {
    StepContext{model_, spec_, dt_, eps_, {}, false}.validate();
  }

  /// Retry a step once with mu doubled when it loses positivity, then fail.
  Stepper& retry_on_negative(bool on = true) {
    retry_ = on;
    return *this;
  }
  Stepper& retain_stages(bool on = true) {
    retain_ = on;
    return *this;
  }

  const KineticModel& model() const { return model_; }
  const SchemeSpec& spec() const { return spec_; }
  double dt() const { return dt_; }
  double eps() const { return eps_; }
  const MuPolicy& policy() const { return policy_; }

  StepContext context(const DistState& f) const {
    return {model_, spec_, dt_, eps_, estimate_mu(policy_, model_, f), retain_};
  }

  StepReport step(const DistState& f) const {
    StepContext ctx = context(f);
    StepReport r = exkin::step(ctx, f);
    if (!retry_ || r.min_value >= positivity_floor(model_, r.f_next)) return r;
    ctx.mu.value *= 2.0;
    r = exkin::step(ctx, f);
    r.retries = 1;
    if (r.min_value < positivity_floor(model_, r.f_next))
      throw NumericalError(spec_.name + ": step lost positivity even with mu doubled (min value " +
                           std::to_string(r.min_value) + ")");
    return r;
  }

private:
  KineticModel model_;
  SchemeSpec spec_;
  double dt_, eps_;
  MuPolicy policy_;
  bool retry_ = false;
  bool retain_ = false;
};

} // namespace exkin
