#pragma once

// Explicit Runge-Kutta tableaux, the lambda-dependent coefficients of the
// exponential schemes built on them, the one-step contraction bound R(lambda)
// and numerical certificates for contractivity, AP and convexity.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "exkin/error.hpp"

namespace exkin {

/// Explicit (strictly lower triangular) Butcher tableau.
class ButcherTableau {
public:
  ButcherTableau() = default;

  /// `coeffs` is the full stages x stages matrix in row-major order.
  ButcherTableau(std::size_t stages, std::vector<double> coeffs, std::vector<double> w, std::vector<double> c)
      : stages_(stages), a_(std::move(coeffs)), w_(std::move(w)), c_(std::move(c)) {
    if (stages_ == 0) throw ConfigError("tableau: at least one stage required");
    if (a_.size() != stages_ * stages_ || w_.size() != stages_ || c_.size() != stages_)
      throw ConfigError("tableau: dimension mismatch for " + std::to_string(stages_) + " stages");
    for (std::size_t i = 0; i < stages_; ++i) {
      for (std::size_t j = i; j < stages_; ++j)
        if (a(i, j) != 0.0) throw ConfigError("tableau: a_ij must vanish for j >= i (explicit method)");
      double row = 0.0;
      for (std::size_t j = 0; j < i; ++j) row += a(i, j);
      if (std::abs(row - c_[i]) > 1e-12)
        throw ConfigError("tableau: c_" + std::to_string(i + 1) + " must equal the row sum of a");
    }
  }

  /// Build from the strictly lower triangle listed row by row (a21, a31, a32, ...).
  static ButcherTableau from_lower(std::size_t stages, const std::vector<double>& lower, std::vector<double> w,
                                   std::vector<double> c) {
    if (lower.size() != stages * (stages - 1) / 2)
      throw ConfigError("tableau: expected " + std::to_string(stages * (stages - 1) / 2) +
                        " lower-triangle entries, got " + std::to_string(lower.size()));
    std::vector<double> a(stages * stages, 0.0);
    std::size_t k = 0;
    for (std::size_t i = 1; i < stages; ++i)
      for (std::size_t j = 0; j < i; ++j) a[i * stages + j] = lower[k++];
    return ButcherTableau(stages, std::move(a), std::move(w), std::move(c));
  }

  std::size_t stages() const { return stages_; }
  double a(std::size_t i, std::size_t j) const { return a_[i * stages_ + j]; }
  double w(std::size_t i) const { return w_[i]; }
  double c(std::size_t i) const { return c_[i]; }
  const std::vector<double>& weights() const { return w_; }
  const std::vector<double>& abscissae() const { return c_; }

  double weight_sum() const {
    double s = 0.0;
    for (double x : w_) s += x;
    return s;
  }
  bool consistent() const { return std::abs(weight_sum() - 1.0) <= 1e-12; }

  bool nonnegative() const {
    return std::all_of(a_.begin(), a_.end(), [](double x) { return x >= 0.0; }) &&
           std::all_of(w_.begin(), w_.end(), [](double x) { return x >= 0.0; });
  }

private:
  std::size_t stages_ = 0;
  std::vector<double> a_, w_, c_;
};

enum class Underlying { euler, midpoint, heun3, rk4 };

inline ButcherTableau make_underlying(Underlying name) {
  switch (name) {
  case Underlying::euler:
    return ButcherTableau::from_lower(1, {}, {1.0}, {0.0});
  case Underlying::midpoint:
    return ButcherTableau::from_lower(2, {0.5}, {0.0, 1.0}, {0.0, 0.5});
  case Underlying::heun3:
    return ButcherTableau::from_lower(3, {1.0 / 3.0, 0.0, 2.0 / 3.0}, {0.25, 0.0, 0.75}, {0.0, 1.0 / 3.0, 2.0 / 3.0});
  case Underlying::rk4:
    return ButcherTableau::from_lower(4, {0.5, 0.0, 0.5, 0.0, 0.0, 1.0}, {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0},
                                      {0.0, 0.5, 0.5, 1.0});
  }
  throw ConfigError("unknown underlying method");
}

inline ButcherTableau make_underlying(const std::string& name) {
  if (name == "euler") return make_underlying(Underlying::euler);
  if (name == "midpoint") return make_underlying(Underlying::midpoint);
  if (name == "heun3") return make_underlying(Underlying::heun3);
  if (name == "rk4") return make_underlying(Underlying::rk4);
  throw ConfigError("unknown underlying method '" + name + "' (expected euler, midpoint, heun3 or rk4)");
}

/// Two-stage second order family w1 = 1 - w, w2 = w, a21 = 1/(2w).
inline ButcherTableau two_stage_family(double w) {
  if (!(w > 0.0 && w <= 1.0)) throw ConfigError("two-stage family requires w in (0, 1]");
  const double a21 = 0.5 / w;
  return ButcherTableau::from_lower(2, {a21}, {1.0 - w, w}, {0.0, a21});
}

enum class SchemeFamily { integrating_factor, etd1, time_relaxed };

/// Underlying tableau plus the exponential family built on it.
struct SchemeSpec {
  ButcherTableau tableau;
  SchemeFamily family = SchemeFamily::integrating_factor;
  int truncation = 0; ///< Wild-sum truncation order, time_relaxed only.
  std::string name;

  static SchemeSpec integrating_factor(ButcherTableau t, std::string name = "custom-if") {
    return {std::move(t), SchemeFamily::integrating_factor, 0, std::move(name)};
  }
  static SchemeSpec etd1() { return {make_underlying(Underlying::euler), SchemeFamily::etd1, 0, "etd1"}; }
  static SchemeSpec time_relaxed(int m) {
    if (m < 1 || m > 16) throw ConfigError("time-relaxed truncation must lie in 1..16");
    return {make_underlying(Underlying::euler), SchemeFamily::time_relaxed, m, "tr" + std::to_string(m)};
  }

  std::size_t stages() const { return tableau.stages(); }
};

/// Parse `euler-if | midpoint-if | heun3-if | rk4-if | etd1 | tr{m}`.
inline SchemeSpec parse_scheme(const std::string& name) {
  const std::string suffix = "-if";
  if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
    return SchemeSpec::integrating_factor(make_underlying(name.substr(0, name.size() - suffix.size())), name);
  if (name == "etd1") return SchemeSpec::etd1();
  if (name.size() > 2 && name.rfind("tr", 0) == 0) {
    const std::string digits = name.substr(2);
    if (std::all_of(digits.begin(), digits.end(), [](char ch) { return ch >= '0' && ch <= '9'; }) &&
        digits.size() <= 2)
      return SchemeSpec::time_relaxed(std::stoi(digits));
  }
  throw ConfigError("unknown scheme '" + name + "'");
}

struct ExpCoefficients {
  Eigen::MatrixXd A; ///< A_ij(lambda), strictly lower triangular
  Eigen::VectorXd W; ///< W_i(lambda)
};

inline void require_nonnegative_lambda(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw ConfigError("lambda must be a finite nonnegative number");
}

/// Integrating-factor coefficients A_ij = a_ij e^{-(c_i-c_j) lambda}, W_i = w_i e^{-(1-c_i) lambda}.
inline ExpCoefficients if_coeff(const ButcherTableau& t, double lambda) {
  require_nonnegative_lambda(lambda);
  const auto nu = static_cast<Eigen::Index>(t.stages());
  ExpCoefficients out{Eigen::MatrixXd::Zero(nu, nu), Eigen::VectorXd::Zero(nu)};
  for (Eigen::Index i = 0; i < nu; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      const double aij = t.a(i, j);
      if (aij != 0.0) out.A(i, j) = aij * std::exp(-(t.c(i) - t.c(j)) * lambda);
    }
    if (t.w(i) != 0.0) out.W(i) = t.w(i) * std::exp(-(1.0 - t.c(i)) * lambda);
  }
  return out;
}

inline ExpCoefficients if_coeff(const SchemeSpec& spec, double lambda) {
  if (spec.family != SchemeFamily::integrating_factor)
    throw ConfigError("if_coeff requires an integrating-factor scheme");
  return if_coeff(spec.tableau, lambda);
}

/// phi(z) = (1 - e^{-z}) / z with phi(0) = 1.
inline double phi(double z) {
  if (!(z >= 0.0)) throw ConfigError("phi: argument must be nonnegative");
  if (z < 1e-5) return 1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0;
  return -std::expm1(-z) / z;
}

/// phi_k(z) = e^{-z} (1 - e^{-z})^k / z, continuously extended at z = 0.
inline double phi_k(double z, int k) {
  if (!(z >= 0.0)) throw ConfigError("phi_k: argument must be nonnegative");
  if (k < 1) throw ConfigError("phi_k: k must be positive");
  // e^{-z} (1-e^{-z})^k / z = e^{-z} phi(z) (1-e^{-z})^{k-1}
  const double tau = -std::expm1(-z);
  return std::exp(-z) * phi(z) * std::pow(tau, k - 1);
}

/// One-step contraction bound of the scheme in the d2 metric.
inline double stability_R(const SchemeSpec& spec, double lambda) {
  require_nonnegative_lambda(lambda);
  switch (spec.family) {
  case SchemeFamily::etd1:
    return std::exp(-lambda) + lambda * phi(lambda);
  case SchemeFamily::time_relaxed: {
    const double tau = -std::expm1(-lambda);
    return 1.0 - std::pow(tau, spec.truncation + 1);
  }
  case SchemeFamily::integrating_factor:
    break;
  }
  // R = e^{-lambda} + sum_k lambda^{k+1} |W|^T |A|^k E e, using nilpotency of |A|.
  const auto& t = spec.tableau;
  const auto nu = static_cast<Eigen::Index>(t.stages());
  const auto co = if_coeff(t, lambda);
  const Eigen::MatrixXd Abar = co.A.cwiseAbs();
  const Eigen::VectorXd wbar = co.W.cwiseAbs();
  Eigen::VectorXd y(nu);
  for (Eigen::Index i = 0; i < nu; ++i) y(i) = std::exp(-t.c(i) * lambda);
  double r = std::exp(-lambda);
  double lam_pow = lambda;
  for (Eigen::Index k = 0; k < nu; ++k) {
    r += lam_pow * wbar.dot(y);
    y = Abar * y;
    lam_pow *= lambda;
  }
  return r;
}

struct Certificate {
  bool contractive = false;
  double sup_R = 0.0;
  bool ap = false;
  bool strong_ap = false;
  bool convex = false;
  std::vector<std::pair<double, double>> samples; ///< (lambda, R(lambda))
  std::optional<std::string> first_violation;
  std::vector<std::string> notes;

  void record_violation(std::string what) {
    if (!first_violation) first_violation = std::move(what);
  }
};

inline constexpr double certificate_slack = 1e-12;

/// lambda = 0 followed by a geometric grid from 1e-6 to lambda_max.
inline std::vector<double> probe_grid(double lambda_max, int n_probe) {
  if (!(lambda_max > 1e-6) || n_probe < 2) throw ConfigError("probe grid needs lambda_max > 1e-6 and n_probe >= 2");
  std::vector<double> grid{0.0};
  const double lo = std::log(1e-6), hi = std::log(lambda_max);
  for (int i = 0; i < n_probe; ++i) grid.push_back(std::exp(lo + (hi - lo) * i / (n_probe - 1)));
  grid.back() = lambda_max;
  return grid;
}

inline Certificate check_contractive(const SchemeSpec& spec, double lambda_max = 200.0, int n_probe = 64) {
  Certificate cert;
  cert.sup_R = -1.0;
  for (double lambda : probe_grid(lambda_max, n_probe)) {
    const double r = stability_R(spec, lambda);
    cert.samples.emplace_back(lambda, r);
    cert.sup_R = std::max(cert.sup_R, r);
    if (r > 1.0 + certificate_slack) cert.record_violation("R(" + std::to_string(lambda) + ") > 1");
  }
  cert.contractive = cert.sup_R <= 1.0 + certificate_slack;

  const auto& t = spec.tableau;
  if (spec.family == SchemeFamily::integrating_factor && t.nonnegative()) {
    // Sufficient condition w^T A^k e <= 1/(k+1)! for k < stages.
    const auto nu = static_cast<Eigen::Index>(t.stages());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nu, nu);
    Eigen::VectorXd w(nu), y = Eigen::VectorXd::Ones(nu);
    for (Eigen::Index i = 0; i < nu; ++i) {
      w(i) = t.w(i);
      for (Eigen::Index j = 0; j < i; ++j) A(i, j) = t.a(i, j);
    }
    double factorial = 1.0;
    bool holds = true;
    for (Eigen::Index k = 0; k < nu; ++k) {
      factorial *= static_cast<double>(k + 1);
      if (w.dot(y) > 1.0 / factorial + certificate_slack) holds = false;
      y = A * y;
    }
    cert.notes.push_back(std::string("order-condition bound w^T A^k e <= 1/(k+1)!: ") + (holds ? "holds" : "fails"));
  }
  return cert;
}

inline bool abscissae_nondecreasing_in_unit(const ButcherTableau& t) {
  if (t.c(0) != 0.0) return false;
  for (std::size_t i = 1; i < t.stages(); ++i)
    if (t.c(i) < t.c(i - 1)) return false;
  return t.c(t.stages() - 1) <= 1.0;
}

inline bool abscissae_strictly_increasing_below_one(const ButcherTableau& t) {
  if (t.c(0) != 0.0) return false;
  for (std::size_t i = 1; i < t.stages(); ++i)
    if (!(t.c(i) > t.c(i - 1))) return false;
  return t.c(t.stages() - 1) < 1.0;
}

inline constexpr double ap_lambda = 200.0;

inline Certificate check_ap(const SchemeSpec& spec) {
  Certificate cert;
  const double r_far = stability_R(spec, ap_lambda);
  cert.samples.emplace_back(ap_lambda, r_far);
  bool limit_zero = false;
  switch (spec.family) {
  case SchemeFamily::integrating_factor:
    // e^{-lambda} times a polynomial; bounded coefficients need 0 = c_1 <= ... <= c_nu <= 1.
    limit_zero = abscissae_nondecreasing_in_unit(spec.tableau);
    if (!limit_zero) cert.record_violation("abscissae not ordered in [0, 1]");
    cert.strong_ap = abscissae_strictly_increasing_below_one(spec.tableau);
    if (!cert.strong_ap) cert.notes.push_back("abscissae violate 0 = c_1 < ... < c_nu < 1");
    break;
  case SchemeFamily::etd1:
    // e^{-lambda} + lambda phi(lambda) == 1: no Maxwellian weight survives.
    limit_zero = false;
    cert.record_violation("R(lambda) -> 1 as lambda -> infinity");
    cert.strong_ap = false;
    break;
  case SchemeFamily::time_relaxed:
    limit_zero = true;
    cert.strong_ap = true;
    break;
  }
  if (!(r_far < 1e-10)) cert.record_violation("R(" + std::to_string(ap_lambda) + ") >= 1e-10");
  cert.ap = limit_zero && r_far < 1e-10;
  if (!cert.ap) cert.strong_ap = false;
  return cert;
}

/// Positivity/entropy (convexity) conditions for an IF scheme over `t`.
inline Certificate check_convex_if(const ButcherTableau& t, int k_max = 64, double lambda_max = 200.0,
                                   int n_probe = 64) {
  Certificate cert;
  if (k_max < 32) throw ConfigError("check_convex_if: k_max must be at least 32");
  if (!t.nonnegative()) {
    cert.record_violation("negative coefficient or weight");
    return cert;
  }
  const std::size_t nu = t.stages();
  bool ok = true;
  for (int k = 0; k <= k_max && ok; ++k) {
    for (std::size_t i = 0; i < nu; ++i) {
      double lhs = 0.0;
      for (std::size_t j = 0; j < i; ++j) lhs += t.a(i, j) * std::pow(t.c(j), k);
      if (lhs > std::pow(t.c(i), k) / (k + 1) + certificate_slack) {
        cert.record_violation("row " + std::to_string(i + 1) + " fails at k=" + std::to_string(k));
        ok = false;
        break;
      }
    }
    double lhs = 0.0;
    for (std::size_t i = 0; i < nu; ++i) lhs += t.w(i) * std::pow(t.c(i), k);
    if (ok && lhs > 1.0 / (k + 1) + certificate_slack) {
      cert.record_violation("weights fail at k=" + std::to_string(k));
      ok = false;
    }
  }
  // Exponential form, scaled by e^{-c_i lambda} (rows) and e^{-lambda} (weights).
  for (double lambda : probe_grid(lambda_max, n_probe)) {
    if (lambda == 0.0) continue;
    const auto co = if_coeff(t, lambda);
    for (std::size_t i = 0; i < nu && ok; ++i) {
      const double lhs = co.A.row(static_cast<Eigen::Index>(i)).sum();
      const double rhs = -std::expm1(-t.c(i) * lambda) / lambda;
      if (lhs > rhs + certificate_slack) {
        cert.record_violation("row " + std::to_string(i + 1) + " fails at lambda=" + std::to_string(lambda));
        ok = false;
      }
    }
    if (ok && co.W.sum() > -std::expm1(-lambda) / lambda + certificate_slack) {
      cert.record_violation("weights fail at lambda=" + std::to_string(lambda));
      ok = false;
    }
    if (!ok) break;
  }
  cert.convex = ok;
  return cert;
}

/// Full report for one scheme.
inline Certificate certify(const SchemeSpec& spec, double lambda_max = 200.0, int n_probe = 64) {
  Certificate cert = check_contractive(spec, lambda_max, n_probe);
  const Certificate ap = check_ap(spec);
  cert.ap = ap.ap;
  cert.strong_ap = ap.strong_ap;
  cert.notes.insert(cert.notes.end(), ap.notes.begin(), ap.notes.end());
  if (ap.first_violation) cert.record_violation(*ap.first_violation);
  if (spec.family == SchemeFamily::integrating_factor) {
    const Certificate cx = check_convex_if(spec.tableau, 64, lambda_max, n_probe);
    cert.convex = cx.convex;
    if (cx.first_violation) cert.record_violation("convexity: " + *cx.first_violation);
  } else {
    // ETD1 and TR updates are convex combinations by construction.
    cert.convex = true;
  }
  return cert;
}

inline nlohmann::json to_json(const Certificate& cert) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& [lambda, r] : cert.samples) samples.push_back({lambda, r});
  nlohmann::json j{{"contractive", cert.contractive},
                   {"sup_R", cert.sup_R},
                   {"ap", cert.ap},
                   {"strong_ap", cert.strong_ap},
                   {"convex", cert.convex},
                   {"samples", samples},
                   {"notes", cert.notes}};
  j["first_violation"] = cert.first_violation ? nlohmann::json(*cert.first_violation) : nlohmann::json(nullptr);
  return j;
}

/// Tableau from a config block with keys `stages`, `a` (row-major lower triangle), `w`, `c`.
inline ButcherTableau tableau_from_json(const nlohmann::json& j) {
  try {
    const auto stages = j.at("stages").get<std::size_t>();
    auto lower = j.at("a").get<std::vector<double>>();
    auto w = j.at("w").get<std::vector<double>>();
    auto c = j.at("c").get<std::vector<double>>();
    ButcherTableau t = ButcherTableau::from_lower(stages, lower, std::move(w), std::move(c));
    if (!t.consistent()) throw ConfigError("tableau: weights must sum to 1");
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("tableau block: ") + e.what());
  }
}

} // namespace exkin
