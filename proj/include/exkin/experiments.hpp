#pragma once

// Experiment configs and runners behind the exkin command-line tool.
// Runners compute everything in memory; writers emit CSV/JSON afterwards,
// so a failed run leaves no partial output.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "exkin/error.hpp"
#include "exkin/estimate.hpp"
#include "exkin/exprk.hpp"
#include "exkin/maxwellian.hpp"
#include "exkin/model.hpp"
#include "exkin/tableau.hpp"
#include "exkin/transport.hpp"

namespace exkin {

using json = nlohmann::json;

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct ModelConfig {
  std::string kind = "spectral_maxwell_2d";
  double extent = 0.0; ///< 0 selects 8 sqrt(T_max) of the initial data
  int points = 32;
  int modes = 0; ///< 0 selects the number of grid points
  double cross_section = 1.0;
  double radius = 0.0; ///< 0 selects the aliasing-free default
  double relaxation_rate = 1.0;
  double kernel_exponent = 0.0;
};

/// Two-Maxwellian "bump" data: a base state plus a faster, colder bump.
struct BumpData {
  double rho = 1.0;
  double u = -0.5;
  double T = 6.0;
  double bump_density_ratio = 0.5;     ///< rho_b / rho
  double bump_speed_factor = 4.0;      ///< u_b / sqrt(T)
  double bump_temperature_ratio = 0.5; ///< T_b / T

  MomentVector base(int d) const { return MomentVector::from_primitive(d, rho, {u, 0.0}, T); }
  MomentVector bump(int d) const {
    return MomentVector::from_primitive(d, bump_density_ratio * rho, {bump_speed_factor * std::sqrt(T), 0.0},
                                        bump_temperature_ratio * T);
  }
  double max_temperature() const { return std::max(T, bump_temperature_ratio * T); }
};

struct ExperimentConfig {
  std::string experiment;
  ModelConfig model;
  std::string scheme = "midpoint-if";
  std::vector<std::string> schemes;
  double eps = 1.0;
  double dt = 0.125;
  std::vector<double> dt_list;
  double t_final = 4.0;
  MuPolicy mu;
  bool retry_on_negative = false;
  std::optional<std::uint64_t> seed;
  std::string output_dir;

  // relaxation
  BumpData bump;
  std::optional<std::array<double, 3>> dvm_initial;
  int snapshot_every = 0;

  // convergence
  std::string reference_scheme = "rk4-if";
  int reference_refinement = 16;

  // shock
  int nx = 150;
  std::vector<double> eps_list;
  std::string splitting = "strang";
  double transport_substep = 0.0;

  std::string hash; ///< FNV-1a of the canonical config text

  int dimension() const { return model.kind == "spectral_maxwell_2d" ? 2 : 1; }
};

namespace detail {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

inline void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

inline void require_positive(double v, const std::string& what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(what + " must be positive");
}

inline MuPolicy parse_mu(const json& j) {
  if (j.is_string()) return MuPolicy::parse(j.get<std::string>());
  if (!j.is_object()) throw ConfigError("mu must be a string or an object with a policy");
  reject_unknown(j, {"policy", "value"}, "mu");
  const std::string p = j.at("policy").get<std::string>();
  if (p == "fixed") return MuPolicy::fixed(j.at("value").get<double>());
  return MuPolicy::parse(p);
}

inline void apply_defaults(ExperimentConfig& c, const json& j) {
  const std::string& e = c.experiment;
  if (e == "shock") {
    if (!j.contains("model")) {
      c.model.kind = "bgk";
      c.model.points = 64;
    }
    c.scheme = get_or<std::string>(j, "scheme", "midpoint-if");
    c.dt = get_or(j, "dt", 1e-3);
    c.t_final = get_or(j, "t_final", 0.05);
  } else if (e == "convergence") {
    c.t_final = get_or(j, "t_final", 4.0);
    if (c.schemes.empty()) c.schemes = {"euler-if", "midpoint-if", "heun3-if"};
    if (c.dt_list.empty()) c.dt_list = {1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125};
  } else if (e == "certify") {
    if (c.schemes.empty()) c.schemes = {"euler-if", "midpoint-if", "heun3-if", "rk4-if", "etd1", "tr2"};
  }
}

} // namespace detail

inline ExperimentConfig parse_config(const json& j, const std::string& experiment_override = "") {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    detail::reject_unknown(j,
                           {"experiment", "model", "scheme", "schemes", "eps", "dt", "dt_list", "t_final", "mu",
                            "retry_on_negative", "seed", "output_dir", "initial", "snapshot_every",
                            "reference_scheme", "reference_refinement", "nx", "eps_list", "splitting",
                            "transport_substep"},
                           "config");
    ExperimentConfig c;
    c.experiment = detail::get_or<std::string>(j, "experiment", "");
    if (!experiment_override.empty()) {
      if (!c.experiment.empty() && c.experiment != experiment_override)
        throw ConfigError("config is for experiment '" + c.experiment + "', not '" + experiment_override + "'");
      c.experiment = experiment_override;
    }
    static const std::set<std::string> known{"relaxation", "shock", "certify", "convergence"};
    if (!known.count(c.experiment))
      throw ConfigError("unknown experiment '" + c.experiment + "' (expected relaxation, shock, certify or convergence)");

    if (j.contains("model")) {
      const json& m = j.at("model");
      detail::reject_unknown(m,
                             {"kind", "extent", "points", "modes", "cross_section", "radius", "relaxation_rate",
                              "kernel_exponent"},
                             "model");
      ModelConfig mc;
      mc.kind = detail::get_or<std::string>(m, "kind", mc.kind);
      mc.extent = detail::get_or(m, "extent", 0.0);
      mc.points = detail::get_or(m, "points", mc.kind == "spectral_maxwell_2d" ? 32 : 64);
      mc.modes = detail::get_or(m, "modes", 0);
      mc.cross_section = detail::get_or(m, "cross_section", 1.0);
      mc.radius = detail::get_or(m, "radius", 0.0);
      mc.relaxation_rate = detail::get_or(m, "relaxation_rate", 1.0);
      mc.kernel_exponent = detail::get_or(m, "kernel_exponent", 0.0);
      c.model = mc;
    }
    if (c.model.kind != "spectral_maxwell_2d" && c.model.kind != "bgk" && c.model.kind != "broadwell")
      throw ConfigError("unknown model kind '" + c.model.kind + "' (expected spectral_maxwell_2d, bgk or broadwell)");

    c.scheme = detail::get_or<std::string>(j, "scheme", c.scheme);
    c.schemes = detail::get_or<std::vector<std::string>>(j, "schemes", {});
    c.eps = detail::get_or(j, "eps", c.eps);
    c.dt = detail::get_or(j, "dt", c.dt);
    c.dt_list = detail::get_or<std::vector<double>>(j, "dt_list", {});
    c.t_final = detail::get_or(j, "t_final", c.t_final);
    if (j.contains("mu")) c.mu = detail::parse_mu(j.at("mu"));
    c.retry_on_negative = detail::get_or(j, "retry_on_negative", false);
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    c.output_dir = detail::get_or<std::string>(j, "output_dir", "");
    c.snapshot_every = detail::get_or(j, "snapshot_every", 0);
    c.reference_scheme = detail::get_or<std::string>(j, "reference_scheme", c.reference_scheme);
    c.reference_refinement = detail::get_or(j, "reference_refinement", c.reference_refinement);
    c.nx = detail::get_or(j, "nx", c.nx);
    c.eps_list = detail::get_or<std::vector<double>>(j, "eps_list", {1e-3, 5e-4, 1e-4});
    c.splitting = detail::get_or<std::string>(j, "splitting", c.splitting);
    c.transport_substep = detail::get_or(j, "transport_substep", 0.0);

    if (j.contains("initial")) {
      const json& in = j.at("initial");
      detail::reject_unknown(in,
                             {"rho", "u", "T", "bump_density_ratio", "bump_speed_factor", "bump_temperature_ratio",
                              "dvm"},
                             "initial");
      BumpData b;
      b.rho = detail::get_or(in, "rho", b.rho);
      b.u = detail::get_or(in, "u", b.u);
      b.T = detail::get_or(in, "T", b.T);
      b.bump_density_ratio = detail::get_or(in, "bump_density_ratio", b.bump_density_ratio);
      b.bump_speed_factor = detail::get_or(in, "bump_speed_factor", b.bump_speed_factor);
      b.bump_temperature_ratio = detail::get_or(in, "bump_temperature_ratio", b.bump_temperature_ratio);
      c.bump = b;
      if (in.contains("dvm")) c.dvm_initial = in.at("dvm").get<std::array<double, 3>>();
    }
    detail::apply_defaults(c, j);

    // Validation.
    detail::require_positive(c.eps, "eps");
    detail::require_positive(c.dt, "dt");
    detail::require_positive(c.t_final, "t_final");
    detail::require_positive(c.model.cross_section, "model.cross_section");
    detail::require_positive(c.model.relaxation_rate, "model.relaxation_rate");
    detail::require_positive(c.bump.rho, "initial.rho");
    detail::require_positive(c.bump.T, "initial.T");
    if (c.model.extent < 0.0 || c.model.radius < 0.0) throw ConfigError("model.extent and model.radius must be nonnegative");
    if (c.snapshot_every < 0) throw ConfigError("snapshot_every must be nonnegative");
    if (c.reference_refinement < 1) throw ConfigError("reference_refinement must be at least 1");
    if (c.nx <= 0) throw ConfigError("nx must be positive");
    for (double e : c.eps_list) detail::require_positive(e, "eps_list entry");
    parse_splitting(c.splitting);
    if (c.experiment == "convergence") {
      if (c.dt_list.size() < 4) throw ConfigError("convergence runs need at least 4 time steps in dt_list");
      for (std::size_t i = 0; i < c.dt_list.size(); ++i) {
        detail::require_positive(c.dt_list[i], "dt_list entry");
        if (i > 0 && !(c.dt_list[i] < c.dt_list[i - 1])) throw ConfigError("dt_list must be strictly decreasing");
      }
    }
    if (c.experiment != "certify") {
      parse_scheme(c.scheme);
      for (const auto& s : c.schemes) parse_scheme(s);
    }
    c.hash = hex64(fnv1a(j.dump()));
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

inline ExperimentConfig load_config(const std::string& path, const std::string& experiment_override = "") {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j, experiment_override);
}

// ---------------------------------------------------------------------------
// Model and initial data

inline KineticModel build_model(const ExperimentConfig& c) {
  const ModelConfig& m = c.model;
  KineticModel model = [&] {
    if (m.kind == "broadwell") return KineticModel::broadwell();
    if (m.kind == "bgk") {
      const double L = m.extent > 0.0 ? m.extent : 64.0;
      return KineticModel::bgk(VelocityGrid(1, L, m.points), m.relaxation_rate);
    }
    const double L = m.extent > 0.0 ? m.extent : 8.0 * std::sqrt(c.bump.max_temperature());
    const VelocityGrid g(2, L, m.points);
    return KineticModel::spectral_maxwell_2d(g, m.modes > 0 ? m.modes : m.points, m.cross_section, m.radius);
  }();
  model.set_kernel_exponent(m.kernel_exponent);
  return model;
}

/// Base Maxwellian plus bump, sampled pointwise.
inline DistState bump_initial(const VelocityGrid& g, const BumpData& b) {
  return sample_maxwellian(g, b.base(g.dim)) + sample_maxwellian(g, b.bump(g.dim));
}

inline DistState relaxation_initial(const ExperimentConfig& c, const KineticModel& model) {
  if (model.is_broadwell()) {
    const auto v = c.dvm_initial.value_or(std::array<double, 3>{2.0, 1.0, 1.0});
    for (double x : v)
      if (!(x >= 0.0)) throw ConfigError("initial.dvm values must be nonnegative");
    return DistState::dvm(v[0], v[1], v[2]);
  }
  return bump_initial(std::get<VelocityGrid>(model.layout()), c.bump);
}

/// Number of steps of size dt in t_final; rejects non-integer ratios.
inline int step_count(double t_final, double dt) {
  const double r = t_final / dt;
  const double n = std::round(r);
  if (n < 1.0 || std::abs(r - n) > 1e-9 * std::max(1.0, r))
    throw ConfigError("t_final must be a whole number of time steps");
  return static_cast<int>(n);
}

/// Fourth moment for grids; for the three-state model every speed is 1, so <|v|^4 f> = rho.
inline double fourth_moment_of(const KineticModel& model, const DistState& f) {
  return f.is_grid() ? fourth_moment(f) : model.moments(f).rho;
}

/// H(f), or NaN when f carries negatives beyond the tolerance.
inline double entropy_or_nan(const KineticModel& model, const DistState& f) {
  try {
    return model.entropy(f);
  } catch (const NumericalError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

// ---------------------------------------------------------------------------
// Relaxation

struct RelaxationRow {
  int step;
  double t;
  MomentVector U;
  double fourth_moment, entropy, min_value, mu;
};

struct RelaxationResult {
  std::vector<RelaxationRow> rows;
  std::vector<std::pair<int, DistState>> snapshots;
};

inline RelaxationResult run_relaxation(const ExperimentConfig& c) {
  const KineticModel model = build_model(c);
  if (model.is_bgk()) throw ConfigError("relaxation runs need the spectral or Broadwell model");
  Stepper stepper(model, parse_scheme(c.scheme), c.dt, c.eps, c.mu);
  stepper.retry_on_negative(c.retry_on_negative);
  const int n = step_count(c.t_final, c.dt);
  DistState f = relaxation_initial(c, model);
  RelaxationResult res;
  auto record = [&](int k, double mu) {
    res.rows.push_back({k, k * c.dt, model.moments(f), fourth_moment_of(model, f), entropy_or_nan(model, f),
                        f.min_value(), mu});
    if (c.snapshot_every > 0 && k % c.snapshot_every == 0) res.snapshots.emplace_back(k, f);
  };
  record(0, std::numeric_limits<double>::quiet_NaN());
  for (int k = 1; k <= n; ++k) {
    StepReport r = stepper.step(f);
    f = std::move(r.f_next);
    record(k, r.mu);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Convergence

struct ConvergenceEntry {
  std::string scheme;
  double dt;
  double error;
  double order; ///< log2(previous error / error); NaN on the first row
};

struct ConvergenceResult {
  std::string reference_scheme;
  double reference_dt = 0.0;
  std::vector<ConvergenceEntry> entries;
  std::vector<std::string> flagged; ///< schemes whose errors do not decrease monotonically

  /// Least-squares slope of log error against log dt for one scheme.
  double fitted_order(const std::string& scheme) const {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& e : entries) {
      if (e.scheme != scheme) continue;
      const double x = std::log(e.dt), y = std::log(e.error);
      sx += x, sy += y, sxx += x * x, sxy += x * y;
      ++n;
    }
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
};

/// Fourth-moment trajectory at every step of a fixed-step run.
inline std::vector<double> fourth_moment_series(const ExperimentConfig& c, const KineticModel& model,
                                                const std::string& scheme, double dt) {
  Stepper stepper(model, parse_scheme(scheme), dt, c.eps, c.mu);
  stepper.retry_on_negative(c.retry_on_negative);
  const int n = step_count(c.t_final, dt);
  DistState f = relaxation_initial(c, model);
  std::vector<double> m4{fourth_moment_of(model, f)};
  m4.reserve(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k < n; ++k) {
    f = stepper.step(f).f_next;
    m4.push_back(fourth_moment_of(model, f));
  }
  return m4;
}

/// L2-in-time fourth-moment errors against a fine-step reference run.
inline ConvergenceResult run_convergence(const ExperimentConfig& c) {
  const KineticModel model = build_model(c);
  if (model.is_bgk()) throw ConfigError("convergence runs need the spectral or Broadwell model");
  ConvergenceResult res;
  res.reference_scheme = c.reference_scheme;
  res.reference_dt = c.dt_list.back() / c.reference_refinement;
  std::vector<int> stride;
  for (double dt : c.dt_list) {
    const double r = dt / res.reference_dt;
    if (std::abs(r - std::round(r)) > 1e-9 * r) throw ConfigError("every dt must be a multiple of the reference step");
    stride.push_back(static_cast<int>(std::round(r)));
    step_count(c.t_final, dt);
  }
  const auto ref = fourth_moment_series(c, model, c.reference_scheme, res.reference_dt);

  for (const auto& scheme : c.schemes) {
    double previous = std::numeric_limits<double>::quiet_NaN();
    bool monotone = true;
    for (std::size_t i = 0; i < c.dt_list.size(); ++i) {
      const double dt = c.dt_list[i];
      const auto m4 = fourth_moment_series(c, model, scheme, dt);
      double sum = 0.0;
      for (std::size_t k = 1; k < m4.size(); ++k) {
        const double e = m4[k] - ref[k * static_cast<std::size_t>(stride[i])];
        sum += e * e;
      }
      const double err = std::sqrt(dt * sum);
      const double order = std::isnan(previous) ? previous : std::log2(previous / err);
      if (!std::isnan(previous) && !(err < previous)) monotone = false;
      res.entries.push_back({scheme, dt, err, order});
      previous = err;
    }
    if (!monotone) res.flagged.push_back(scheme);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Shock tube

struct ShockRun {
  double eps;
  std::vector<CellProfile> profile;
};

inline PhaseState run_shock_single(const ExperimentConfig& c, const KineticModel& model, double eps, double dt) {
  Stepper stepper(model, parse_scheme(c.scheme), dt, eps, c.mu);
  stepper.retry_on_negative(c.retry_on_negative);
  const Splitting kind = parse_splitting(c.splitting);
  PhaseState s = sod_setup(std::get<VelocityGrid>(model.layout()), c.nx);
  const int n = step_count(c.t_final, dt);
  for (int k = 0; k < n; ++k) s = split_step(s, stepper, kind, c.transport_substep);
  return s;
}

inline std::vector<ShockRun> run_shock(const ExperimentConfig& c) {
  const KineticModel model = build_model(c);
  if (!model.is_bgk()) throw ConfigError("shock runs need the BGK model");
  std::vector<ShockRun> out;
  for (double eps : c.eps_list) out.push_back({eps, profiles(run_shock_single(c, model, eps, c.dt))});
  return out;
}

// ---------------------------------------------------------------------------
// Certificates

struct CertifyEntry {
  std::string scheme;
  std::optional<Certificate> certificate;
  std::string error;
};

inline std::vector<CertifyEntry> run_certify(const ExperimentConfig& c) {
  std::vector<CertifyEntry> out;
  for (const auto& name : c.schemes) {
    try {
      out.push_back({name, certify(parse_scheme(name)), ""});
    } catch (const ConfigError& e) {
      out.push_back({name, std::nullopt, e.what()});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Output

/// CSV writer: '#' line with the title and config hash, then a column row.
/// Reals use %.16e (17 significant digits).
class CsvTable {
public:
  CsvTable(std::string title, std::string hash, std::vector<std::string> columns)
      : columns_(std::move(columns)) {
    out_ << "# " << title << " config_hash=" << hash << '\n';
    for (std::size_t i = 0; i < columns_.size(); ++i) out_ << (i ? "," : "") << columns_[i];
    out_ << '\n';
  }

  static std::string real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
  }

  CsvTable& row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_.size()) throw Error("CSV row width does not match the header");
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
    return *this;
  }

  std::string str() const { return out_.str(); }

private:
  std::vector<std::string> columns_;
  std::ostringstream out_;
};

struct OutputFile {
  std::string name;
  std::string content;
};

inline std::vector<OutputFile> format_relaxation(const ExperimentConfig& c, const RelaxationResult& r) {
  std::vector<OutputFile> files;
  CsvTable t("relaxation scheme=" + c.scheme + " mu=" + c.mu.name(), c.hash,
             {"step", "t", "rho", "momentum_x", "momentum_y", "energy", "fourth_moment", "entropy", "min_value", "mu"});
  for (const auto& row : r.rows)
    t.row({std::to_string(row.step), CsvTable::real(row.t), CsvTable::real(row.U.rho), CsvTable::real(row.U.momentum[0]),
           CsvTable::real(row.U.momentum[1]), CsvTable::real(row.U.energy), CsvTable::real(row.fourth_moment),
           CsvTable::real(row.entropy), CsvTable::real(row.min_value), CsvTable::real(row.mu)});
  files.push_back({"relaxation.csv", t.str()});
  for (const auto& [step, f] : r.snapshots) {
    std::vector<std::string> cols;
    if (f.is_grid()) {
      cols = f.grid().dim == 1 ? std::vector<std::string>{"v", "value"} : std::vector<std::string>{"vx", "vy", "value"};
    } else {
      cols = {"state", "value"};
    }
    CsvTable s("snapshot step=" + std::to_string(step), c.hash, cols);
    for (std::size_t k = 0; k < f.size(); ++k) {
      if (!f.is_grid()) {
        static const char* names[3] = {"plus", "zero", "minus"};
        s.row({names[k], CsvTable::real(f.values[k])});
      } else if (f.grid().dim == 1) {
        s.row({CsvTable::real(f.grid().coords(k)[0]), CsvTable::real(f.values[k])});
      } else {
        const auto v = f.grid().coords(k);
        s.row({CsvTable::real(v[0]), CsvTable::real(v[1]), CsvTable::real(f.values[k])});
      }
    }
    char name[64];
    std::snprintf(name, sizeof name, "snapshot_%06d.csv", step);
    files.push_back({name, s.str()});
  }
  return files;
}

inline std::vector<OutputFile> format_convergence(const ExperimentConfig& c, const ConvergenceResult& r) {
  CsvTable t("convergence reference=" + r.reference_scheme + " reference_dt=" + CsvTable::real(r.reference_dt) +
                 " error=L2-in-time fourth moment",
             c.hash, {"scheme", "dt", "error", "order", "flagged"});
  for (const auto& e : r.entries) {
    const bool flagged = std::find(r.flagged.begin(), r.flagged.end(), e.scheme) != r.flagged.end();
    t.row({e.scheme, CsvTable::real(e.dt), CsvTable::real(e.error), CsvTable::real(e.order), flagged ? "1" : "0"});
  }
  return {{"convergence.csv", t.str()}};
}

inline std::string eps_tag(double eps) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", eps);
  return buf;
}

inline std::vector<OutputFile> format_shock(const ExperimentConfig& c, const std::vector<ShockRun>& runs) {
  std::vector<OutputFile> files;
  for (const auto& run : runs) {
    CsvTable t("shock scheme=" + c.scheme + " splitting=" + c.splitting + " eps=" + CsvTable::real(run.eps) +
                   " t=" + CsvTable::real(c.t_final),
               c.hash, {"x", "rho", "u", "T", "q"});
    for (const auto& p : run.profile)
      t.row({CsvTable::real(p.x), CsvTable::real(p.rho), CsvTable::real(p.u), CsvTable::real(p.T), CsvTable::real(p.q)});
    files.push_back({"shock_eps_" + eps_tag(run.eps) + ".csv", t.str()});
  }
  return files;
}

inline json certify_report(const ExperimentConfig& c, const std::vector<CertifyEntry>& entries) {
  json report{{"config_hash", c.hash}, {"schemes", json::array()}};
  for (const auto& e : entries) {
    json item{{"scheme", e.scheme}};
    if (e.certificate) {
      item["certificate"] = to_json(*e.certificate);
    } else {
      item["error"] = e.error;
    }
    report["schemes"].push_back(item);
  }
  return report;
}

inline void write_files(const std::filesystem::path& dir, const std::vector<OutputFile>& files) {
  std::filesystem::create_directories(dir);
  for (const auto& f : files) {
    std::ofstream out(dir / f.name, std::ios::binary);
    out << f.content;
    if (!out) throw Error("cannot write " + (dir / f.name).string());
  }
}

} // namespace exkin
