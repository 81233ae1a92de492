// exkin <experiment> --config <path> [--out <dir>]
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "exkin/experiments.hpp"

namespace {

constexpr int exit_config = 2;
constexpr int exit_numerical = 3;

int run(const std::string& experiment, const std::string& config_path, const std::string& out_arg) {
  using namespace exkin;
  const ExperimentConfig cfg = load_config(config_path, experiment);
  const std::filesystem::path out = !out_arg.empty() ? out_arg : !cfg.output_dir.empty() ? cfg.output_dir : ".";
  if (cfg.experiment == "relaxation") {
    const auto files = format_relaxation(cfg, run_relaxation(cfg));
    write_files(out, files);
    std::cout << "wrote " << files.size() << " file(s) to " << out.string() << '\n';
    return 0;
  }
  if (cfg.experiment == "convergence") {
    const ConvergenceResult res = run_convergence(cfg);
    write_files(out, format_convergence(cfg, res));
    std::printf("%-14s %-12s %-24s %s\n", "scheme", "dt", "error", "order");
    for (const auto& e : res.entries)
      std::printf("%-14s %-12.6g %-24.16e %.3f\n", e.scheme.c_str(), e.dt, e.error, e.order);
    for (const auto& s : res.flagged) std::printf("warning: errors of %s do not decrease monotonically\n", s.c_str());
    std::printf("reference: %s at dt = %.6g\n", res.reference_scheme.c_str(), res.reference_dt);
    return 0;
  }
  if (cfg.experiment == "shock") {
    const auto files = format_shock(cfg, run_shock(cfg));
    write_files(out, files);
    std::cout << "wrote " << files.size() << " profile(s) to " << out.string() << '\n';
    return 0;
  }
  const auto entries = run_certify(cfg);
  const json report = certify_report(cfg, entries);
  write_files(out, {{"certify.json", report.dump(2) + "\n"}});
  for (const auto& e : entries) {
    if (!e.certificate) {
      std::printf("%-14s error: %s\n", e.scheme.c_str(), e.error.c_str());
      continue;
    }
    const Certificate& c = *e.certificate;
    std::printf("%-14s contractive=%d sup_R=%.16e ap=%d strong_ap=%d convex=%d\n", e.scheme.c_str(), c.contractive,
                c.sup_R, c.ap, c.strong_ap, c.convex);
  }
  for (const auto& e : entries)
    if (!e.certificate) return exit_config;
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exponential Runge-Kutta experiments for kinetic relaxation"};
  std::string experiment, config, out;
  app.add_option("experiment", experiment, "relaxation, shock, certify or convergence")
      ->required()
      ->check(CLI::IsMember({"relaxation", "shock", "certify", "convergence"}));
  app.add_option("--config", config, "JSON experiment config")->required();
  app.add_option("--out", out, "output directory (default: config output_dir or .)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_config;
  }
  try {
    return run(experiment, config, out);
  } catch (const exkin::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const exkin::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return exit_numerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
