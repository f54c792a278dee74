// Command-line driver for convergence studies, error surfaces, domain
// robustness runs and Monte Carlo validation.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mpcci/errors.hpp"
#include "mpcci/experiment.hpp"

namespace {

std::vector<int> parse_level_list(const std::string& s) {
  std::string t = s;
  std::replace(t.begin(), t.end(), ',', ' ');
  std::istringstream is(t);
  std::vector<int> out;
  int l = 0;
  while (is >> l) out.push_back(l);
  mpcci::require(is.eof() && !out.empty(), mpcci::ErrorCategory::Configuration,
                 "cannot parse --levels '" + s + "'");
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"Monotone piecewise-constant-control integration for two-asset options "
               "under uncertain volatility and correlation"};
  std::string config_path;
  std::string outdir;
  std::string levels;
  std::string quadrature;
  std::string objective;
  std::string payoff;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int timesteps = 0;
  unsigned threads = 0;
  bool allow_large = false;
  bool mc = false;
  std::uint64_t mc_paths = 0;
  bool error_surface = false;
  bool policy = false;
  bool robustness = false;
  std::vector<double> multipliers{0.75, 1.0, 2.0};

  app.add_option("-c,--config", config_path, "Experiment config (.ini or .json)")->check(CLI::ExistingFile);
  app.add_option("-o,--outdir", outdir, "Output directory");
  app.add_option("-l,--levels", levels, "Refinement levels, e.g. 0,1,2");
  app.add_option("--quadrature", quadrature, "trapezoid | simpson");
  app.add_option("--objective", objective, "worst | best");
  app.add_option("--payoff", payoff, "call_on_max | butterfly (default strikes)");
  app.add_option("-s,--seed", seed, "Monte Carlo seed")->each([&](const std::string&) { seed_set = true; });
  app.add_option("-m,--timesteps", timesteps, "Timestep count override (all levels)");
  app.add_option("-t,--threads", threads, "Worker threads for the solver and Monte Carlo");
  app.add_flag("--allow-large-levels", allow_large, "Permit levels above 2 (hours of runtime)");
  app.add_flag("--mc", mc, "Run policy-following Monte Carlo at the finest level");
  app.add_option("--mc-paths", mc_paths, "Monte Carlo path count");
  app.add_flag("--error-surface", error_surface, "Write error_surface.csv for the finest level");
  app.add_flag("--policy", policy, "Write policy.bin for the finest level");
  app.add_flag("--robustness", robustness, "Run the domain-size study instead of a convergence run");
  app.add_option("--multipliers", multipliers, "Half-width multipliers for --robustness");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mpcci::exit_code(mpcci::ErrorCategory::Configuration);
  }

  mpcci::ExperimentConfig cfg;
  if (!config_path.empty()) cfg = mpcci::load_config(config_path);
  if (!outdir.empty()) cfg.outdir = outdir;
  if (!levels.empty()) cfg.levels = parse_level_list(levels);
  if (!quadrature.empty()) cfg.quadrature = mpcci::quadrature_from_string(quadrature);
  if (!objective.empty()) cfg.spec.objective = mpcci::objective_from_string(objective);
  if (payoff == "call_on_max") cfg.payoff = mpcci::PayoffSpec::call_on_max(40.0);
  else if (payoff == "butterfly") cfg.payoff = mpcci::PayoffSpec::butterfly(34.0, 46.0);
  else if (!payoff.empty())
    mpcci::fail(mpcci::ErrorCategory::Configuration, "unknown payoff '" + payoff + "'");
  if (seed_set) cfg.mc.seed = seed;
  if (timesteps > 0) cfg.timesteps = timesteps;
  if (threads > 0) cfg.threads = cfg.mc.threads = threads;
  if (allow_large) cfg.allow_large_levels = true;
  if (mc) cfg.mc.enabled = true;
  if (mc_paths > 0) cfg.mc.paths = mc_paths;
  if (error_surface) cfg.write_error_surface = true;
  if (policy) cfg.write_policy_file = true;
  cfg.validate();

  if (robustness) {
    const auto rows = mpcci::domain_robustness_study(cfg, multipliers);
    const std::string csv = mpcci::robustness_csv(rows);
    std::filesystem::create_directories(cfg.outdir);
    const auto path = std::filesystem::path(cfg.outdir) / "robustness.csv";
    std::ofstream out(path);
    mpcci::require(static_cast<bool>(out << csv), mpcci::ErrorCategory::Io,
                   "failed writing '" + path.string() + "'");
    std::cout << csv;
    return 0;
  }

  const mpcci::ConvergenceReport report = mpcci::run_experiment(cfg, true);
  std::cout << report.summary();
  std::cout << "outputs written to " << cfg.outdir << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const mpcci::Error& e) {
    std::cerr << "error [" << mpcci::category_name(e.category()) << "]: " << e.what() << '\n';
    return mpcci::exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error [internal]: " << e.what() << '\n';
    return mpcci::exit_code(mpcci::ErrorCategory::Internal);
  }
}
