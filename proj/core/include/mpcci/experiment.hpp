#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mpcci/conv.hpp"
#include "mpcci/domain.hpp"
#include "mpcci/kernel.hpp"
#include "mpcci/model.hpp"
#include "mpcci/reference.hpp"
#include "mpcci/solver.hpp"

namespace mpcci {

struct McSettings {
  bool enabled = false;
  std::uint64_t paths = 100000;
  std::uint64_t seed = 20240101;
  unsigned threads = 1;
};

// One batch experiment: model, payoff, numerical settings and outputs.
struct ExperimentConfig {
  ModelSpec spec;
  PayoffSpec payoff;
  QuadratureRule quadrature = QuadratureRule::Trapezoid;
  std::vector<int> levels{0, 1, 2};
  // Levels above 2 take hours; they must be enabled explicitly.
  bool allow_large_levels = false;
  // Tail tolerance for the automatic half-width.
  double epsilon = 1e-10;
  // Explicit half-width w; when absent it is derived from epsilon.
  std::optional<double> half_width;
  // Scales w and the interval counts together (grid spacing is preserved).
  double half_width_multiplier = 1.0;
  // Timestep count override (e.g. 1 for the single-step runs).
  std::optional<int> timesteps;
  KernelOptions kernel;
  // Use the (3N-1) x (3J-1) circulant instead of the compact layout.
  bool full_layout = false;
  unsigned threads = 1;
  // Reference price for the error column; defaults to the closed form when
  // the payoff is a call on the maximum.
  std::optional<double> reference;
  McSettings mc;
  std::string outdir = "mpcci-out";
  bool write_error_surface = false;
  bool write_policy_file = false;

  void validate() const;
};

// Reads an INI ("key = value" sections) or JSON file; the format is chosen by
// the extension (.json for JSON, anything else INI). Schema in the README.
ExperimentConfig load_config(const std::string& path);

struct LevelReport {
  int level = 0;
  int N = 0;
  int J = 0;
  int M = 0;
  int Q = 0;
  double half_width = 0.0;
  double price = 0.0;
  std::optional<double> error;   // |price - reference|
  std::optional<double> change;  // price - previous level's price
  std::optional<double> ratio;   // successive error (or change) ratio
  double seconds = 0.0;
  double max_weight_sum_deviation = 0.0;
  double eps_hat = 0.0;
  double min_weight = 0.0;
};

struct ConvergenceReport {
  std::vector<LevelReport> levels;
  std::optional<double> reference;
  std::optional<McResult> mc;

  // Deterministic table (no timings): identical inputs give identical bytes.
  std::string csv() const;
  // Wall-clock seconds per level.
  std::string timings_csv() const;
  std::string summary() const;
};

// Grid of a refinement level under the config's domain and timestep settings.
GridSpec level_grid(const ExperimentConfig& config, int level);
DiscreteControlSet level_controls(const ExperimentConfig& config, int level);
SolveOptions solve_options(const ExperimentConfig& config, bool store_policy);

// Control at which the worst (best) case equals the constant-parameter price
// of a convex payoff: (sigma_x max, sigma_y max, rho min) for the worst case,
// (sigma_x min, sigma_y min, rho max) for the best case.
ControlPoint extreme_control(const ModelSpec& spec);

// Closed-form reference of the config (explicit value or call-on-max formula).
std::optional<double> reference_price(const ExperimentConfig& config);

// Solves one level; errors are rethrown with the level in the message.
SolveResult solve_level(const ExperimentConfig& config, int level, bool store_policy = false);

// Runs every configured level; when `write_files` is set, writes
// convergence.csv, timings.csv and summary.txt (plus the optional error
// surface, policy and MC report of the finest level) to config.outdir.
ConvergenceReport run_experiment(const ExperimentConfig& config, bool write_files = true);

// Writes rows (x_n, y_j, |v_exact - v_numerical|) over the interior nodes.
// Only call-on-max payoffs have a closed-form reference (Unsupported otherwise).
void emit_error_surface(const SolveResult& result, const PayoffSpec& payoff,
                        const std::string& path);

struct RobustnessRow {
  int level = 0;
  double multiplier = 1.0;
  double half_width = 0.0;
  int N = 0;
  double price = 0.0;
  double baseline = 0.0;
  double difference = 0.0;  // price - baseline
};

// Re-runs the levels with the half-width scaled by each multiplier (interval
// counts scaled alike) and reports differences to the unscaled run.
std::vector<RobustnessRow> domain_robustness_study(const ExperimentConfig& config,
                                                   const std::vector<double>& multipliers);
std::string robustness_csv(const std::vector<RobustnessRow>& rows);

}  // namespace mpcci
