#include "mpcci/experiment.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/json_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "mpcci/errors.hpp"
#include "mpcci/policy_io.hpp"

namespace mpcci {

namespace pt = boost::property_tree;

namespace {

std::string fixed8(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(8) << v;
  return os.str();
}

std::string sci2(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(1) << v;
  return os.str();
}

std::string fixed2(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  require(static_cast<bool>(out), ErrorCategory::Io, "cannot open '" + p.string() + "' for writing");
  out << text;
  require(static_cast<bool>(out), ErrorCategory::Io, "failed writing '" + p.string() + "'");
}

std::vector<int> parse_levels(const pt::ptree& node) {
  std::vector<int> levels;
  if (!node.data().empty()) {
    std::string s = node.data();
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream is(s);
    int l = 0;
    while (is >> l) levels.push_back(l);
    require(is.eof(), ErrorCategory::Configuration, "cannot parse levels '" + node.data() + "'");
  }
  for (const auto& child : node) levels.push_back(child.second.get_value<int>());
  return levels;
}

// Like ptree::get(path, default), but a present value that does not parse is
// an error instead of silently falling back to the default.
template <class T>
T value_or(const pt::ptree& t, const std::string& path, T fallback) {
  if (!t.get_child_optional(path)) return fallback;
  return t.get<T>(path);
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  fail(ErrorCategory::Configuration, "cannot parse boolean '" + s + "'");
}

DegenerateTreatment degenerate_from_string(const std::string& s) {
  if (s == "projected") return DegenerateTreatment::Projected;
  if (s == "rho_hat") return DegenerateTreatment::RhoHat;
  fail(ErrorCategory::Configuration, "unknown degenerate treatment '" + s +
                                         "' (expected projected|rho_hat)");
}

ExperimentConfig from_tree(const pt::ptree& t) {
  ExperimentConfig c;
  ModelSpec& s = c.spec;
  s.r = value_or(t, "model.r", s.r);
  s.T = value_or(t, "model.T", s.T);
  s.X0 = value_or(t, "model.X0", s.X0);
  s.Y0 = value_or(t, "model.Y0", s.Y0);
  s.sigma_x.lo = value_or(t, "model.sigma_x_min", s.sigma_x.lo);
  s.sigma_x.hi = value_or(t, "model.sigma_x_max", s.sigma_x.hi);
  s.sigma_y.lo = value_or(t, "model.sigma_y_min", s.sigma_y.lo);
  s.sigma_y.hi = value_or(t, "model.sigma_y_max", s.sigma_y.hi);
  s.rho.lo = value_or(t, "model.rho_min", s.rho.lo);
  s.rho.hi = value_or(t, "model.rho_max", s.rho.hi);
  s.objective = objective_from_string(t.get<std::string>("model.objective", "worst"));

  const std::string type = t.get<std::string>("payoff.type", "call_on_max");
  if (type == "call_on_max") {
    c.payoff = PayoffSpec::call_on_max(value_or(t, "payoff.K", 40.0));
  } else if (type == "butterfly") {
    c.payoff = PayoffSpec::butterfly(value_or(t, "payoff.K1", 34.0), value_or(t, "payoff.K2", 46.0));
  } else {
    fail(ErrorCategory::Configuration,
         "unknown payoff type '" + type + "' (expected call_on_max|butterfly)");
  }

  if (auto node = t.get_child_optional("grid.levels")) c.levels = parse_levels(*node);
  c.allow_large_levels = parse_bool(t.get<std::string>("grid.allow_large_levels", "false"));
  c.quadrature = quadrature_from_string(t.get<std::string>("grid.quadrature", "trapezoid"));
  c.epsilon = value_or(t, "grid.epsilon", c.epsilon);
  if (t.get_child_optional("grid.half_width")) c.half_width = t.get<double>("grid.half_width");
  c.half_width_multiplier = value_or(t, "grid.half_width_multiplier", c.half_width_multiplier);
  if (t.get_child_optional("grid.timesteps")) c.timesteps = t.get<int>("grid.timesteps");
  c.kernel.tail_exponent = value_or(t, "grid.tail_exponent", c.kernel.tail_exponent);
  c.kernel.degenerate = degenerate_from_string(t.get<std::string>("grid.degenerate", "projected"));
  c.full_layout = parse_bool(t.get<std::string>("grid.full_layout", "false"));
  c.threads = value_or(t, "grid.threads", c.threads);
  if (t.get_child_optional("reference.price")) c.reference = t.get<double>("reference.price");

  c.mc.enabled = parse_bool(t.get<std::string>("mc.enabled", "false"));
  c.mc.paths = value_or(t, "mc.paths", c.mc.paths);
  c.mc.seed = value_or(t, "mc.seed", c.mc.seed);
  c.mc.threads = value_or(t, "mc.threads", c.mc.threads);

  c.outdir = value_or(t, "output.dir", c.outdir);
  c.write_error_surface = parse_bool(t.get<std::string>("output.error_surface", "false"));
  c.write_policy_file = parse_bool(t.get<std::string>("output.policy", "false"));
  return c;
}

int scaled_count(int n, double multiplier) {
  const double v = n * multiplier;
  const double r = std::round(v);
  require(std::abs(v - r) < 1e-9 && static_cast<int>(r) % 2 == 0 && r >= 4,
          ErrorCategory::Configuration,
          "half-width multiplier must map the interval count to an even integer >= 4");
  return static_cast<int>(r);
}

}  // namespace

void ExperimentConfig::validate() const {
  spec.validate();
  payoff.validate();
  require(!levels.empty(), ErrorCategory::Configuration, "at least one level is required");
  for (int l : levels) {
    require(l >= 0 && l <= 8, ErrorCategory::Configuration, "levels must lie in 0..8");
    require(l <= 2 || allow_large_levels, ErrorCategory::Configuration,
            "levels above 2 run for hours; enable them explicitly (allow_large_levels / "
            "--allow-large-levels)");
  }
  require(epsilon > 0.0 && epsilon < 1.0, ErrorCategory::Configuration,
          "epsilon must lie in (0, 1)");
  require(!half_width || *half_width > 0.0, ErrorCategory::Configuration,
          "half_width must be > 0");
  require(half_width_multiplier > 0.0, ErrorCategory::Configuration,
          "half_width_multiplier must be > 0");
  require(!timesteps || *timesteps >= 1, ErrorCategory::Configuration, "timesteps must be >= 1");
  require(mc.paths >= 1, ErrorCategory::Configuration, "mc.paths must be >= 1");
}

ExperimentConfig load_config(const std::string& path) {
  pt::ptree tree;
  const bool json = std::filesystem::path(path).extension() == ".json";
  try {
    if (json)
      pt::read_json(path, tree);
    else
      pt::read_ini(path, tree);
  } catch (const pt::file_parser_error& e) {
    fail(ErrorCategory::Io, std::string("cannot read config: ") + e.what());
  }
  try {
    ExperimentConfig c = from_tree(tree);
    c.validate();
    return c;
  } catch (const pt::ptree_error& e) {
    fail(ErrorCategory::Configuration, std::string("invalid config '") + path + "': " + e.what());
  }
}

GridSpec level_grid(const ExperimentConfig& config, int level) {
  const RefinementLevel lv = RefinementLevel::at(level);
  const int M = config.timesteps.value_or(lv.M);
  const double dtau = config.spec.T / M;
  const double w = config.half_width ? *config.half_width
                                     : truncation_half_width(config.epsilon, config.spec, dtau);
  const double mult = config.half_width_multiplier;
  const int N = mult == 1.0 ? lv.N : scaled_count(lv.N, mult);
  const int J = mult == 1.0 ? lv.J : scaled_count(lv.J, mult);
  return build_grid(config.spec, w * mult, N, J, M);
}

DiscreteControlSet level_controls(const ExperimentConfig& config, int level) {
  const RefinementLevel lv = RefinementLevel::at(level);
  return build_control_set(config.spec, lv.Qx, lv.Qy);
}

SolveOptions solve_options(const ExperimentConfig& config, bool store_policy) {
  SolveOptions o;
  o.quadrature = config.quadrature;
  o.kernel = config.kernel;
  o.store_policy = store_policy;
  o.threads = config.threads;
  o.full_layout = config.full_layout;
  return o;
}

ControlPoint extreme_control(const ModelSpec& spec) {
  if (spec.objective == Objective::WorstCase)
    return {spec.sigma_x.hi, spec.sigma_y.hi, spec.rho.lo};
  return {spec.sigma_x.lo, spec.sigma_y.lo, spec.rho.hi};
}

std::optional<double> reference_price(const ExperimentConfig& config) {
  if (config.reference) return config.reference;
  if (const auto* c = std::get_if<CallOnMax>(&config.payoff.variant)) {
    const ControlPoint e = extreme_control(config.spec);
    return stulz_call_on_max(config.spec.X0, config.spec.Y0, c->K, config.spec.r, config.spec.T,
                             e.sigma_x, e.sigma_y, e.rho);
  }
  return std::nullopt;
}

SolveResult solve_level(const ExperimentConfig& config, int level, bool store_policy) {
  try {
    const GridSpec grid = level_grid(config, level);
    const DiscreteControlSet controls = level_controls(config, level);
    return solve(config.spec, config.payoff, grid, controls, solve_options(config, store_policy));
  } catch (const Error& e) {
    fail(e.category(), "level " + std::to_string(level) + ": " + e.what());
  }
}

ConvergenceReport run_experiment(const ExperimentConfig& config, bool write_files) {
  config.validate();
  ConvergenceReport report;
  report.reference = reference_price(config);
  const std::filesystem::path dir(config.outdir);
  if (write_files) std::filesystem::create_directories(dir);

  std::vector<int> levels = config.levels;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  for (std::size_t i = 0; i < levels.size(); ++i) {
    const bool finest = i + 1 == levels.size();
    const bool need_policy = finest && (config.mc.enabled || config.write_policy_file);
    const SolveResult res = solve_level(config, levels[i], need_policy);

    LevelReport lr;
    lr.level = levels[i];
    lr.N = res.grid.N;
    lr.J = res.grid.J;
    lr.M = res.grid.M;
    lr.Q = static_cast<int>(res.controls.size());
    lr.half_width = res.grid.half_width;
    lr.price = price_at(res, config.spec.X0, config.spec.Y0);
    lr.seconds = res.diagnostics.seconds;
    lr.eps_hat = res.diagnostics.eps_hat;
    lr.min_weight = res.diagnostics.min_weight;
    for (double d : res.diagnostics.weight_sum_deviation)
      lr.max_weight_sum_deviation = std::max(lr.max_weight_sum_deviation, d);
    if (report.reference) {
      lr.error = std::abs(lr.price - *report.reference);
      if (i > 0 && report.levels.back().error && *lr.error > 0.0)
        lr.ratio = *report.levels.back().error / *lr.error;
    }
    if (i > 0) {
      lr.change = lr.price - report.levels.back().price;
      if (!report.reference && report.levels.back().change && *lr.change != 0.0)
        lr.ratio = *report.levels.back().change / *lr.change;
    }
    report.levels.push_back(lr);

    if (finest && write_files) {
      if (config.write_error_surface)
        emit_error_surface(res, config.payoff, (dir / "error_surface.csv").string());
      if (config.write_policy_file && res.policy)
        write_policy((dir / "policy.bin").string(), res.grid, res.controls, *res.policy);
    }
    if (finest && config.mc.enabled) {
      PolicyFile pf{res.grid, res.controls, *res.policy};
      McConfig mc;
      mc.paths = config.mc.paths;
      mc.seed = config.mc.seed;
      mc.threads = config.mc.threads;
      report.mc = mc_validate(pf, config.spec, config.payoff, mc);
      if (write_files) write_mc_report(*report.mc, (dir / "mc_report.txt").string());
    }
  }

  if (write_files) {
    write_text(dir / "convergence.csv", report.csv());
    write_text(dir / "timings.csv", report.timings_csv());
    write_text(dir / "summary.txt", report.summary());
  }
  return report;
}

std::string ConvergenceReport::csv() const {
  std::ostringstream os;
  os << "level,N,J,M,Q,half_width,price," << (reference ? "error" : "change") << ",ratio\n";
  for (const LevelReport& l : levels) {
    os << l.level << ',' << l.N << ',' << l.J << ',' << l.M << ',' << l.Q << ','
       << fixed2(l.half_width) << ',' << fixed8(l.price) << ',';
    if (reference)
      os << (l.error ? sci2(*l.error) : "");
    else
      os << (l.change ? sci2(*l.change) : "");
    os << ',' << (l.ratio ? fixed2(*l.ratio) : "") << '\n';
  }
  return os.str();
}

std::string ConvergenceReport::timings_csv() const {
  std::ostringstream os;
  os << "level,seconds\n";
  for (const LevelReport& l : levels)
    os << l.level << ',' << std::fixed << std::setprecision(3) << l.seconds << '\n';
  return os.str();
}

std::string ConvergenceReport::summary() const {
  std::ostringstream os;
  if (reference) os << "reference: " << fixed8(*reference) << '\n';
  for (const LevelReport& l : levels) {
    os << "level " << l.level << ": N=J=" << l.N << " M=" << l.M << " Q=" << l.Q
       << " w=" << fixed2(l.half_width) << " price=" << fixed8(l.price);
    if (l.error) os << " error=" << sci2(*l.error);
    if (l.change) os << " change=" << sci2(*l.change);
    if (l.ratio) os << " ratio=" << fixed2(*l.ratio);
    os << " max|sum w - e^{-r dtau}|=" << sci2(l.max_weight_sum_deviation)
       << " eps_hat=" << sci2(l.eps_hat) << " time=" << std::fixed << std::setprecision(2)
       << l.seconds << "s\n";
  }
  if (mc) {
    os << "monte carlo (" << mc->paths << " paths, seed " << mc->seed << "): " << fixed8(mc->estimate);
    if (mc->has_ci) os << " 95% CI [" << fixed8(mc->ci_low) << ", " << fixed8(mc->ci_high) << "]";
    os << '\n';
  }
  return os.str();
}

void emit_error_surface(const SolveResult& result, const PayoffSpec& payoff,
                        const std::string& path) {
  const auto* call = std::get_if<CallOnMax>(&payoff.variant);
  require(call != nullptr, ErrorCategory::Unsupported,
          "error surface needs a closed-form reference; payoff '" + payoff.name() +
              "' has none (only call_on_max)");
  const ModelSpec& s = result.spec;
  const ControlPoint e = extreme_control(s);
  const GridSpec& g = result.grid;
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCategory::Io, "cannot open '" + path + "' for writing");
  out << "x,y,abs_error\n" << std::setprecision(10);
  for (int n = -g.N / 2 + 1; n <= g.N / 2 - 1; ++n) {
    for (int j = -g.J / 2 + 1; j <= g.J / 2 - 1; ++j) {
      const double exact = stulz_call_on_max(std::exp(g.x(n)), std::exp(g.y(j)), call->K, s.r,
                                             s.T, e.sigma_x, e.sigma_y, e.rho);
      const double v = result.surface.values(static_cast<std::size_t>(n + g.N),
                                             static_cast<std::size_t>(j + g.J));
      out << g.x(n) << ',' << g.y(j) << ',' << std::abs(exact - v) << '\n';
    }
  }
  require(static_cast<bool>(out), ErrorCategory::Io, "failed writing '" + path + "'");
}

std::vector<RobustnessRow> domain_robustness_study(const ExperimentConfig& config,
                                                   const std::vector<double>& multipliers) {
  config.validate();
  std::vector<RobustnessRow> rows;
  for (int level : config.levels) {
    ExperimentConfig base = config;
    base.half_width_multiplier = 1.0;
    const SolveResult b = solve_level(base, level);
    const double baseline = price_at(b, config.spec.X0, config.spec.Y0);
    for (double mult : multipliers) {
      RobustnessRow row;
      row.level = level;
      row.multiplier = mult;
      row.baseline = baseline;
      if (mult == 1.0) {
        row.half_width = b.grid.half_width;
        row.N = b.grid.N;
        row.price = baseline;
      } else {
        ExperimentConfig c = config;
        c.half_width_multiplier = mult;
        const SolveResult r = solve_level(c, level);
        row.half_width = r.grid.half_width;
        row.N = r.grid.N;
        row.price = price_at(r, config.spec.X0, config.spec.Y0);
      }
      row.difference = row.price - baseline;
      rows.push_back(row);
    }
  }
  return rows;
}

std::string robustness_csv(const std::vector<RobustnessRow>& rows) {
  std::ostringstream os;
  os << "level,multiplier,half_width,N,price,baseline,difference\n";
  for (const RobustnessRow& r : rows)
    os << r.level << ',' << fixed2(r.multiplier) << ',' << fixed2(r.half_width) << ',' << r.N
       << ',' << fixed8(r.price) << ',' << fixed8(r.baseline) << ',' << sci2(r.difference)
       << '\n';
  return os.str();
}

}  // namespace mpcci
