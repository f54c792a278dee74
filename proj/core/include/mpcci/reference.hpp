#pragma once

#include <cstdint>
#include <string>

#include "mpcci/domain.hpp"
#include "mpcci/model.hpp"
#include "mpcci/policy_io.hpp"
#include "mpcci/solver.hpp"

namespace mpcci {

// Standard normal cumulative distribution function.
double norm_cdf(double z);

// P(Z1 <= a, Z2 <= b) for a standard bivariate normal with correlation rho;
// infinite limits are allowed. Domain error when |rho| > 1.
double bivariate_normal_cdf(double a, double b, double rho);

// Black-Scholes price of a European call.
double black_scholes_call(double S, double K, double r, double T, double sigma);

// Closed-form price of a European call on max(S_x, S_y) with constant
// volatilities and correlation. |rho| = 1 is handled as the limit of the
// formula; a vanishing spread volatility reduces to a single-asset call on
// the larger price.
double stulz_call_on_max(double X0, double Y0, double K, double r, double T, double sigma_x,
                         double sigma_y, double rho);

struct McConfig {
  std::uint64_t paths = 100000;  // Gamma
  std::uint64_t seed = 20240101;
  int steps = 0;                  // 0: use the policy's M
  unsigned threads = 1;           // 0: hardware threads
  // Paths per RNG substream; results do not depend on the thread count.
  std::uint64_t chunk = 8192;
};

struct McResult {
  double estimate = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool has_ci = false;  // false when fewer than two paths were simulated
  std::uint64_t paths = 0;
  std::uint64_t seed = 0;
  int steps = 0;

  bool contains(double v) const noexcept { return has_ci && v >= ci_low && v <= ci_high; }
};

// Component-wise bilinear interpolation of the control triples stored at the
// four interior nodes around (ln X, ln Y) for policy step m (1..M, indexed by
// time-to-maturity). Queries outside the interior are clamped to the nearest
// interior node.
ControlPoint interpolate_control(const ControlPolicy& policy, int m, double X, double Y,
                                 const GridSpec& grid, const DiscreteControlSet& controls);

// Euler-Maruyama simulation of both prices following the stored policy; path
// step m (t_m = m dt) uses the policy slice at tau = T - t_m, i.e. index M - m.
McResult mc_validate(const PolicyFile& policy, const ModelSpec& spec, const PayoffSpec& payoff,
                     const McConfig& config);

// Same simulation with one fixed control for every path and step.
McResult mc_validate_constant(const ControlPoint& control, const ModelSpec& spec,
                              const PayoffSpec& payoff, int steps, const McConfig& config);

// Key/value text report (estimate, std_error, ci_low, ci_high, paths, seed, steps).
std::string format_mc_report(const McResult& r);
void write_mc_report(const McResult& r, const std::string& path);

}  // namespace mpcci
