#include "mpcci/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mpcci/errors.hpp"

namespace mpcci {

RefinementLevel RefinementLevel::at(int level) {
  require(level >= 0 && level <= 10, ErrorCategory::Configuration,
          "refinement level must lie in [0, 10]");
  RefinementLevel l;
  l.level = level;
  l.N = l.J = 1 << (7 + level);
  l.M = 50 * (1 << level);
  l.Qx = l.Qy = (1 << (level + 1)) - 1;
  return l;
}

double truncation_threshold(double epsilon, double rho_max) {
  require(epsilon > 0.0 && epsilon < 1.0, ErrorCategory::Configuration,
          "epsilon must lie in (0, 1)");
  require(std::abs(rho_max) < 1.0, ErrorCategory::DegenerateBound,
          "tail bound requires |rho| < 1; size the domain through the Gaussian "
          "approximation of the degenerate kernel instead");
  const double pref =
      std::pow(1.0 + rho_max, 1.5) / (std::numbers::pi * std::sqrt(1.0 - rho_max));
  auto bound = [&](double b) { return pref * std::exp(-0.5 * b * b) / (b * b); };

  double lo = 1.0;
  double hi = 50.0;
  if (bound(lo) < epsilon) return lo;
  // bound is decreasing in b; keep bound(lo) >= eps > bound(hi).
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (bound(mid) < epsilon)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

double truncation_half_width(double epsilon, const ModelSpec& spec, double dtau) {
  spec.validate();
  require(dtau > 0.0, ErrorCategory::Configuration, "dtau must be > 0");
  require(spec.rho.lo > -1.0 && spec.rho.hi < 1.0, ErrorCategory::DegenerateBound,
          "tail bound requires |rho| < 1; size the domain through the Gaussian "
          "approximation of the degenerate kernel instead");
  const double b = truncation_threshold(epsilon, spec.rho.hi);

  double w = 0.0;
  for (double sigma : {spec.sigma_x.hi, spec.sigma_y.hi}) {
    const double mu = (0.5 * sigma * sigma - spec.r) * dtau;
    const double kappa = sigma * std::sqrt(dtau);
    // b <= (w - mu)/kappa and b <= (w + mu)/kappa  <=>  w >= b*kappa + |mu|.
    w = std::max(w, b * kappa + std::abs(mu));
  }
  // Round up to one decimal; the small slack keeps exact tenths in place.
  return std::ceil(w * 10.0 - 1e-9) / 10.0;
}

GridSpec build_grid(const ModelSpec& spec, double half_width, int N, int J, int M) {
  spec.validate();
  require(N >= 4 && J >= 4, ErrorCategory::Configuration, "N and J must be >= 4");
  if (N % 2 != 0 || J % 2 != 0) {
    std::ostringstream os;
    os << "N and J must be even (got N=" << N << ", J=" << J << ")";
    fail(ErrorCategory::Configuration, os.str());
  }
  require(M >= 1, ErrorCategory::Configuration, "M must be >= 1");
  require(half_width > 0.0 && std::isfinite(half_width), ErrorCategory::Configuration,
          "half-width must be > 0");
  GridSpec g;
  g.N = N;
  g.J = J;
  g.M = M;
  g.half_width = half_width;
  g.dx = 2.0 * half_width / N;
  g.dy = 2.0 * half_width / J;
  g.dtau = spec.T / M;
  g.x_hat0 = std::log(spec.X0);
  g.y_hat0 = std::log(spec.Y0);
  return g;
}

}  // namespace mpcci
