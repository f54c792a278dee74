#include "mpcci/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>

#include "mpcci/errors.hpp"

namespace mpcci {

namespace {

double norm_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// E[(T - c)^+] for T ~ N(mean, sd^2).
double call_moment(double mean, double sd, double c) {
  const double z = (mean - c) / sd;
  return (mean - c) * norm_cdf(z) + sd * norm_pdf(z);
}

// E[hat(T / h)] for T ~ N(mean, sd^2) and the unit hat max(0, 1 - |t|).
double hat_expectation(double mean, double sd, double h) {
  if (sd <= 0.0) return std::max(0.0, 1.0 - std::abs(mean) / h);
  const double v =
      (call_moment(mean, sd, -h) - 2.0 * call_moment(mean, sd, 0.0) + call_moment(mean, sd, h)) /
      h;
  return std::max(v, 0.0);
}

// Neumaier-compensated accumulator.
struct CompensatedSum {
  double sum = 0.0;
  double c = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      c += (sum - t) + v;
    else
      c += (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + c; }
};

}  // namespace

GreenParams GreenParams::make(const ControlPoint& c, double dtau, double r) {
  require(dtau > 0.0, ErrorCategory::Configuration, "dtau must be > 0");
  require(c.sigma_x > 0.0 && c.sigma_y > 0.0, ErrorCategory::Configuration,
          "volatilities must be > 0");
  require(c.rho >= -1.0 && c.rho <= 1.0, ErrorCategory::Domain, "rho must lie in [-1, 1]");
  GreenParams p;
  p.mu_x = (0.5 * c.sigma_x * c.sigma_x - r) * dtau;
  p.mu_y = (0.5 * c.sigma_y * c.sigma_y - r) * dtau;
  p.kappa_x = c.sigma_x * std::sqrt(dtau);
  p.kappa_y = c.sigma_y * std::sqrt(dtau);
  p.rho = c.rho;
  p.discount = std::exp(-r * dtau);
  return p;
}

Complex psi(double eta, double zeta, const ControlPoint& c, double r) {
  const double sx2 = c.sigma_x * c.sigma_x;
  const double sy2 = c.sigma_y * c.sigma_y;
  const double re = -0.5 * sx2 * eta * eta - 0.5 * sy2 * zeta * zeta -
                    c.rho * c.sigma_x * c.sigma_y * eta * zeta - r;
  const double im = (r - 0.5 * sx2) * eta + (r - 0.5 * sy2) * zeta;
  return {re, im};
}

double green_density(double x, double y, const ControlPoint& control, double dtau, double r) {
  const GreenParams p = GreenParams::make(control, dtau, r);
  require(!p.degenerate(), ErrorCategory::Domain,
          "green_density requires |rho| < 1; use green_density_degenerate");
  const double zx = (x - p.mu_x) / p.kappa_x;
  const double zy = (y - p.mu_y) / p.kappa_y;
  const double one_m = 1.0 - p.rho * p.rho;
  const double q = (zx * zx - 2.0 * p.rho * zx * zy + zy * zy) / (2.0 * one_m);
  return p.discount * std::exp(-q) /
         (2.0 * std::numbers::pi * p.kappa_x * p.kappa_y * std::sqrt(one_m));
}

double green_density_degenerate(double x, double y, const ControlPoint& control, double dtau,
                                double r, double rho_hat_value) {
  const GreenParams p = GreenParams::make(control, dtau, r);
  require(p.degenerate(), ErrorCategory::Domain,
          "green_density_degenerate requires rho = +1 or -1");
  require(rho_hat_value > 0.0 && rho_hat_value < 1.0, ErrorCategory::Configuration,
          "rho_hat must lie in (0, 1)");
  const double b = control.sigma_y / control.sigma_x;
  const double a = p.mu_y - p.rho * b * p.mu_x;
  const double zx = (x - p.mu_x) / p.kappa_x;
  const double fx = p.discount * std::exp(-0.5 * zx * zx) /
                    (std::sqrt(2.0 * std::numbers::pi) * p.kappa_x);
  const double s = p.kappa_y * std::sqrt(1.0 - rho_hat_value * rho_hat_value);
  const double gamma = y - (a + p.rho * b * x);
  const double delta =
      std::exp(-gamma * gamma / (2.0 * s * s)) / (std::sqrt(2.0 * std::numbers::pi) * s);
  return fx * delta;
}

double rho_hat(double dy, double kappa_y) {
  require(dy > 0.0 && kappa_y > 0.0, ErrorCategory::Configuration,
          "dy and kappa_y must be > 0");
  const double ratio = dy / (6.0 * kappa_y);
  require(ratio < 1.0, ErrorCategory::GridTooCoarse,
          "dy must be smaller than 6 kappa_y for the Gaussian line approximation");
  return std::sqrt(1.0 - ratio * ratio);
}

KernelEvaluator::KernelEvaluator(const ControlPoint& control, const GridSpec& grid, double r,
                                 const KernelOptions& options)
    : p_(GreenParams::make(control, grid.dtau, r)), grid_(grid), opt_(options) {
  require(options.tail_exponent > 0.0, ErrorCategory::Configuration,
          "tail exponent must be > 0");
  const double t = std::sqrt(2.0 * opt_.tail_exponent);
  const double dx = grid.dx;
  const double dy = grid.dy;

  support_.kx_lo = static_cast<int>(std::ceil((p_.mu_x - t * p_.kappa_x) / dx));
  support_.kx_hi = static_cast<int>(std::floor((p_.mu_x + t * p_.kappa_x) / dx));

  if (!p_.degenerate()) {
    norm_ = dx * dy * p_.discount /
            (2.0 * std::numbers::pi * p_.kappa_x * p_.kappa_y * std::sqrt(1.0 - p_.rho * p_.rho));
    support_.ky_lo = static_cast<int>(std::ceil((p_.mu_y - t * p_.kappa_y) / dy));
    support_.ky_hi = static_cast<int>(std::floor((p_.mu_y + t * p_.kappa_y) / dy));
  } else {
    norm_ = dx * p_.discount / (std::sqrt(2.0 * std::numbers::pi) * p_.kappa_x);
    slope_ = p_.rho * control.sigma_y / control.sigma_x;
    intercept_ = p_.mu_y - slope_ * p_.mu_x;
    if (opt_.degenerate == DegenerateTreatment::RhoHat) {
      rho_hat_ = mpcci::rho_hat(dy, p_.kappa_y);
      smear_ = p_.kappa_y * std::sqrt(1.0 - rho_hat_ * rho_hat_);
    }
    const double m1 = intercept_ + slope_ * support_.kx_lo * dx;
    const double m2 = intercept_ + slope_ * support_.kx_hi * dx;
    const double reach = dy + smear_ * t;
    support_.ky_lo = static_cast<int>(std::ceil((std::min(m1, m2) - reach) / dy));
    support_.ky_hi = static_cast<int>(std::floor((std::max(m1, m2) + reach) / dy));
  }
  support_.kx_lo = std::max(support_.kx_lo, -3 * grid.N / 2 + 1);
  support_.kx_hi = std::min(support_.kx_hi, 3 * grid.N / 2 - 1);
  support_.ky_lo = std::max(support_.ky_lo, -3 * grid.J / 2 + 1);
  support_.ky_hi = std::min(support_.ky_hi, 3 * grid.J / 2 - 1);
}

double KernelEvaluator::weight(int kx, int ky) const {
  if (kx < support_.kx_lo || kx > support_.kx_hi || ky < support_.ky_lo || ky > support_.ky_hi)
    return 0.0;
  const double zx = (kx * grid_.dx - p_.mu_x) / p_.kappa_x;
  if (!p_.degenerate()) {
    const double zy = (ky * grid_.dy - p_.mu_y) / p_.kappa_y;
    const double e =
        (zx * zx - 2.0 * p_.rho * zx * zy + zy * zy) / (2.0 * (1.0 - p_.rho * p_.rho));
    if (e > opt_.tail_exponent) return 0.0;
    return norm_ * std::exp(-e);
  }
  const double ex = 0.5 * zx * zx;
  if (ex > opt_.tail_exponent) return 0.0;
  const double line = intercept_ + slope_ * kx * grid_.dx;
  const double d = ky * grid_.dy - line;
  const double reach = grid_.dy + smear_ * std::sqrt(2.0 * opt_.tail_exponent);
  if (std::abs(d) >= reach) return 0.0;
  return norm_ * std::exp(-ex) * hat_expectation(-d, smear_, grid_.dy);
}

OffsetKernel offset_kernel(const ControlPoint& control, const GridSpec& grid, double r,
                           const KernelOptions& options) {
  const KernelEvaluator ev(control, grid, r, options);
  OffsetKernel k;
  k.N = grid.N;
  k.J = grid.J;
  k.w = Matrix(3 * grid.N - 1, 3 * grid.J - 1, 0.0);
  const KernelSupport s = ev.support();
  for (int kx = s.kx_lo; kx <= s.kx_hi; ++kx)
    for (int ky = s.ky_lo; ky <= s.ky_hi; ++ky)
      k.w(kx + 3 * grid.N / 2 - 1, ky + 3 * grid.J / 2 - 1) = ev.weight(kx, ky);
  return k;
}

Matrix first_column_matrix(const ControlPoint& control, const GridSpec& grid, double r,
                           const KernelOptions& options) {
  const KernelEvaluator ev(control, grid, r, options);
  const ConvLayout layout = ConvLayout::full(grid.N, grid.J);
  Matrix m(layout.rows(), layout.cols(), 0.0);
  for (int kx = layout.x.k_lo; kx <= layout.x.k_hi; ++kx)
    for (int ky = layout.y.k_lo; ky <= layout.y.k_hi; ++ky)
      m(layout.x.kernel_index(kx), layout.y.kernel_index(ky)) = ev.weight(kx, ky);
  return m;
}

KernelSpectrum build_kernel(const ControlPoint& control, const GridSpec& grid, double r,
                            const ConvLayout& layout, FftEngine& engine,
                            const KernelOptions& options) {
  require(engine.rows() == layout.rows() && engine.cols() == layout.cols(),
          ErrorCategory::Internal, "FFT engine does not match the convolution layout");
  const KernelEvaluator ev(control, grid, r, options);
  const KernelSupport s = ev.support();
  require(s.kx_lo >= layout.x.k_lo && s.kx_hi <= layout.x.k_hi && s.ky_lo >= layout.y.k_lo &&
              s.ky_hi <= layout.y.k_hi,
          ErrorCategory::Internal, "kernel support exceeds the convolution layout");

  KernelSpectrum k;
  k.control = control;
  k.layout = layout;
  k.support = s;
  k.embedded = Matrix(layout.rows(), layout.cols(), 0.0);
  CompensatedSum total;
  double wmin = std::numeric_limits<double>::infinity();
  for (int kx = s.kx_lo; kx <= s.kx_hi; ++kx) {
    for (int ky = s.ky_lo; ky <= s.ky_hi; ++ky) {
      const double w = ev.weight(kx, ky);
      require(std::isfinite(w), ErrorCategory::Numerical, "non-finite kernel weight");
      k.embedded(layout.x.kernel_index(kx), layout.y.kernel_index(ky)) = w;
      total.add(w);
      wmin = std::min(wmin, w);
    }
  }
  k.weight_sum = total.value();
  k.min_weight = std::isfinite(wmin) ? wmin : 0.0;
  k.spectrum = engine.forward(k.embedded);
  return k;
}

KernelSpectrum build_kernel(const ControlPoint& control, const GridSpec& grid, double r,
                            const KernelOptions& options) {
  const ConvLayout layout = ConvLayout::full(grid.N, grid.J);
  FftEngine engine(layout.rows(), layout.cols());
  return build_kernel(control, grid, r, layout, engine, options);
}

double weight_sum_diagnostic(const KernelSpectrum& kernel, double r, double dtau) {
  return std::abs(kernel.weight_sum - std::exp(-r * dtau));
}

double weight_sum_diagnostic(const OffsetKernel& kernel, double r, double dtau) {
  CompensatedSum total;
  for (double w : kernel.w.storage()) total.add(w);
  return std::abs(total.value() - std::exp(-r * dtau));
}

void write_kernel_csv(const OffsetKernel& kernel, const GridSpec& grid, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCategory::Io, "cannot open '" + path + "' for writing");
  out << std::setprecision(17);
  out << "x_offset\\y_offset";
  for (std::size_t k = 0; k < kernel.w.cols(); ++k)
    out << ',' << (static_cast<int>(k) - 3 * kernel.J / 2 + 1) * grid.dy;
  out << '\n';
  for (std::size_t i = 0; i < kernel.w.rows(); ++i) {
    out << (static_cast<int>(i) - 3 * kernel.N / 2 + 1) * grid.dx;
    for (std::size_t k = 0; k < kernel.w.cols(); ++k) out << ',' << kernel.w(i, k);
    out << '\n';
  }
  require(static_cast<bool>(out), ErrorCategory::Io, "failed writing '" + path + "'");
}

}  // namespace mpcci
