#pragma once

#include <string>

#include "mpcci/domain.hpp"
#include "mpcci/fft.hpp"
#include "mpcci/grid2d.hpp"
#include "mpcci/model.hpp"

namespace mpcci {

// Moments of the one-step Green's function for a fixed control:
// mu_z = (sigma_z^2/2 - r) dtau, kappa_z = sigma_z sqrt(dtau).
struct GreenParams {
  double mu_x = 0.0;
  double mu_y = 0.0;
  double kappa_x = 0.0;
  double kappa_y = 0.0;
  double rho = 0.0;
  double discount = 1.0;  // exp(-r dtau)

  static GreenParams make(const ControlPoint& c, double dtau, double r);
  bool degenerate() const noexcept { return rho <= -1.0 || rho >= 1.0; }
};

// Exponent of the characteristic function:
// G(eta, zeta; dtau) = exp(psi(eta, zeta) * dtau).
Complex psi(double eta, double zeta, const ControlPoint& control, double r);

// exp(-r dtau) times the bivariate normal density of the log-price offset
// (x, y) over one step; requires |rho| < 1.
double green_density(double x, double y, const ControlPoint& control, double dtau, double r);

// |rho| = 1 kernel with the line delta replaced by a Gaussian of variance
// kappa_y^2 (1 - rho_hat^2).
double green_density_degenerate(double x, double y, const ControlPoint& control, double dtau,
                                double r, double rho_hat);

// rho_hat = sqrt(1 - (dy / (6 kappa_y))^2), i.e. dy = 6 kappa_y sqrt(1 - rho_hat^2).
double rho_hat(double dy, double kappa_y);

// How the |rho| = 1 kernel is put on the grid. Both variants integrate the
// line density against the piecewise-linear hat basis along y, which keeps
// the weights nonnegative and preserves mass and mean exactly.
enum class DegenerateTreatment {
  Projected,  // limit rho_hat -> 1: the exact line delta
  RhoHat      // Gaussian of width dy / 6 around the line
};

struct KernelOptions {
  // Weights whose Gaussian exponent exceeds this value (relative magnitude
  // below exp(-60) ~ 1e-26) are stored as exact zeros; this bounds the kernel
  // support used by the compact circulant layout.
  double tail_exponent = 60.0;
  DegenerateTreatment degenerate = DegenerateTreatment::Projected;
};

// Rectangle of integer offsets outside which every weight is zero.
struct KernelSupport {
  int kx_lo = 0;
  int kx_hi = 0;
  int ky_lo = 0;
  int ky_hi = 0;
};

// Rescaled weights dx * dy * g(kx dx, ky dy) at integer offsets.
class KernelEvaluator {
 public:
  KernelEvaluator(const ControlPoint& control, const GridSpec& grid, double r,
                  const KernelOptions& options = {});

  double weight(int kx, int ky) const;
  // Support clipped to the offset range {-3N/2+1..3N/2-1} x {-3J/2+1..3J/2-1}.
  KernelSupport support() const noexcept { return support_; }
  const GreenParams& params() const noexcept { return p_; }
  double rho_hat() const noexcept { return rho_hat_; }

 private:
  GreenParams p_;
  GridSpec grid_;
  KernelOptions opt_;
  KernelSupport support_;
  double norm_ = 0.0;     // prefactor of the weights
  double rho_hat_ = 1.0;  // only for the degenerate RhoHat treatment
  double slope_ = 0.0;    // rho * sigma_y / sigma_x (degenerate line)
  double intercept_ = 0.0;
  double smear_ = 0.0;    // Gaussian width around the degenerate line
};

// Weights on all (3N-1) x (3J-1) offsets in natural order: element (i, k)
// holds offset (i - 3N/2 + 1, k - 3J/2 + 1).
struct OffsetKernel {
  int N = 0;
  int J = 0;
  Matrix w;
  double at(int kx, int ky) const { return w(kx + 3 * N / 2 - 1, ky + 3 * J / 2 - 1); }
};

OffsetKernel offset_kernel(const ControlPoint& control, const GridSpec& grid, double r,
                           const KernelOptions& options = {});

// The (3N-1) x (3J-1) first column of the block-circulant matrix, reshaped:
// both axes ordered [-N/2+1..N/2, N/2+1..3N/2-1, -3N/2+1..-N/2].
Matrix first_column_matrix(const ControlPoint& control, const GridSpec& grid, double r,
                           const KernelOptions& options = {});

// Per-control weight matrix embedded in a circulant layout, with its spectrum.
struct KernelSpectrum {
  ControlPoint control;
  ConvLayout layout;
  Matrix embedded;      // layout.rows() x layout.cols() real weights
  Spectrum spectrum;    // r2c transform of `embedded`
  double weight_sum = 0.0;
  double min_weight = 0.0;
  KernelSupport support;
};

// Builds the kernel in `layout` using `engine` (shape must match the layout).
KernelSpectrum build_kernel(const ControlPoint& control, const GridSpec& grid, double r,
                            const ConvLayout& layout, FftEngine& engine,
                            const KernelOptions& options = {});

// Builds the kernel in the full (3N-1) x (3J-1) circulant layout.
KernelSpectrum build_kernel(const ControlPoint& control, const GridSpec& grid, double r,
                            const KernelOptions& options = {});

// |sum of weights - exp(-r dtau)|.
double weight_sum_diagnostic(const KernelSpectrum& kernel, double r, double dtau);
double weight_sum_diagnostic(const OffsetKernel& kernel, double r, double dtau);

// CSV dump: header row of y offsets, then one row per x offset.
void write_kernel_csv(const OffsetKernel& kernel, const GridSpec& grid, const std::string& path);

}  // namespace mpcci
