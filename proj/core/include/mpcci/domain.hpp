#pragma once

#include "mpcci/model.hpp"

namespace mpcci {

// Uniform grid in log-prices centred at (ln X0, ln Y0).
//
// Node indices n run over three nested tiers:
//   interior      n in {-N/2+1, ..., N/2-1}        (N-1 nodes)
//   extended      n in {-N, ..., N}                (2N+1 nodes, the value grid)
//   offsets       n in {-3N/2+1, ..., 3N/2-1}      (3N-1 kernel offsets)
// with half-widths w, 2w and 3w, and likewise for j / J along y.
struct GridSpec {
  int N = 0;
  int J = 0;
  int M = 0;
  double half_width = 0.0;  // w: half-width of [x_min, x_max] (and y)
  double dx = 0.0;
  double dy = 0.0;
  double dtau = 0.0;
  double x_hat0 = 0.0;
  double y_hat0 = 0.0;

  double x(int n) const noexcept { return x_hat0 + n * dx; }
  double y(int j) const noexcept { return y_hat0 + j * dy; }

  double x_min() const noexcept { return x_hat0 - half_width; }
  double x_max() const noexcept { return x_hat0 + half_width; }
  double y_min() const noexcept { return y_hat0 - half_width; }
  double y_max() const noexcept { return y_hat0 + half_width; }
  double x_min_ext() const noexcept { return x_hat0 - 2.0 * half_width; }
  double x_max_ext() const noexcept { return x_hat0 + 2.0 * half_width; }
  double y_min_ext() const noexcept { return y_hat0 - 2.0 * half_width; }
  double y_max_ext() const noexcept { return y_hat0 + 2.0 * half_width; }
  double x_min_off() const noexcept { return x_hat0 - 3.0 * half_width; }
  double x_max_off() const noexcept { return x_hat0 + 3.0 * half_width; }
  double y_min_off() const noexcept { return y_hat0 - 3.0 * half_width; }
  double y_max_off() const noexcept { return y_hat0 + 3.0 * half_width; }

  // Extended (value) grid extents: 2N+1 by 2J+1.
  int ext_rows() const noexcept { return 2 * N + 1; }
  int ext_cols() const noexcept { return 2 * J + 1; }
  // Interior extents: N-1 by J-1.
  int int_rows() const noexcept { return N - 1; }
  int int_cols() const noexcept { return J - 1; }

  bool is_interior(int n, int j) const noexcept {
    return n > -N / 2 && n < N / 2 && j > -J / 2 && j < J / 2;
  }
};

// Parameters of one refinement level: N = J = 2^(7+l), M = 50 * 2^l,
// Qx = Qy = 2^(l+1) - 1.
struct RefinementLevel {
  int level = 0;
  int N = 128;
  int J = 128;
  int M = 50;
  int Qx = 1;
  int Qy = 1;

  static RefinementLevel at(int level);
};

// Half-width w of [x_min, x_max] from the Green's-function tail bound: the
// smallest b in [1, 50] with
//   (1+rho_max)^{3/2} / (pi (1-rho_max)^{1/2}) * exp(-b^2/2) / b^2 < epsilon
// is found by bisection, then w = b * kappa + |mu| for the larger of the two
// assets (largest admissible sigma), rounded up to one decimal.
double truncation_half_width(double epsilon, const ModelSpec& spec, double dtau);

// The raw (unrounded) threshold b of the tail bound.
double truncation_threshold(double epsilon, double rho_max);

GridSpec build_grid(const ModelSpec& spec, double half_width, int N, int J, int M);

}  // namespace mpcci
