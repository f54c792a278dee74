#pragma once

#include <string>
#include <vector>

#include "mpcci/domain.hpp"
#include "mpcci/fft.hpp"
#include "mpcci/grid2d.hpp"
#include "mpcci/kernel.hpp"
#include "mpcci/model.hpp"

namespace mpcci {

enum class QuadratureRule { Trapezoid, Simpson };

std::string to_string(QuadratureRule rule);
QuadratureRule quadrature_from_string(const std::string& s);

// Composite-rule coefficients phi(l + N, d + J) for nodes (l, d) of the
// extended grid, so that sum phi * f * dx * dy approximates the integral of f.
struct QuadratureWeights {
  Matrix phi;
  QuadratureRule rule = QuadratureRule::Trapezoid;
};

// Tensor product of the 1D trapezoidal rule (1/2 at the ends, 1 inside).
QuadratureWeights trapezoid_weights(int N, int J);

// Composite Simpson coefficients on one run of `intervals` equal intervals:
// the standard (1, 4, 2, ..., 4, 1)/3 pattern for an even count, the 3/8 rule
// on the last three intervals for an odd count, and the trapezoid for one.
std::vector<double> simpson_segment(int intervals);

// Kink-aligned composite Simpson. Vertical and horizontal kink lines split the
// axes into panels that must each hold an even number of intervals; diagonal
// lines (x - y = c) additionally split every row of the integration, where an
// odd count is closed with the 3/8 rule. Kinks outside the extended domain are
// ignored; kinks between nodes raise an alignment error.
QuadratureWeights simpson_weights(const GridSpec& grid, const std::vector<KinkLine>& kinks);

// phi .* v placed in the circulant input block; zeros elsewhere.
Matrix augment(const Matrix& v, const QuadratureWeights& weights, const ConvLayout& layout);

// Interior block (N-1) x (J-1) of a circulant product.
Matrix extract_interior(const Matrix& full, const ConvLayout& layout);

// Circular convolution of `values` (layout shape) with the kernel.
Matrix fft_convolve(const KernelSpectrum& kernel, const Matrix& values, FftEngine& engine);

// Direct double sum over the extended grid:
// u(n, j) = sum_{l, d} phi(l, d) * g(n - l, j - d) * v(l, d) for interior (n, j),
// accumulated with compensated summation. Weights g already include dx * dy.
Matrix naive_convolve(const OffsetKernel& kernel, const Matrix& phi, const Matrix& v);

}  // namespace mpcci
