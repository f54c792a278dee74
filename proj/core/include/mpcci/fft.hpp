#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "mpcci/grid2d.hpp"

namespace mpcci {

using Complex = std::complex<double>;
using Spectrum = std::vector<Complex>;

// Circulant embedding along one axis.
//
// A kernel offset k = n - l is stored at circular index (k + shift) mod L, an
// input node l at position l - in_lo and an interior output node n lands at
// circular index n - in_lo + shift. Any period L that is at least
//   (interior count) + min(input count, kernel support) - 1
// reproduces the linear (Toeplitz) sum exactly; inputs farther than the kernel
// support from every interior node never contribute and are dropped.
struct AxisLayout {
  int N = 0;          // interval count on [z_min, z_max]
  int L = 0;          // circular period (transform length)
  int in_lo = 0;      // first input node index used
  int in_hi = 0;      // last input node index used
  int k_lo = 0;       // smallest stored kernel offset
  int k_hi = 0;       // largest stored kernel offset
  int shift = 0;      // kernel offset k lives at (k + shift) mod L

  int out_lo() const noexcept { return -N / 2 + 1; }
  int out_hi() const noexcept { return N / 2 - 1; }
  int inputs() const noexcept { return in_hi - in_lo + 1; }
  int kernel_index(int k) const noexcept { return ((k + shift) % L + L) % L; }
  int input_index(int l) const noexcept { return l - in_lo; }
  int output_index(int n) const noexcept { return ((n - in_lo + shift) % L + L) % L; }

  // Minimal period that keeps the circular sum alias-free for this layout.
  int min_period() const noexcept;

  // Full circulant of size 3N-1 with the input block leading and the kernel
  // column ordered [-N/2+1..N/2, N/2+1..3N/2-1, -3N/2+1..-N/2].
  static AxisLayout full(int N);
  // Compact layout for a kernel supported on offsets [k_lo, k_hi]: drops
  // inputs outside the reach of the kernel, outputs land at n - out_lo and the
  // period is rounded up to a 7-smooth length.
  static AxisLayout compact(int N, int k_lo, int k_hi);
};

struct ConvLayout {
  AxisLayout x;
  AxisLayout y;

  int rows() const noexcept { return x.L; }
  int cols() const noexcept { return y.L; }
  // Number of complex coefficients of a real-to-complex transform.
  std::size_t spectrum_size() const noexcept {
    return static_cast<std::size_t>(x.L) * static_cast<std::size_t>(y.L / 2 + 1);
  }

  static ConvLayout full(int N, int J);
  static ConvLayout compact(int N, int J, int kx_lo, int kx_hi, int ky_lo, int ky_hi);
};

// Smallest integer >= n whose only prime factors are 2, 3, 5 and 7.
int next_smooth_size(int n);

// Real 2D transforms of a fixed shape (FFTW r2c / c2r). One engine owns its
// plans and work buffers and must not be shared between threads; plan creation
// is internally serialised so engines may be built concurrently.
class FftEngine {
 public:
  FftEngine(int rows, int cols);
  ~FftEngine();
  FftEngine(const FftEngine&) = delete;
  FftEngine& operator=(const FftEngine&) = delete;

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  std::size_t spectrum_size() const noexcept { return spec_size_; }

  // Unnormalised forward transform of a rows x cols real matrix.
  Spectrum forward(const Matrix& in);
  void forward(const double* in, Complex* out);

  // Real work buffer (rows x cols) and complex work buffer (spectrum_size()).
  double* real_buffer() noexcept { return real_; }
  Complex* complex_buffer() noexcept { return cplx_; }

  // In-place: transforms complex_buffer() into real_buffer() without the
  // 1/(rows*cols) normalisation. complex_buffer() is destroyed.
  void inverse_buffer();

  // Normalised inverse transform of a full spectrum.
  Matrix inverse(const Spectrum& in);

 private:
  int rows_;
  int cols_;
  std::size_t spec_size_;
  double* real_ = nullptr;
  Complex* cplx_ = nullptr;
  void* plan_fwd_ = nullptr;
  void* plan_inv_ = nullptr;
};

}  // namespace mpcci
