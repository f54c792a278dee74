#include "mpcci/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>

#include "mpcci/errors.hpp"

namespace mpcci {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

static_assert(sizeof(Complex) == sizeof(fftw_complex), "std::complex layout mismatch");

}  // namespace

int AxisLayout::min_period() const noexcept {
  const int outputs = out_hi() - out_lo() + 1;
  return outputs + std::min(inputs(), k_hi - k_lo + 1) - 1;
}

AxisLayout AxisLayout::full(int N) {
  AxisLayout a;
  a.N = N;
  a.L = 3 * N - 1;
  a.in_lo = -N;
  a.in_hi = N;
  a.k_lo = -3 * N / 2 + 1;
  a.k_hi = 3 * N / 2 - 1;
  a.shift = N / 2 - 1;
  return a;
}

AxisLayout AxisLayout::compact(int N, int k_lo, int k_hi) {
  require(N >= 4 && N % 2 == 0, ErrorCategory::Internal, "layout needs even N >= 4");
  require(k_lo <= k_hi, ErrorCategory::Internal, "empty kernel support");
  AxisLayout a;
  a.N = N;
  a.k_lo = std::max(k_lo, -3 * N / 2 + 1);
  a.k_hi = std::min(k_hi, 3 * N / 2 - 1);
  if (a.k_lo > a.k_hi) a.k_lo = a.k_hi = 0;  // kernel vanishes on every offset
  a.in_lo = std::max(-N, a.out_lo() - a.k_hi);
  a.in_hi = std::min(N, a.out_hi() - a.k_lo);
  a.shift = a.in_lo - a.out_lo();
  a.L = next_smooth_size(a.min_period());
  return a;
}

ConvLayout ConvLayout::full(int N, int J) { return {AxisLayout::full(N), AxisLayout::full(J)}; }

ConvLayout ConvLayout::compact(int N, int J, int kx_lo, int kx_hi, int ky_lo, int ky_hi) {
  return {AxisLayout::compact(N, kx_lo, kx_hi), AxisLayout::compact(J, ky_lo, ky_hi)};
}

int next_smooth_size(int n) {
  if (n <= 1) return 1;
  for (int m = n;; ++m) {
    int r = m;
    for (int p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

FftEngine::FftEngine(int rows, int cols)
    : rows_(rows), cols_(cols),
      spec_size_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols / 2 + 1)) {
  require(rows > 0 && cols > 0, ErrorCategory::Internal, "FFT shape must be positive");
  const std::size_t nreal = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  real_ = static_cast<double*>(fftw_malloc(sizeof(double) * nreal));
  cplx_ = reinterpret_cast<Complex*>(fftw_malloc(sizeof(fftw_complex) * spec_size_));
  if (real_ == nullptr || cplx_ == nullptr) {
    fftw_free(real_);
    fftw_free(cplx_);
    fail(ErrorCategory::Internal, "FFT buffer allocation failed");
  }
  std::lock_guard<std::mutex> lock(planner_mutex());
  // FFTW_ESTIMATE keeps plan selection deterministic from run to run.
  plan_fwd_ = fftw_plan_dft_r2c_2d(rows, cols, real_, reinterpret_cast<fftw_complex*>(cplx_),
                                   FFTW_ESTIMATE);
  plan_inv_ = fftw_plan_dft_c2r_2d(rows, cols, reinterpret_cast<fftw_complex*>(cplx_), real_,
                                   FFTW_ESTIMATE);
  if (plan_fwd_ == nullptr || plan_inv_ == nullptr)
    fail(ErrorCategory::Internal, "FFTW plan creation failed");
}

FftEngine::~FftEngine() {
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    if (plan_inv_) fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
  }
  fftw_free(real_);
  fftw_free(cplx_);
}

void FftEngine::forward(const double* in, Complex* out) {
  const std::size_t nreal = static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_);
  if (in != real_) std::memcpy(real_, in, sizeof(double) * nreal);
  fftw_execute(static_cast<fftw_plan>(plan_fwd_));
  if (out != cplx_) std::memcpy(static_cast<void*>(out), cplx_, sizeof(Complex) * spec_size_);
}

Spectrum FftEngine::forward(const Matrix& in) {
  require(in.rows() == static_cast<std::size_t>(rows_) &&
              in.cols() == static_cast<std::size_t>(cols_),
          ErrorCategory::Internal, "FFT input shape mismatch");
  Spectrum out(spec_size_);
  forward(in.data(), out.data());
  return out;
}

void FftEngine::inverse_buffer() { fftw_execute(static_cast<fftw_plan>(plan_inv_)); }

Matrix FftEngine::inverse(const Spectrum& in) {
  require(in.size() == spec_size_, ErrorCategory::Internal, "spectrum shape mismatch");
  std::memcpy(static_cast<void*>(cplx_), in.data(), sizeof(Complex) * spec_size_);
  inverse_buffer();
  Matrix out(static_cast<std::size_t>(rows_), static_cast<std::size_t>(cols_));
  const double scale = 1.0 / (static_cast<double>(rows_) * static_cast<double>(cols_));
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = real_[i] * scale;
  return out;
}

}  // namespace mpcci
