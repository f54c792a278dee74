#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "mpcci/conv.hpp"
#include "mpcci/domain.hpp"
#include "mpcci/fft.hpp"
#include "mpcci/kernel.hpp"
#include "mpcci/model.hpp"

namespace mpcci {

// Values on the extended grid: values(n + N, j + J) for n in [-N, N],
// j in [-J, J], at time-to-maturity tau_m = m * dtau.
struct ValueSurface {
  Matrix values;
  int m = 0;
};

// Optimal control index per timestep m in 1..M and interior node.
struct ControlPolicy {
  int M = 0;
  int N = 0;
  int J = 0;
  std::vector<std::uint16_t> index;  // M slices of (N-1) x (J-1), row-major

  std::size_t slice_size() const noexcept {
    return static_cast<std::size_t>(N - 1) * static_cast<std::size_t>(J - 1);
  }
  // Control index at step m (1-based) and interior node (n, j).
  std::uint16_t at(int m, int n, int j) const {
    return index[static_cast<std::size_t>(m - 1) * slice_size() +
                 static_cast<std::size_t>(n + N / 2 - 1) * static_cast<std::size_t>(J - 1) +
                 static_cast<std::size_t>(j + J / 2 - 1)];
  }
  std::uint16_t* slice(int m) {
    return index.data() + static_cast<std::size_t>(m - 1) * slice_size();
  }
  const std::uint16_t* slice(int m) const {
    return index.data() + static_cast<std::size_t>(m - 1) * slice_size();
  }
};

struct SolveOptions {
  QuadratureRule quadrature = QuadratureRule::Trapezoid;
  KernelOptions kernel{};
  bool store_policy = true;
  // Worker threads for the per-control convolutions (0 = hardware threads).
  unsigned threads = 1;
  // Use the (3N-1) x (3J-1) circulant instead of the compact layout.
  bool full_layout = false;
  // Check the l-infinity stability bound after every step.
  bool check_stability = true;
};

struct SolveDiagnostics {
  std::vector<double> weight_sum_deviation;  // per control, |sum w - e^{-r dtau}|
  double min_weight = 0.0;                   // smallest kernel weight over all controls
  // Largest |row sum of the discrete operator - e^{-r dtau}| over controls and
  // interior nodes; the measured epsilon of the stability bound.
  double eps_hat = 0.0;
  // max over m of ||v^m||_inf / (e^{m eps_hat} ||v^0||_inf).
  double max_growth = 0.0;
  double max_norm = 0.0;  // max over m of ||v^m||_inf
  int fft_rows = 0;
  int fft_cols = 0;
  double seconds = 0.0;   // kernel construction plus time stepping
};

struct SolveResult {
  ModelSpec spec;
  GridSpec grid;
  DiscreteControlSet controls;
  ValueSurface surface;
  std::optional<ControlPolicy> policy;
  SolveDiagnostics diagnostics;
};

// v^0 = payoff on every node of the extended grid.
ValueSurface apply_initial(const PayoffSpec& payoff, const GridSpec& grid);

// Discounted payoff exp(-r tau) p on every node outside the interior block.
void apply_boundary(ValueSurface& surface, const PayoffSpec& payoff, const GridSpec& grid,
                    double tau, double r);

// Kernel spectra, quadrature weights and FFT workspaces for one grid; advances
// a surface by one timestep.
class Stepper {
 public:
  Stepper(const ModelSpec& spec, const PayoffSpec& payoff, const GridSpec& grid,
          const DiscreteControlSet& controls, const QuadratureWeights& weights,
          const SolveOptions& options = {});
  ~Stepper();
  Stepper(const Stepper&) = delete;
  Stepper& operator=(const Stepper&) = delete;

  // v^{m+1} from v^m: per-control convolution, max (worst case) or min (best
  // case) over controls with ties resolved to the smallest index, then the
  // boundary at tau_{m+1}. When `controls_out` is non-null it receives the
  // optimal index of every interior node, row-major.
  ValueSurface step(const ValueSurface& v, std::uint16_t* controls_out = nullptr);

  const std::vector<KernelSpectrum>& kernels() const noexcept { return kernels_; }
  const ConvLayout& layout() const noexcept { return layout_; }
  const QuadratureWeights& weights() const noexcept { return weights_; }
  // Measured epsilon of the stability bound (see SolveDiagnostics::eps_hat).
  double eps_hat() const noexcept { return eps_hat_; }

 private:
  struct Worker;
  void run_range(Worker& w, const Complex* fv, std::size_t q_begin, std::size_t q_end);

  ModelSpec spec_;
  PayoffSpec payoff_;
  GridSpec grid_;
  QuadratureWeights weights_;
  SolveOptions options_;
  ConvLayout layout_;
  std::vector<KernelSpectrum> kernels_;
  std::vector<std::unique_ptr<Worker>> workers_;
  Matrix payoff_values_;
  double eps_hat_ = 0.0;
};

// Runs the full backward recursion from tau = 0 to tau = T.
SolveResult solve(const ModelSpec& spec, const PayoffSpec& payoff, const GridSpec& grid,
                  const DiscreteControlSet& controls, const SolveOptions& options = {});

// Value at prices (X, Y): bilinear interpolation on the final surface, exact
// node lookup when (ln X, ln Y) is a node. Range error outside [x_min, x_max]
// x [y_min, y_max].
double price_at(const SolveResult& result, double X, double Y);

}  // namespace mpcci
