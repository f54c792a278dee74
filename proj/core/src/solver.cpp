#include "mpcci/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "mpcci/errors.hpp"

namespace mpcci {

namespace {

Matrix payoff_on_grid(const PayoffSpec& payoff, const GridSpec& grid) {
  Matrix p(grid.ext_rows(), grid.ext_cols());
  for (int n = -grid.N; n <= grid.N; ++n)
    for (int j = -grid.J; j <= grid.J; ++j) p(n + grid.N, j + grid.J) = evaluate_payoff(payoff, grid.x(n), grid.y(j));
  return p;
}

void set_boundary(Matrix& v, const Matrix& payoff_values, const GridSpec& grid, double discount) {
  const int N = grid.N;
  const int J = grid.J;
  for (int n = -N; n <= N; ++n) {
    const std::size_t i = static_cast<std::size_t>(n + N);
    const bool interior_row = n > -N / 2 && n < N / 2;
    for (int j = -J; j <= J; ++j) {
      if (interior_row && j > -J / 2 && j < J / 2) continue;
      const std::size_t k = static_cast<std::size_t>(j + J);
      v(i, k) = discount * payoff_values(i, k);
    }
  }
}

double sup_norm(const Matrix& v) {
  double m = 0.0;
  for (double x : v.storage()) m = std::max(m, std::abs(x));
  return m;
}

unsigned resolve_threads(unsigned requested, std::size_t controls) {
  unsigned t = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  return static_cast<unsigned>(std::min<std::size_t>(t, std::max<std::size_t>(controls, 1)));
}

}  // namespace

ValueSurface apply_initial(const PayoffSpec& payoff, const GridSpec& grid) {
  return {payoff_on_grid(payoff, grid), 0};
}

void apply_boundary(ValueSurface& surface, const PayoffSpec& payoff, const GridSpec& grid,
                    double tau, double r) {
  require(surface.values.rows() == static_cast<std::size_t>(grid.ext_rows()) &&
              surface.values.cols() == static_cast<std::size_t>(grid.ext_cols()),
          ErrorCategory::Internal, "apply_boundary: surface shape mismatch");
  set_boundary(surface.values, payoff_on_grid(payoff, grid), grid, std::exp(-r * tau));
}

// Per-thread workspace: an FFT engine of the layout shape and the running
// optimum over the worker's contiguous chunk of controls.
struct Stepper::Worker {
  std::unique_ptr<FftEngine> engine;
  std::vector<double> best;
  std::vector<std::uint16_t> arg;
  std::size_t q_begin = 0;
  std::size_t q_end = 0;
};

Stepper::Stepper(const ModelSpec& spec, const PayoffSpec& payoff, const GridSpec& grid,
                 const DiscreteControlSet& controls, const QuadratureWeights& weights,
                 const SolveOptions& options)
    : spec_(spec), payoff_(payoff), grid_(grid), weights_(weights), options_(options) {
  require(controls.size() > 0, ErrorCategory::Configuration, "control set is empty");
  require(controls.size() <= std::numeric_limits<std::uint16_t>::max(),
          ErrorCategory::Configuration, "control set too large for 16-bit policy indices");
  require(weights.phi.rows() == static_cast<std::size_t>(grid.ext_rows()) &&
              weights.phi.cols() == static_cast<std::size_t>(grid.ext_cols()),
          ErrorCategory::Internal, "quadrature weights do not match the grid");

  // One layout shared by all controls: the union of the kernel supports.
  if (options_.full_layout) {
    layout_ = ConvLayout::full(grid.N, grid.J);
  } else {
    KernelSupport u{std::numeric_limits<int>::max(), std::numeric_limits<int>::min(),
                    std::numeric_limits<int>::max(), std::numeric_limits<int>::min()};
    for (const ControlPoint& c : controls.points) {
      const KernelSupport s = KernelEvaluator(c, grid, spec.r, options_.kernel).support();
      u.kx_lo = std::min(u.kx_lo, s.kx_lo);
      u.kx_hi = std::max(u.kx_hi, s.kx_hi);
      u.ky_lo = std::min(u.ky_lo, s.ky_lo);
      u.ky_hi = std::max(u.ky_hi, s.ky_hi);
    }
    layout_ = ConvLayout::compact(grid.N, grid.J, u.kx_lo, u.kx_hi, u.ky_lo, u.ky_hi);
  }

  const unsigned threads = resolve_threads(options_.threads, controls.size());
  const std::size_t per = (controls.size() + threads - 1) / threads;
  const std::size_t outputs = static_cast<std::size_t>(grid.int_rows()) * grid.int_cols();
  for (unsigned t = 0; t < threads; ++t) {
    auto w = std::make_unique<Worker>();
    w->engine = std::make_unique<FftEngine>(layout_.rows(), layout_.cols());
    w->q_begin = std::min(controls.size(), t * per);
    w->q_end = std::min(controls.size(), (t + 1) * per);
    w->best.assign(outputs, 0.0);
    w->arg.assign(outputs, 0);
    if (w->q_begin < w->q_end) workers_.push_back(std::move(w));
  }

  kernels_.reserve(controls.size());
  for (const ControlPoint& c : controls.points) {
    KernelSpectrum k = build_kernel(c, grid, spec.r, layout_, *workers_.front()->engine,
                                    options_.kernel);
    k.embedded = Matrix();  // only the spectrum is needed from here on
    kernels_.push_back(std::move(k));
  }
  payoff_values_ = payoff_on_grid(payoff, grid);

  // Measured stability constant: the discrete operator applied to v == 1.
  FftEngine& e = *workers_.front()->engine;
  const double discount = std::exp(-spec.r * grid.dtau);
  const double scale = 1.0 / (static_cast<double>(layout_.rows()) * layout_.cols());
  const Matrix ones(grid.ext_rows(), grid.ext_cols(), 1.0);
  const Matrix aug = augment(ones, weights_, layout_);
  Spectrum f1(layout_.spectrum_size());
  e.forward(aug.data(), f1.data());
  for (const KernelSpectrum& k : kernels_) {
    Complex* c = e.complex_buffer();
    for (std::size_t i = 0; i < f1.size(); ++i) c[i] = f1[i] * k.spectrum[i];
    e.inverse_buffer();
    const double* real = e.real_buffer();
    for (int n = layout_.x.out_lo(); n <= layout_.x.out_hi(); ++n) {
      const double* row = real + static_cast<std::size_t>(layout_.x.output_index(n)) * layout_.cols();
      for (int j = layout_.y.out_lo(); j <= layout_.y.out_hi(); ++j)
        eps_hat_ = std::max(eps_hat_, std::abs(row[layout_.y.output_index(j)] * scale - discount));
    }
  }
}

Stepper::~Stepper() = default;

void Stepper::run_range(Worker& w, const Complex* fv, std::size_t q_begin, std::size_t q_end) {
  const bool maximise = spec_.objective == Objective::WorstCase;
  const double scale = 1.0 / (static_cast<double>(layout_.rows()) * layout_.cols());
  const std::size_t ssize = layout_.spectrum_size();
  const int ni = grid_.int_rows();
  const int nj = grid_.int_cols();
  std::fill(w.best.begin(), w.best.end(),
            maximise ? -std::numeric_limits<double>::infinity()
                     : std::numeric_limits<double>::infinity());
  std::fill(w.arg.begin(), w.arg.end(), static_cast<std::uint16_t>(q_begin));

  for (std::size_t q = q_begin; q < q_end; ++q) {
    Complex* c = w.engine->complex_buffer();
    const Complex* kq = kernels_[q].spectrum.data();
    for (std::size_t i = 0; i < ssize; ++i) c[i] = fv[i] * kq[i];
    w.engine->inverse_buffer();
    const double* real = w.engine->real_buffer();
    for (int a = 0; a < ni; ++a) {
      const int n = layout_.x.out_lo() + a;
      const double* row =
          real + static_cast<std::size_t>(layout_.x.output_index(n)) * layout_.cols();
      double* best = w.best.data() + static_cast<std::size_t>(a) * nj;
      std::uint16_t* arg = w.arg.data() + static_cast<std::size_t>(a) * nj;
      const int col0 = layout_.y.output_index(layout_.y.out_lo());
      for (int b = 0; b < nj; ++b) {
        const double u = row[(col0 + b) % layout_.cols()] * scale;
        if (!std::isfinite(u)) {
          std::ostringstream os;
          os << "non-finite value at node (n=" << n << ", j=" << (layout_.y.out_lo() + b)
             << ") for control " << q << " (sigma_x=" << kernels_[q].control.sigma_x
             << ", sigma_y=" << kernels_[q].control.sigma_y
             << ", rho=" << kernels_[q].control.rho << ")";
          fail(ErrorCategory::Numerical, os.str());
        }
        if (maximise ? u > best[b] : u < best[b]) {
          best[b] = u;
          arg[b] = static_cast<std::uint16_t>(q);
        }
      }
    }
  }
}

ValueSurface Stepper::step(const ValueSurface& v, std::uint16_t* controls_out) {
  require(v.values.rows() == static_cast<std::size_t>(grid_.ext_rows()) &&
              v.values.cols() == static_cast<std::size_t>(grid_.ext_cols()),
          ErrorCategory::Internal, "step: surface shape mismatch");
  const Matrix aug = augment(v.values, weights_, layout_);
  Spectrum fv(layout_.spectrum_size());
  workers_.front()->engine->forward(aug.data(), fv.data());

  if (workers_.size() == 1) {
    run_range(*workers_.front(), fv.data(), workers_.front()->q_begin, workers_.front()->q_end);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers_.size());
    pool.reserve(workers_.size());
    for (std::size_t t = 0; t < workers_.size(); ++t) {
      pool.emplace_back([&, t] {
        try {
          run_range(*workers_[t], fv.data(), workers_[t]->q_begin, workers_[t]->q_end);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  // Fold the chunk optima in control-index order; strict comparison keeps the
  // smallest index on ties, exactly as a sequential sweep would.
  const bool maximise = spec_.objective == Objective::WorstCase;
  std::vector<double> best = workers_.front()->best;
  std::vector<std::uint16_t> arg = workers_.front()->arg;
  for (std::size_t t = 1; t < workers_.size(); ++t) {
    const Worker& w = *workers_[t];
    for (std::size_t i = 0; i < best.size(); ++i) {
      if (maximise ? w.best[i] > best[i] : w.best[i] < best[i]) {
        best[i] = w.best[i];
        arg[i] = w.arg[i];
      }
    }
  }

  ValueSurface out{Matrix(grid_.ext_rows(), grid_.ext_cols()), v.m + 1};
  const int ni = grid_.int_rows();
  const int nj = grid_.int_cols();
  for (int a = 0; a < ni; ++a) {
    double* dst = out.values.row(static_cast<std::size_t>(a + grid_.N / 2 + 1)) + (grid_.J / 2 + 1);
    std::copy_n(best.data() + static_cast<std::size_t>(a) * nj, nj, dst);
  }
  set_boundary(out.values, payoff_values_, grid_, std::exp(-spec_.r * out.m * grid_.dtau));
  if (controls_out != nullptr) std::copy(arg.begin(), arg.end(), controls_out);
  return out;
}

SolveResult solve(const ModelSpec& spec, const PayoffSpec& payoff, const GridSpec& grid,
                  const DiscreteControlSet& controls, const SolveOptions& options) {
  spec.validate();
  payoff.validate();
  const auto t0 = std::chrono::steady_clock::now();

  QuadratureWeights weights;
  if (options.quadrature == QuadratureRule::Trapezoid) {
    weights = trapezoid_weights(grid.N, grid.J);
  } else {
    const auto kinks = payoff_kinks(payoff);
    require(kinks.has_value(), ErrorCategory::Unsupported,
            "Simpson quadrature needs the payoff's kink lines; payoff '" + payoff.name() +
                "' declares none");
    weights = simpson_weights(grid, *kinks);
  }

  Stepper stepper(spec, payoff, grid, controls, weights, options);

  SolveResult res;
  res.spec = spec;
  res.grid = grid;
  res.controls = controls;
  res.diagnostics.fft_rows = stepper.layout().rows();
  res.diagnostics.fft_cols = stepper.layout().cols();
  res.diagnostics.eps_hat = stepper.eps_hat();
  res.diagnostics.min_weight = std::numeric_limits<double>::infinity();
  for (const KernelSpectrum& k : stepper.kernels()) {
    res.diagnostics.weight_sum_deviation.push_back(weight_sum_diagnostic(k, spec.r, grid.dtau));
    res.diagnostics.min_weight = std::min(res.diagnostics.min_weight, k.min_weight);
  }

  if (options.store_policy) {
    ControlPolicy p;
    p.M = grid.M;
    p.N = grid.N;
    p.J = grid.J;
    p.index.assign(static_cast<std::size_t>(grid.M) * p.slice_size(), 0);
    res.policy = std::move(p);
  }

  ValueSurface v = apply_initial(payoff, grid);
  const double v0 = sup_norm(v.values);
  res.diagnostics.max_norm = v0;
  for (int m = 0; m < grid.M; ++m) {
    v = stepper.step(v, res.policy ? res.policy->slice(m + 1) : nullptr);
    const double norm = sup_norm(v.values);
    const double bound = std::exp(v.m * stepper.eps_hat()) * v0;
    res.diagnostics.max_norm = std::max(res.diagnostics.max_norm, norm);
    if (bound > 0.0) res.diagnostics.max_growth = std::max(res.diagnostics.max_growth, norm / bound);
    if (options.check_stability && norm > bound * (1.0 + 1e-12) + 1e-300) {
      std::ostringstream os;
      os << "stability bound violated at step " << v.m << ": ||v||_inf = " << norm
         << " > e^{m eps} ||v0||_inf = " << bound;
      fail(ErrorCategory::Numerical, os.str());
    }
  }
  res.surface = std::move(v);
  res.diagnostics.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

double price_at(const SolveResult& result, double X, double Y) {
  require(X > 0.0 && Y > 0.0, ErrorCategory::Domain, "prices must be > 0");
  const GridSpec& g = result.grid;
  const double x = std::log(X);
  const double y = std::log(Y);
  const double tol = 1e-12 * std::max(1.0, g.half_width);
  if (x < g.x_min() - tol || x > g.x_max() + tol || y < g.y_min() - tol || y > g.y_max() + tol) {
    std::ostringstream os;
    os << "query (" << X << ", " << Y << ") lies outside the domain [" << std::exp(g.x_min())
       << ", " << std::exp(g.x_max()) << "] x [" << std::exp(g.y_min()) << ", "
       << std::exp(g.y_max()) << "]";
    fail(ErrorCategory::Range, os.str());
  }
  const Matrix& v = result.surface.values;
  auto locate = [](double t, int lo, int hi, int& i, double& f) {
    const double r = std::round(t);
    if (std::abs(t - r) <= 1e-9) {
      i = std::clamp(static_cast<int>(r), lo, hi);
      f = 0.0;
      return;
    }
    i = std::clamp(static_cast<int>(std::floor(t)), lo, hi - 1);
    f = std::clamp(t - i, 0.0, 1.0);
  };
  int n = 0;
  int j = 0;
  double fx = 0.0;
  double fy = 0.0;
  locate((x - g.x_hat0) / g.dx, -g.N / 2, g.N / 2, n, fx);
  locate((y - g.y_hat0) / g.dy, -g.J / 2, g.J / 2, j, fy);
  auto at = [&](int a, int b) {
    return v(static_cast<std::size_t>(a + g.N), static_cast<std::size_t>(b + g.J));
  };
  if (fx == 0.0 && fy == 0.0) return at(n, j);
  const double v00 = at(n, j);
  const double v10 = fx > 0.0 ? at(n + 1, j) : v00;
  const double v01 = fy > 0.0 ? at(n, j + 1) : v00;
  const double v11 = fx > 0.0 && fy > 0.0 ? at(n + 1, j + 1) : (fx > 0.0 ? v10 : v01);
  return (1.0 - fx) * (1.0 - fy) * v00 + fx * (1.0 - fy) * v10 + (1.0 - fx) * fy * v01 +
         fx * fy * v11;
}

}  // namespace mpcci
