#include "mpcci/reference.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>
#include <vector>

#include "mpcci/errors.hpp"

namespace mpcci {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct GaussLegendre {
  std::vector<double> x;
  std::vector<double> w;
};

// n-point Gauss-Legendre rule on [-1, 1] by Newton iteration on P_n.
GaussLegendre gauss_legendre(int n) {
  GaussLegendre g;
  g.x.resize(static_cast<std::size_t>(n));
  g.w.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    g.x[static_cast<std::size_t>(i)] = -z;
    g.x[static_cast<std::size_t>(n - 1 - i)] = z;
    g.w[static_cast<std::size_t>(i)] = w;
    g.w[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  return g;
}

const GaussLegendre& rule_for(double abs_r) {
  static const GaussLegendre g6 = gauss_legendre(6);
  static const GaussLegendre g12 = gauss_legendre(12);
  static const GaussLegendre g20 = gauss_legendre(20);
  if (abs_r < 0.3) return g6;
  if (abs_r < 0.75) return g12;
  return g20;
}

// P(Z1 > h, Z2 > k) with correlation r (Drezner-Wesolowsky reduction with
// Gauss-Legendre quadrature, after Genz's BVNU).
double bvnu(double h, double k, double r) {
  const GaussLegendre& g = rule_for(std::abs(r));
  double hk = h * k;
  double bvn = 0.0;
  if (std::abs(r) < 0.925) {
    const double hs = 0.5 * (h * h + k * k);
    const double asr = std::asin(r);
    for (std::size_t i = 0; i < g.x.size(); ++i) {
      const double sn = std::sin(0.5 * asr * (g.x[i] + 1.0));
      bvn += g.w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
    }
    return bvn * asr / (2.0 * kTwoPi) + norm_cdf(-h) * norm_cdf(-k);
  }
  if (r < 0.0) {
    k = -k;
    hk = -hk;
  }
  if (std::abs(r) < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    double asr = -0.5 * (bs / as + hk);
    if (asr > -100.0)
      bvn = a * std::exp(asr) *
            (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    if (-hk < 100.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-0.5 * hk) * std::sqrt(kTwoPi) * norm_cdf(-b / a) * b *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a *= 0.5;
    for (std::size_t i = 0; i < g.x.size(); ++i) {
      const double t = a * (g.x[i] + 1.0);
      const double xs = t * t;
      const double rs = std::sqrt(1.0 - xs);
      asr = -0.5 * (bs / xs + hk);
      if (asr > -100.0)
        bvn += a * g.w[i] * std::exp(asr) *
               (std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs - (1.0 + c * xs * (1.0 + d * xs)));
    }
    bvn = -bvn / kTwoPi;
  }
  if (r > 0.0) return bvn + norm_cdf(-std::max(h, k));
  bvn = -bvn;
  if (k > h) bvn += h < 0.0 ? norm_cdf(k) - norm_cdf(h) : norm_cdf(-h) - norm_cdf(-k);
  return std::max(bvn, 0.0);
}

struct PathSums {
  double sum = 0.0;
  double sum_sq = 0.0;
};

// Simulates paths [first, first + count) of one chunk with its own substream.
template <class ControlFn>
PathSums simulate_chunk(const ModelSpec& spec, const PayoffSpec& payoff, int steps,
                        std::uint64_t seed, std::uint64_t chunk_index, std::uint64_t count,
                        const ControlFn& control_at) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chunk_index),
                    static_cast<std::uint32_t>(chunk_index >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double dt = spec.T / steps;
  const double sdt = std::sqrt(dt);
  const double disc = std::exp(-spec.r * spec.T);
  PathSums s;
  for (std::uint64_t p = 0; p < count; ++p) {
    double X = spec.X0;
    double Y = spec.Y0;
    for (int m = 0; m < steps; ++m) {
      const ControlPoint c = control_at(m, X, Y);
      const double zx = normal(rng);
      const double zy = normal(rng);
      const double rc = std::clamp(c.rho, -1.0, 1.0);
      const double ey = rc * zx + std::sqrt(std::max(0.0, 1.0 - rc * rc)) * zy;
      X *= 1.0 + spec.r * dt + c.sigma_x * sdt * zx;
      Y *= 1.0 + spec.r * dt + c.sigma_y * sdt * ey;
    }
    const double v = disc * evaluate_payoff_prices(payoff, X, Y);
    s.sum += v;
    s.sum_sq += v * v;
  }
  return s;
}

template <class ControlFn>
McResult run_mc(const ModelSpec& spec, const PayoffSpec& payoff, int steps,
                const McConfig& cfg, const ControlFn& control_at) {
  require(cfg.paths >= 1, ErrorCategory::Configuration, "Monte Carlo needs at least one path");
  require(steps >= 1, ErrorCategory::Configuration, "Monte Carlo needs at least one step");
  require(cfg.chunk >= 1, ErrorCategory::Configuration, "Monte Carlo chunk size must be >= 1");
  const std::uint64_t chunks = (cfg.paths + cfg.chunk - 1) / cfg.chunk;
  std::vector<PathSums> partial(chunks);
  auto work = [&](std::uint64_t c) {
    const std::uint64_t count = std::min(cfg.chunk, cfg.paths - c * cfg.chunk);
    partial[c] = simulate_chunk(spec, payoff, steps, cfg.seed, c, count, control_at);
  };
  unsigned threads = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.threads;
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, chunks));
  if (threads <= 1) {
    for (std::uint64_t c = 0; c < chunks; ++c) work(c);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::uint64_t c = t; c < chunks; c += threads) work(c);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  double sum = 0.0;
  double sum_sq = 0.0;
  for (const PathSums& p : partial) {  // fixed order: independent of scheduling
    sum += p.sum;
    sum_sq += p.sum_sq;
  }
  McResult r;
  r.paths = cfg.paths;
  r.seed = cfg.seed;
  r.steps = steps;
  const double n = static_cast<double>(cfg.paths);
  r.estimate = sum / n;
  if (cfg.paths >= 2) {
    const double var = std::max(0.0, (sum_sq - n * r.estimate * r.estimate) / (n - 1.0));
    r.std_error = std::sqrt(var / n);
    r.ci_low = r.estimate - 1.96 * r.std_error;
    r.ci_high = r.estimate + 1.96 * r.std_error;
    r.has_ci = true;
  }
  return r;
}

}  // namespace

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double bivariate_normal_cdf(double a, double b, double rho) {
  require(std::isfinite(rho) && std::abs(rho) <= 1.0, ErrorCategory::Domain,
          "bivariate normal correlation must lie in [-1, 1]");
  require(!std::isnan(a) && !std::isnan(b), ErrorCategory::Domain, "NaN argument");
  if (a == -std::numeric_limits<double>::infinity() || b == -std::numeric_limits<double>::infinity())
    return 0.0;
  if (a == std::numeric_limits<double>::infinity()) return norm_cdf(b);
  if (b == std::numeric_limits<double>::infinity()) return norm_cdf(a);
  return std::clamp(bvnu(-a, -b, rho), 0.0, 1.0);
}

double black_scholes_call(double S, double K, double r, double T, double sigma) {
  require(S > 0.0 && K > 0.0 && T > 0.0 && sigma >= 0.0, ErrorCategory::Domain,
          "Black-Scholes needs S, K, T > 0 and sigma >= 0");
  if (sigma == 0.0) return std::max(0.0, S - K * std::exp(-r * T));
  const double st = sigma * std::sqrt(T);
  const double d1 = (std::log(S / K) + (r + 0.5 * sigma * sigma) * T) / st;
  return S * norm_cdf(d1) - K * std::exp(-r * T) * norm_cdf(d1 - st);
}

double stulz_call_on_max(double X0, double Y0, double K, double r, double T, double s1,
                         double s2, double rho) {
  require(X0 > 0.0 && Y0 > 0.0 && K > 0.0 && T > 0.0, ErrorCategory::Domain,
          "prices, strike and maturity must be > 0");
  require(s1 > 0.0 && s2 > 0.0, ErrorCategory::Domain, "volatilities must be > 0");
  require(std::abs(rho) <= 1.0, ErrorCategory::Domain, "rho must lie in [-1, 1]");
  const double var = s1 * s1 + s2 * s2 - 2.0 * rho * s1 * s2;
  const double sigma = std::sqrt(std::max(var, 0.0));
  const double sqT = std::sqrt(T);
  if (sigma < 1e-12) {
    // Both prices move in lockstep: the larger one is the maximum on every path.
    return X0 >= Y0 ? black_scholes_call(X0, K, r, T, s1) : black_scholes_call(Y0, K, r, T, s2);
  }
  const double d = (std::log(X0 / Y0) + 0.5 * sigma * sigma * T) / (sigma * sqT);
  const double y1 = (std::log(X0 / K) + (r + 0.5 * s1 * s1) * T) / (s1 * sqT);
  const double y2 = (std::log(Y0 / K) + (r + 0.5 * s2 * s2) * T) / (s2 * sqT);
  const double rho1 = std::clamp((s1 - rho * s2) / sigma, -1.0, 1.0);
  const double rho2 = std::clamp((s2 - rho * s1) / sigma, -1.0, 1.0);
  return X0 * bivariate_normal_cdf(y1, d, rho1) +
         Y0 * bivariate_normal_cdf(y2, -d + sigma * sqT, rho2) -
         K * std::exp(-r * T) *
             (1.0 - bivariate_normal_cdf(-y1 + s1 * sqT, -y2 + s2 * sqT, rho));
}

ControlPoint interpolate_control(const ControlPolicy& policy, int m, double X, double Y,
                                 const GridSpec& grid, const DiscreteControlSet& controls) {
  require(m >= 1 && m <= policy.M, ErrorCategory::Range, "policy step out of range");
  require(X > 0.0 && Y > 0.0, ErrorCategory::Domain, "prices must be > 0");
  const int lo_n = -grid.N / 2 + 1;
  const int hi_n = grid.N / 2 - 1;
  const int lo_j = -grid.J / 2 + 1;
  const int hi_j = grid.J / 2 - 1;
  auto locate = [](double t, int lo, int hi, int& i, double& f) {
    t = std::clamp(t, static_cast<double>(lo), static_cast<double>(hi));
    const double r = std::round(t);
    if (std::abs(t - r) <= 1e-9) {
      i = static_cast<int>(r);
      f = 0.0;
      return;
    }
    i = std::clamp(static_cast<int>(std::floor(t)), lo, hi - 1);
    f = t - i;
  };
  int n = 0;
  int j = 0;
  double fx = 0.0;
  double fy = 0.0;
  locate((std::log(X) - grid.x_hat0) / grid.dx, lo_n, hi_n, n, fx);
  locate((std::log(Y) - grid.y_hat0) / grid.dy, lo_j, hi_j, j, fy);
  ControlPoint out{};
  auto accumulate = [&](int a, int b, double w) {
    if (w == 0.0) return;
    const ControlPoint& c = controls[policy.at(m, a, b)];
    out.sigma_x += w * c.sigma_x;
    out.sigma_y += w * c.sigma_y;
    out.rho += w * c.rho;
  };
  if (fx == 0.0 && fy == 0.0) return controls[policy.at(m, n, j)];
  accumulate(n, j, (1.0 - fx) * (1.0 - fy));
  accumulate(n + (fx > 0.0 ? 1 : 0), j, fx * (1.0 - fy));
  accumulate(n, j + (fy > 0.0 ? 1 : 0), (1.0 - fx) * fy);
  accumulate(n + (fx > 0.0 ? 1 : 0), j + (fy > 0.0 ? 1 : 0), fx * fy);
  return out;
}

McResult mc_validate(const PolicyFile& pf, const ModelSpec& spec, const PayoffSpec& payoff,
                     const McConfig& config) {
  const int M = pf.policy.M;
  require(config.steps == 0 || config.steps == M, ErrorCategory::Configuration,
          "Monte Carlo steps must equal the policy's timestep count");
  require(std::abs(pf.grid.dtau * M - spec.T) <= 1e-9 * spec.T, ErrorCategory::Configuration,
          "policy grid does not match the maturity");
  auto control_at = [&](int m, double X, double Y) {
    return interpolate_control(pf.policy, M - m, X, Y, pf.grid, pf.controls);
  };
  return run_mc(spec, payoff, M, config, control_at);
}

McResult mc_validate_constant(const ControlPoint& control, const ModelSpec& spec,
                              const PayoffSpec& payoff, int steps, const McConfig& config) {
  auto control_at = [&](int, double, double) { return control; };
  return run_mc(spec, payoff, steps, config, control_at);
}

std::string format_mc_report(const McResult& r) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "estimate: " << r.estimate << '\n';
  if (r.has_ci) {
    os << "std_error: " << r.std_error << '\n';
    os << "ci_low: " << r.ci_low << '\n';
    os << "ci_high: " << r.ci_high << '\n';
  } else {
    os << "std_error: n/a\nci_low: n/a\nci_high: n/a\n";
  }
  os << "paths: " << r.paths << '\n';
  os << "seed: " << r.seed << '\n';
  os << "steps: " << r.steps << '\n';
  return os.str();
}

void write_mc_report(const McResult& r, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCategory::Io, "cannot open '" + path + "' for writing");
  out << format_mc_report(r);
  require(static_cast<bool>(out), ErrorCategory::Io, "failed writing '" + path + "'");
}

}  // namespace mpcci
