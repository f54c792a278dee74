#include "mpcci/conv.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <sstream>

#include "mpcci/errors.hpp"

namespace mpcci {

namespace {

std::vector<double> trapezoid_1d(int n) {
  std::vector<double> w(static_cast<std::size_t>(2 * n + 1), 1.0);
  w.front() = w.back() = 0.5;
  return w;
}

// Node index of a kink coordinate relative to a grid line origin, or nullopt
// when the line is not on a node.
std::optional<int> node_index(double offset, double step) {
  const double t = offset / step;
  const double r = std::round(t);
  if (std::abs(t - r) > 1e-8 * std::max(1.0, std::abs(t))) return std::nullopt;
  return static_cast<int>(r);
}

void add_panels(std::vector<double>& w, const std::vector<int>& breaks, int origin) {
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    const int a = breaks[s];
    const int b = breaks[s + 1];
    const auto seg = simpson_segment(b - a);
    for (int i = 0; i <= b - a; ++i) w[static_cast<std::size_t>(a + i + origin)] += seg[i];
  }
}

void check_even_panels(const std::vector<int>& breaks, const char* axis) {
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    const int count = breaks[s + 1] - breaks[s];
    if (count % 2 != 0) {
      std::ostringstream os;
      os << "Simpson panel [" << breaks[s] << ", " << breaks[s + 1] << "] along " << axis
         << " has an odd number of intervals (" << count << ")";
      fail(ErrorCategory::Parity, os.str());
    }
  }
}

}  // namespace

std::string to_string(QuadratureRule rule) {
  return rule == QuadratureRule::Trapezoid ? "trapezoid" : "simpson";
}

QuadratureRule quadrature_from_string(const std::string& s) {
  if (s == "trapezoid" || s == "trap") return QuadratureRule::Trapezoid;
  if (s == "simpson") return QuadratureRule::Simpson;
  fail(ErrorCategory::Configuration, "unknown quadrature '" + s + "' (expected trapezoid|simpson)");
}

QuadratureWeights trapezoid_weights(int N, int J) {
  require(N >= 2 && J >= 2, ErrorCategory::Configuration, "N and J must be >= 2");
  const auto wx = trapezoid_1d(N);
  const auto wy = trapezoid_1d(J);
  QuadratureWeights q;
  q.rule = QuadratureRule::Trapezoid;
  q.phi = Matrix(wx.size(), wy.size());
  for (std::size_t i = 0; i < wx.size(); ++i)
    for (std::size_t k = 0; k < wy.size(); ++k) q.phi(i, k) = wx[i] * wy[k];
  return q;
}

std::vector<double> simpson_segment(int intervals) {
  require(intervals >= 0, ErrorCategory::Internal, "negative panel length");
  std::vector<double> w(static_cast<std::size_t>(intervals) + 1, 0.0);
  if (intervals == 0) return w;
  if (intervals == 1) {
    w[0] = w[1] = 0.5;
    return w;
  }
  const int even = intervals % 2 == 0 ? intervals : intervals - 3;
  for (int i = 0; i < even; i += 2) {
    w[i] += 1.0 / 3.0;
    w[i + 1] += 4.0 / 3.0;
    w[i + 2] += 1.0 / 3.0;
  }
  if (even != intervals) {
    const double e[4] = {3.0 / 8.0, 9.0 / 8.0, 9.0 / 8.0, 3.0 / 8.0};
    for (int i = 0; i < 4; ++i) w[even + i] += e[i];
  }
  return w;
}

QuadratureWeights simpson_weights(const GridSpec& grid, const std::vector<KinkLine>& kinks) {
  const int N = grid.N;
  const int J = grid.J;
  std::set<int> xb{-N, N};
  std::set<int> yb{-J, J};
  std::vector<int> diagonals;  // row j breaks at column l = j + q

  for (const KinkLine& k : kinks) {
    switch (k.kind) {
      case KinkLine::Kind::Vertical: {
        if (k.c <= grid.x_min_ext() || k.c >= grid.x_max_ext()) break;
        const auto n = node_index(k.c - grid.x_hat0, grid.dx);
        if (!n) fail(ErrorCategory::Alignment, "kink line " + k.describe() + " is not on grid nodes");
        xb.insert(*n);
        break;
      }
      case KinkLine::Kind::Horizontal: {
        if (k.c <= grid.y_min_ext() || k.c >= grid.y_max_ext()) break;
        const auto j = node_index(k.c - grid.y_hat0, grid.dy);
        if (!j) fail(ErrorCategory::Alignment, "kink line " + k.describe() + " is not on grid nodes");
        yb.insert(*j);
        break;
      }
      case KinkLine::Kind::Diagonal: {
        if (std::abs(grid.dx - grid.dy) > 1e-12 * grid.dx)
          fail(ErrorCategory::Alignment,
               "kink line " + k.describe() + " needs a square grid (dx == dy)");
        const auto q = node_index(k.c - (grid.x_hat0 - grid.y_hat0), grid.dx);
        if (!q) fail(ErrorCategory::Alignment, "kink line " + k.describe() + " is not on grid nodes");
        diagonals.push_back(*q);
        break;
      }
    }
  }

  const std::vector<int> xbase(xb.begin(), xb.end());
  const std::vector<int> ybreaks(yb.begin(), yb.end());
  check_even_panels(xbase, "x");
  check_even_panels(ybreaks, "y");

  std::vector<double> wy(static_cast<std::size_t>(2 * J + 1), 0.0);
  add_panels(wy, ybreaks, J);

  QuadratureWeights q;
  q.rule = QuadratureRule::Simpson;
  q.phi = Matrix(2 * N + 1, 2 * J + 1, 0.0);
  std::vector<double> wx(static_cast<std::size_t>(2 * N + 1));
  for (int j = -J; j <= J; ++j) {
    std::set<int> row = xb;
    for (int qd : diagonals) {
      const int l = j + qd;
      if (l > -N && l < N) row.insert(l);
    }
    std::fill(wx.begin(), wx.end(), 0.0);
    add_panels(wx, std::vector<int>(row.begin(), row.end()), N);
    const double wj = wy[static_cast<std::size_t>(j + J)];
    for (int l = -N; l <= N; ++l) q.phi(l + N, j + J) = wx[static_cast<std::size_t>(l + N)] * wj;
  }
  return q;
}

Matrix augment(const Matrix& v, const QuadratureWeights& weights, const ConvLayout& layout) {
  const int N = layout.x.N;
  const int J = layout.y.N;
  require(v.rows() == static_cast<std::size_t>(2 * N + 1) &&
              v.cols() == static_cast<std::size_t>(2 * J + 1) && weights.phi.rows() == v.rows() &&
              weights.phi.cols() == v.cols(),
          ErrorCategory::Internal, "augment: value/weight shape mismatch");
  Matrix out(layout.rows(), layout.cols(), 0.0);
  for (int l = layout.x.in_lo; l <= layout.x.in_hi; ++l) {
    const std::size_t src = static_cast<std::size_t>(l + N);
    double* dst = out.row(static_cast<std::size_t>(layout.x.input_index(l)));
    for (int d = layout.y.in_lo; d <= layout.y.in_hi; ++d) {
      const std::size_t c = static_cast<std::size_t>(d + J);
      dst[layout.y.input_index(d)] = weights.phi(src, c) * v(src, c);
    }
  }
  return out;
}

Matrix extract_interior(const Matrix& full, const ConvLayout& layout) {
  require(full.rows() == static_cast<std::size_t>(layout.rows()) &&
              full.cols() == static_cast<std::size_t>(layout.cols()),
          ErrorCategory::Internal, "extract_interior: shape mismatch");
  const AxisLayout& ax = layout.x;
  const AxisLayout& ay = layout.y;
  Matrix out(ax.N - 1, ay.N - 1);
  for (int n = ax.out_lo(); n <= ax.out_hi(); ++n)
    for (int j = ay.out_lo(); j <= ay.out_hi(); ++j)
      out(n - ax.out_lo(), j - ay.out_lo()) = full(ax.output_index(n), ay.output_index(j));
  return out;
}

Matrix fft_convolve(const KernelSpectrum& kernel, const Matrix& values, FftEngine& engine) {
  require(values.rows() == static_cast<std::size_t>(kernel.layout.rows()) &&
              values.cols() == static_cast<std::size_t>(kernel.layout.cols()) &&
              engine.rows() == kernel.layout.rows() && engine.cols() == kernel.layout.cols(),
          ErrorCategory::Internal, "fft_convolve: shape mismatch");
  Spectrum s = engine.forward(values);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] *= kernel.spectrum[i];
  return engine.inverse(s);
}

Matrix naive_convolve(const OffsetKernel& kernel, const Matrix& phi, const Matrix& v) {
  const int N = kernel.N;
  const int J = kernel.J;
  require(v.rows() == static_cast<std::size_t>(2 * N + 1) &&
              v.cols() == static_cast<std::size_t>(2 * J + 1) && phi.rows() == v.rows() &&
              phi.cols() == v.cols(),
          ErrorCategory::Internal, "naive_convolve: shape mismatch");
  Matrix u(N - 1, J - 1, 0.0);
  for (int n = -N / 2 + 1; n <= N / 2 - 1; ++n) {
    for (int j = -J / 2 + 1; j <= J / 2 - 1; ++j) {
      double sum = 0.0;
      double comp = 0.0;  // Kahan compensation
      for (int l = -N; l <= N; ++l) {
        for (int d = -J; d <= J; ++d) {
          const double term = phi(l + N, d + J) * kernel.at(n - l, j - d) * v(l + N, d + J);
          const double y = term - comp;
          const double t = sum + y;
          comp = (t - sum) - y;
          sum = t;
        }
      }
      u(n + N / 2 - 1, j + J / 2 - 1) = sum;
    }
  }
  return u;
}

}  // namespace mpcci
