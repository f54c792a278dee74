#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace mpcci {

// Closed interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const noexcept { return hi - lo; }
  bool contains(double v) const noexcept { return v >= lo && v <= hi; }
};

// Worst case maximises the value over admissible controls (seller's price),
// best case minimises it.
enum class Objective { WorstCase, BestCase };

std::string to_string(Objective o);
Objective objective_from_string(const std::string& s);

// Market parameters and the uncertainty box for (sigma_x, sigma_y, rho).
struct ModelSpec {
  double r = 0.05;
  double T = 0.25;
  double X0 = 40.0;
  double Y0 = 40.0;
  Interval sigma_x{0.3, 0.5};
  Interval sigma_y{0.3, 0.5};
  Interval rho{0.3, 0.5};
  Objective objective = Objective::WorstCase;

  // Throws a configuration error when any invariant is violated. A volatility
  // interval may be a single point (sigma_min == sigma_max).
  void validate() const;
};

// A straight line along which a payoff is not differentiable, expressed in
// log-price coordinates: x = c (Vertical), y = c (Horizontal) or x - y = c
// (Diagonal).
struct KinkLine {
  enum class Kind { Vertical, Horizontal, Diagonal };
  Kind kind = Kind::Vertical;
  double c = 0.0;
  std::string describe() const;
};

struct CallOnMax {
  double K = 40.0;
};

struct Butterfly {
  double K1 = 34.0;
  double K2 = 46.0;
};

// User-supplied payoff on prices (S_x, S_y). Without declared kinks the payoff
// can only be integrated with the trapezoidal rule.
struct CustomPayoff {
  std::function<double(double, double)> fn;
  std::optional<std::vector<KinkLine>> kinks;
  std::string name = "custom";
};

struct PayoffSpec {
  std::variant<CallOnMax, Butterfly, CustomPayoff> variant = CallOnMax{};

  static PayoffSpec call_on_max(double K);
  static PayoffSpec butterfly(double K1, double K2);
  static PayoffSpec custom(std::function<double(double, double)> fn,
                           std::optional<std::vector<KinkLine>> kinks = std::nullopt,
                           std::string name = "custom");

  void validate() const;
  std::string name() const;
};

// Payoff at prices (e^x, e^y) for log-prices (x, y).
double evaluate_payoff(const PayoffSpec& payoff, double x, double y);

// Payoff at prices (S_x, S_y).
double evaluate_payoff_prices(const PayoffSpec& payoff, double sx, double sy);

// Non-differentiability lines of the payoff, or nullopt for custom payoffs
// that declared none.
std::optional<std::vector<KinkLine>> payoff_kinks(const PayoffSpec& payoff);

struct ControlPoint {
  double sigma_x = 0.0;
  double sigma_y = 0.0;
  double rho = 0.0;

  friend bool operator==(const ControlPoint&, const ControlPoint&) = default;
  friend auto operator<=>(const ControlPoint&, const ControlPoint&) = default;
};

// Finite subset of the boundary of the control box: at least one volatility
// sits at an interval endpoint and rho is one of the interval endpoints.
struct DiscreteControlSet {
  std::vector<ControlPoint> points;
  int Qx = 1;
  int Qy = 1;

  std::size_t size() const noexcept { return points.size(); }
  const ControlPoint& operator[](std::size_t i) const { return points[i]; }
  // Lattice spacing h = max(d_sigma_x, d_sigma_y).
  double spacing(const ModelSpec& spec) const;
  // Index of a point, or -1 when absent.
  int index_of(const ControlPoint& p) const;
};

DiscreteControlSet build_control_set(const ModelSpec& spec, int Qx, int Qy);

}  // namespace mpcci
