#include "mpcci/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "mpcci/errors.hpp"

namespace mpcci {

namespace {

void check_interval(const Interval& iv, const char* name, double lo_bound, double hi_bound,
                    bool strictly_positive) {
  std::ostringstream msg;
  if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi)) {
    msg << name << " interval must be finite";
    fail(ErrorCategory::Configuration, msg.str());
  }
  if (iv.lo > iv.hi) {
    msg << name << " interval has lo > hi (" << iv.lo << " > " << iv.hi << ")";
    fail(ErrorCategory::Configuration, msg.str());
  }
  if (strictly_positive && iv.lo <= 0.0) {
    msg << name << " interval must be strictly positive";
    fail(ErrorCategory::Configuration, msg.str());
  }
  if (iv.lo < lo_bound || iv.hi > hi_bound) {
    msg << name << " interval must lie within [" << lo_bound << ", " << hi_bound << "]";
    fail(ErrorCategory::Configuration, msg.str());
  }
}

// Evenly spaced points lo + (hi - lo) * i / q, with both endpoints exact.
std::vector<double> lattice(const Interval& iv, int q) {
  std::vector<double> v(static_cast<std::size_t>(q) + 1);
  for (int i = 0; i <= q; ++i) v[i] = iv.lo + iv.width() * static_cast<double>(i) / q;
  v.front() = iv.lo;
  v.back() = iv.hi;
  return v;
}

}  // namespace

std::string to_string(Objective o) {
  return o == Objective::WorstCase ? "worst" : "best";
}

Objective objective_from_string(const std::string& s) {
  if (s == "worst" || s == "WorstCase" || s == "sup" || s == "max") return Objective::WorstCase;
  if (s == "best" || s == "BestCase" || s == "inf" || s == "min") return Objective::BestCase;
  fail(ErrorCategory::Configuration, "unknown objective '" + s + "' (expected worst|best)");
}

void ModelSpec::validate() const {
  if (!(r > 0.0) || !std::isfinite(r)) fail(ErrorCategory::Configuration, "r must be > 0");
  if (!(T > 0.0) || !std::isfinite(T)) fail(ErrorCategory::Configuration, "T must be > 0");
  if (!(X0 > 0.0) || !(Y0 > 0.0) || !std::isfinite(X0) || !std::isfinite(Y0))
    fail(ErrorCategory::Configuration, "initial prices must be > 0");
  check_interval(sigma_x, "sigma_x", 0.0, 1e6, true);
  check_interval(sigma_y, "sigma_y", 0.0, 1e6, true);
  check_interval(rho, "rho", -1.0, 1.0, false);
}

std::string KinkLine::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Vertical: os << "x = " << c; break;
    case Kind::Horizontal: os << "y = " << c; break;
    case Kind::Diagonal: os << "x - y = " << c; break;
  }
  return os.str();
}

PayoffSpec PayoffSpec::call_on_max(double K) {
  PayoffSpec p;
  p.variant = CallOnMax{K};
  p.validate();
  return p;
}

PayoffSpec PayoffSpec::butterfly(double K1, double K2) {
  PayoffSpec p;
  p.variant = Butterfly{K1, K2};
  p.validate();
  return p;
}

PayoffSpec PayoffSpec::custom(std::function<double(double, double)> fn,
                              std::optional<std::vector<KinkLine>> kinks, std::string name) {
  PayoffSpec p;
  p.variant = CustomPayoff{std::move(fn), std::move(kinks), std::move(name)};
  p.validate();
  return p;
}

void PayoffSpec::validate() const {
  if (const auto* c = std::get_if<CallOnMax>(&variant)) {
    require(c->K > 0.0 && std::isfinite(c->K), ErrorCategory::Configuration, "strike must be > 0");
  } else if (const auto* b = std::get_if<Butterfly>(&variant)) {
    require(b->K1 > 0.0 && b->K2 > 0.0 && std::isfinite(b->K2), ErrorCategory::Configuration,
            "strikes must be > 0");
    require(b->K1 < b->K2, ErrorCategory::Configuration, "butterfly requires K1 < K2");
  } else {
    const auto& c = std::get<CustomPayoff>(variant);
    require(static_cast<bool>(c.fn), ErrorCategory::Configuration, "custom payoff has no callable");
  }
}

std::string PayoffSpec::name() const {
  if (std::holds_alternative<CallOnMax>(variant)) return "call_on_max";
  if (std::holds_alternative<Butterfly>(variant)) return "butterfly";
  return std::get<CustomPayoff>(variant).name;
}

double evaluate_payoff_prices(const PayoffSpec& payoff, double sx, double sy) {
  const double m = std::max(sx, sy);
  if (const auto* c = std::get_if<CallOnMax>(&payoff.variant)) {
    return std::max(m - c->K, 0.0);
  }
  if (const auto* b = std::get_if<Butterfly>(&payoff.variant)) {
    const double mid = 0.5 * (b->K1 + b->K2);
    // The combination is nonnegative mathematically; clamp rounding residue.
    const double v =
        std::max(m - b->K1, 0.0) - 2.0 * std::max(m - mid, 0.0) + std::max(m - b->K2, 0.0);
    return std::max(v, 0.0);
  }
  return std::get<CustomPayoff>(payoff.variant).fn(sx, sy);
}

double evaluate_payoff(const PayoffSpec& payoff, double x, double y) {
  return evaluate_payoff_prices(payoff, std::exp(x), std::exp(y));
}

std::optional<std::vector<KinkLine>> payoff_kinks(const PayoffSpec& payoff) {
  using K = KinkLine::Kind;
  std::vector<double> strikes;
  if (const auto* c = std::get_if<CallOnMax>(&payoff.variant)) {
    strikes = {c->K};
  } else if (const auto* b = std::get_if<Butterfly>(&payoff.variant)) {
    strikes = {b->K1, 0.5 * (b->K1 + b->K2), b->K2};
  } else {
    return std::get<CustomPayoff>(payoff.variant).kinks;
  }
  std::vector<KinkLine> lines;
  for (double s : strikes) lines.push_back({K::Vertical, std::log(s)});
  for (double s : strikes) lines.push_back({K::Horizontal, std::log(s)});
  lines.push_back({K::Diagonal, 0.0});
  return lines;
}

double DiscreteControlSet::spacing(const ModelSpec& spec) const {
  return std::max(spec.sigma_x.width() / Qx, spec.sigma_y.width() / Qy);
}

int DiscreteControlSet::index_of(const ControlPoint& p) const {
  auto it = std::find(points.begin(), points.end(), p);
  return it == points.end() ? -1 : static_cast<int>(it - points.begin());
}

DiscreteControlSet build_control_set(const ModelSpec& spec, int Qx, int Qy) {
  spec.validate();
  require(Qx >= 1 && Qy >= 1, ErrorCategory::Configuration, "Qx and Qy must be >= 1");
  const auto gx = lattice(spec.sigma_x, Qx);
  const auto gy = lattice(spec.sigma_y, Qy);
  const double rhos[2] = {spec.rho.lo, spec.rho.hi};

  // std::set both removes the duplicated corners and yields the
  // lexicographic (sigma_x, sigma_y, rho) order.
  std::set<ControlPoint> pts;
  for (double rho : rhos) {
    for (double sx : {spec.sigma_x.lo, spec.sigma_x.hi})
      for (double sy : gy) pts.insert({sx, sy, rho});
    for (double sx : gx)
      for (double sy : {spec.sigma_y.lo, spec.sigma_y.hi}) pts.insert({sx, sy, rho});
  }
  DiscreteControlSet set;
  set.points.assign(pts.begin(), pts.end());
  set.Qx = Qx;
  set.Qy = Qy;
  return set;
}

}  // namespace mpcci
