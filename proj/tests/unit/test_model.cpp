#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>

#include "mpcci/errors.hpp"
#include "mpcci/model.hpp"
#include "test_support.hpp"

using namespace mpcci;

namespace {

ErrorCategory category_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.category();
  }
  FAIL("expected an mpcci::Error");
  return ErrorCategory::Internal;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("call on max payoff values") {
  const PayoffSpec p = PayoffSpec::call_on_max(40.0);
  CHECK(evaluate_payoff(p, std::log(40.0), std::log(40.0)) == doctest::Approx(0.0));
  CHECK(evaluate_payoff_prices(p, 50.0, 30.0) == doctest::Approx(10.0));
  CHECK(evaluate_payoff_prices(p, 30.0, 50.0) == doctest::Approx(10.0));
  CHECK(evaluate_payoff_prices(p, 10.0, 20.0) == 0.0);
}

TEST_CASE("butterfly payoff values") {
  const PayoffSpec p = PayoffSpec::butterfly(34.0, 46.0);
  CHECK(evaluate_payoff_prices(p, 40.0, 20.0) == doctest::Approx(6.0));
  CHECK(evaluate_payoff_prices(p, 20.0, 40.0) == doctest::Approx(6.0));
  CHECK(evaluate_payoff_prices(p, 30.0, 30.0) == 0.0);
  CHECK(evaluate_payoff_prices(p, 60.0, 10.0) == 0.0);
  CHECK(evaluate_payoff_prices(p, 37.0, 1.0) == doctest::Approx(3.0));
  // Sum identity of the three calls, nonnegative everywhere.
  for (double s = 1.0; s < 100.0; s += 0.37) {
    const double v = evaluate_payoff_prices(p, s, 0.5 * s);
    const double calls =
        std::max(s - 34.0, 0.0) - 2.0 * std::max(s - 40.0, 0.0) + std::max(s - 46.0, 0.0);
    CHECK(v >= 0.0);
    CHECK(v == doctest::Approx(std::max(calls, 0.0)).epsilon(1e-12));
  }
}

TEST_CASE("payoff validation") {
  CHECK(category_of([] { PayoffSpec::call_on_max(0.0); }) == ErrorCategory::Configuration);
  CHECK(category_of([] { PayoffSpec::butterfly(46.0, 34.0); }) == ErrorCategory::Configuration);
  CHECK(category_of([] { PayoffSpec::custom({}); }) == ErrorCategory::Configuration);
  const PayoffSpec c = PayoffSpec::custom([](double x, double y) { return x + y; });
  CHECK(c.name() == "custom");
  CHECK(!payoff_kinks(c).has_value());
  CHECK(evaluate_payoff_prices(c, 1.0, 2.0) == 3.0);
}

TEST_CASE("kink lines of the built-in payoffs") {
  const auto call = payoff_kinks(PayoffSpec::call_on_max(40.0));
  REQUIRE(call.has_value());
  CHECK(call->size() == 3);
  const auto fly = payoff_kinks(PayoffSpec::butterfly(34.0, 46.0));
  REQUIRE(fly.has_value());
  CHECK(fly->size() == 7);
  int diagonal = 0;
  for (const KinkLine& k : *fly)
    if (k.kind == KinkLine::Kind::Diagonal) ++diagonal;
  CHECK(diagonal == 1);
}

TEST_CASE("model spec validation") {
  ModelSpec s = test::table_spec();
  CHECK_NOTHROW(s.validate());
  s.r = 0.0;
  CHECK(category_of([&] { s.validate(); }) == ErrorCategory::Configuration);
  s = test::table_spec();
  s.rho = {-1.2, 0.5};
  CHECK(category_of([&] { s.validate(); }) == ErrorCategory::Configuration);
  s = test::table_spec();
  s.sigma_x = {0.5, 0.3};
  CHECK(category_of([&] { s.validate(); }) == ErrorCategory::Configuration);
  s = test::table_spec();
  s.sigma_y = {0.0, 0.3};
  CHECK(category_of([&] { s.validate(); }) == ErrorCategory::Configuration);
  s = test::table_spec();
  s.sigma_x = {0.5, 0.5};  // a single admissible volatility is allowed
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("objective parsing") {
  CHECK(objective_from_string("worst") == Objective::WorstCase);
  CHECK(objective_from_string("best") == Objective::BestCase);
  CHECK(to_string(Objective::BestCase) == "best");
  CHECK(category_of([] { objective_from_string("median"); }) == ErrorCategory::Configuration);
}

TEST_CASE("control set cardinality is 8q") {
  const ModelSpec s = test::table_spec();
  CHECK(build_control_set(s, 1, 1).size() == 8);
  CHECK(build_control_set(s, 3, 3).size() == 24);
  CHECK(build_control_set(s, 7, 7).size() == 56);
  CHECK(build_control_set(s, 15, 15).size() == 120);
  CHECK(build_control_set(s, 31, 31).size() == 248);
  CHECK(category_of([&] { build_control_set(s, 0, 1); }) == ErrorCategory::Configuration);
}

TEST_CASE("control set lies on the boundary and is lexicographically ordered") {
  const ModelSpec s = test::table_spec();
  const DiscreteControlSet set = build_control_set(s, 7, 5);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const ControlPoint& c = set[i];
    const bool on_edge = c.sigma_x == s.sigma_x.lo || c.sigma_x == s.sigma_x.hi ||
                         c.sigma_y == s.sigma_y.lo || c.sigma_y == s.sigma_y.hi;
    CHECK(on_edge);
    CHECK((c.rho == s.rho.lo || c.rho == s.rho.hi));
    CHECK(s.sigma_x.contains(c.sigma_x));
    CHECK(s.sigma_y.contains(c.sigma_y));
    if (i > 0) CHECK(set[i - 1] < c);
    CHECK(set.index_of(c) == static_cast<int>(i));
  }
  CHECK(set.index_of({0.41, 0.3, 0.3}) == -1);
  CHECK(set.spacing(s) == doctest::Approx(0.2 / 5));
}

TEST_CASE("control set covers the boundary within h") {
  const ModelSpec s = test::table_spec();
  for (int q : {1, 3, 7}) {
    const DiscreteControlSet set = build_control_set(s, q, q);
    const double h = set.spacing(s);
    // Dense sample of the boundary set: one volatility at an end, rho at an end.
    double worst = 0.0;
    for (int i = 0; i <= 400; ++i) {
      const double t = s.sigma_x.lo + s.sigma_x.width() * i / 400.0;
      for (double rho : {s.rho.lo, s.rho.hi}) {
        for (const ControlPoint& a : {ControlPoint{t, s.sigma_y.lo, rho}, ControlPoint{t, s.sigma_y.hi, rho},
                                      ControlPoint{s.sigma_x.lo, t, rho}, ControlPoint{s.sigma_x.hi, t, rho}}) {
          double best = std::numeric_limits<double>::infinity();
          for (const ControlPoint& b : set.points)
            best = std::min(best, std::hypot(a.sigma_x - b.sigma_x, a.sigma_y - b.sigma_y, a.rho - b.rho));
          worst = std::max(worst, best);
        }
      }
    }
    CHECK(worst <= h + 1e-12);
  }
}

TEST_CASE("degenerate volatility interval collapses the control set") {
  ModelSpec s = test::table_spec();
  s.sigma_x = {0.5, 0.5};
  s.sigma_y = {0.5, 0.5};
  s.rho = {-1.0, 1.0};
  const DiscreteControlSet set = build_control_set(s, 7, 7);
  CHECK(set.size() == 2);
  CHECK(set[0].rho == -1.0);
  CHECK(set[1].rho == 1.0);
}

}  // TEST_SUITE
