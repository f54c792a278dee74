#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mpcci/domain.hpp"
#include "mpcci/errors.hpp"
#include "test_support.hpp"

using namespace mpcci;

TEST_SUITE("domain") {

TEST_CASE("refinement levels") {
  const RefinementLevel l0 = RefinementLevel::at(0);
  CHECK(l0.N == 128);
  CHECK(l0.M == 50);
  CHECK(l0.Qx == 1);
  const RefinementLevel l2 = RefinementLevel::at(2);
  CHECK(l2.N == 512);
  CHECK(l2.J == 512);
  CHECK(l2.M == 200);
  CHECK(l2.Qy == 7);
  CHECK(RefinementLevel::at(4).Qx == 31);
  CHECK_THROWS_AS(RefinementLevel::at(-1), Error);
}

TEST_CASE("grid arithmetic and tiers") {
  const ModelSpec s = test::table_spec();
  const GridSpec g = build_grid(s, 1.2, 4, 4, 50);
  CHECK(g.dx == doctest::Approx(0.6));
  CHECK(g.dtau == doctest::Approx(0.005));
  CHECK(g.x(0) == std::log(40.0));
  CHECK(g.y(0) == std::log(40.0));
  for (int n = -6; n <= 6; ++n) CHECK(g.x(n) == doctest::Approx(std::log(40.0) + 0.6 * n));
  CHECK(g.x_max_ext() == doctest::Approx(std::log(40.0) + 2.4));
  CHECK(g.x_max_off() - g.x_hat0 == doctest::Approx(3.6));
  // The extended tier extends the base interval by half its width on each side.
  CHECK(g.x_max_ext() == doctest::Approx(g.x_max() + (g.x_max() - g.x_min()) / 2));
  CHECK(g.ext_rows() == 9);
  CHECK(g.int_rows() == 3);
  CHECK(g.is_interior(1, -1));
  CHECK(!g.is_interior(2, 0));
  // Centres of all tiers coincide.
  CHECK((g.x_min() + g.x_max()) / 2 == doctest::Approx(g.x_hat0));
  CHECK((g.x_min_ext() + g.x_max_ext()) / 2 == doctest::Approx(g.x_hat0));
  CHECK((g.x_min_off() + g.x_max_off()) / 2 == doctest::Approx(g.x_hat0));
}

TEST_CASE("level 0 grid") {
  const ModelSpec s = test::table_spec();
  const GridSpec g = build_grid(s, 1.2, 128, 128, 50);
  CHECK(g.dtau == doctest::Approx(0.005));
  CHECK(g.dx == doctest::Approx(2.4 / 128));
}

TEST_CASE("grid preconditions") {
  const ModelSpec s = test::table_spec();
  CHECK_THROWS_AS(build_grid(s, 1.2, 2, 4, 1), Error);
  CHECK_THROWS_AS(build_grid(s, 1.2, 6, 5, 1), Error);
  CHECK_THROWS_AS(build_grid(s, 1.2, 8, 8, 0), Error);
  CHECK_THROWS_AS(build_grid(s, 0.0, 8, 8, 1), Error);
}

TEST_CASE("tail threshold solves the bound") {
  const double b = truncation_threshold(1e-10, 0.5);
  const double pref = std::pow(1.5, 1.5) / (std::numbers::pi * std::sqrt(0.5));
  CHECK(pref * std::exp(-0.5 * b * b) / (b * b) == doctest::Approx(1e-10).epsilon(1e-6));
  CHECK(truncation_threshold(1e-2, 0.5) < b);
  CHECK(truncation_threshold(1e-10, 0.9) > b);
}

TEST_CASE("truncation half-width is monotone in epsilon and rho") {
  ModelSpec s = test::table_spec();
  for (double dtau : {0.005, 0.0025, 0.25}) {
    CHECK(truncation_half_width(1e-2, s, dtau) <= truncation_half_width(1e-10, s, dtau));
    ModelSpec t = s;
    t.rho.hi = 0.9;
    CHECK(truncation_half_width(1e-10, s, dtau) <= truncation_half_width(1e-10, t, dtau));
  }
  // Rounded to one decimal.
  const double w = truncation_half_width(1e-10, s, 0.25);
  CHECK(std::abs(w * 10 - std::round(w * 10)) < 1e-9);
}

TEST_CASE("truncation half-width for the experiment parameters") {
  const ModelSpec s = test::table_spec();
  // b ~ 6.19 for rho_max = 0.5; w = b kappa + |mu| with sigma = 0.5.
  const double b = truncation_threshold(1e-10, 0.5);
  CHECK(b == doctest::Approx(6.19).epsilon(1e-3));
  CHECK(truncation_half_width(1e-10, s, 0.005) == doctest::Approx(0.3));
  CHECK(truncation_half_width(1e-10, s, 0.25) == doctest::Approx(1.6));
  // The half-width 1.2 used by the experiments satisfies the bound for the
  // timesteps of levels 0-4; a single step over the whole maturity needs 1.6.
  for (double dtau : {0.25 / 800, 0.25 / 400, 0.005}) CHECK(truncation_half_width(1e-10, s, dtau) <= 1.2);
  CHECK(truncation_half_width(1e-10, s, 0.25) > 1.2);
}

TEST_CASE("truncation half-width rejects degenerate correlation bounds") {
  ModelSpec s = test::table_spec();
  s.rho = {-1.0, 1.0};
  try {
    truncation_half_width(1e-10, s, 0.005);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::DegenerateBound);
  }
  CHECK_THROWS_AS(truncation_half_width(0.0, test::table_spec(), 0.005), Error);
  CHECK_THROWS_AS(truncation_half_width(1.0, test::table_spec(), 0.005), Error);
}

}  // TEST_SUITE
