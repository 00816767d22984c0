#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "helpers.hpp"
#include "oracles.hpp"
#include "relhop/dynamics.hpp"
#include "relhop/error.hpp"
#include "relhop/interpolation.hpp"

using namespace relhop;

namespace {

std::vector<double> unit_grid(int intervals) {
  std::vector<double> g;
  for (int k = 0; k <= intervals; ++k) g.push_back(static_cast<double>(k) / intervals);
  return g;
}

}  // namespace

TEST_SUITE("interpolation") {

TEST_CASE("log partition: worked examples") {
  const double r2 = std::sqrt(2.0);
  for (int sign : {1, -1}) {
    const auto one = PatternSet::from_rows({{sign}});
    for (double beta : {0.0, 0.5, 2.0}) {
      CHECK(exact_log_partition(ModelKind::relativistic(), one, beta) ==
            doctest::Approx(std::numbers::ln2 + r2 * beta).epsilon(1e-14));
      // Classical cost at N = 1 is -1/2 on both states.
      CHECK(exact_log_partition(ModelKind::classical(), one, beta) ==
            doctest::Approx(std::numbers::ln2 + 0.5 * beta).epsilon(1e-14));
    }
  }
  const auto two = PatternSet::from_rows({{1, 1}});
  CHECK(exact_log_partition(ModelKind::relativistic(), two, 1.0) ==
        doctest::Approx(std::log(2.0 * std::exp(2.0 * r2) + 2.0 * std::exp(2.0))).epsilon(1e-14));
}

TEST_CASE("log partition matches brute force") {
  for (const auto& kind : {ModelKind::classical(), ModelKind::relativistic(), ModelKind::truncated(4)}) {
    for (std::size_t p : {1u, 2u, 3u}) {
      const auto rows = oracle::random_rows(p, 9, 100 + p);
      const auto ps = PatternSet::from_rows(rows);
      if (kind.family() == ModelKind::Family::Truncated) {
        // Compare against the definition through the overlap-form energy.
        double z = 0.0;
        for (std::uint64_t c = 0; c < 512; ++c)
          z += std::exp(-1.3 * oracle::energy(oracle::Kind::Truncated, rows, oracle::configuration(9, c), 4));
        CHECK(exact_log_partition(kind, ps, 1.3) == doctest::Approx(std::log(z)).epsilon(1e-12));
      } else {
        CHECK(exact_log_partition(kind, ps, 1.3) ==
              doctest::Approx(oracle::log_partition(testing::oracle_kind(kind), rows, 1.3)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("log partition limits") {
  const auto big = sample_patterns(1, 25, 1);
  CHECK_THROWS_AS(exact_log_partition(ModelKind::relativistic(), big, 1.0), InputError);
  const auto ps = sample_patterns(2, 6, 1);
  CHECK_THROWS_AS(exact_log_partition(ModelKind::relativistic(), ps, -1.0), InputError);
}

TEST_CASE("quenched free energy") {
  const auto one = quenched_free_energy(ModelKind::relativistic(), 1, 1, 0.8, 10, 3, 1);
  CHECK(one.value == doctest::Approx(std::numbers::ln2 + std::sqrt(2.0) * 0.8).epsilon(1e-14));
  CHECK(one.standard_error == 0.0);
  for (const auto& kind : testing::all_kinds()) {
    const auto zero = quenched_free_energy(kind, 7, 2, 0.0, 5, 3, 1);
    CHECK(zero.value == doctest::Approx(std::numbers::ln2).epsilon(1e-14));
  }
  // One pattern: alpha_N does not depend on the draw.
  for (std::size_t n : {4u, 8u, 12u}) {
    const auto e = quenched_free_energy(ModelKind::relativistic(), n, 1, 2.0, 4, 9, 1);
    CHECK(e.value == doctest::Approx(oracle::relativistic_single_pattern_alpha(n, 2.0)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(quenched_free_energy(ModelKind::relativistic(), 4, 1, 1.0, 0, 1), InputError);
}

TEST_CASE("split spec") {
  const SplitSpec s(10, 3);
  CHECK(s.n2() == 7);
  CHECK(s.rho1() + s.rho2() == 1.0);
  CHECK_THROWS_AS(SplitSpec(10, 0), InputError);
  CHECK_THROWS_AS(SplitSpec(10, 10), InputError);
  CHECK_THROWS_AS(SplitSpec(1, 1), InputError);
}

TEST_CASE("interpolating free energy endpoints") {
  for (std::size_t p : {1u, 2u}) {
    const auto rows = oracle::random_rows(p, 8, 40 + p);
    const auto ps = PatternSet::from_rows(rows);
    for (std::size_t n1 : {1u, 3u, 4u, 7u}) {
      const SplitSpec split(8, n1);
      CHECK(std::abs(interpolating_alpha(ps, split, 1.0) -
                     oracle::log_partition(oracle::Kind::Relativistic, rows, 1.0) / 8.0) <= 1e-12);
      const double parts =
          (oracle::log_partition(oracle::Kind::Relativistic, oracle::restrict(rows, 0, n1), 1.0) +
           oracle::log_partition(oracle::Kind::Relativistic, oracle::restrict(rows, n1, 8 - n1), 1.0)) /
          8.0;
      CHECK(std::abs(interpolating_alpha(ps, split, 0.0) - parts) <= 1e-12);
    }
  }
}

TEST_CASE("interpolating free energy at mid t lies between the endpoints") {
  const auto ps = PatternSet::from_rows(oracle::random_rows(1, 6, 77));
  const SplitSpec split(6, 3);
  const double a0 = interpolating_alpha(ps, split, 0.0);
  const double a1 = interpolating_alpha(ps, split, 1.0);
  const double mid = interpolating_alpha(ps, split, 0.5);
  CHECK(mid <= a0);
  CHECK(mid >= a1);
}

TEST_CASE("interpolation derivative matches a finite difference") {
  const auto ps = PatternSet::from_rows(oracle::random_rows(2, 10, 5));
  const SplitSpec split(10, 4);
  const double h = 1e-5;
  for (double t : {0.2, 0.5, 0.8}) {
    const double fd = (interpolating_alpha(ps, split, t + h) - interpolating_alpha(ps, split, t - h)) / (2 * h);
    CHECK(interpolating_alpha_derivative(ps, split, t) == doctest::Approx(fd).epsilon(1e-6));
    CHECK(interpolating_alpha_derivative(ps, split, t) <= 0.0);
  }
  CHECK_THROWS_AS(interpolating_alpha(ps, split, 1.1), InputError);
  CHECK_THROWS_AS(interpolating_alpha(sample_patterns(1, 21, 1), SplitSpec(21, 10), 0.5), InputError);
}

TEST_CASE("t monotonicity checks") {
  const auto grid = unit_grid(20);
  const auto a = check_t_monotonicity(8, 4, 1, grid, 50, 1, 1.0, 1);
  CHECK(a.monotone);
  CHECK(a.samples == 50);
  CHECK(a.slack == doctest::Approx(8e-8));
  CHECK(a.alpha_t.size() == grid.size());
  CHECK(a.derivative_estimates.size() == grid.size());
  CHECK(check_t_monotonicity(10, 3, 2, grid, 50, 2, 1.0, 1).monotone);
  CHECK(check_t_monotonicity(6, 5, 1, grid, 20, 3, 1.0, 1).monotone);
  const std::vector<double> short_grid{0.0, 1.0};
  CHECK_THROWS_AS(check_t_monotonicity(6, 3, 1, short_grid, 2, 1), InputError);
  const std::vector<double> unordered{0.0, 0.6, 0.5};
  CHECK_THROWS_AS(check_t_monotonicity(6, 3, 1, unordered, 2, 1), InputError);
}

TEST_CASE("sub-additivity: worked example and equality case") {
  const double r2 = std::sqrt(2.0);
  const double lhs = std::log(2.0 * std::exp(2.0 * r2) + 2.0 * std::exp(2.0));
  const double rhs = 2.0 * std::log(2.0 * std::exp(r2));
  CHECK(lhs - rhs < 0.0);
  const auto r = check_subadditivity(ModelKind::relativistic(), 2, 1, 1.0, 1, 0, 1);
  REQUIRE(r.margins.size() == 1);
  CHECK(r.margins[0] == doctest::Approx(lhs - rhs).epsilon(1e-13));

  const auto flat = check_subadditivity(ModelKind::relativistic(), 7, 2, 0.0, 3, 4, 1);
  CHECK(flat.margins.size() == 3 * 6);
  for (double m : flat.margins) CHECK(std::abs(m) <= 1e-12);
  CHECK(flat.all_nonpositive);
}

TEST_CASE("sub-additivity holds per sample") {
  const auto r = check_subadditivity(ModelKind::relativistic(), 10, 2, 1.0, 30, 8, 1);
  CHECK(r.all_nonpositive);
  CHECK(r.max_margin <= kSubadditivitySlack);
  CHECK(r.margins.size() == 30 * 9);
  CHECK(r.worst_split >= 1);
  CHECK(r.worst_split <= 9);
}

TEST_CASE("convexity of sqrt(1 + x^2)") {
  const std::vector<double> a{0.3, -0.2};
  CHECK(convexity_gap(a, a, 0.37) == doctest::Approx(0.0).epsilon(1e-15));
  const std::vector<double> plus{1.0};
  const std::vector<double> minus{-1.0};
  CHECK(convexity_gap(plus, minus, 0.5) == doctest::Approx(1.0 - std::sqrt(2.0)).epsilon(1e-15));
  for (std::size_t p : {1u, 2u}) {
    const auto r = check_sqrt_convexity(20, p, 1);
    CHECK(r.max_violation <= kConvexitySlack);
    CHECK(r.worst_m1.size() == p);
  }
  CHECK_THROWS_AS(check_sqrt_convexity(10, 4), InputError);
  CHECK_THROWS_AS(check_sqrt_convexity(1, 1), InputError);
}

TEST_CASE("interpolated fluctuation law") {
  DynamicsConfig c;
  c.seed = 5;
  const std::vector<double> ts{0.0, 0.5, 1.0};
  const auto exact = check_fluctuation_interpolation(12, 1, 0.5, ts, 1, c, 1);
  REQUIRE(exact.size() == 3);
  CHECK(exact[0].exact);
  CHECK(exact[0].value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(exact[1].theory == doctest::Approx(4.0 / 3.0));
  CHECK(exact[2].theory == doctest::Approx(2.0));
  // Finite N: the t-weight raises the fluctuation monotonically in t.
  CHECK(exact[1].value > exact[0].value);
  CHECK(exact[2].value > exact[1].value);

  c.init = RandomInit{};
  c.equilibration_sweeps = 100;
  c.measurement_sweeps = 2000;
  const std::vector<double> mid{0.5, 1.0};
  const auto mc = check_fluctuation_interpolation(1000, 1, 0.5, mid, 10, c, 1);
  CHECK_FALSE(mc[0].exact);
  CHECK(std::abs(mc[0].value - 4.0 / 3.0) <= 0.15 * 4.0 / 3.0);
  CHECK(std::abs(mc[1].value - 2.0) <= 0.3);
  CHECK_THROWS_AS(check_fluctuation_interpolation(8, 1, 1.0, ts, 1, c), DomainError);
}

}  // TEST_SUITE
