#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "helpers.hpp"
#include "oracles.hpp"
#include "relhop/error.hpp"
#include "relhop/model.hpp"

using namespace relhop;
using testing::spins;

TEST_SUITE("model") {

TEST_CASE("pattern set construction and validation") {
  const auto ps = PatternSet::from_rows({{1, 1, -1, -1}, {1, -1, 1, -1}});
  CHECK(ps.pattern_count() == 2);
  CHECK(ps.site_count() == 4);
  CHECK(ps.at(0, 2) == -1);
  CHECK(ps.at(1, 1) == -1);
  CHECK(ps.site(3)[0] == -1);
  CHECK(ps.site(3)[1] == -1);
  CHECK(testing::ints(ps.pattern(1)) == std::vector<int>{1, -1, 1, -1});

  CHECK_THROWS_AS(PatternSet::from_rows({{1, 0, 1}}), InputError);
  CHECK_THROWS_AS(PatternSet::from_rows({{1, 1}, {1, -1}, {-1, 1}}), InputError);  // P > N
  CHECK_THROWS_AS(PatternSet::from_rows({{1, 1, 1}, {1, 1}}), InputError);
  CHECK_THROWS_AS(PatternSet::from_rows({}), InputError);
  const std::vector<Spin> flat{1, -1, 1, 1};
  CHECK_THROWS_AS(PatternSet(0, 4, flat), InputError);
  CHECK_THROWS_AS(PatternSet(1, 3, flat), InputError);
  CHECK_NOTHROW(PatternSet(1, 4, flat));
}

TEST_CASE("pattern views restrict to contiguous sites") {
  const auto ps = PatternSet::from_rows({{1, 1, -1, -1, 1}, {1, -1, 1, -1, -1}});
  const auto v = ps.view().sites(2, 3);
  CHECK(v.site_count() == 3);
  CHECK(v.pattern_count() == 2);
  CHECK(v.at(0, 0) == -1);
  CHECK(v.at(1, 2) == -1);
  CHECK_THROWS_AS(ps.view().sites(3, 3), InputError);
}

TEST_CASE("pattern permutation") {
  const auto ps = PatternSet::from_rows({{1, 1, -1}, {1, -1, 1}, {-1, 1, 1}});
  const std::vector<std::size_t> perm{2, 0, 1};
  const auto q = ps.permuted(perm);
  CHECK(q.pattern(0) == ps.pattern(2));
  CHECK(q.pattern(1) == ps.pattern(0));
  const std::vector<std::size_t> bad{0, 0, 5};
  CHECK_THROWS_AS(ps.permuted(bad), InputError);
}

TEST_CASE("overlap vector range") {
  CHECK_NOTHROW(OverlapVector({1.0, -1.0, 0.0}));
  CHECK_THROWS_AS(OverlapVector({1.0000001}), InputError);
  CHECK_THROWS_AS(OverlapVector({std::nan("")}), InputError);
  CHECK(OverlapVector({0.6, 0.8}).norm() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("model kinds") {
  CHECK(ModelKind::parse("classical") == ModelKind::classical());
  CHECK(ModelKind::parse("relativistic") == ModelKind::relativistic());
  CHECK(ModelKind::parse("truncated:4") == ModelKind::truncated(4));
  CHECK(ModelKind::truncated(6).name() == "truncated:6");
  CHECK_THROWS_AS(ModelKind::truncated(3), InputError);
  CHECK_THROWS_AS(ModelKind::truncated(0), InputError);
  CHECK_THROWS_AS(ModelKind::parse("truncated:x"), InputError);
  CHECK_THROWS_AS(ModelKind::parse("quantum"), InputError);
}

TEST_CASE("mattis overlaps: worked examples") {
  const auto p1 = PatternSet::from_rows({{1, 1, -1, -1}});
  CHECK(mattis_overlaps(spins({1, 1, -1, -1}), p1)[0] == 1.0);
  CHECK(mattis_overlaps(spins({1, -1, 1, -1}), p1)[0] == 0.0);
  const auto p2 = PatternSet::from_rows({{1, 1}, {1, -1}});
  const auto m = mattis_overlaps(spins({1, 1}), p2);
  CHECK(m[0] == 1.0);
  CHECK(m[1] == 0.0);
  CHECK_THROWS_AS(mattis_overlaps(spins({1, 1, 1}), p2), InputError);
}

TEST_CASE("energies: worked examples") {
  const auto p1 = PatternSet::from_rows({{1, 1, -1, -1}});
  const SpinState aligned(spins({1, 1, -1, -1}), p1);
  const SpinState orthogonal(spins({1, -1, 1, -1}), p1);
  CHECK(energy(ModelKind::relativistic(), orthogonal, p1) == -4.0);
  CHECK(energy(ModelKind::relativistic(), aligned, p1) == doctest::Approx(-4.0 * std::sqrt(2.0)).epsilon(1e-15));
  // Classical cost is -(N/2) ||m||^2.
  CHECK(energy(ModelKind::classical(), aligned, p1) == -2.0);
  CHECK(energy(ModelKind::classical(), orthogonal, p1) == 0.0);

  CHECK(energy_from_overlaps(ModelKind::relativistic(), OverlapVector({0.0, 0.0, 0.0}), 400) == -400.0);
  CHECK(energy_from_overlaps(ModelKind::relativistic(), OverlapVector({1.0}), 10) ==
        doctest::Approx(-14.142135623730950).epsilon(1e-14));
  CHECK(energy_from_overlaps(ModelKind::truncated(2), OverlapVector({0.2}), 100) ==
        doctest::Approx(-102.0).epsilon(1e-14));
  CHECK(energy_from_overlaps(ModelKind::truncated(4), OverlapVector({0.2}), 100) ==
        doctest::Approx(-100.0 * (1.0 + 0.02 - 0.0002)).epsilon(1e-14));
}

TEST_CASE("truncated(2) differs from classical by the constant -N") {
  for (double x : {0.0, 0.1, 0.5, 1.0, 2.5})
    CHECK(energy_density(ModelKind::truncated(2), x) - energy_density(ModelKind::classical(), x) ==
          doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("energy density matches the definitions") {
  for (double x : {0.0, 0.01, 0.3, 1.0, 3.0}) {
    const std::vector<double> m{std::sqrt(x)};
    CHECK(energy_density(ModelKind::classical(), x) == doctest::Approx(oracle::energy_density(oracle::Kind::Classical, m)));
    CHECK(energy_density(ModelKind::relativistic(), x) ==
          doctest::Approx(oracle::energy_density(oracle::Kind::Relativistic, m)));
    for (int k : {2, 4, 6, 8})
      CHECK(energy_density(ModelKind::truncated(k), x) ==
            doctest::Approx(oracle::energy_density(oracle::Kind::Truncated, m, k)).epsilon(1e-14));
  }
}

TEST_CASE("energy density change is accurate for tiny steps") {
  const double x = 0.7;
  const double dx = 1e-9;
  const double exact = -dx / (std::sqrt(1 + x + dx) + std::sqrt(1 + x));
  CHECK(energy_density_change(ModelKind::relativistic(), x, x + dx) == doctest::Approx(exact).epsilon(1e-12));
  CHECK(energy_density_change(ModelKind::classical(), x, x + dx) == doctest::Approx(-0.5 * dx).epsilon(1e-12));
}

TEST_CASE("delta energy: worked examples") {
  const auto ps = PatternSet::from_rows({{1, 1}});
  const SpinState s(spins({1, 1}), ps);
  CHECK(delta_energy(ModelKind::relativistic(), s, ps, 0) ==
        doctest::Approx(2.0 * std::sqrt(2.0) - 2.0).epsilon(1e-14));
  CHECK(delta_energy(ModelKind::classical(), s, ps, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(delta_energy(ModelKind::classical(), s, ps, 2), InputError);
}

TEST_CASE("flips update the overlap cache") {
  const auto ps = PatternSet::from_rows({{1, 1, -1, -1}});
  SpinState s(spins({1, 1, -1, -1}), ps);
  const SpinState original = s;
  s.flip(3, ps);
  CHECK(s.overlap(0) == 0.5);
  CHECK(s.overlap_sums()[0] == 2);
  s.flip(3, ps);
  CHECK(s == original);
  CHECK_THROWS_AS(s.flip(4, ps), InputError);
  const auto other = PatternSet::from_rows({{1, 1, 1, 1, 1}});
  CHECK_THROWS_AS(s.flip(0, other), InputError);
}

TEST_CASE("spin state validation and aligned states") {
  const auto ps = PatternSet::from_rows({{1, -1, 1}, {1, 1, -1}});
  CHECK_THROWS_AS(SpinState(spins({1, 1}), ps), InputError);
  CHECK_THROWS_AS(SpinState(spins({1, 0, 1}), ps), InputError);
  const auto s = SpinState::aligned(ps, 1, -1);
  CHECK(s.overlap(1) == -1.0);
  CHECK(s.overlap(0) == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(SpinState::aligned(ps, 2), InputError);
}

TEST_CASE("overlaps are multiples of 2/N") {
  Rng rng(11);
  const auto ps = PatternSet::from_rows(oracle::random_rows(3, 37, 5));
  for (int trial = 0; trial < 50; ++trial) {
    const SpinState s(spins(testing::random_spins(37, rng)), ps);
    for (double m : s.overlaps()) {
      const double k = m * 37.0 / 2.0 + 37.0 / 2.0;
      CHECK(k == doctest::Approx(std::round(k)).epsilon(1e-12));
    }
  }
}

TEST_CASE("pattern files round trip") {
  const auto ps = PatternSet::from_rows({{1, -1, -1, 1, 1}, {-1, -1, 1, 1, -1}});
  std::stringstream buffer;
  write_patterns(buffer, ps, 12345);
  CHECK(buffer.str() == "2 5 12345\n+--++\n--++-\n");
  const auto back = read_patterns(buffer);
  CHECK(back.patterns == ps);
  CHECK(back.seed == 12345);

  std::stringstream bad("1 3 0\n+x-\n");
  CHECK_THROWS_AS(read_patterns(bad), InputError);
  std::stringstream short_file("2 3 0\n+--\n");
  CHECK_THROWS_AS(read_patterns(short_file), InputError);
  std::stringstream no_header("");
  CHECK_THROWS_AS(read_patterns(no_header), InputError);
}

}  // TEST_SUITE
