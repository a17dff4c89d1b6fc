#include <numeric>
#include <random>

#include "doctest.h"
#include "magband/hofstadter.hpp"
#include "oracles.hpp"

using namespace magband;

TEST_CASE("rational_flux reduces and normalizes") {
  CHECK(rational_flux(2, 6) == RationalFlux{1, 3});
  CHECK(rational_flux(0, 5) == RationalFlux{0, 1});
  CHECK(rational_flux(4, 3) == RationalFlux{1, 3});
  CHECK(rational_flux(-1, 3) == RationalFlux{2, 3});
  CHECK(rational_flux(1, -3) == RationalFlux{2, 3});
  CHECK_THROWS_AS(rational_flux(1, 0), std::invalid_argument);
}

TEST_CASE("hofstadter_matrix closed-form entries") {
  const CMatrix h = hofstadter_matrix(rational_flux(1, 3), {0.0, 0.0});
  CMatrix expected(3, 3);
  expected << 2, 1, 1, 1, -1, 1, 1, 1, -1;
  CHECK((h - expected).norm() < 1e-14);

  for (Vec2 k : {Vec2{0.3, -1.2}, Vec2{2.0, 0.7}}) {
    const CMatrix h0 = hofstadter_matrix(rational_flux(0, 1), k);
    REQUIRE(h0.rows() == 1);
    CHECK(h0(0, 0).real() == doctest::Approx(2 * std::cos(k.x) + 2 * std::cos(k.y)));
  }

  const CMatrix h2 = hofstadter_matrix(rational_flux(1, 2), {M_PI / 4, M_PI / 3});
  CHECK(std::abs(h2(0, 1) - (1.0 + std::polar(1.0, M_PI / 2))) < 1e-14);
  CHECK(h2(0, 0).real() == doctest::Approx(1.0));
  CHECK(h2(1, 1).real() == doctest::Approx(-1.0));
}

TEST_CASE("hofstadter_matrix equals the sum of dual magnetic translations") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int q = 1; q <= 9; ++q) {
    for (int p = 0; p < q; ++p) {
      if (std::gcd(p, q) != 1) continue;
      for (int s = 0; s < 5; ++s) {
        const Vec2 k{u(rng), u(rng)};
        CHECK((hofstadter_matrix({p, q}, k) - oracle::hofstadter_from_translations(p, q, k)).norm() < 1e-12);
      }
    }
  }
}

TEST_CASE("hermiticity and periodicity over random samples") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::uniform_int_distribution<int> qd(1, 12);
  double worst_herm = 0.0, worst_period = 0.0;
  for (int s = 0; s < 1000000; ++s) {
    const int q = qd(rng);
    const RationalFlux f = rational_flux(std::uniform_int_distribution<int>(0, q - 1)(rng), q);
    const Vec2 k{u(rng), u(rng)};
    const CMatrix h = hofstadter_matrix(f, k);
    worst_herm = std::max(worst_herm, hermiticity_defect(h));
    if (s % 100 == 0) {
      const double d1 = (hofstadter_matrix(f, {k.x + 2 * M_PI / f.q, k.y}) - h).norm();
      const double d2 = (hofstadter_matrix(f, {k.x, k.y + 2 * M_PI}) - h).norm();
      worst_period = std::max({worst_period, d1, d2});
    }
  }
  CHECK(worst_herm <= 1e-12);
  CHECK(worst_period <= 1e-12);
}

TEST_CASE("band_structure") {
  const BlochMatrixFamily f0 = hofstadter_family({0, 1});
  const BandStructure b0 = band_structure(f0, make_grid(f0.period1, f0.period2, 64, 64), false);
  CHECK(b0.bands() == 1);
  for (const RVector& e : b0.energies) CHECK(std::abs(e(0)) <= 4.0);

  const BlochMatrixFamily f2 = hofstadter_family({1, 2});
  const BandStructure b2 = band_structure(f2, make_grid(f2.period1, f2.period2, 16, 16), true);
  for (const RVector& e : b2.energies) CHECK(std::abs(e(0) + e(1)) < 1e-12);
  CHECK(b2.vectors.size() == b2.energies.size());

  const BlochMatrixFamily f3 = hofstadter_family({1, 3});
  const BandStructure b3 = band_structure(f3, make_grid(f3.period1, f3.period2, 5, 7), false);
  CHECK(b3.bands() == 3);
  for (const RVector& e : b3.energies) {
    CHECK(e(0) <= e(1));
    CHECK(e(1) <= e(2));
  }

  CHECK_THROWS_AS(band_structure(f3, make_grid(1.0, f3.period2, 4, 4), false), std::invalid_argument);
}

TEST_CASE("band_intervals closed forms") {
  const IntervalSet zero = hofstadter_intervals({0, 1}, kInteractiveGridDensity, true);
  REQUIRE(zero.size() == 1);
  CHECK(zero[0].lo == doctest::Approx(-4.0).epsilon(1e-12));
  CHECK(zero[0].hi == doctest::Approx(4.0).epsilon(1e-12));

  const IntervalSet half = hofstadter_intervals({1, 2}, kInteractiveGridDensity, true);
  REQUIRE(half.size() == 1);
  CHECK(std::abs(half[0].lo + 2 * std::sqrt(2.0)) < 1e-8);
  CHECK(std::abs(half[0].hi - 2 * std::sqrt(2.0)) < 1e-8);
  CHECK(half[0].first_band == 0);
  CHECK(half[0].last_band == 1);

  const IntervalSet third = hofstadter_intervals({1, 3}, kInteractiveGridDensity, true);
  REQUIRE(third.size() == 3);
  const double s3 = std::sqrt(3.0);
  const double edges[] = {-1 - s3, -2, 1 - s3, s3 - 1, 2, 1 + s3};
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(third[i].lo - edges[2 * i]) < 1e-8);
    CHECK(std::abs(third[i].hi - edges[2 * i + 1]) < 1e-8);
  }
}

TEST_CASE("refined endpoints agree with the Chambers-relation oracle") {
  for (int q = 2; q <= 10; ++q) {
    for (int p = 1; p < q; ++p) {
      if (std::gcd(p, q) != 1) continue;
      const auto edges = oracle::chambers_edges(p, q);
      for (const Interval& iv : hofstadter_intervals({p, q}, kInteractiveGridDensity, true)) {
        CHECK(oracle::distance_to_set(iv.lo, edges) < 1e-8);
        CHECK(oracle::distance_to_set(iv.hi, edges) < 1e-8);
      }
    }
  }
}

TEST_CASE("unrefined intervals merge touching bands with the grid tolerance") {
  const BlochMatrixFamily f = hofstadter_family({1, 2});
  const KGrid g = make_grid(f.period1, f.period2, 64, 64);
  CHECK(unrefined_merge_tol(g) == doctest::Approx(3 * 2 * M_PI / 64));
  CHECK(hofstadter_intervals({1, 2}, 64, false).size() == 1);
  CHECK(hofstadter_intervals({1, 4}, 64, false).size() == 3);
}

TEST_CASE("farey sequences") {
  const auto f1 = farey(1);
  REQUIRE(f1.size() == 2);
  CHECK(f1[0] == RationalFlux{0, 1});
  CHECK(f1[1] == RationalFlux{1, 1});

  const auto f3 = farey(3);
  const std::vector<RationalFlux> expected{{0, 1}, {1, 3}, {1, 2}, {2, 3}, {1, 1}};
  CHECK(f3 == expected);

  std::size_t totient_sum = 1;
  for (int q = 1; q <= 5; ++q)
    for (int p = 1; p <= q; ++p) totient_sum += std::gcd(p, q) == 1;
  CHECK(farey(5).size() == totient_sum);
  CHECK(farey(5).size() == 11);
  CHECK_THROWS_AS(farey(0), std::invalid_argument);
}

TEST_CASE("small butterflies") {
  const ButterflyData two = butterfly(2, kInteractiveGridDensity, true);
  REQUIRE(two.rows.size() == 3);
  for (const ButterflyRow& row : two.rows) CHECK(row.intervals.size() == 1);

  const ButterflyData three = butterfly(3, kInteractiveGridDensity, true);
  REQUIRE(three.rows.size() == 5);
  CHECK(three.rows[1].flux == RationalFlux{1, 3});
  CHECK(three.rows[1].intervals.size() == 3);
}

TEST_CASE("interval-count law and symmetries for q <= 10") {
  const ButterflyData data = butterfly(10, kInteractiveGridDensity, true);
  for (const ButterflyRow& row : data.rows) {
    const int q = row.flux.q;
    const std::size_t expected = q % 2 == 1 ? static_cast<std::size_t>(q) : static_cast<std::size_t>(q - 1);
    CHECK_MESSAGE(row.intervals.size() == expected, row.flux.p << "/" << q);

    const IntervalSet& iv = row.intervals;
    for (std::size_t i = 0; i < iv.size(); ++i) {
      const Interval& mirror = iv[iv.size() - 1 - i];
      CHECK(std::abs(iv[i].lo + mirror.hi) < 1e-8);
    }

    if (row.flux.p > 0 && row.flux.p < q) {
      const IntervalSet conj = hofstadter_intervals({q - row.flux.p, q}, kInteractiveGridDensity, true);
      REQUIRE(conj.size() == iv.size());
      for (std::size_t i = 0; i < iv.size(); ++i) {
        CHECK(std::abs(conj[i].lo - iv[i].lo) < 1e-8);
        CHECK(std::abs(conj[i].hi - iv[i].hi) < 1e-8);
      }
    }
  }
}
