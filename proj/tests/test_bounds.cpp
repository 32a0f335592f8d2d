#include <doctest.h>

#include <cmath>
#include <vector>

#include "upplane/bounds.hpp"

using namespace upplane;
using namespace upplane::bounds;

TEST_SUITE("bounds") {

TEST_CASE("eta endpoints and reference value") {
  for (int d : {1, 2, 10, 100}) CHECK(eta(0.0, d) == 2.0);
  CHECK(eta(1.0, 2) == doctest::Approx(1.1141688251279149).epsilon(1e-12));
  for (int d : {1, 2, 7}) {
    CHECK(eta(50.0 * d, d) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(eta(1e9, d) == 1.0);
  }
  CHECK_THROWS_WITH_AS(eta(-0.1, 1), doctest::Contains("DomainError"), Error);
  CHECK_THROWS_AS(eta(1.0, 0), Error);
}

TEST_CASE("eta is decreasing, convex and within (1, 2]") {
  // Strictness is checked where eta - 1 is still representable; past
  // P ~ 17 d the value saturates to 1.0 in double precision.
  for (int d : {1, 2, 8, 64}) {
    std::vector<double> grid;
    for (int i = 0; i < 120; ++i)
      grid.push_back(std::pow(10.0, -3.0 + 4.0 * i / 119.0));
    double prev = eta(0.0, d);
    for (double p : grid) {
      const double cur = eta(p, d);
      CHECK(cur < prev);
      CHECK(cur > 1.0);
      CHECK(cur <= 2.0);
      prev = cur;
    }
    // Convexity via second divided differences on the log grid.
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
      const double h1 = grid[i] - grid[i - 1];
      const double h2 = grid[i + 1] - grid[i];
      const double dd =
          2.0 *
          ((eta(grid[i + 1], d) - eta(grid[i], d)) / h2 -
           (eta(grid[i], d) - eta(grid[i - 1], d)) / h1) /
          (h1 + h2);
      CHECK(dd >= -1e-8);
    }
  }
}

TEST_CASE("eta grows with dimension at fixed P") {
  const std::vector<int> dims{1, 2, 8, 64};
  for (double p : {0.05, 0.3, 1.0, 3.0}) {
    for (std::size_t i = 1; i < dims.size(); ++i)
      CHECK(eta(p, dims[i]) > eta(p, dims[i - 1]));
  }
}

TEST_CASE("gamma residual vanishes at gamma = eta - 1") {
  CHECK(gamma_residual(1.0, 0.0, 1) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(gamma_residual(eta(0.3, 1) - 1.0, 0.3, 1) ==
        doctest::Approx(0.0).epsilon(1e-10));
  CHECK(gamma_residual(0.5, 0.05889151782819173, 1) ==
        doctest::Approx(0.0).epsilon(1e-10));
  for (int d : {1, 2, 4, 16}) {
    for (double p : {0.01, 0.1, 0.5, 1.0, 2.0, 5.0}) {
      CHECK(std::abs(gamma_residual(eta(p, d) - 1.0, p, d)) <= 1e-10);
    }
  }
  CHECK_THROWS_AS(gamma_residual(0.0, 1.0, 1), Error);
}

TEST_CASE("eta hellinger") {
  for (int d : {1, 2, 9}) CHECK(eta_hellinger(0.0, d) == 2.0);
  CHECK(eta_hellinger(1.0, 3) == 1.0);
  CHECK(eta_hellinger(1.0 - 1e-12, 3) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(eta_hellinger(0.5, 2) ==
        doctest::Approx(1.0717967697244909).epsilon(1e-12));
  CHECK_THROWS_WITH_AS(eta_hellinger(-0.01, 1),
                       doctest::Contains("DomainError"), Error);
  CHECK_THROWS_AS(eta_hellinger(1.01, 1), Error);
}

TEST_CASE("region bounds and classification") {
  SUBCASE("bounds coincide for a Gaussian source") {
    const PlaneContext ctx(1, 0.5, 0.5, DivergenceKind::RenyiHalf);
    const auto [lo, up] = up_region_bounds(0.0, ctx);
    CHECK(lo == doctest::Approx(1.0));
    CHECK(up == doctest::Approx(1.0));
  }
  SUBCASE("large P recovers the raw entropy powers") {
    const PlaneContext ctx(1, 0.5, 0.8, DivergenceKind::RenyiHalf);
    const auto [lo, up] = up_region_bounds(50.0, ctx);
    CHECK(lo == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(up == doctest::Approx(0.8).epsilon(1e-6));
  }
  SUBCASE("invertible degradation pins the lower bound at zero") {
    const PlaneContext ctx(2, 0.0, 0.3, DivergenceKind::RenyiHalf);
    for (double p : {0.0, 0.5, 4.0})
      CHECK(up_region_bounds(p, ctx).first == 0.0);
  }
  SUBCASE("classification against the three regions") {
    const PlaneContext ctx(2, 0.4, 0.6, DivergenceKind::RenyiHalf);
    const auto [lo, up] = up_region_bounds(0.7, ctx);
    const RegionVerdict impossible =
        classify_point({0.7, 0.9 * lo, ""}, ctx, 0.02);
    CHECK(impossible.region == Region::Impossible);
    CHECK(impossible.slack == doctest::Approx(0.9 * lo - lo));
    const RegionVerdict optimal = classify_point({0.7, lo, ""}, ctx, 0.02);
    CHECK(optimal.region == Region::Optimal);
    CHECK(optimal.slack == doctest::Approx(0.0));
    const RegionVerdict sub = classify_point({0.7, 3.0 * up, ""}, ctx, 0.02);
    CHECK(sub.region == Region::Suboptimal);
    CHECK(sub.slack == doctest::Approx(2.0 * up));
  }
  SUBCASE("context rejects an inverted envelope") {
    CHECK_THROWS_WITH_AS(PlaneContext(1, 0.8, 0.5,
                                      DivergenceKind::RenyiHalf),
                         doctest::Contains("OrderViolation"), Error);
  }
}

TEST_CASE("example 1 closed form") {
  const Example1Result at0 = example1_up(0.0, 1.0);
  CHECK(at0.u == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(at0.sigma_z_star == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));

  CHECK(example1_up(1.0, 1.0).u ==
        doctest::Approx(0.5358983848622454).epsilon(1e-12));
  CHECK(example1_up(1e9, 1.0).u == doctest::Approx(0.5).epsilon(1e-6));

  SUBCASE("nonincreasing in P and inside the theorem envelope") {
    for (double sigma2 : {0.25, 1.0, 4.0}) {
      const double n_xy = sigma2 / (1.0 + sigma2);
      double prev = example1_up(0.0, sigma2).u;
      CHECK(prev == doctest::Approx(2.0 * n_xy).epsilon(1e-12));
      for (double p = 0.1; p < 8.0; p += 0.17) {
        const double cur = example1_up(p, sigma2).u;
        CHECK(cur <= prev + 1e-15);
        CHECK(cur >= n_xy);
        CHECK(cur <= 2.0 * n_xy);
        prev = cur;
      }
    }
  }
}

TEST_CASE("distortion bound check") {
  const DistortionCheck eq = check_distortion_bound(1.0, 1.0, 0.0);
  CHECK(eq.holds);
  CHECK(eq.slack == doctest::Approx(0.0));
  const DistortionCheck ok = check_distortion_bound(1.0, 0.5, 0.0);
  CHECK(ok.holds);
  CHECK(ok.slack == doctest::Approx(0.5));
  const DistortionCheck bad = check_distortion_bound(0.4, 0.5, 0.0);
  CHECK_FALSE(bad.holds);
  CHECK(bad.slack == doctest::Approx(-0.1));
}

TEST_CASE("gaussianity gap") {
  CHECK(gaussianity_gap(0.7, 0.0, 3) == doctest::Approx(0.7));
  CHECK(gaussianity_gap(0.5, 1.5, 3) ==
        doctest::Approx(1.3591409142295226).epsilon(1e-12));
  double prev = gaussianity_gap(0.5, 0.0, 2);
  for (double dkl = 0.1; dkl < 2.0; dkl += 0.1) {
    const double cur = gaussianity_gap(0.5, dkl, 2);
    CHECK(cur > prev);
    prev = cur;
  }
}

TEST_CASE("theorem 1 envelope encloses the eta bounds") {
  CHECK(theorem1_bounds(0.5, 0.5) == std::pair{0.5, 1.0});
  CHECK(theorem1_bounds(0.0, 0.4).first == 0.0);
  CHECK_THROWS_WITH_AS(theorem1_bounds(0.6, 0.5),
                       doctest::Contains("OrderViolation"), Error);

  const PlaneContext ctx(3, 0.4, 0.55, DivergenceKind::RenyiHalf);
  const auto [t1_lo, t1_up] = theorem1_bounds(ctx.n_xy, ctx.n_xgy);
  for (double p = 0.0; p < 6.0; p += 0.2) {
    const auto [lo, up] = up_region_bounds(p, ctx);
    CHECK(lo >= t1_lo - 1e-12);
    CHECK(up <= t1_up + 1e-12);
  }
}

TEST_CASE("curve tabulation matches pointwise evaluation") {
  const PlaneContext ctx(2, 0.3, 0.5, DivergenceKind::Hellinger);
  const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 0.99};
  const auto rows = tabulate_bounds(ctx, grid);
  REQUIRE(rows.size() == grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(rows[i].p == grid[i]);
    CHECK(rows[i].eta ==
          doctest::Approx(eta_hellinger(grid[i], 2)).epsilon(1e-14));
    CHECK(rows[i].lower == doctest::Approx(rows[i].eta * 0.3));
    CHECK(rows[i].upper == doctest::Approx(rows[i].eta * 0.5));
  }
}

}  // TEST_SUITE
