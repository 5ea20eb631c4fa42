#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "hypfill/space.hpp"

using namespace hypfill;

namespace {

PointCloudSpace<double> line_points(std::initializer_list<double> xs,
                                    std::initializer_list<double> ws) {
  MatX<double> coords(static_cast<Index>(xs.size()), 1);
  Index i = 0;
  for (double x : xs) coords(i++, 0) = x;
  VecX<double> w(static_cast<Index>(ws.size()));
  i = 0;
  for (double v : ws) w[i++] = v;
  return PointCloudSpace<double>::from_points(std::move(coords), std::move(w));
}

}  // namespace

TEST_CASE("euclidean point cloud basics") {
  auto sp = line_points({0.0, 0.5, 1.0}, {1.0, 1.0, 1.0});
  CHECK_EQ(sp.size(), 3);
  CHECK_EQ(sp.total_mass(), doctest::Approx(3.0));
  CHECK_EQ(sp.distance(0, 2), doctest::Approx(1.0));
  CHECK_EQ(sp.distance(0, 1), doctest::Approx(0.5));
  CHECK_EQ(sp.diameter(), doctest::Approx(1.0));
  CHECK_EQ(sp.min_pairwise_distance(), doctest::Approx(0.5));
  CHECK(sp.has_coordinates());
}

TEST_CASE("distance matrix space") {
  MatX<double> d(2, 2);
  d << 0, 1, 1, 0;
  VecX<double> w(2);
  w << 2, 3;
  auto sp = PointCloudSpace<double>::from_distance_matrix(d, w);
  CHECK_EQ(sp.total_mass(), doctest::Approx(5.0));
  CHECK_EQ(sp.distance(0, 1), doctest::Approx(1.0));
  CHECK_FALSE(sp.has_coordinates());
  CHECK_THROWS(sp.coordinate(0));
}

TEST_CASE("invalid weights and matrices rejected") {
  MatX<double> d(2, 2);
  d << 0, 1, 1, 0;
  VecX<double> bad(2);
  bad << 2, -1;
  CHECK_THROWS_AS(PointCloudSpace<double>::from_distance_matrix(d, bad), std::exception);

  VecX<double> w(2);
  w << 1, 1;
  MatX<double> asym(2, 2);
  asym << 0, 1, 2, 0;
  CHECK_THROWS_AS(PointCloudSpace<double>::from_distance_matrix(asym, w), std::exception);

  MatX<double> diag(2, 2);
  diag << 0.5, 1, 1, 0;
  CHECK_THROWS_AS(PointCloudSpace<double>::from_distance_matrix(diag, w), std::exception);

  // d(0,2) = 3 > d(0,1) + d(1,2) = 2 breaks the triangle inequality.
  MatX<double> tri(3, 3);
  tri << 0, 1, 3, 1, 0, 1, 3, 1, 0;
  VecX<double> w3 = VecX<double>::Ones(3);
  CHECK_THROWS_AS(PointCloudSpace<double>::from_distance_matrix(tri, w3), std::exception);
}

TEST_CASE("duplicate points rejected") {
  CHECK_THROWS_AS(line_points({0.0, 0.0, 1.0}, {1.0, 1.0, 1.0}), std::exception);
}

TEST_CASE("grid1d generator") {
  auto g2 = make_grid1d<double>(2);
  CHECK_EQ(g2.size(), 2);
  CHECK_EQ(g2.coordinate(0), doctest::Approx(0.0));
  CHECK_EQ(g2.coordinate(1), doctest::Approx(1.0));
  CHECK_EQ(g2.weight(0), doctest::Approx(0.5));
  CHECK_EQ(g2.weight(1), doctest::Approx(0.5));
  CHECK_EQ(g2.total_mass(), doctest::Approx(1.0));
  CHECK_THROWS_AS(make_grid1d<double>(1), std::domain_error);
}

TEST_CASE("gridd generator enumerates axis 0 fastest") {
  auto g = make_gridd<double>(3, 2);
  CHECK_EQ(g.size(), 9);
  CHECK_EQ(g.total_mass(), doctest::Approx(1.0));
  // id 1 moves along axis 0, id 3 along axis 1.
  CHECK_EQ(g.distance(0, 1), doctest::Approx(0.5));
  CHECK_EQ(g.distance(0, 3), doctest::Approx(0.5));
  CHECK_EQ(g.distance(0, 4), doctest::Approx(std::sqrt(0.5)));
  CHECK_THROWS_AS(make_gridd<double>(2, 0), std::domain_error);
}

TEST_CASE("circle generator uses arc distance") {
  auto c = make_circle<double>(4);
  CHECK_EQ(c.distance(0, 1), doctest::Approx(0.25));
  CHECK_EQ(c.distance(0, 2), doctest::Approx(0.5));
  CHECK_EQ(c.distance(0, 3), doctest::Approx(0.25));
  CHECK_EQ(c.distance(1, 3), doctest::Approx(0.5));
  CHECK_EQ(c.diameter(), doctest::Approx(0.5));

  VecX<double> out_of_range(2);
  out_of_range << 0.0, 1.5;
  VecX<double> w = VecX<double>::Ones(2);
  CHECK_THROWS_AS(PointCloudSpace<double>::from_circle(out_of_range, w), std::exception);
}

TEST_CASE("cantor generator") {
  auto c1 = make_cantor<double>(1);
  CHECK_EQ(c1.size(), 2);
  CHECK_EQ(c1.coordinate(0), doctest::Approx(0.0));
  CHECK_EQ(c1.coordinate(1), doctest::Approx(2.0 / 3.0));

  auto c6 = make_cantor<double>(6);
  CHECK_EQ(c6.size(), 64);
  CHECK_EQ(c6.min_pairwise_distance(), doctest::Approx(2.0 / 729.0));
  CHECK_EQ(c6.diameter(), doctest::Approx(1.0 - std::pow(3.0, -6.0)));
  CHECK_THROWS_AS(make_cantor<double>(0), std::domain_error);
}

TEST_CASE("open balls: members and measure") {
  auto g5 = make_grid1d<double>(5);
  // Center 0.5, radius 0.3 picks up {0.25, 0.5, 0.75}, each of weight 0.2.
  CHECK_EQ(g5.ball_measure(2, 0.3), doctest::Approx(0.6));
  auto members = g5.ball_members(2, 0.3);
  REQUIRE_EQ(members.size(), 3);
  CHECK_EQ(members[0], 1);
  CHECK_EQ(members[1], 2);
  CHECK_EQ(members[2], 3);

  // Radius beyond the diameter returns the total mass.
  CHECK_EQ(g5.ball_measure(0, 2.0), doctest::Approx(1.0));

  // Boundary is excluded: two points at distance exactly 1, radius 1.
  auto two = line_points({0.0, 1.0}, {2.0, 3.0});
  CHECK_EQ(two.ball_measure(0, 1.0), doctest::Approx(2.0));

  CHECK_THROWS_AS(g5.ball_measure(0, 0.0), std::exception);
  CHECK_THROWS_AS(g5.ball_measure(0, -0.5), std::exception);
}

TEST_CASE("doubling exponent brackets the generated geometries") {
  auto d1 = estimate_doubling(make_grid1d<double>(1024), 512);
  CHECK_GE(d1.Q, 0.8);
  CHECK_LE(d1.Q, 1.2);
  CHECK_GE(d1.C, 1.0);

  // finite-grid boundary effects pull the fitted slope a little under 2
  auto d2 = estimate_doubling(make_gridd<double>(32, 2), 512);
  CHECK_GE(d2.Q, 1.5);
  CHECK_LE(d2.Q, 2.3);

  auto dc = estimate_doubling(make_cantor<double>(6), 512);
  CHECK_GE(dc.Q, 0.5);
  CHECK_LE(dc.Q, 0.8);
}

TEST_CASE("doubling bound verifies on fresh triples") {
  for (int which = 0; which < 2; ++which) {
    auto sp = which == 0 ? make_grid1d<double>(256) : make_gridd<double>(16, 2);
    auto est = estimate_doubling(sp, 512);

    // Same sampling regime as the fit, disjoint seed.
    std::mt19937_64 rng(0xFEEDFACEull + static_cast<std::uint64_t>(which));
    std::uniform_int_distribution<Index> pick(0, sp.size() - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double diam = sp.diameter();
    double r_lo = std::max(2.0 * sp.min_pairwise_distance(), diam / 512.0);
    double r_hi = diam / 6.0;
    if (!(r_lo < r_hi)) {
      r_lo = diam / 8.0;
      r_hi = diam / 2.0;
    }
    const double log_lo = std::log(r_lo), log_hi = std::log(r_hi);

    double worst = 0;
    for (int t = 0; t < 10000; ++t) {
      const Index i = pick(rng);
      const double r = std::exp(log_lo + (log_hi - log_lo) * unit(rng));
      const double lam = 1.25 + 0.75 * unit(rng);
      const double lhs = sp.ball_measure(i, lam * r);
      const double rhs = est.C * std::pow(lam, est.Q) * sp.ball_measure(i, r);
      worst = std::max(worst, lhs / rhs);
    }
    CHECK_LE(worst, 1.0);
  }
}

TEST_CASE("doubling estimate rejects degenerate input") {
  auto one = line_points({0.0}, {1.0});
  CHECK_EQ(one.size(), 1);
  CHECK_THROWS_AS(estimate_doubling(one, 64), std::domain_error);
  CHECK_THROWS_AS(estimate_doubling(make_grid1d<double>(8), 0), std::domain_error);

  // A single trial still yields a usable (if crude) estimate.
  auto est = estimate_doubling(make_grid1d<double>(8), 1);
  CHECK_GE(est.C, 1.0);
  CHECK_GE(est.Q, 0.01);
  CHECK_GT(est.sample_count, 0);
}
