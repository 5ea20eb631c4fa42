#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "hypfill/calculus.hpp"
#include "hypfill/filling.hpp"
#include "hypfill/functions.hpp"
#include "hypfill/norms.hpp"
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

VecX<double> random_vec(Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  VecX<double> v(n);
  for (Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

Index max_overlap(const StructureReport<double>& rep) {
  Index m = 1;
  for (const auto& lr : rep.levels) m = std::max(m, lr.max_overlap);
  return m;
}

}  // namespace

TEST_CASE("norm parameter validation and admissibility") {
  CHECK_THROWS_AS(NormParams<double>::make(0.0, 2, 2), std::exception);
  CHECK_THROWS_AS(NormParams<double>::make(0.5, 0, 2), std::exception);
  CHECK_THROWS_AS(NormParams<double>::make(0.5, 2, -1), std::exception);
  auto prm = NormParams<double>::make(0.5, infinity<double>(), infinity<double>());
  CHECK_EQ(prm.p, infinity<double>());

  // p > Q/(Q+s) with Q = 1, s = 0.5 means p > 2/3, strictly.
  CHECK(NormParams<double>::make(0.5, 1.0, 1.0).admissible(1.0));
  CHECK_FALSE(NormParams<double>::make(0.5, 0.5, 1.0).admissible(1.0));
  CHECK_FALSE(NormParams<double>::make(0.5, 2.0 / 3.0, 1.0).admissible(1.0));
}

TEST_CASE("weighted vertex norm: single-item reductions") {
  auto sp = line_points({0.0, 0.1, 0.2, 0.9}, {1, 2, 1, 5});
  auto f = build_filling(sp, 2, 2);
  REQUIRE_EQ(f.vertex_count(), 3);
  REQUIRE_EQ(f.vertex(0).center, 0);
  REQUIRE_EQ(f.vertex(0).measure, doctest::Approx(4.0));

  VecX<double> u = VecX<double>::Zero(3);
  u[0] = 1.0;
  // 2^{k s q} (mu |u|^p)^{q/p} with k=2, s=1/2, p=2, q=1: 2 * sqrt(4) = 4.
  CHECK_EQ(seq_norm_x(f, sp, u, NormParams<double>::make(0.5, 2, 1)), doctest::Approx(4.0));

  // p = infinity drops the measure: 2^{k s q} sup|u| = 2.
  CHECK_EQ(seq_norm_x(f, sp, u, NormParams<double>::make(0.5, infinity<double>(), 1)),
           doctest::Approx(2.0));

  CHECK_EQ(seq_norm_x(f, sp, VecX<double>::Zero(3).eval(),
                      NormParams<double>::make(0.5, 2, 1)),
           0.0);
}

TEST_CASE("weighted edge norm: single-edge reduction") {
  auto sp = line_points({0.0, 0.5}, {0.25, 0.5});
  auto f = build_filling(sp, 0, 1);

  int target = -1;
  for (Index e = 0; e < f.edge_count(); ++e) {
    const auto& ed = f.edge(e);
    if (f.vertex(ed.tail).level == 0 && f.vertex(ed.head).level == 0)
      target = static_cast<int>(e);
  }
  REQUIRE_GE(target, 0);
  CHECK_EQ(f.edge(target).union_measure, doctest::Approx(0.75));

  VecX<double> u = VecX<double>::Zero(f.edge_count());
  u[target] = 1.0;
  CHECK_EQ(seq_norm_e(f, sp, u, NormParams<double>::make(1, 1, 1)), doctest::Approx(0.75));
  CHECK_EQ(seq_norm_e(f, sp, VecX<double>::Zero(f.edge_count()).eval(),
                      NormParams<double>::make(1, 1, 1)),
           0.0);
}

TEST_CASE("overlap and weighted forms agree within the overlap factor") {
  auto sp = make_grid1d<double>(64);
  auto f = build_filling(sp, 0, 6);
  const double m = static_cast<double>(max_overlap(check_filling(f, sp)));
  const auto prm = NormParams<double>::make(0.5, 2, 2);

  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 20; ++rep) {
    VecX<double> u = random_vec(f.vertex_count(), rng);
    const double nw = seq_norm_x(f, sp, u, prm, NormForm::weighted);
    const double no = seq_norm_x(f, sp, u, prm, NormForm::overlap);
    REQUIRE_GT(nw, 0.0);
    const double ratio = no / nw;
    CHECK_GE(ratio, 1.0 - 1e-9);
    CHECK_LE(ratio, std::sqrt(m) * (1.0 + 1e-9));
  }
}

TEST_CASE("edge and vertex encodings of the derivative are comparable") {
  auto sp = make_grid1d<double>(128);
  auto f = build_filling(sp, 0, 7);
  const auto prm = NormParams<double>::make(0.5, 2, 2);
  const double bound = std::sqrt(static_cast<double>(f.max_degree())) *
                       std::sqrt(static_cast<double>(max_overlap(check_filling(f, sp))));

  auto u = poisson_extend(sp, f, builtin_sample_function(sp, "sin2pi"));
  const double nx = seq_norm_x(f, sp, vertex_derivative(f, u), prm);
  const double ne = seq_norm_e(f, sp, edge_derivative(f, u), prm);
  REQUIRE_GT(nx, 0.0);
  REQUIRE_GT(ne, 0.0);
  CHECK_LE(ne / nx, bound);
  CHECK_LE(nx / ne, bound);
}

TEST_CASE("besov norm basics") {
  auto sp = make_grid1d<double>(128);
  auto f = build_filling(sp, 0, 7);
  const auto prm = NormParams<double>::make(0.5, 2, 2);

  CHECK_EQ(besov_norm(sp, f, VecX<double>::Constant(sp.size(), 42.0).eval(), prm), 0.0);

  auto fun = builtin_sample_function(sp, "sin2pi");
  const double n1 = besov_norm(sp, f, fun, prm);
  const double n2 = besov_norm(sp, f, (3.5 * fun).eval(), prm);
  CHECK_EQ(n2, doctest::Approx(3.5 * n1).epsilon(1e-12));
}

TEST_CASE("besov norm is resolution-stable for the coordinate function") {
  auto sp = make_grid1d<double>(1024);
  const auto prm = NormParams<double>::make(0.5, 2, 2);
  const double coarse =
      besov_norm(sp, build_filling(sp, 0, 7), builtin_sample_function(sp, "lin"), prm);
  const double fine =
      besov_norm(sp, build_filling(sp, 0, 9), builtin_sample_function(sp, "lin"), prm);
  REQUIRE_GT(coarse, 0.0);
  const double ratio = fine / coarse;
  CHECK_GE(ratio, 0.5);
  CHECK_LE(ratio, 2.0);
}

TEST_CASE("quasi-triangle inequality with the stated constant") {
  auto sp = make_grid1d<double>(64);
  auto f = build_filling(sp, 0, 5);
  auto items = vertex_items(f);
  std::mt19937_64 rng(7);

  for (auto [s, p, q] : {std::tuple{0.5, 2.0, 2.0}, std::tuple{0.3, 0.5, 0.5},
                         std::tuple{0.8, infinity<double>(), 1.0}}) {
    const auto prm = NormParams<double>::make(s, p, q);
    const double r = std::min({p, q, 1.0});
    const double K = std::exp2(std::max(1.0 / r - 1.0, 0.0) + 1.0);
    for (int rep = 0; rep < 25; ++rep) {
      VecX<double> u = random_vec(items.size(), rng);
      VecX<double> v = random_vec(items.size(), rng);
      const double lhs = weighted_seq_norm(items, (u + v).eval(), prm);
      const double rhs =
          K * (weighted_seq_norm(items, u, prm) + weighted_seq_norm(items, v, prm));
      CHECK_LE(lhs, rhs * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("explicit hajlasz gradient: zeros, monotonicity") {
  auto sp = make_grid1d<double>(64);
  auto f5 = build_filling(sp, 0, 5);
  auto f6 = build_filling(sp, 0, 6);

  auto gz = hajlasz_explicit_gradient(f5, sp, VecX<double>::Constant(64, 3.0).eval(), 0.5);
  for (const auto& gk : gz.g) CHECK_EQ(gk.cwiseAbs().maxCoeff(), 0.0);

  // Enlarging the level range only adds nonnegative terms.
  auto fun = builtin_sample_function(sp, "sin2pi");
  auto g5 = hajlasz_explicit_gradient(f5, sp, fun, 0.5);
  auto g6 = hajlasz_explicit_gradient(f6, sp, fun, 0.5);
  CHECK_EQ(g5.k_min, g6.k_min);
  for (int k = g5.k_min; k <= g5.k_max(); ++k) {
    const auto& a = g5.at(k);
    const auto& b = g6.at(k);
    for (Index i = 0; i < a.size(); ++i) CHECK_LE(a[i], b[i] + 1e-15);
  }

  CHECK_THROWS_AS(hajlasz_explicit_gradient(f5, sp, fun, 0.0), std::domain_error);
  CHECK_THROWS_AS(hajlasz_explicit_gradient(f5, sp, fun, 1.5), std::domain_error);
}

TEST_CASE("hajlasz validation against hand-built gradients") {
  auto sp = make_grid1d<double>(64);
  auto lin = builtin_sample_function(sp, "lin");
  const double s = 0.5;

  // Pair distances span [1/63, 1]; annuli k = -1 .. 5.
  const int k_min = annulus_index(sp.diameter());
  CHECK_EQ(k_min, -1);
  const int k_max = annulus_index(sp.min_pairwise_distance());
  CHECK_EQ(k_max, 5);

  // A 1-Lipschitz function admits g_k = (1/2) 2^{-k(1-s)}.
  HajlaszGradient<double> g;
  g.s = s;
  g.k_min = k_min;
  for (int k = k_min; k <= k_max; ++k)
    g.g.push_back(VecX<double>::Constant(sp.size(), 0.5 * std::exp2(-k * (1.0 - s))));
  auto val = hajlasz_validate(sp, lin, g, s);
  CHECK(val.valid);
  CHECK_LE(val.worst_ratio, 1.0);

  // The zero gradient only validates constant data.
  HajlaszGradient<double> zero;
  zero.s = s;
  zero.k_min = k_min;
  for (int k = k_min; k <= k_max; ++k) zero.g.push_back(VecX<double>::Zero(sp.size()));
  auto bad = hajlasz_validate(sp, lin, zero, s);
  CHECK_FALSE(bad.valid);
  CHECK_GE(bad.worst_a, 0);
  CHECK_GE(bad.worst_b, 0);
  auto ok = hajlasz_validate(sp, VecX<double>::Constant(64, 1.0).eval(), zero, s);
  CHECK(ok.valid);

  // A gradient that misses a populated annulus is unusable.
  HajlaszGradient<double> missing;
  missing.s = s;
  missing.k_min = 0;
  for (int k = 0; k <= k_max; ++k) missing.g.push_back(VecX<double>::Zero(sp.size()));
  CHECK_THROWS_AS(hajlasz_validate(sp, lin, missing, s), std::domain_error);
}

TEST_CASE("hajlasz norm reductions") {
  auto sp = make_grid1d<double>(4);

  HajlaszGradient<double> g;
  g.s = 0.5;
  g.k_min = 2;
  g.g.push_back(VecX<double>::Zero(4));
  g.g.back()[1] = 1.0;
  // Single term: (w |g|^p)^{1/p} with w = 1/4.
  CHECK_EQ(hajlasz_norm(sp, g, 2.0, 3.0), doctest::Approx(0.5));
  CHECK_EQ(hajlasz_norm(sp, g, 1.0, infinity<double>()), doctest::Approx(0.25));

  auto scaled = g;
  scaled.g[0] *= 7.0;
  CHECK_EQ(hajlasz_norm(sp, scaled, 2.0, 3.0), doctest::Approx(7.0 * 0.5));

  HajlaszGradient<double> zero;
  zero.s = 0.5;
  zero.k_min = 0;
  zero.g.push_back(VecX<double>::Zero(4));
  CHECK_EQ(hajlasz_norm(sp, zero, 2.0, 2.0), 0.0);
}

TEST_CASE("explicit gradient validates after the measured rescaling") {
  auto sp = make_grid1d<double>(256);
  auto f = build_filling(sp, 0, 8);
  auto fun = builtin_sample_function(sp, "sin2pi");

  auto grad = hajlasz_explicit_gradient(f, sp, fun, 0.5);
  auto raw = hajlasz_validate(sp, fun, grad, 0.5);
  const double cstar = std::max(1.0, raw.worst_ratio);
  CHECK_LE(cstar, 16.0);

  auto scaled = grad;
  for (auto& gk : scaled.g) gk *= cstar * (1.0 + 1e-9);
  CHECK(hajlasz_validate(sp, fun, scaled, 0.5).valid);

  const double ratio = hajlasz_norm(sp, grad, 2.0, 2.0) /
                       besov_norm(sp, f, fun, NormParams<double>::make(0.5, 2, 2));
  CHECK_GE(ratio, 1.0 / 32.0);
  CHECK_LE(ratio, 32.0);
}
