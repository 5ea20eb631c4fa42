#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypfill/common.hpp"

namespace hypfill {

enum class MetricKind { euclidean, matrix, circle };

/// A finite metric measure space: points with pairwise distances and strictly
/// positive weights (atomic measure).  Three geometry backends are supported:
///   - euclidean: an N x d coordinate matrix,
///   - matrix:    an explicit N x N distance matrix,
///   - circle:    arc-length positions on a circle of perimeter 1.
/// All balls used by this library are open: B(c, r) = { x : d(c, x) < r }.
template <typename Scalar = double>
class PointCloudSpace {
 public:
  static PointCloudSpace from_points(MatX<Scalar> coords, VecX<Scalar> weights) {
    PointCloudSpace s;
    s.kind_ = MetricKind::euclidean;
    s.coords_ = std::move(coords);
    s.weights_ = std::move(weights);
    s.init();
    return s;
  }

  static PointCloudSpace from_distance_matrix(MatX<Scalar> dist, VecX<Scalar> weights) {
    PointCloudSpace s;
    s.kind_ = MetricKind::matrix;
    s.dist_ = std::move(dist);
    s.weights_ = std::move(weights);
    s.init();
    return s;
  }

  /// positions are arc-length coordinates in [0, 1); the metric is geodesic
  /// distance on a circle of perimeter 1.
  static PointCloudSpace from_circle(VecX<Scalar> positions, VecX<Scalar> weights) {
    PointCloudSpace s;
    s.kind_ = MetricKind::circle;
    s.positions_ = std::move(positions);
    s.weights_ = std::move(weights);
    s.init();
    return s;
  }

  Index size() const { return weights_.size(); }
  MetricKind metric_kind() const { return kind_; }

  Scalar distance(Index i, Index j) const {
    switch (kind_) {
      case MetricKind::euclidean:
        return (coords_.row(i) - coords_.row(j)).norm();
      case MetricKind::matrix:
        return dist_(i, j);
      case MetricKind::circle: {
        Scalar d = std::abs(positions_[i] - positions_[j]);
        return std::min(d, Scalar(1) - d);
      }
    }
    return Scalar(0);
  }

  Scalar weight(Index i) const { return weights_[i]; }
  const VecX<Scalar>& weights() const { return weights_; }
  Scalar total_mass() const { return weights_.sum(); }

  Scalar diameter() const { return diameter_; }
  Scalar min_pairwise_distance() const { return min_dist_; }

  /// Measure of the open ball B(points[center], r).
  Scalar ball_measure(Index center, Scalar r) const {
    check_center(center);
    if (!(r > Scalar(0))) throw std::domain_error("ball_measure: radius must be positive");
    Scalar m = 0;
    for (Index j = 0; j < size(); ++j)
      if (distance(center, j) < r) m += weights_[j];
    return m;
  }

  /// Point ids inside the open ball B(points[center], r), ascending.
  std::vector<Index> ball_members(Index center, Scalar r) const {
    check_center(center);
    if (!(r > Scalar(0))) throw std::domain_error("ball_members: radius must be positive");
    std::vector<Index> out;
    for (Index j = 0; j < size(); ++j)
      if (distance(center, j) < r) out.push_back(j);
    return out;
  }

  /// True when points carry a scalar parameter (first euclidean coordinate or
  /// circle position) usable for evaluating closed-form test functions.
  bool has_coordinates() const { return kind_ != MetricKind::matrix; }

  /// Scalar parameter of a point: first coordinate (euclidean) or arc position.
  Scalar coordinate(Index i) const {
    check_center(i);
    switch (kind_) {
      case MetricKind::euclidean:
        return coords_(i, 0);
      case MetricKind::circle:
        return positions_[i];
      case MetricKind::matrix:
        throw std::domain_error("coordinate: space has no point coordinates");
    }
    return Scalar(0);
  }

  const MatX<Scalar>& coords() const { return coords_; }
  const VecX<Scalar>& circle_positions() const { return positions_; }
  const MatX<Scalar>& distance_matrix() const { return dist_; }

 private:
  PointCloudSpace() = default;

  void check_center(Index i) const {
    if (i < 0 || i >= size()) throw std::invalid_argument("point id out of range");
  }

  void init() {
    const Index n = weights_.size();
    if (n == 0) throw std::domain_error("space must contain at least one point");
    for (Index i = 0; i < n; ++i) {
      if (!(weights_[i] > Scalar(0)) || !std::isfinite(weights_[i]))
        throw std::domain_error("weights must be positive and finite (point " +
                                std::to_string(i) + ")");
    }
    switch (kind_) {
      case MetricKind::euclidean:
        if (coords_.rows() != n) throw std::invalid_argument("coords/weights size mismatch");
        if (coords_.cols() < 1) throw std::invalid_argument("coords need at least one column");
        if (!coords_.allFinite()) throw std::domain_error("coordinates must be finite");
        break;
      case MetricKind::matrix:
        if (dist_.rows() != n || dist_.cols() != n)
          throw std::invalid_argument("distance matrix must be N x N");
        if (!dist_.allFinite()) throw std::domain_error("distances must be finite");
        for (Index i = 0; i < n; ++i) {
          if (dist_(i, i) != Scalar(0))
            throw std::domain_error("distance matrix diagonal must be zero");
          for (Index j = i + 1; j < n; ++j) {
            if (dist_(i, j) != dist_(j, i))
              throw std::domain_error("distance matrix must be symmetric");
            if (!(dist_(i, j) > Scalar(0)))
              throw std::domain_error("distances between distinct points must be positive");
          }
        }
        check_triangle();
        break;
      case MetricKind::circle:
        if (positions_.size() != n) throw std::invalid_argument("positions/weights size mismatch");
        for (Index i = 0; i < n; ++i)
          if (!(positions_[i] >= Scalar(0)) || !(positions_[i] < Scalar(1)))
            throw std::domain_error("circle positions must lie in [0, 1)");
        break;
    }
    cache_extremes();
  }

  // Triangle inequality: exhaustive for N <= 512, sampled otherwise.
  void check_triangle() const {
    const Index n = size();
    auto bad = [&](Index i, Index j, Index k) {
      return dist_(i, k) > dist_(i, j) + dist_(j, k) + Scalar(1e-12);
    };
    if (n <= 512) {
      for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j)
          for (Index k = j + 1; k < n; ++k)
            if (bad(i, j, k) || bad(i, k, j) || bad(j, i, k))
              throw std::domain_error("distance matrix violates the triangle inequality");
    } else {
      std::mt19937_64 rng(0xA11CEull);
      std::uniform_int_distribution<Index> pick(0, n - 1);
      for (int t = 0; t < 100000; ++t) {
        Index i = pick(rng), j = pick(rng), k = pick(rng);
        if (i == j || j == k || i == k) continue;
        if (bad(i, j, k))
          throw std::domain_error("distance matrix violates the triangle inequality");
      }
    }
  }

  void cache_extremes() {
    const Index n = size();
    diameter_ = 0;
    min_dist_ = n > 1 ? infinity<Scalar>() : Scalar(0);
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) {
        Scalar d = distance(i, j);
        if (!(d > Scalar(0)))
          throw std::domain_error("distinct points must have positive distance (points " +
                                  std::to_string(i) + ", " + std::to_string(j) + ")");
        diameter_ = std::max(diameter_, d);
        min_dist_ = std::min(min_dist_, d);
      }
  }

  MetricKind kind_ = MetricKind::euclidean;
  MatX<Scalar> coords_;
  MatX<Scalar> dist_;
  VecX<Scalar> positions_;
  VecX<Scalar> weights_;
  Scalar diameter_ = 0;
  Scalar min_dist_ = 0;
};

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// n equispaced points k/(n-1) on [0, 1], each of weight 1/n.
template <typename Scalar = double>
PointCloudSpace<Scalar> make_grid1d(Index n) {
  if (n < 2) throw std::domain_error("grid1d requires n >= 2");
  MatX<Scalar> coords(n, 1);
  for (Index k = 0; k < n; ++k) coords(k, 0) = Scalar(k) / Scalar(n - 1);
  VecX<Scalar> w = VecX<Scalar>::Constant(n, Scalar(1) / Scalar(n));
  return PointCloudSpace<Scalar>::from_points(std::move(coords), std::move(w));
}

/// d-dimensional grid with n points per axis on [0, 1]^d, weight n^{-d} each.
/// Point ids enumerate axis 0 fastest.
template <typename Scalar = double>
PointCloudSpace<Scalar> make_gridd(Index n, int dim) {
  if (n < 2) throw std::domain_error("gridd requires n >= 2");
  if (dim < 1) throw std::domain_error("gridd requires dim >= 1");
  Index total = 1;
  for (int a = 0; a < dim; ++a) {
    if (total > (Index(1) << 22) / n) throw std::domain_error("gridd: too many points");
    total *= n;
  }
  MatX<Scalar> coords(total, dim);
  for (Index id = 0; id < total; ++id) {
    Index rest = id;
    for (int a = 0; a < dim; ++a) {
      coords(id, a) = Scalar(rest % n) / Scalar(n - 1);
      rest /= n;
    }
  }
  VecX<Scalar> w = VecX<Scalar>::Constant(total, std::pow(Scalar(1) / Scalar(n), Scalar(dim)));
  return PointCloudSpace<Scalar>::from_points(std::move(coords), std::move(w));
}

/// n equispaced points on a circle of perimeter 1 with the geodesic metric.
template <typename Scalar = double>
PointCloudSpace<Scalar> make_circle(Index n) {
  if (n < 2) throw std::domain_error("circle requires n >= 2");
  VecX<Scalar> pos(n);
  for (Index k = 0; k < n; ++k) pos[k] = Scalar(k) / Scalar(n);
  VecX<Scalar> w = VecX<Scalar>::Constant(n, Scalar(1) / Scalar(n));
  return PointCloudSpace<Scalar>::from_circle(std::move(pos), std::move(w));
}

/// Left endpoints of the 2^depth middle-thirds intervals, equal weights.
template <typename Scalar = double>
PointCloudSpace<Scalar> make_cantor(int depth) {
  if (depth < 1) throw std::domain_error("cantor requires depth >= 1");
  if (depth > 20) throw std::domain_error("cantor: depth too large");
  std::vector<Scalar> pts{Scalar(0)};
  for (int level = 1; level <= depth; ++level) {
    const Scalar shift = Scalar(2) * std::pow(Scalar(3), Scalar(-level));
    const std::size_t m = pts.size();
    for (std::size_t i = 0; i < m; ++i) pts.push_back(pts[i] + shift);
  }
  std::sort(pts.begin(), pts.end());
  const Index n = static_cast<Index>(pts.size());
  MatX<Scalar> coords(n, 1);
  for (Index i = 0; i < n; ++i) coords(i, 0) = pts[static_cast<std::size_t>(i)];
  VecX<Scalar> w = VecX<Scalar>::Constant(n, Scalar(1) / Scalar(n));
  return PointCloudSpace<Scalar>::from_points(std::move(coords), std::move(w));
}

// ---------------------------------------------------------------------------
// Doubling estimate
// ---------------------------------------------------------------------------

/// Empirical doubling bound: mu(B(xi, lambda r)) <= C lambda^Q mu(B(xi, r))
/// on every triple sampled during the fit.
template <typename Scalar = double>
struct DoublingEstimate {
  Scalar C = 1;
  Scalar Q = 1;
  Index sample_count = 0;
};

/// Least-squares fit of log mu(B(xi, lambda r)) - log mu(B(xi, r)) against
/// log lambda over random triples in the scaling regime, plus a deterministic
/// dyadic sweep (all radii 2^-n, lambda = 2) folded into the constant C.
/// C carries a 1.5x safety margin so the bound is robust on held-out triples.
template <typename Scalar = double>
DoublingEstimate<Scalar> estimate_doubling(const PointCloudSpace<Scalar>& space, Index trials,
                                           std::uint64_t seed = 0x9E3779B97F4A7C15ull) {
  const Index n = space.size();
  if (n < 2) throw std::domain_error("estimate_doubling: need at least two points");
  if (trials < 1) throw std::domain_error("estimate_doubling: need at least one trial");

  struct Triple {
    Scalar x, y;  // x = log lambda, y = log ratio
  };
  std::vector<Triple> fit;
  std::vector<Triple> sweep;

  const Scalar diam = space.diameter();
  const Scalar mind = space.min_pairwise_distance();

  // Dyadic sweep: guarantees the returned bound covers every ball the
  // multiscale hierarchy can produce (radius 2^-n, dilation factors <= 2).
  {
    const int e_hi = static_cast<int>(std::ceil(-std::log2(static_cast<double>(mind)))) + 1;
    const Index stride = std::max<Index>(1, n / 256);
    for (Index i = 0; i < n; i += stride) {
      for (int lev = -1; lev <= e_hi; ++lev) {
        const Scalar r = pow2<Scalar>(-lev);
        const Scalar a = space.ball_measure(i, r);
        const Scalar b = space.ball_measure(i, Scalar(2) * r);
        sweep.push_back({std::log(Scalar(2)), std::log(b / a)});
      }
    }
  }

  // Random triples inside the scaling regime feed the regression.
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> pick(0, n - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Scalar r_lo = std::max(Scalar(2) * mind, diam / Scalar(512));
  Scalar r_hi = diam / Scalar(6);
  if (!(r_lo < r_hi)) {
    r_lo = diam / Scalar(8);
    r_hi = diam / Scalar(2);
  }
  const Scalar log_lo = std::log(r_lo), log_hi = std::log(r_hi);
  for (Index t = 0; t < trials; ++t) {
    const Index i = pick(rng);
    const Scalar r = std::exp(log_lo + (log_hi - log_lo) * Scalar(unit(rng)));
    const Scalar lam = Scalar(1.25) + Scalar(0.75) * Scalar(unit(rng));
    const Scalar a = space.ball_measure(i, r);
    const Scalar b = space.ball_measure(i, lam * r);
    fit.push_back({std::log(lam), std::log(b / a)});
  }

  // Ordinary least squares with intercept; the slope is the exponent.
  Scalar sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& t : fit) {
    sx += t.x;
    sy += t.y;
    sxx += t.x * t.x;
    sxy += t.x * t.y;
  }
  const Scalar m = Scalar(fit.size());
  const Scalar var = sxx - sx * sx / m;
  Scalar Q = var > Scalar(0) ? (sxy - sx * sy / m) / var : Scalar(1);
  if (!(Q > Scalar(0.01))) Q = Scalar(0.01);

  Scalar worst = 0;  // max of log ratio - Q log lambda, i.e. log of the needed C
  for (const auto& t : fit) worst = std::max(worst, t.y - Q * t.x);
  for (const auto& t : sweep) worst = std::max(worst, t.y - Q * t.x);

  DoublingEstimate<Scalar> est;
  est.Q = Q;
  est.C = std::max(Scalar(1), std::exp(worst)) * Scalar(1.5);
  est.sample_count = static_cast<Index>(fit.size() + sweep.size());
  return est;
}

}  // namespace hypfill
