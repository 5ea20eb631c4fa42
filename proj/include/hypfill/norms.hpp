#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "hypfill/calculus.hpp"
#include "hypfill/common.hpp"
#include "hypfill/filling.hpp"
#include "hypfill/space.hpp"

namespace hypfill {

/// Smoothness / integrability triple (s, p, q); p and q may be infinity.
template <typename Scalar = double>
struct NormParams {
  Scalar s = Scalar(0.5);
  Scalar p = Scalar(2);
  Scalar q = Scalar(2);

  static NormParams make(Scalar s, Scalar p, Scalar q) {
    if (!(s > Scalar(0)) || std::isinf(s)) throw std::domain_error("requires 0 < s < inf");
    if (!(p > Scalar(0))) throw std::domain_error("requires p > 0");
    if (!(q > Scalar(0))) throw std::domain_error("requires q > 0");
    return NormParams{s, p, q};
  }

  /// p must exceed Q/(Q+s) for the function-space norm to be meaningful.
  bool admissible(Scalar Q) const { return p > Q / (Q + s); }
};

enum class NormForm { weighted, overlap };

/// Items (vertices or edges) flattened to what the weighted quasi-norm and
/// the factorization machinery need: a level and a ball mass per item.
template <typename Scalar = double>
struct LeveledItems {
  int level_min = 0;
  int level_max = 0;
  std::vector<int> levels;                 // per item
  VecX<Scalar> measures;                   // per item
  std::vector<std::vector<int>> by_level;  // item ids per level offset

  Index size() const { return measures.size(); }
};

template <typename Scalar>
LeveledItems<Scalar> vertex_items(const HyperbolicFilling<Scalar>& filling) {
  LeveledItems<Scalar> it;
  it.level_min = filling.level_min();
  it.level_max = filling.level_max();
  it.levels.reserve(static_cast<std::size_t>(filling.vertex_count()));
  it.measures.resize(filling.vertex_count());
  it.by_level.assign(static_cast<std::size_t>(filling.level_count()), {});
  for (const auto& v : filling.vertices()) {
    it.levels.push_back(v.level);
    it.measures[v.id] = v.measure;
    it.by_level[static_cast<std::size_t>(v.level - it.level_min)].push_back(v.id);
  }
  return it;
}

template <typename Scalar>
LeveledItems<Scalar> edge_items(const HyperbolicFilling<Scalar>& filling) {
  LeveledItems<Scalar> it;
  it.level_min = filling.level_min();
  it.level_max = filling.level_max();
  it.levels.reserve(static_cast<std::size_t>(filling.edge_count()));
  it.measures.resize(filling.edge_count());
  it.by_level.assign(static_cast<std::size_t>(filling.level_count()), {});
  int id = 0;
  for (const auto& e : filling.edges()) {
    it.levels.push_back(e.level);
    it.measures[id] = e.union_measure;
    it.by_level[static_cast<std::size_t>(e.level - it.level_min)].push_back(id);
    ++id;
  }
  return it;
}

namespace detail {

/// (sum_i w_i |v_i|^p)^{1/p}; for p = inf the plain max of |v_i| (all atoms
/// carry positive mass).  Empty input gives 0.
template <typename Scalar>
Scalar lp_atomic(const VecX<Scalar>& v, const VecX<Scalar>& w, Scalar p) {
  if (v.size() == 0) return Scalar(0);
  if (std::isinf(p)) return v.cwiseAbs().maxCoeff();
  Scalar acc = 0;
  for (Index i = 0; i < v.size(); ++i) acc += w[i] * std::pow(std::abs(v[i]), p);
  return acc == Scalar(0) ? Scalar(0) : std::pow(acc, Scalar(1) / p);
}

/// l^q aggregation of per-level inner norms with geometric scaling:
/// q < inf: (sum_k (2^{k s} inner_k)^q)^{1/q}; q = inf: max_k 2^{k s} inner_k.
template <typename Scalar>
Scalar lq_levels(const std::vector<Scalar>& inner, int level_min, Scalar s, Scalar q) {
  if (std::isinf(q)) {
    Scalar m = 0;
    for (std::size_t j = 0; j < inner.size(); ++j)
      m = std::max(m, std::exp2(Scalar(level_min + static_cast<int>(j)) * s) * inner[j]);
    return m;
  }
  Scalar acc = 0;
  for (std::size_t j = 0; j < inner.size(); ++j) {
    if (inner[j] == Scalar(0)) continue;
    acc += std::pow(std::exp2(Scalar(level_min + static_cast<int>(j)) * s) * inner[j], q);
  }
  return acc == Scalar(0) ? Scalar(0) : std::pow(acc, Scalar(1) / q);
}

/// Per-level inner L^p norms of the weighted form.
template <typename Scalar>
std::vector<Scalar> weighted_inner(const LeveledItems<Scalar>& items, const VecX<Scalar>& u,
                                   Scalar p) {
  std::vector<Scalar> inner(items.by_level.size(), Scalar(0));
  for (std::size_t j = 0; j < items.by_level.size(); ++j) {
    const auto& ids = items.by_level[j];
    if (ids.empty()) continue;
    if (std::isinf(p)) {
      Scalar m = 0;
      for (int i : ids) m = std::max(m, std::abs(u[i]));
      inner[j] = m;
    } else {
      Scalar acc = 0;
      for (int i : ids) acc += items.measures[i] * std::pow(std::abs(u[i]), p);
      inner[j] = acc == Scalar(0) ? Scalar(0) : std::pow(acc, Scalar(1) / p);
    }
  }
  return inner;
}

}  // namespace detail

/// Weighted-form sequence quasi-norm over leveled items:
///   ( sum_k 2^{k s q} ( sum_{|i| = k} mu_i |u_i|^p )^{q/p} )^{1/q}
/// with the usual sup conventions at p = inf or q = inf.
template <typename Scalar>
Scalar weighted_seq_norm(const LeveledItems<Scalar>& items, const VecX<Scalar>& u,
                         const NormParams<Scalar>& prm) {
  if (u.size() != items.size())
    throw std::invalid_argument("weighted_seq_norm: sequence has wrong length");
  return detail::lq_levels(detail::weighted_inner(items, u, prm.p), items.level_min, prm.s,
                           prm.q);
}

/// Per-level contributions 2^{k s} * inner_k of the weighted form (for reports).
template <typename Scalar>
std::vector<Scalar> weighted_seq_norm_levels(const LeveledItems<Scalar>& items,
                                             const VecX<Scalar>& u,
                                             const NormParams<Scalar>& prm) {
  auto inner = detail::weighted_inner(items, u, prm.p);
  for (std::size_t j = 0; j < inner.size(); ++j)
    inner[j] *= std::exp2(Scalar(items.level_min + static_cast<int>(j)) * prm.s);
  return inner;
}

namespace detail {

/// Overlap-form per-level inner norms for vertex sequences:
/// F_k = sum over level-k vertices of |u(x)| chi_{B(x)}, measured in L^p(mu).
template <typename Scalar>
std::vector<Scalar> overlap_inner_x(const HyperbolicFilling<Scalar>& filling,
                                    const PointCloudSpace<Scalar>& space, const VecX<Scalar>& u,
                                    Scalar p) {
  std::vector<Scalar> inner;
  VecX<Scalar> F(space.size());
  for (int n = filling.level_min(); n <= filling.level_max(); ++n) {
    F.setZero();
    auto [b, e] = filling.level_span(n);
    for (int i = b; i < e; ++i)
      for (Index pt : filling.vertex(i).members) F[pt] += std::abs(u[i]);
    inner.push_back(lp_atomic(F, space.weights(), p));
  }
  return inner;
}

/// Overlap-form per-level inner norms for edge sequences; the indicator runs
/// over the union B(tail) cup B(head), each point counted once.
template <typename Scalar>
std::vector<Scalar> overlap_inner_e(const HyperbolicFilling<Scalar>& filling,
                                    const PointCloudSpace<Scalar>& space, const VecX<Scalar>& u,
                                    Scalar p) {
  std::vector<Scalar> inner;
  VecX<Scalar> F(space.size());
  std::vector<int> stamp(static_cast<std::size_t>(space.size()), -1);
  for (int k = filling.level_min(); k <= filling.level_max(); ++k) {
    F.setZero();
    for (int ei : filling.edges_at_level(k)) {
      const auto& e = filling.edge(ei);
      const Scalar a = std::abs(u[ei]);
      for (Index pt : filling.vertex(e.tail).members) {
        stamp[static_cast<std::size_t>(pt)] = ei;
        F[pt] += a;
      }
      for (Index pt : filling.vertex(e.head).members)
        if (stamp[static_cast<std::size_t>(pt)] != ei) F[pt] += a;
    }
    inner.push_back(lp_atomic(F, space.weights(), p));
  }
  return inner;
}

}  // namespace detail

/// Sequence quasi-norm on vertex sequences, in either form.
template <typename Scalar>
Scalar seq_norm_x(const HyperbolicFilling<Scalar>& filling, const PointCloudSpace<Scalar>& space,
                  const VecX<Scalar>& u, const NormParams<Scalar>& prm,
                  NormForm form = NormForm::weighted) {
  detail::require_vertex_size(filling, u, "seq_norm_x");
  if (form == NormForm::weighted) return weighted_seq_norm(vertex_items(filling), u, prm);
  return detail::lq_levels(detail::overlap_inner_x(filling, space, u, prm.p),
                           filling.level_min(), prm.s, prm.q);
}

/// Sequence quasi-norm on edge sequences; an edge lives at the minimum of its
/// endpoint levels and its ball is the union of the endpoint balls.
template <typename Scalar>
Scalar seq_norm_e(const HyperbolicFilling<Scalar>& filling, const PointCloudSpace<Scalar>& space,
                  const VecX<Scalar>& u, const NormParams<Scalar>& prm,
                  NormForm form = NormForm::weighted) {
  detail::require_edge_size(filling, u, "seq_norm_e");
  if (form == NormForm::weighted) return weighted_seq_norm(edge_items(filling), u, prm);
  return detail::lq_levels(detail::overlap_inner_e(filling, space, u, prm.p),
                           filling.level_min(), prm.s, prm.q);
}

/// Per-level contributions of seq_norm_x for reports, in either form.
template <typename Scalar>
std::vector<Scalar> seq_norm_x_levels(const HyperbolicFilling<Scalar>& filling,
                                      const PointCloudSpace<Scalar>& space, const VecX<Scalar>& u,
                                      const NormParams<Scalar>& prm,
                                      NormForm form = NormForm::weighted) {
  detail::require_vertex_size(filling, u, "seq_norm_x_levels");
  std::vector<Scalar> inner = form == NormForm::weighted
                                  ? detail::weighted_inner(vertex_items(filling), u, prm.p)
                                  : detail::overlap_inner_x(filling, space, u, prm.p);
  for (std::size_t j = 0; j < inner.size(); ++j)
    inner[j] *= std::exp2(Scalar(filling.level_min() + static_cast<int>(j)) * prm.s);
  return inner;
}

/// Function-space norm: the weighted sequence quasi-norm of |d(Pf)|.
template <typename Scalar>
Scalar besov_norm(const PointCloudSpace<Scalar>& space, const HyperbolicFilling<Scalar>& filling,
                  const VecX<Scalar>& f, const NormParams<Scalar>& prm) {
  detail::require_sample_size(space, f, "besov_norm");
  const VecX<Scalar> du = vertex_derivative(filling, poisson_extend(space, filling, f));
  return weighted_seq_norm(vertex_items(filling), du, prm);
}

// ---------------------------------------------------------------------------
// Fractional Hajlasz gradients
// ---------------------------------------------------------------------------

/// A family of candidate gradients: g_k for k_min <= k <= k_max, where g_k is
/// matched against sample pairs at distances in [2^{-k-1}, 2^{-k}).
template <typename Scalar = double>
struct HajlaszGradient {
  Scalar s = Scalar(0.5);
  int k_min = 0;
  std::vector<VecX<Scalar>> g;  // g[j] is g_{k_min + j}, one value per sample point

  int k_max() const { return k_min + static_cast<int>(g.size()) - 1; }
  const VecX<Scalar>& at(int k) const { return g[static_cast<std::size_t>(k - k_min)]; }
};

/// The explicit gradient family built from the vertex derivative of Pf:
///   g_k(xi) = 2^{k s} sum over vertices x with |x| >= k of |d(Pf)(x)| chi_{B(x)}(xi),
/// truncated to the available levels.  k runs from the annulus of the
/// diameter (so every realizable pair distance is covered) up to the finest
/// level.
template <typename Scalar>
HajlaszGradient<Scalar> hajlasz_explicit_gradient(const HyperbolicFilling<Scalar>& filling,
                                                  const PointCloudSpace<Scalar>& space,
                                                  const VecX<Scalar>& f, Scalar s) {
  detail::require_sample_size(space, f, "hajlasz_explicit_gradient");
  if (!(s > Scalar(0)) || s > Scalar(1))
    throw std::domain_error("hajlasz_explicit_gradient: requires 0 < s <= 1");
  if (space.size() < 2)
    throw std::domain_error("hajlasz_explicit_gradient: need at least two points");

  const VecX<Scalar> du = vertex_derivative(filling, poisson_extend(space, filling, f));

  // Per-level overlap sums, then suffix-accumulate over levels.
  const int L = filling.level_count();
  std::vector<VecX<Scalar>> level_sum(static_cast<std::size_t>(L));
  for (int n = filling.level_min(); n <= filling.level_max(); ++n) {
    VecX<Scalar> G = VecX<Scalar>::Zero(space.size());
    auto [b, e] = filling.level_span(n);
    for (int i = b; i < e; ++i)
      for (Index pt : filling.vertex(i).members) G[pt] += du[i];
    level_sum[static_cast<std::size_t>(n - filling.level_min())] = std::move(G);
  }
  for (int j = L - 2; j >= 0; --j)
    level_sum[static_cast<std::size_t>(j)] += level_sum[static_cast<std::size_t>(j + 1)];

  HajlaszGradient<Scalar> grad;
  grad.s = s;
  grad.k_min = std::min(annulus_index(static_cast<double>(space.diameter())),
                        filling.level_min());
  for (int k = grad.k_min; k <= filling.level_max(); ++k) {
    const int j = std::max(k, filling.level_min()) - filling.level_min();
    grad.g.push_back(std::exp2(Scalar(k) * s) * level_sum[static_cast<std::size_t>(j)]);
  }
  return grad;
}

template <typename Scalar = double>
struct HajlaszValidation {
  bool valid = true;
  Scalar worst_ratio = 0;  // max of |f(xi)-f(eta)| / (d^s (g_k(xi)+g_k(eta)))
  Index worst_a = -1, worst_b = -1;
  int worst_k = 0;
};

/// Check |f(xi) - f(eta)| <= d(xi,eta)^s (g_k(xi) + g_k(eta)) over sample
/// pairs, with k the dyadic annulus of the pair distance.  Exhaustive for
/// N <= 1024, otherwise 10^6 deterministic random pairs.  A populated annulus
/// outside the gradient's range is an error.
template <typename Scalar>
HajlaszValidation<Scalar> hajlasz_validate(const PointCloudSpace<Scalar>& space,
                                           const VecX<Scalar>& f,
                                           const HajlaszGradient<Scalar>& grad, Scalar s) {
  detail::require_sample_size(space, f, "hajlasz_validate");
  if (!(s > Scalar(0)) || s > Scalar(1))
    throw std::domain_error("hajlasz_validate: requires 0 < s <= 1");
  HajlaszValidation<Scalar> res;

  auto consider = [&](Index a, Index b) {
    const Scalar d = space.distance(a, b);
    const int k = annulus_index(static_cast<double>(d));
    if (k < grad.k_min || k > grad.k_max())
      throw std::domain_error("hajlasz_validate: gradient misses populated annulus k = " +
                              std::to_string(k));
    const Scalar num = std::abs(f[a] - f[b]);
    if (num == Scalar(0)) return;
    const Scalar den = std::pow(d, s) * (grad.at(k)[a] + grad.at(k)[b]);
    const Scalar ratio = den > Scalar(0) ? num / den : infinity<Scalar>();
    if (ratio > res.worst_ratio) {
      res.worst_ratio = ratio;
      res.worst_a = a;
      res.worst_b = b;
      res.worst_k = k;
    }
  };

  const Index N = space.size();
  if (N <= 1024) {
    for (Index a = 0; a < N; ++a)
      for (Index b = a + 1; b < N; ++b) consider(a, b);
  } else {
    std::mt19937_64 rng(0xFACADEull);
    std::uniform_int_distribution<Index> pick(0, N - 1);
    for (int t = 0; t < 1000000; ++t) {
      const Index a = pick(rng), b = pick(rng);
      if (a != b) consider(a, b);
    }
  }
  res.valid = res.worst_ratio <= Scalar(1) + Scalar(1e-12);
  return res;
}

/// l^q over k of the L^p(mu) norms of the g_k (no geometric scaling).
template <typename Scalar>
Scalar hajlasz_norm(const PointCloudSpace<Scalar>& space, const HajlaszGradient<Scalar>& grad,
                    Scalar p, Scalar q) {
  if (!(p > Scalar(0)) || !(q > Scalar(0))) throw std::domain_error("hajlasz_norm: p, q > 0");
  std::vector<Scalar> inner;
  inner.reserve(grad.g.size());
  for (const auto& gk : grad.g) inner.push_back(detail::lp_atomic(gk, space.weights(), p));
  return detail::lq_levels(inner, 0, Scalar(0), q);  // scale exponent 0: plain l^q
}

}  // namespace hypfill
