#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "hypfill/common.hpp"
#include "hypfill/filling.hpp"
#include "hypfill/space.hpp"

namespace hypfill {

namespace detail {

template <typename Scalar>
void require_sample_size(const PointCloudSpace<Scalar>& space, const VecX<Scalar>& f,
                         const char* what) {
  if (f.size() != space.size())
    throw std::invalid_argument(std::string(what) + ": sample function has wrong length");
}

template <typename Scalar>
void require_vertex_size(const HyperbolicFilling<Scalar>& filling, const VecX<Scalar>& u,
                         const char* what) {
  if (u.size() != filling.vertex_count())
    throw std::invalid_argument(std::string(what) + ": vertex sequence has wrong length");
}

template <typename Scalar>
void require_edge_size(const HyperbolicFilling<Scalar>& filling, const VecX<Scalar>& u,
                       const char* what) {
  if (u.size() != filling.edge_count())
    throw std::invalid_argument(std::string(what) + ": edge sequence has wrong length");
}

}  // namespace detail

/// Harmonic-type extension: Pf(x) is the mu-weighted mean of f over the
/// members of B(x).  Accumulated relative to the center value so a constant
/// input extends to the same bit pattern on every vertex.
template <typename Scalar>
VecX<Scalar> poisson_extend(const PointCloudSpace<Scalar>& space,
                            const HyperbolicFilling<Scalar>& filling, const VecX<Scalar>& f) {
  detail::require_sample_size(space, f, "poisson_extend");
  VecX<Scalar> u(filling.vertex_count());
  for (const auto& v : filling.vertices()) {
    const Scalar base = f[v.center];
    Scalar acc = 0;
    for (Index p : v.members) acc += space.weight(p) * (f[p] - base);
    u[v.id] = base + acc / v.measure;
  }
  return u;
}

/// Vertex derivative magnitude: |du|(x) = sqrt(sum over neighbors x' of
/// |u(x') - u(x)|^2).  Isolated vertices get 0.
template <typename Scalar>
VecX<Scalar> vertex_derivative(const HyperbolicFilling<Scalar>& filling, const VecX<Scalar>& u) {
  detail::require_vertex_size(filling, u, "vertex_derivative");
  VecX<Scalar> du(filling.vertex_count());
  for (const auto& v : filling.vertices()) {
    Scalar acc = 0;
    for (int nb : filling.neighbors(v.id)) {
      const Scalar diff = u[nb] - u[v.id];
      acc += diff * diff;
    }
    du[v.id] = std::sqrt(acc);
  }
  return du;
}

/// Oriented edge derivative: dv(e) = v(head) - v(tail).
template <typename Scalar>
VecX<Scalar> edge_derivative(const HyperbolicFilling<Scalar>& filling, const VecX<Scalar>& v) {
  detail::require_vertex_size(filling, v, "edge_derivative");
  VecX<Scalar> dv(filling.edge_count());
  Index i = 0;
  for (const auto& e : filling.edges()) dv[i++] = v[e.head] - v[e.tail];
  return dv;
}

/// T_n u = sum over level-n vertices of u(x) psi_x, a sample function.
template <typename Scalar>
VecX<Scalar> discrete_convolution(const HyperbolicFilling<Scalar>& filling,
                                  const PointCloudSpace<Scalar>& space, const VecX<Scalar>& u,
                                  int n) {
  detail::require_vertex_size(filling, u, "discrete_convolution");
  filling.check_level(n);
  const MatX<Scalar> psi = detail::tent_matrix(filling, space, n);
  auto [b, e] = filling.level_span(n);
  return psi.transpose() * u.segment(b, e - b);
}

template <typename Scalar = double>
struct TraceResult {
  VecX<Scalar> values;                 // T_{n_max} u
  std::vector<Scalar> l1_increments;   // ||T_{n+1} u - T_n u||_{L^1(mu)} per step
};

/// Boundary trace at the finest level, with the per-level L^1 increments as a
/// convergence diagnostic.
template <typename Scalar>
TraceResult<Scalar> trace(const HyperbolicFilling<Scalar>& filling,
                          const PointCloudSpace<Scalar>& space, const VecX<Scalar>& u) {
  detail::require_vertex_size(filling, u, "trace");
  TraceResult<Scalar> out;
  VecX<Scalar> prev = discrete_convolution(filling, space, u, filling.level_min());
  for (int n = filling.level_min() + 1; n <= filling.level_max(); ++n) {
    VecX<Scalar> cur = discrete_convolution(filling, space, u, n);
    out.l1_increments.push_back(((cur - prev).cwiseAbs().array() * space.weights().array()).sum());
    prev = std::move(cur);
  }
  out.values = std::move(prev);
  return out;
}

/// Averaging operator over finer scales:
///   Tu(x) = sum over y with |y| >= |x| and B(y) meeting B(x) of
///           mu(B(y))/mu(B(x)) u(y),
/// truncated at the finest available level.  On a sampled space a ball is its
/// member set, so "B(y) meets B(x)" means the member sets share a point.
template <typename Scalar>
VecX<Scalar> t_operator(const HyperbolicFilling<Scalar>& filling, const VecX<Scalar>& u) {
  detail::require_vertex_size(filling, u, "t_operator");
  Index sample_size = 0;
  for (const auto& v : filling.vertices())
    for (Index m : v.members) sample_size = std::max(sample_size, m + 1);
  std::vector<char> in_x(static_cast<std::size_t>(sample_size), 0);
  VecX<Scalar> out(filling.vertex_count());
  for (const auto& x : filling.vertices()) {
    for (Index m : x.members) in_x[static_cast<std::size_t>(m)] = 1;
    Scalar acc = 0;
    for (int lev = x.level; lev <= filling.level_max(); ++lev) {
      auto [b, e] = filling.level_span(lev);
      for (int yi = b; yi < e; ++yi) {
        const auto& y = filling.vertex(yi);
        const bool meets = std::any_of(y.members.begin(), y.members.end(), [&](Index m) {
          return in_x[static_cast<std::size_t>(m)] != 0;
        });
        if (meets) acc += y.measure / x.measure * u[yi];
      }
    }
    out[x.id] = acc;
    for (Index m : x.members) in_x[static_cast<std::size_t>(m)] = 0;
  }
  return out;
}

/// Edge integration against products of consecutive partitions of unity:
///   I_n u = sum over edges (y, y') from level n to n+1 of
///           u(e) psi_y psi_{y'},
///   (integrate_edges) = sum of I_n u over n, minus the same sums evaluated
///   at the basepoint for the negative levels.
template <typename Scalar>
VecX<Scalar> integrate_edges(const HyperbolicFilling<Scalar>& filling,
                             const PointCloudSpace<Scalar>& space, const VecX<Scalar>& u,
                             Index basepoint) {
  detail::require_edge_size(filling, u, "integrate_edges");
  if (filling.level_count() < 2)
    throw std::domain_error("integrate_edges: needs at least two levels");
  if (basepoint < 0 || basepoint >= space.size())
    throw std::invalid_argument("integrate_edges: basepoint out of range");

  VecX<Scalar> out = VecX<Scalar>::Zero(space.size());
  MatX<Scalar> psi_lo = detail::tent_matrix(filling, space, filling.level_min());
  for (int n = filling.level_min(); n < filling.level_max(); ++n) {
    MatX<Scalar> psi_hi = detail::tent_matrix(filling, space, n + 1);
    auto [b_lo, e_lo] = filling.level_span(n);
    auto [b_hi, e_hi] = filling.level_span(n + 1);
    (void)e_lo;
    (void)e_hi;
    VecX<Scalar> incr = VecX<Scalar>::Zero(space.size());
    for (int ei : filling.cross_edges_at(n)) {
      const auto& e = filling.edge(ei);
      incr.array() += u[ei] * psi_lo.row(e.tail - b_lo).array().transpose() *
                      psi_hi.row(e.head - b_hi).array().transpose();
    }
    out += incr;
    if (n <= -1) out.array() -= incr[basepoint];
    psi_lo = std::move(psi_hi);
  }
  return out;
}

}  // namespace hypfill
