#pragma once

#include <cmath>
#include <stdexcept>

#include "hypfill/common.hpp"
#include "hypfill/norms.hpp"

namespace hypfill {

/// Interpolation parameter arithmetic with the conventions 1/inf = 0:
///   1/p = (1-theta)/p0 + theta/p1,  1/q likewise,  s = (1-theta) s0 + theta s1.
template <typename Scalar>
NormParams<Scalar> interp_params(const NormParams<Scalar>& a, const NormParams<Scalar>& b,
                                 Scalar theta) {
  if (!(theta > Scalar(0)) || !(theta < Scalar(1)))
    throw std::domain_error("interp_params: theta must lie in (0, 1)");
  auto combine = [&](Scalar x0, Scalar x1) {
    const Scalar inv = (Scalar(1) - theta) * reciprocal(x0) + theta * reciprocal(x1);
    return inv == Scalar(0) ? infinity<Scalar>() : Scalar(1) / inv;
  };
  NormParams<Scalar> out;
  out.s = (Scalar(1) - theta) * a.s + theta * b.s;
  out.p = combine(a.p, b.p);
  out.q = combine(a.q, b.q);
  return out;
}

/// Recover theta from 1/p = (1-theta)/p0 + theta/p1 (requires p0 != p1).
template <typename Scalar>
Scalar solve_interp_theta(Scalar p0, Scalar p1, Scalar p) {
  const Scalar d = reciprocal(p1) - reciprocal(p0);
  if (d == Scalar(0)) throw std::domain_error("solve_interp_theta: p0 == p1");
  return (reciprocal(p) - reciprocal(p0)) / d;
}

/// Exact two-factor splitting of a sequence: |u| = u0^{1-theta} u1^theta with
/// u_i built for the endpoint spaces.  Norms are taken in the weighted form.
template <typename Scalar = double>
struct FactorizationCertificate {
  VecX<Scalar> u0, u1;
  Scalar theta = 0;
  NormParams<Scalar> params0, params1, params;
  Scalar max_pointwise_error = 0;  // max |u0^{1-theta} u1^theta - |u||
  Scalar norm_u0 = 0, norm_u1 = 0, norm_u = 0;
  Scalar bound_ratio = 0;  // norm_u0^{1-theta} norm_u1^theta / norm_u
};

/// Split |u| between the endpoint spaces (s_i, p_i, q_i).
///
/// Three regimes:
///   - min(q0, q1) < inf:
///       u_i(x) = 2^{(q/q_i) s k - s_i k} |u(x)|^{p/p_i} A_k^{q/(q_i p) - 1/p_i}
///   - q0 = q1 = inf (so q = inf):
///       u_i(x) = 2^{(s - s_i) k} |u(x)|^{p/p_i} A_k^{1/p - 1/p_i}
///   - p0 = p1 = inf (so p = inf; no level sums exist):
///       u_i(x) = 2^{(s - s_i) k} |u(x)|
/// where k is the item's level and A_k = sum over level-k items of
/// mu_i |u_i|^p.  Levels with A_k = 0 produce zero factors.
template <typename Scalar>
FactorizationCertificate<Scalar> calderon_factorize(const LeveledItems<Scalar>& items,
                                                    const VecX<Scalar>& u,
                                                    const NormParams<Scalar>& P0,
                                                    const NormParams<Scalar>& P1, Scalar theta) {
  if (u.size() != items.size())
    throw std::invalid_argument("calderon_factorize: sequence has wrong length");
  if (u.cwiseAbs().maxCoeff() == Scalar(0))
    throw std::domain_error("calderon_factorize: sequence must be nonzero");

  FactorizationCertificate<Scalar> cert;
  cert.theta = theta;
  cert.params0 = P0;
  cert.params1 = P1;
  cert.params = interp_params(P0, P1, theta);
  const NormParams<Scalar>& P = cert.params;

  const Index n = items.size();
  cert.u0.resize(n);
  cert.u1.resize(n);

  const bool both_p_inf = std::isinf(P0.p) && std::isinf(P1.p);
  const bool some_q_finite = !(std::isinf(P0.q) && std::isinf(P1.q));

  // Level sums A_k of the interpolated space (finite p only).
  std::vector<Scalar> A(items.by_level.size(), Scalar(0));
  if (!both_p_inf) {
    for (Index i = 0; i < n; ++i)
      A[static_cast<std::size_t>(items.levels[static_cast<std::size_t>(i)] - items.level_min)] +=
          items.measures[i] * std::pow(std::abs(u[i]), P.p);
  }

  auto fill_factor = [&](VecX<Scalar>& ui, const NormParams<Scalar>& Pi) {
    const Scalar inv_pi = reciprocal(Pi.p);
    const Scalar inv_qi = reciprocal(Pi.q);
    for (Index i = 0; i < n; ++i) {
      const int k = items.levels[static_cast<std::size_t>(i)];
      const Scalar absu = std::abs(u[i]);
      if (both_p_inf) {
        ui[i] = std::exp2(Scalar(k) * (P.s - Pi.s)) * absu;
        continue;
      }
      const Scalar Ak = A[static_cast<std::size_t>(k - items.level_min)];
      if (Ak == Scalar(0)) {
        ui[i] = Scalar(0);
        continue;
      }
      Scalar exp2k, bracket_e;
      if (some_q_finite) {
        exp2k = (P.q * inv_qi) * P.s * Scalar(k) - Pi.s * Scalar(k);
        bracket_e = P.q * inv_qi / P.p - inv_pi;
      } else {
        exp2k = (P.s - Pi.s) * Scalar(k);
        bracket_e = Scalar(1) / P.p - inv_pi;
      }
      ui[i] = std::exp2(exp2k) * pow_or_one(absu, P.p * inv_pi) * pow_or_one(Ak, bracket_e);
    }
  };
  fill_factor(cert.u0, P0);
  fill_factor(cert.u1, P1);

  Scalar err = 0;
  for (Index i = 0; i < n; ++i) {
    const Scalar prod = std::pow(cert.u0[i], Scalar(1) - theta) * std::pow(cert.u1[i], theta);
    err = std::max(err, std::abs(prod - std::abs(u[i])));
  }
  cert.max_pointwise_error = err;

  cert.norm_u0 = weighted_seq_norm(items, cert.u0, P0);
  cert.norm_u1 = weighted_seq_norm(items, cert.u1, P1);
  cert.norm_u = weighted_seq_norm(items, u, P);
  cert.bound_ratio = std::pow(cert.norm_u0, Scalar(1) - theta) *
                     std::pow(cert.norm_u1, theta) / cert.norm_u;
  return cert;
}

/// Recheck a certificate's factorization identity against the sequence it
/// claims to split.
template <typename Scalar>
bool validate_certificate(const FactorizationCertificate<Scalar>& cert, const VecX<Scalar>& u,
                          Scalar tol = Scalar(1e-12)) {
  if (cert.u0.size() != u.size() || cert.u1.size() != u.size()) return false;
  const Scalar scale = Scalar(1) + u.cwiseAbs().maxCoeff();
  for (Index i = 0; i < u.size(); ++i) {
    const Scalar prod =
        std::pow(cert.u0[i], Scalar(1) - cert.theta) * std::pow(cert.u1[i], cert.theta);
    if (std::abs(prod - std::abs(u[i])) > tol * scale) return false;
  }
  return true;
}

/// Product-space membership gauge: normalize the witnesses v_i in their
/// endpoint norms, then return sup over items of |u| / (v0^{1-theta} v1^theta)
/// with 0/0 = 0 and z/0 = +inf for z > 0.
template <typename Scalar>
Scalar calderon_verify(const LeveledItems<Scalar>& items, const VecX<Scalar>& u,
                       const VecX<Scalar>& v0, const VecX<Scalar>& v1,
                       const NormParams<Scalar>& P0, const NormParams<Scalar>& P1,
                       Scalar theta) {
  if (u.size() != items.size() || v0.size() != items.size() || v1.size() != items.size())
    throw std::invalid_argument("calderon_verify: sequence has wrong length");
  if (!(theta > Scalar(0)) || !(theta < Scalar(1)))
    throw std::domain_error("calderon_verify: theta must lie in (0, 1)");
  const Scalar n0 = weighted_seq_norm(items, v0, P0);
  const Scalar n1 = weighted_seq_norm(items, v1, P1);
  if (n0 == Scalar(0) || n1 == Scalar(0))
    throw std::domain_error("calderon_verify: witnesses must be nonzero");
  Scalar sup = 0;
  for (Index i = 0; i < u.size(); ++i) {
    const Scalar num = std::abs(u[i]);
    if (num == Scalar(0)) continue;
    const Scalar den = std::pow(std::abs(v0[i]) / n0, Scalar(1) - theta) *
                       std::pow(std::abs(v1[i]) / n1, theta);
    if (den == Scalar(0)) return infinity<Scalar>();
    sup = std::max(sup, num / den);
  }
  return sup;
}

}  // namespace hypfill
