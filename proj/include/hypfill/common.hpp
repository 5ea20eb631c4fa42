#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hypfill {

using Index = Eigen::Index;

template <typename Scalar>
using VecX = Eigen::Vector<Scalar, Eigen::Dynamic>;

template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
constexpr Scalar infinity() {
  return std::numeric_limits<Scalar>::infinity();
}

/// 2^e, exact in binary floating point.
template <typename Scalar>
Scalar pow2(int e) {
  return static_cast<Scalar>(std::ldexp(1.0, e));
}

/// base^e with the convention base^0 = 1, including base = 0.
template <typename Scalar>
Scalar pow_or_one(Scalar base, Scalar e) {
  return e == Scalar(0) ? Scalar(1) : std::pow(base, e);
}

/// 1/x with 1/inf = 0.
template <typename Scalar>
Scalar reciprocal(Scalar x) {
  return std::isinf(x) ? Scalar(0) : Scalar(1) / x;
}

/// Dyadic annulus index: the unique k with 2^{-k-1} <= d < 2^{-k}.
/// Exact for all positive doubles (frexp is lossless).
inline int annulus_index(double d) {
  if (!(d > 0)) throw std::domain_error("annulus_index: distance must be positive");
  int e = 0;
  std::frexp(d, &e);
  return -e;
}

/// FNV-1a 64-bit hash; stable fingerprint for run configurations.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return out;
}

}  // namespace hypfill
