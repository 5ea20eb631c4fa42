#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypfill/common.hpp"
#include "hypfill/space.hpp"

namespace hypfill {

/// Closed-form functions of the scalar point parameter, used by the CLI and
/// the verification suites.  "weier3" is the three-term lacunary cosine sum
/// sum_{j=0}^{2} 2^{-j} cos(2 pi 4^j t), Hoelder-rough at exponent 1/2.
template <typename Scalar>
VecX<Scalar> builtin_sample_function(const PointCloudSpace<Scalar>& space,
                                     const std::string& name) {
  if (!space.has_coordinates())
    throw std::domain_error("builtin functions need point coordinates");
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  VecX<Scalar> f(space.size());
  for (Index i = 0; i < space.size(); ++i) {
    const Scalar t = space.coordinate(i);
    if (name == "const")
      f[i] = Scalar(1);
    else if (name == "lin")
      f[i] = t;
    else if (name == "sin2pi")
      f[i] = std::sin(two_pi * t);
    else if (name == "bump07")
      f[i] = std::pow(std::abs(t - Scalar(0.5)), Scalar(0.7));
    else if (name == "weier3")
      f[i] = std::cos(two_pi * t) + Scalar(0.5) * std::cos(two_pi * Scalar(4) * t) +
             Scalar(0.25) * std::cos(two_pi * Scalar(16) * t);
    else
      throw std::invalid_argument("unknown builtin function '" + name + "'");
  }
  return f;
}

struct TestFunction {
  std::string name;
  double lip;  // Lipschitz constant w.r.t. the space metric; NaN if not Lipschitz
};

/// Default function family for a space.  On the circle only functions that
/// are periodic in the arc parameter are usable; "lin" jumps at the seam.
inline std::vector<TestFunction> default_function_family(MetricKind kind) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  const double pi = std::numbers::pi;
  if (kind == MetricKind::circle)
    return {{"sin2pi", 2 * pi}, {"bump07", nan}, {"weier3", 14 * pi}};
  return {{"lin", 1.0}, {"sin2pi", 2 * pi}, {"bump07", nan}, {"weier3", 14 * pi}};
}

}  // namespace hypfill
