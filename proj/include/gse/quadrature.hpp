#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

namespace gse {

/// Degree-4 six-point rule on a triangle (weights sum to 1, scaled by area).
struct TriRulePoint {
  double l0, l1, l2;  // barycentric coordinates
  double w;
};
const std::array<TriRulePoint, 6>& tri_rule_deg4();

/// 3-point Gauss-Legendre rule on [-1, 1] (exact to degree 5).
struct Gauss1dPoint {
  double t, w;
};
const std::array<Gauss1dPoint, 3>& gauss3();

/// Tensorized 3x3 Gauss rule on the reference square [-1,1]^2.
struct QuadRulePoint {
  double xi, eta, w;
};
const std::array<QuadRulePoint, 9>& quad_rule_3x3();

}  // namespace gse
