#pragma once

#include <array>
#include <cstddef>

#include "dielmode/common.hpp"

namespace dielmode {

// Symmetric Gauss rules on the reference triangle / tetrahedron, expressed in
// barycentric coordinates with weights summing to 1 (multiply by the element
// measure).

struct TriRulePoint {
  double l1, l2, l3;
  double w;
};

inline const std::array<TriRulePoint, 1>& tri_rule_1() {
  static const std::array<TriRulePoint, 1> r = {{{1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0}}};
  return r;
}

inline const std::array<TriRulePoint, 3>& tri_rule_3() {
  static const std::array<TriRulePoint, 3> r = {{
      {2.0 / 3, 1.0 / 6, 1.0 / 6, 1.0 / 3},
      {1.0 / 6, 2.0 / 3, 1.0 / 6, 1.0 / 3},
      {1.0 / 6, 1.0 / 6, 2.0 / 3, 1.0 / 3},
  }};
  return r;
}

// Degree-5 rule (7 points).
inline const std::array<TriRulePoint, 7>& tri_rule_7() {
  const double a = 0.059715871789770, b = 0.470142064105115, wa = 0.132394152788506;
  const double c = 0.797426985353087, d = 0.101286507323456, wc = 0.125939180544827;
  static const std::array<TriRulePoint, 7> r = {{
      {1.0 / 3, 1.0 / 3, 1.0 / 3, 0.225},
      {a, b, b, wa},
      {b, a, b, wa},
      {b, b, a, wa},
      {c, d, d, wc},
      {d, c, d, wc},
      {d, d, c, wc},
  }};
  return r;
}

struct TetRulePoint {
  double l1, l2, l3, l4;
  double w;
};

inline const std::array<TetRulePoint, 1>& tet_rule_1() {
  static const std::array<TetRulePoint, 1> r = {{{0.25, 0.25, 0.25, 0.25, 1.0}}};
  return r;
}

// Degree-2 rule (4 points).
inline const std::array<TetRulePoint, 4>& tet_rule_4() {
  const double a = 0.585410196624969, b = 0.138196601125011;
  static const std::array<TetRulePoint, 4> r = {{
      {a, b, b, b, 0.25},
      {b, a, b, b, 0.25},
      {b, b, a, b, 0.25},
      {b, b, b, a, 0.25},
  }};
  return r;
}

// Degree-4 rule (11 points, Keast); has one negative weight but stays
// well-behaved for the smooth kernels it is used on.
inline const std::array<TetRulePoint, 11>& tet_rule_11() {
  const double a = 0.785714285714286, b = 0.071428571428571;
  const double c = 0.399403576166799, d = 0.100596423833201;
  const double w0 = -0.013155555555556 * 6.0, w1 = 0.007622222222222 * 6.0,
               w2 = 0.024888888888889 * 6.0;
  static const std::array<TetRulePoint, 11> r = {{
      {0.25, 0.25, 0.25, 0.25, w0},
      {a, b, b, b, w1},
      {b, a, b, b, w1},
      {b, b, a, b, w1},
      {b, b, b, a, w1},
      {c, c, d, d, w2},
      {c, d, c, d, w2},
      {c, d, d, c, w2},
      {d, c, c, d, w2},
      {d, c, d, c, w2},
      {d, d, c, c, w2},
  }};
  return r;
}

// 8-point Gauss-Legendre on [-1, 1].
struct SegRulePoint {
  double x, w;
};

inline const std::array<SegRulePoint, 8>& segment_rule_8() {
  static const std::array<SegRulePoint, 8> r = {{
      {-0.960289856497536, 0.101228536290376},
      {-0.796666477413627, 0.222381034453374},
      {-0.525532409916329, 0.313706645877887},
      {-0.183434642495650, 0.362683783378362},
      {0.183434642495650, 0.362683783378362},
      {0.525532409916329, 0.313706645877887},
      {0.796666477413627, 0.222381034453374},
      {0.960289856497536, 0.101228536290376},
  }};
  return r;
}

}  // namespace dielmode
