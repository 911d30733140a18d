#pragma once

#include <cmath>

#include "dielmode/common.hpp"

namespace dielmode {

// Closed-form integrals of 1/R kernels over flat triangles and tetrahedra
// with constant source density. These carry the singular parts of the
// boundary and volume operators; everything regular goes through Gauss rules.

// Signed solid angle of triangle (a,b,c) seen from p (van Oosterom-Strackee).
// Positive when p lies on the -n side, n = (b-a)x(c-a).
inline double solid_angle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ra = a - p, rb = b - p, rc = c - p;
  const double la = ra.norm(), lb = rb.norm(), lc = rc.norm();
  const double num = ra.dot(rb.cross(rc));
  const double den = la * lb * lc + ra.dot(rb) * lc + rb.dot(rc) * la + rc.dot(ra) * lb;
  return 2.0 * std::atan2(num, den);
}

namespace detail {

// Per-edge log factor f = ln((R+ + t+)/(R- + t-)) on the branch that avoids
// cancellation. Returns 0 when p sits on the edge line inside the segment
// (callers keep evaluation points off source edges).
inline double edge_log(double tm, double tp, double Rm, double Rp) {
  if (tm + tp > 0.0) {
    const double den = Rm + tm;
    if (den <= 0.0) return 0.0;
    return std::log((Rp + tp) / den);
  }
  const double den = Rp - tp;
  if (den <= 0.0) return 0.0;
  return std::log((Rm - tm) / den);
}

}  // namespace detail

struct TriInvR {
  double I0;   // int_T dA' / |p - r'|
  Vec3 Ivec;   // int_T dA' (p - r') / |p - r'|^3
};

// Potential and field of a unit-density flat triangle. The plane normal is
// taken from the vertex order, which keeps all sign conventions internal.
// Exact for any p not on the triangle's edges.
inline TriInvR tri_inv_r(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  Vec3 nhat = (b - a).cross(c - a);
  const double twoA = nhat.norm();
  TriInvR out{0.0, Vec3::Zero()};
  if (twoA <= 0.0) return out;
  nhat /= twoA;

  const double d = nhat.dot(p - a);
  const Vec3 rho = p - d * nhat;
  const double omega = solid_angle(p, a, b, c);

  const Vec3* v[4] = {&a, &b, &c, &a};
  Vec3 sum_mf = Vec3::Zero();
  double sum_sf = 0.0;
  for (int e = 0; e < 3; ++e) {
    const Vec3& v1 = *v[e];
    const Vec3& v2 = *v[e + 1];
    Vec3 ell = v2 - v1;
    const double L = ell.norm();
    if (L <= 0.0) continue;
    ell /= L;
    const Vec3 m = ell.cross(nhat);
    const double tm = (v1 - rho).dot(ell);
    const double tp = (v2 - rho).dot(ell);
    const double Rm = (p - v1).norm();
    const double Rp = (p - v2).norm();
    const double f = detail::edge_log(tm, tp, Rm, Rp);
    sum_mf += m * f;
    sum_sf += (v1 - rho).dot(m) * f;
  }
  out.I0 = sum_sf + d * omega;
  out.Ivec = sum_mf - nhat * omega;
  return out;
}

// int_T dA' (r' - p) / |r' - p|  (gradient of R integrated over the panel).
// Invariant under vertex reordering; feeds the exact tet potential below.
inline Vec3 tri_grad_r(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  Vec3 nhat = (b - a).cross(c - a);
  const double twoA = nhat.norm();
  if (twoA <= 0.0) return Vec3::Zero();
  nhat /= twoA;

  const double d = nhat.dot(p - a);
  const Vec3 rho = p - d * nhat;
  const double omega = solid_angle(p, a, b, c);

  const Vec3* v[4] = {&a, &b, &c, &a};
  Vec3 sum = Vec3::Zero();
  double I0 = 0.0;
  for (int e = 0; e < 3; ++e) {
    const Vec3& v1 = *v[e];
    const Vec3& v2 = *v[e + 1];
    Vec3 ell = v2 - v1;
    const double L = ell.norm();
    if (L <= 0.0) continue;
    ell /= L;
    const Vec3 m = ell.cross(nhat);
    const double tm = (v1 - rho).dot(ell);
    const double tp = (v2 - rho).dot(ell);
    const double Rm = (p - v1).norm();
    const double Rp = (p - v2).norm();
    const double f = detail::edge_log(tm, tp, Rm, Rp);
    const double s = (v1 - rho).dot(m);
    const double R02 = s * s + d * d;
    sum += m * (0.5 * (tp * Rp - tm * Rm + R02 * f));
    I0 += s * f;
  }
  I0 += d * omega;
  sum -= nhat * (d * I0);
  return sum;
}

// Exact Newtonian potential of a unit-density tetrahedron:
//   int_tet dV' / |p - r'| = (1/2) sum_faces n_f . int_face (r'-p)/R dA'
// with n_f outward.
inline double tet_inv_r(const Vec3& p, const Vec3& t0, const Vec3& t1, const Vec3& t2,
                        const Vec3& t3) {
  const Vec3* v[4] = {&t0, &t1, &t2, &t3};
  // Outward-oriented faces when det[t1-t0, t2-t0, t3-t0] > 0.
  static const int faces[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};
  const double det = (t1 - t0).cross(t2 - t0).dot(t3 - t0);
  const double flip = det >= 0.0 ? 1.0 : -1.0;
  double acc = 0.0;
  for (int f = 0; f < 4; ++f) {
    const Vec3& a = *v[faces[f][0]];
    const Vec3& b = *v[faces[f][1]];
    const Vec3& c = *v[faces[f][2]];
    Vec3 n = (b - a).cross(c - a);
    const double twoA = n.norm();
    if (twoA <= 0.0) continue;
    n /= twoA;
    acc += flip * n.dot(tri_grad_r(p, a, b, c));
  }
  return 0.5 * acc;
}

}  // namespace dielmode
