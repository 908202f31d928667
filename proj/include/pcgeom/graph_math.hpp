#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace pcgeom {

/**
 * Forward-mode dual scalar carrying six partial derivatives, used to
 * differentiate the graph-geometry formulas with respect to the six
 * height-jet values (s, s_u, s_v, s_uu, s_uv, s_vv) at one evaluation
 * point. Arithmetic follows the usual dual-number rules.
 */
struct D6 {
  double v = 0.0;
  Eigen::Matrix<double, 6, 1> g = Eigen::Matrix<double, 6, 1>::Zero();

  D6() = default;
  D6(double value) : v(value) {}  // constant (zero gradient)
  static D6 seeded(double value, int slot) {
    D6 d(value);
    d.g(slot) = 1.0;
    return d;
  }
};

inline D6 operator+(const D6& a, const D6& b) {
  D6 r(a.v + b.v);
  r.g = a.g + b.g;
  return r;
}
inline D6 operator-(const D6& a, const D6& b) {
  D6 r(a.v - b.v);
  r.g = a.g - b.g;
  return r;
}
inline D6 operator-(const D6& a) {
  D6 r(-a.v);
  r.g = -a.g;
  return r;
}
inline D6 operator*(const D6& a, const D6& b) {
  D6 r(a.v * b.v);
  r.g = a.v * b.g + b.v * a.g;
  return r;
}
inline D6 operator/(const D6& a, const D6& b) {
  D6 r(a.v / b.v);
  r.g = (a.g - r.v * b.g) / b.v;
  return r;
}
inline D6 sqrt(const D6& a) {
  D6 r(std::sqrt(a.v));
  r.g = a.g / (2.0 * r.v);
  return r;
}

/**
 * Graph geometry of a height surface w = s(u, v) in rescaled patch
 * coordinates, written generically so it can run on plain doubles or on
 * D6 duals. Input d[] holds the jet (s, s_u, s_v, s_uu, s_uv, s_vv) of
 * the dimensionless fit; ratio = delta/epsilon and ratio2 =
 * delta/epsilon^2 convert it to physical slopes h_a and curvatures h_ab.
 */
template <typename S>
struct GraphOutputs {
  S s;
  S eta0, eta1, eta2;
  S i00, i01, i11;
  S iinv00, iinv01, iinv11;
  S ii00, ii01, ii11;
  S gauss;
  S mean;
};

template <typename S>
GraphOutputs<S> graph_outputs(const S d[6], double ratio, double ratio2) {
  using std::sqrt;  // fall back to ADL sqrt for dual types
  const S h1 = ratio * d[1];
  const S h2 = ratio * d[2];
  const S h11 = ratio2 * d[3];
  const S h12 = ratio2 * d[4];
  const S h22 = ratio2 * d[5];

  const S w2 = 1.0 + h1 * h1 + h2 * h2;
  const S W = sqrt(w2);

  GraphOutputs<S> o;
  o.s = d[0];
  o.eta0 = -h1 / W;
  o.eta1 = -h2 / W;
  o.eta2 = S(1.0) / W;
  o.i00 = 1.0 + h1 * h1;
  o.i01 = h1 * h2;
  o.i11 = 1.0 + h2 * h2;
  o.iinv00 = o.i11 / w2;
  o.iinv01 = -(o.i01) / w2;
  o.iinv11 = o.i00 / w2;
  o.ii00 = h11 / W;
  o.ii01 = h12 / W;
  o.ii11 = h22 / W;
  o.gauss = (o.ii00 * o.ii11 - o.ii01 * o.ii01) / w2;
  o.mean = (o.ii00 * o.i11 - 2.0 * o.ii01 * o.i01 + o.ii11 * o.i00) / (2.0 * w2);
  return o;
}

// D6 needs mixed arithmetic with double literals used above.
inline D6 operator+(double a, const D6& b) { return D6(a) + b; }
inline D6 operator+(const D6& a, double b) { return a + D6(b); }
inline D6 operator-(double a, const D6& b) { return D6(a) - b; }
inline D6 operator-(const D6& a, double b) { return a - D6(b); }
inline D6 operator*(double a, const D6& b) { return D6(a) * b; }
inline D6 operator*(const D6& a, double b) { return a * D6(b); }
inline D6 operator/(double a, const D6& b) { return D6(a) / b; }
inline D6 operator/(const D6& a, double b) { return a / D6(b); }

}  // namespace pcgeom
