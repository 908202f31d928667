#include "pcgeom/shapes.hpp"

#include <cmath>
#include <numbers>

#include "pcgeom/numeric.hpp"
#include "pcgeom/quadrature.hpp"
#include "pcgeom/rng.hpp"
#include "pcgeom/sph_harm.hpp"

namespace pcgeom {
namespace {

constexpr double kPi = std::numbers::pi;

// Chart-1 axes: local z maps to world x, so the rotated chart's poles sit on
// the world x-axis.
Eigen::Matrix3d chart1_rotation() {
  Eigen::Matrix3d R;
  R << 0, 0, 1,
       0, 1, 0,
      -1, 0, 0;
  return R;
}

const Eigen::Matrix3d kChart1R = chart1_rotation();

}  // namespace

void RadialShape::chart_angles(int chart, const Eigen::Vector3d& direction, double& theta,
                               double& phi) {
  Eigen::Vector3d l = (chart == 0) ? direction : Eigen::Vector3d(kChart1R.transpose() * direction);
  theta = std::atan2(std::hypot(l.x(), l.y()), l.z());
  phi = std::atan2(l.y(), l.x());
}

Eigen::Vector3d RadialShape::chart_direction(int chart, double theta, double phi) {
  Eigen::Vector3d l(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                    std::cos(theta));
  return (chart == 0) ? l : Eigen::Vector3d(kChart1R * l);
}

int RadialShape::better_chart(const Eigen::Vector3d& direction) const {
  // Larger sin(theta) means farther from that chart's poles.
  double s0 = 1.0 - direction.z() * direction.z();
  double s1 = 1.0 - direction.x() * direction.x();
  return (s0 >= s1) ? 0 : 1;
}

double RadialShape::radius(const Eigen::Vector3d& direction) const {
  int chart = better_chart(direction);
  double theta, phi;
  chart_angles(chart, direction, theta, phi);
  const auto& c = (chart == 0) ? real_coeff_chart0 : real_coeff_chart1;
  return eval_real_sh_value_sum(max_degree, c, theta, phi);
}

ChartJet RadialShape::jet(int chart, double theta, double phi) const {
  if (chart < 0 || chart > 1) throw ConfigError("RadialShape: chart must be 0 or 1");
  double st = std::sin(theta), ct = std::cos(theta);
  if (std::abs(st) < 1e-8)
    throw NumericalError("RadialShape::jet: sin(theta) < 1e-8, use the other chart");
  double sp = std::sin(phi), cp = std::cos(phi);

  const auto& coeffs = (chart == 0) ? real_coeff_chart0 : real_coeff_chart1;
  ShDerivs r = eval_real_sh_sum(max_degree, coeffs, theta, phi);

  Eigen::Vector3d d(st * cp, st * sp, ct);
  Eigen::Vector3d dt(ct * cp, ct * sp, -st);
  Eigen::Vector3d dp(-st * sp, st * cp, 0.0);
  Eigen::Vector3d dtt = -d;
  Eigen::Vector3d dtp(-ct * sp, ct * cp, 0.0);
  Eigen::Vector3d dpp(-st * cp, -st * sp, 0.0);

  ChartJet out;
  out.p = r.val * d;
  out.du = r.dt * d + r.val * dt;
  out.dv = r.dp * d + r.val * dp;
  out.duu = r.dtt * d + 2.0 * r.dt * dt + r.val * dtt;
  out.duv = r.dtp * d + r.dt * dp + r.dp * dt + r.val * dtp;
  out.dvv = r.dpp * d + 2.0 * r.dp * dp + r.val * dpp;

  if (chart == 1) {
    out.p = kChart1R * out.p;
    out.du = kChart1R * out.du;
    out.dv = kChart1R * out.dv;
    out.duu = kChart1R * out.duu;
    out.duv = kChart1R * out.duv;
    out.dvv = kChart1R * out.dvv;
  }
  return out;
}

std::array<double, 4> RadialShape::chart0_domain() const { return {0.0, kPi, 0.0, 2.0 * kPi}; }

void RadialShape::normalize_coords(int& chart, double& u, double& v,
                                   const Eigen::Vector3d& position) const {
  Eigen::Vector3d dir = position.normalized();
  chart = better_chart(dir);
  chart_angles(chart, dir, u, v);
}

void RadialShape::refresh_real_coefficients() {
  int L = max_degree;
  std::size_t n = static_cast<std::size_t>((L + 1) * (L + 1));
  real_coeff_chart0.assign(n, 0.0);
  const double sqrt2 = std::numbers::sqrt2;
  for (int l = 0; l <= L; ++l) {
    real_coeff_chart0[static_cast<std::size_t>(sh_index(l, 0))] =
        coeff[static_cast<std::size_t>(sh_index(l, 0))].real();
    for (int m = 1; m <= l; ++m) {
      std::complex<double> a = coeff[static_cast<std::size_t>(sh_index(l, m))];
      real_coeff_chart0[static_cast<std::size_t>(sh_index(l, m))] = sqrt2 * a.real();
      real_coeff_chart0[static_cast<std::size_t>(sh_index(l, -m))] = -sqrt2 * a.imag();
    }
  }

  // Chart-1 coefficients by exact quadrature projection of the rotated radius
  // function: the integrand is a spherical polynomial of degree <= 2L, well
  // inside the rule's exactness.
  real_coeff_chart1.assign(n, 0.0);
  int ntheta = 2 * L + 2;
  int nphi = 4 * L + 4;
  GaussLegendre gl(ntheta);
  std::vector<double> basis;
  for (int i = 0; i < ntheta; ++i) {
    double x = gl.nodes[static_cast<std::size_t>(i)];
    double theta = std::acos(x);
    double wt = gl.weights[static_cast<std::size_t>(i)] * (2.0 * kPi / nphi);
    for (int j = 0; j < nphi; ++j) {
      double phi = 2.0 * kPi * j / nphi;
      Eigen::Vector3d world_dir = kChart1R * chart_direction(0, theta, phi);
      double t0, p0;
      chart_angles(0, world_dir, t0, p0);
      double f = eval_real_sh_value_sum(L, real_coeff_chart0, t0, p0);
      eval_real_sh_all_values(L, theta, phi, basis);
      for (std::size_t k = 0; k < n; ++k) real_coeff_chart1[k] += wt * f * basis[k];
    }
  }
}

RadialShape generate_radial_shape(int max_degree, std::uint64_t seed) {
  if (max_degree < 0) throw ConfigError("generate_radial_shape: max_degree must be >= 0");
  RadialShape shape;
  shape.max_degree = max_degree;
  shape.seed = seed;
  int L = max_degree;
  shape.coeff.assign(static_cast<std::size_t>((L + 1) * (L + 1)), {0.0, 0.0});
  shape.coeff[0] = std::sqrt(4.0 * kPi);

  Rng rng(seed);
  for (int l = 1; l <= L; ++l) {
    double sd = 1.0 / static_cast<double>(l);
    for (int m = 0; m <= l; ++m) {
      double re = sd * rng.normal();
      double im = sd * rng.normal();
      if (m == 0) {
        // Conjugacy forces a_l^0 real.
        shape.coeff[static_cast<std::size_t>(sh_index(l, 0))] = re;
      } else {
        std::complex<double> a(re, im);
        shape.coeff[static_cast<std::size_t>(sh_index(l, m))] = a;
        double sign = (m % 2 == 0) ? 1.0 : -1.0;
        shape.coeff[static_cast<std::size_t>(sh_index(l, -m))] = sign * std::conj(a);
      }
    }
  }
  shape.refresh_real_coefficients();

  // Renormalize r <- 1 + gamma (r - rbar) on the 128x256 midpoint grid so the
  // grid surface mean is exactly 1 and the deviation range is capped at 0.3.
  const int nth = 128, nph = 256;
  std::vector<double> values(static_cast<std::size_t>(nth * nph));
  double wsum = 0.0, rsum = 0.0;
  for (int i = 0; i < nth; ++i) {
    double theta = (i + 0.5) * kPi / nth;
    double w = std::sin(theta);
    for (int j = 0; j < nph; ++j) {
      double phi = (j + 0.5) * 2.0 * kPi / nph;
      double r = eval_real_sh_value_sum(L, shape.real_coeff_chart0, theta, phi);
      values[static_cast<std::size_t>(i * nph + j)] = r;
      wsum += w;
      rsum += w * r;
    }
  }
  double rbar = rsum / wsum;
  double dev = 0.0;
  for (double r : values) dev = std::max(dev, std::abs(r - rbar));
  double gamma = (dev > 0.0) ? std::min(1.0, 0.3 / dev) : 1.0;

  for (auto& a : shape.coeff) a *= gamma;
  shape.coeff[0] += (1.0 - gamma * rbar) * std::sqrt(4.0 * kPi);
  shape.refresh_real_coefficients();
  return shape;
}

ChartJet ToroidalShape::jet(int chart, double u, double v) const {
  if (chart != 0) throw ConfigError("ToroidalShape: only chart 0 exists");
  double su = std::sin(u), cu = std::cos(u);
  double sv = std::sin(v), cv = std::cos(v);

  double sA0 = std::sin(A0 * u), cA0 = std::cos(A0 * u);
  double sB0 = std::sin(B0 * v), cB0 = std::cos(B0 * v);
  double sA1 = std::sin(A1 * u), cA1 = std::cos(A1 * u);
  double sB1 = std::sin(B1 * v), cB1 = std::cos(B1 * v);

  double a = a0 + r0 * sA0 * cB0;
  double a_u = r0 * A0 * cA0 * cB0;
  double a_v = -r0 * B0 * sA0 * sB0;
  double a_uu = -r0 * A0 * A0 * sA0 * cB0;
  double a_uv = -r0 * A0 * B0 * cA0 * sB0;
  double a_vv = -r0 * B0 * B0 * sA0 * cB0;

  double b = b0 + r1 * sA1 * cB1;
  double b_u = r1 * A1 * cA1 * cB1;
  double b_v = -r1 * B1 * sA1 * sB1;
  double b_uu = -r1 * A1 * A1 * sA1 * cB1;
  double b_uv = -r1 * A1 * B1 * cA1 * sB1;
  double b_vv = -r1 * B1 * B1 * sA1 * cB1;

  // Ring radius R = a cos v + b and height z = a sin v.
  double R = a * cv + b;
  double R_u = a_u * cv + b_u;
  double R_v = a_v * cv - a * sv + b_v;
  double R_uu = a_uu * cv + b_uu;
  double R_uv = a_uv * cv - a_u * sv + b_uv;
  double R_vv = a_vv * cv - 2.0 * a_v * sv - a * cv + b_vv;

  double z = a * sv;
  double z_u = a_u * sv;
  double z_v = a_v * sv + a * cv;
  double z_uu = a_uu * sv;
  double z_uv = a_uv * sv + a_u * cv;
  double z_vv = a_vv * sv + 2.0 * a_v * cv - a * sv;

  ChartJet out;
  out.p = {R * cu, R * su, z};
  out.du = {R_u * cu - R * su, R_u * su + R * cu, z_u};
  out.dv = {R_v * cu, R_v * su, z_v};
  out.duu = {R_uu * cu - 2.0 * R_u * su - R * cu, R_uu * su + 2.0 * R_u * cu - R * su, z_uu};
  out.duv = {R_uv * cu - R_v * su, R_uv * su + R_v * cu, z_uv};
  out.dvv = {R_vv * cu, R_vv * su, z_vv};
  return out;
}

std::array<double, 4> ToroidalShape::chart0_domain() const {
  return {0.0, 2.0 * kPi, 0.0, 2.0 * kPi};
}

void ToroidalShape::normalize_coords(int& chart, double& u, double& v,
                                     const Eigen::Vector3d&) const {
  chart = 0;
  u = std::fmod(u, 2.0 * kPi);
  if (u < 0.0) u += 2.0 * kPi;
  v = std::fmod(v, 2.0 * kPi);
  if (v < 0.0) v += 2.0 * kPi;
}

ToroidalShape generate_toroidal_shape(std::uint64_t seed) {
  ToroidalShape shape;
  shape.seed = seed;
  Rng rng(seed);
  shape.r0 = shape.a0 * rng.uniform(0.05, 0.2);
  shape.r1 = shape.b0 * rng.uniform(0.0, 0.08);
  shape.A0 = static_cast<int>(rng.uniform_int(1, 5));
  shape.B0 = static_cast<int>(rng.uniform_int(3, 7));
  shape.A1 = static_cast<int>(rng.uniform_int(1, 5));
  shape.B1 = static_cast<int>(rng.uniform_int(3, 7));
  return shape;
}

GeometricTruth exact_geometry(const ChartJet& jet) {
  double E = jet.du.dot(jet.du);
  double F = jet.du.dot(jet.dv);
  double G = jet.dv.dot(jet.dv);
  double det = E * G - F * F;
  if (det < 1e-14) throw NumericalError("exact_geometry: degenerate metric (EG - F^2 < 1e-14)");

  Eigen::Vector3d n = jet.du.cross(jet.dv);
  n /= n.norm();

  double L = jet.duu.dot(n);
  double M = jet.duv.dot(n);
  double N = jet.dvv.dot(n);

  GeometricTruth out;
  out.normal = n;
  out.first << E, F, F, G;
  out.first_inv << G / det, -F / det, -F / det, E / det;
  out.second << L, M, M, N;
  out.gauss = (L * N - M * M) / det;
  out.mean = (L * G - 2.0 * M * F + N * E) / (2.0 * det);
  out.frame_coords = false;
  return out;
}

}  // namespace pcgeom
