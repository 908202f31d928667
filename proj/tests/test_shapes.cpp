#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "pcgeom/numeric.hpp"
#include "pcgeom/shapes.hpp"
#include "pcgeom/sph_harm.hpp"

using namespace pcgeom;

namespace {

constexpr double kPi = 3.14159265358979323846;

RadialShape make_sphere(double radius) {
  RadialShape s;
  s.max_degree = 0;
  s.coeff.assign(1, std::complex<double>(radius * std::sqrt(4.0 * kPi), 0.0));
  s.refresh_real_coefficients();
  return s;
}

ToroidalShape make_standard_torus() {
  ToroidalShape t;
  t.r0 = 0.0;
  t.r1 = 0.0;
  return t;
}

// Central differences of the embedding map, first and second order.
void fd_jet(const Shape& s, int chart, double u, double v, ChartJet& fd) {
  const double h1 = 1e-5, h2 = 1e-4;
  auto p = [&](double a, double b) { return s.jet(chart, a, b).p; };
  fd.p = p(u, v);
  fd.du = (p(u + h1, v) - p(u - h1, v)) / (2.0 * h1);
  fd.dv = (p(u, v + h1) - p(u, v - h1)) / (2.0 * h1);
  fd.duu = (p(u + h2, v) - 2.0 * fd.p + p(u - h2, v)) / (h2 * h2);
  fd.dvv = (p(u, v + h2) - 2.0 * fd.p + p(u, v - h2)) / (h2 * h2);
  fd.duv = (p(u + h2, v + h2) - p(u + h2, v - h2) - p(u - h2, v + h2) + p(u - h2, v - h2)) /
           (4.0 * h2 * h2);
}

}  // namespace

TEST_CASE("unit sphere geometry is exact") {
  const RadialShape sphere = make_sphere(1.0);
  for (double theta : {0.4, 1.2, 2.4}) {
    for (double phi : {0.2, 2.9, 5.6}) {
      const ChartJet jet = sphere.jet(0, theta, phi);
      CHECK(jet.p.norm() == doctest::Approx(1.0).epsilon(1e-13));
      const GeometricTruth g = exact_geometry(jet);
      CHECK(g.gauss == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(g.mean == doctest::Approx(-1.0).epsilon(1e-10));
      CHECK((g.normal - jet.p).norm() < 1e-10);
      CHECK(g.first(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(g.first(0, 1) == doctest::Approx(0.0).epsilon(1e-10));
      CHECK(g.first(1, 1) == doctest::Approx(std::sin(theta) * std::sin(theta)).epsilon(1e-10));
      CHECK((g.first * g.first_inv - Eigen::Matrix2d::Identity()).norm() < 1e-12);
    }
  }
}

TEST_CASE("sphere of radius 2 scales curvatures") {
  const RadialShape sphere = make_sphere(2.0);
  const GeometricTruth g = exact_geometry(sphere.jet(0, 1.0, 0.5));
  CHECK(g.gauss == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(g.mean == doctest::Approx(-0.5).epsilon(1e-10));
}

TEST_CASE("standard torus matches the closed-form curvatures") {
  const ToroidalShape torus = make_standard_torus();
  const double a = torus.a0, b = torus.b0;
  for (double u : {0.0, 1.3, 4.0}) {
    for (double v : {0.0, 0.8, 2.2, 4.9}) {
      const GeometricTruth g = exact_geometry(torus.jet(0, u, v));
      const double ring = b + a * std::cos(v);
      CHECK(g.gauss == doctest::Approx(std::cos(v) / (a * ring)).epsilon(1e-10));
      CHECK(g.mean == doctest::Approx(-0.5 * (1.0 / a + std::cos(v) / ring)).epsilon(1e-10));
    }
  }
  // Tube-outward normal: along the outer equator it points away from the axis.
  const GeometricTruth outer = exact_geometry(torus.jet(0, 0.7, 0.0));
  CHECK(outer.normal.dot(Eigen::Vector3d(std::cos(0.7), std::sin(0.7), 0.0)) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("radial jets match finite differences") {
  const RadialShape shape = generate_radial_shape(6, 11);
  for (int chart : {0, 1}) {
    for (double theta : {0.8, 1.7}) {
      for (double phi : {0.5, 3.9}) {
        const ChartJet jet = shape.jet(chart, theta, phi);
        ChartJet fd;
        fd_jet(shape, chart, theta, phi, fd);
        CHECK((jet.du - fd.du).norm() / fd.du.norm() < 1e-6);
        CHECK((jet.dv - fd.dv).norm() / fd.dv.norm() < 1e-6);
        CHECK((jet.duu - fd.duu).norm() / (fd.duu.norm() + 1.0) < 1e-5);
        CHECK((jet.duv - fd.duv).norm() / (fd.duv.norm() + 1.0) < 1e-5);
        CHECK((jet.dvv - fd.dvv).norm() / (fd.dvv.norm() + 1.0) < 1e-5);
      }
    }
  }
}

TEST_CASE("toroidal jets match finite differences") {
  const ToroidalShape shape = generate_toroidal_shape(17);
  for (double u : {0.3, 2.2, 5.1}) {
    for (double v : {0.9, 3.3}) {
      const ChartJet jet = shape.jet(0, u, v);
      ChartJet fd;
      fd_jet(shape, 0, u, v, fd);
      CHECK((jet.du - fd.du).norm() / fd.du.norm() < 1e-6);
      CHECK((jet.dv - fd.dv).norm() / fd.dv.norm() < 1e-6);
      CHECK((jet.duu - fd.duu).norm() / (fd.duu.norm() + 1.0) < 1e-5);
      CHECK((jet.duv - fd.duv).norm() / (fd.duv.norm() + 1.0) < 1e-5);
      CHECK((jet.dvv - fd.dvv).norm() / (fd.dvv.norm() + 1.0) < 1e-5);
    }
  }
}

TEST_CASE("generated radial shapes obey the stated invariants") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const RadialShape shape = generate_radial_shape(10, seed);

    // Conjugacy a_l^{-m} = (-1)^m conj(a_l^m).
    for (int l = 0; l <= 10; ++l) {
      for (int m = 1; m <= l; ++m) {
        const std::complex<double> ap = shape.coeff[static_cast<size_t>(sh_index(l, m))];
        const std::complex<double> am = shape.coeff[static_cast<size_t>(sh_index(l, -m))];
        const std::complex<double> want = (m % 2 == 0 ? 1.0 : -1.0) * std::conj(ap);
        CHECK(std::abs(am - want) < 1e-14);
      }
      CHECK(std::abs(shape.coeff[static_cast<size_t>(sh_index(l, 0))].imag()) < 1e-14);
    }

    // Mean radius 1 on the 128x256 midpoint grid with sin(theta) weights,
    // range within [0.7, 1.3].
    double wsum = 0.0, rsum = 0.0, rmin = 1e300, rmax = -1e300;
    for (int i = 0; i < 128; ++i) {
      const double theta = kPi * (i + 0.5) / 128.0;
      const double w = std::sin(theta);
      for (int j = 0; j < 256; ++j) {
        const double phi = 2.0 * kPi * (j + 0.5) / 256.0;
        const double r = shape.radius(RadialShape::chart_direction(0, theta, phi));
        wsum += w;
        rsum += w * r;
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
      }
    }
    CHECK(std::abs(rsum / wsum - 1.0) < 1e-6);
    CHECK(rmin >= 0.7 - 1e-12);
    CHECK(rmax <= 1.3 + 1e-12);
  }
}

TEST_CASE("radial generation is deterministic in the seed") {
  const RadialShape a = generate_radial_shape(8, 42);
  const RadialShape b = generate_radial_shape(8, 42);
  const RadialShape c = generate_radial_shape(8, 43);
  REQUIRE(a.coeff.size() == b.coeff.size());
  bool identical = true;
  for (size_t i = 0; i < a.coeff.size(); ++i)
    identical = identical && (a.coeff[i] == b.coeff[i]);
  CHECK(identical);
  bool differs = false;
  for (size_t i = 0; i < a.coeff.size() && !differs; ++i)
    differs = (a.coeff[i] != c.coeff[i]);
  CHECK(differs);
}

TEST_CASE("both radial charts describe the same surface") {
  const RadialShape shape = generate_radial_shape(8, 5);
  // Directions comfortably away from both chart poles (z for 0, x for 1).
  const Eigen::Vector3d dirs[] = {
      Eigen::Vector3d(0.3, 0.8, 0.52).normalized(),
      Eigen::Vector3d(-0.5, 0.6, -0.63).normalized(),
      Eigen::Vector3d(0.4, -0.7, 0.59).normalized(),
  };
  for (const auto& d : dirs) {
    double t0, p0, t1, p1;
    RadialShape::chart_angles(0, d, t0, p0);
    RadialShape::chart_angles(1, d, t1, p1);
    const ChartJet j0 = shape.jet(0, t0, p0);
    const ChartJet j1 = shape.jet(1, t1, p1);
    CHECK((j0.p - j1.p).norm() < 1e-10);
    const GeometricTruth g0 = exact_geometry(j0);
    const GeometricTruth g1 = exact_geometry(j1);
    CHECK(g0.gauss == doctest::Approx(g1.gauss).epsilon(1e-9));
    CHECK(g0.mean == doctest::Approx(g1.mean).epsilon(1e-9));
    CHECK((g0.normal - g1.normal).norm() < 1e-9);
  }
}

TEST_CASE("normalize_coords selects the chart away from the pole") {
  const RadialShape shape = generate_radial_shape(6, 3);
  // Near the world z-axis: chart 0 is singular there, chart 1 is fine.
  Eigen::Vector3d dir(0.01, 0.0, 1.0);
  dir.normalize();
  const Eigen::Vector3d pos = shape.radius(dir) * dir;
  int chart = 0;
  double t, p;
  RadialShape::chart_angles(0, dir, t, p);
  shape.normalize_coords(chart, t, p, pos);
  CHECK(chart == 1);
  const ChartJet jet = shape.jet(chart, t, p);
  CHECK((jet.p - pos).norm() < 1e-10);

  // Near the world x-axis the preference flips back to chart 0.
  Eigen::Vector3d dir2(1.0, 0.005, 0.01);
  dir2.normalize();
  const Eigen::Vector3d pos2 = shape.radius(dir2) * dir2;
  int chart2 = 1;
  RadialShape::chart_angles(1, dir2, t, p);
  shape.normalize_coords(chart2, t, p, pos2);
  CHECK(chart2 == 0);
}

TEST_CASE("toroidal normalize_coords wraps periodically") {
  const ToroidalShape shape = generate_toroidal_shape(9);
  const double u0 = 1.2, v0 = 4.5;
  const ChartJet ref = shape.jet(0, u0, v0);
  int chart = 0;
  double u = u0 + 4.0 * kPi, v = v0 - 2.0 * kPi;
  shape.normalize_coords(chart, u, v, ref.p);
  CHECK(chart == 0);
  CHECK(u == doctest::Approx(u0).epsilon(1e-12));
  CHECK(v == doctest::Approx(v0).epsilon(1e-12));
  CHECK((shape.jet(0, u, v).p - ref.p).norm() < 1e-12);
}

TEST_CASE("toroidal generation draws parameters in their documented ranges") {
  for (std::uint64_t seed : {4u, 8u, 15u}) {
    const ToroidalShape t = generate_toroidal_shape(seed);
    CHECK(t.r0 >= 0.05 * t.a0);
    CHECK(t.r0 <= 0.2 * t.a0);
    CHECK(t.r1 >= 0.0);
    CHECK(t.r1 <= 0.08 * t.b0);
    CHECK(t.A0 >= 1);
    CHECK(t.A0 <= 5);
    CHECK(t.A1 >= 1);
    CHECK(t.A1 <= 5);
    CHECK(t.B0 >= 3);
    CHECK(t.B0 <= 7);
    CHECK(t.B1 >= 3);
    CHECK(t.B1 <= 7);
  }
  const ToroidalShape a = generate_toroidal_shape(21);
  const ToroidalShape b = generate_toroidal_shape(21);
  CHECK(a.r0 == b.r0);
  CHECK(a.r1 == b.r1);
  CHECK(a.A0 == b.A0);
  CHECK(a.B1 == b.B1);
}

TEST_CASE("degenerate metric is rejected") {
  ChartJet jet;
  jet.p = Eigen::Vector3d(1.0, 0.0, 0.0);
  jet.du = Eigen::Vector3d(0.0, 1.0, 0.0);
  jet.dv = Eigen::Vector3d(0.0, 1.0, 0.0);  // parallel tangents
  CHECK_THROWS_AS((void)exact_geometry(jet), NumericalError);
}

TEST_CASE("radial chart rejects the pole") {
  const RadialShape sphere = make_sphere(1.0);
  CHECK_THROWS_AS((void)sphere.jet(0, 1e-12, 0.3), NumericalError);
}
