#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

namespace pcgeom {

// Chart point and derivatives of the embedding map through second order.
struct ChartJet {
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  Eigen::Vector3d du = Eigen::Vector3d::Zero();
  Eigen::Vector3d dv = Eigen::Vector3d::Zero();
  Eigen::Vector3d duu = Eigen::Vector3d::Zero();
  Eigen::Vector3d duv = Eigen::Vector3d::Zero();
  Eigen::Vector3d dvv = Eigen::Vector3d::Zero();
};

// Exact pointwise geometry. When frame_coords is false the tensors live in the
// chart coordinate basis and the normal in world coordinates; after
// truth_in_frame they live in a patch frame (and the normal in frame
// coordinates) with frame_coords set.
struct GeometricTruth {
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();
  Eigen::Matrix2d first = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d first_inv = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d second = Eigen::Matrix2d::Zero();
  double gauss = 0.0;
  double mean = 0.0;
  bool frame_coords = false;
};

/**
 * Closed-surface generator with exact chart jets. Charts are indexed from 0;
 * radial shapes carry a second chart rotated so its poles sit on the world
 * x-axis, toroidal shapes have a single periodic chart.
 */
class Shape {
 public:
  virtual ~Shape() = default;

  virtual int chart_count() const = 0;

  // Embedding derivatives at chart coordinates. Radial charts throw
  // NumericalError when sin(theta) < 1e-8 (use the other chart).
  virtual ChartJet jet(int chart, double u, double v) const = 0;

  // Rectangle [u0,u1]x[v0,v1] covering the surface on chart 0, used by
  // area-weighted rejection sampling.
  virtual std::array<double, 4> chart0_domain() const = 0;

  // Re-canonicalize coordinates after an in-chart update: wraps periodic
  // coordinates, and for radial shapes re-selects the chart whose pole is
  // farther from the (on-surface) position.
  virtual void normalize_coords(int& chart, double& u, double& v,
                                const Eigen::Vector3d& position) const = 0;
};

/**
 * Star-shaped surface r(theta, phi) * direction(theta, phi) with the radius a
 * bandlimited spherical-harmonic expansion. Complex coefficients a_l^m obey
 * the conjugacy a_l^{-m} = (-1)^m conj(a_l^m) so the radius is real; the
 * equivalent real-basis coefficients are precomputed for both charts (chart 1
 * coefficients come from an exact quadrature projection of the rotated
 * radius function).
 *
 * Generation draws Re/Im of a_l^m for m = 0..l i.i.d. normal(0, 1/l) for
 * l >= 1 starting from a_0^0 = sqrt(4 pi) (unit mean radius), then
 * renormalizes r <- 1 + min(1, 0.3/D) (r - rbar) so the 128x256-grid surface
 * mean is 1 and the range stays inside [0.7, 1.3].
 */
class RadialShape : public Shape {
 public:
  int max_degree = 0;
  std::uint64_t seed = 0;
  // Complex coefficients, indexed sh_index(l, m); conjugacy invariant holds.
  std::vector<std::complex<double>> coeff;
  // Real-basis coefficients per chart.
  std::vector<double> real_coeff_chart0;
  std::vector<double> real_coeff_chart1;

  int chart_count() const override { return 2; }
  ChartJet jet(int chart, double u, double v) const override;
  std::array<double, 4> chart0_domain() const override;
  void normalize_coords(int& chart, double& u, double& v,
                        const Eigen::Vector3d& position) const override;

  // Radius value at a world direction (cheap, pole-safe).
  double radius(const Eigen::Vector3d& direction) const;
  // Chart whose pole is farther from the given direction.
  int better_chart(const Eigen::Vector3d& direction) const;
  // Angles of a world direction in the given chart.
  static void chart_angles(int chart, const Eigen::Vector3d& direction, double& theta,
                           double& phi);
  // World direction of chart angles.
  static Eigen::Vector3d chart_direction(int chart, double theta, double phi);

  // Rebuilds real_coeff_chart0/1 from the complex coefficients.
  void refresh_real_coefficients();
};

/**
 * Torus-like surface
 *   sigma(u, v) = ((a cos v + b) cos u, (a cos v + b) sin u, a sin v)
 * with tube/ring radii modulated as a = a0 + r0 sin(A0 u) cos(B0 v),
 * b = b0 + r1 sin(A1 u) cos(B1 v); a0 = 1/3, b0 = 2/3.
 */
class ToroidalShape : public Shape {
 public:
  std::uint64_t seed = 0;
  double a0 = 1.0 / 3.0;
  double b0 = 2.0 / 3.0;
  double r0 = 0.0;
  double r1 = 0.0;
  int A0 = 1, B0 = 3, A1 = 1, B1 = 3;

  int chart_count() const override { return 1; }
  ChartJet jet(int chart, double u, double v) const override;
  std::array<double, 4> chart0_domain() const override;
  void normalize_coords(int& chart, double& u, double& v,
                        const Eigen::Vector3d& position) const override;
};

// Seeded generators. Radial band limits used by the benchmark families are
// {3, 6, 8, 10, 12, 15, 18, 22}.
RadialShape generate_radial_shape(int max_degree, std::uint64_t seed);
ToroidalShape generate_toroidal_shape(std::uint64_t seed);

// First/second fundamental forms, outward unit normal, and curvatures from a
// chart jet. Throws NumericalError when EG - F^2 < 1e-14 (degenerate metric).
GeometricTruth exact_geometry(const ChartJet& jet);

}  // namespace pcgeom
