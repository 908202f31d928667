#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "pcgeom/error_metrics.hpp"
#include "pcgeom/gmls.hpp"
#include "pcgeom/kdtree.hpp"
#include "pcgeom/legendre.hpp"
#include "pcgeom/monge.hpp"
#include "pcgeom/numeric.hpp"
#include "pcgeom/patch.hpp"
#include "pcgeom/rng.hpp"
#include "pcgeom/sampling.hpp"
#include "pcgeom/shapes.hpp"

using namespace pcgeom;

namespace {

constexpr double kPi = 3.14159265358979323846;

RadialShape unit_sphere() {
  RadialShape s;
  s.max_degree = 0;
  s.coeff.assign(1, std::complex<double>(std::sqrt(4.0 * kPi), 0.0));
  s.refresh_real_coefficients();
  return s;
}

// Synthetic patch whose inputs lie on the physical graph z = f(x, y) over an
// identity frame with the given scales.
NeighborhoodPatch graph_patch(double epsilon, double delta, double radius,
                              const std::function<double(double, double)>& f) {
  NeighborhoodPatch patch;
  patch.frame.epsilon = epsilon;
  patch.frame.delta = delta;
  patch.input_radius_factor = 1.5;
  int idx = 0;
  patch.coords.emplace_back(0.0, 0.0, f(0.0, 0.0) / delta);
  patch.input_indices.push_back(idx++);
  for (int ir = 1; ir <= 7; ++ir) {
    const double rho = radius * ir / 7.0;
    for (int ia = 0; ia < 12; ++ia) {
      const double ang = 2.0 * kPi * (ia + 0.3) / 12.0;
      const double u = rho * std::cos(ang), v = rho * std::sin(ang);
      patch.coords.emplace_back(u, v, f(epsilon * u, epsilon * v) / delta);
      patch.input_indices.push_back(idx++);
    }
  }
  patch.target_count = idx;
  return patch;
}

}  // namespace

TEST_CASE("one-dimensional Legendre recurrences match closed forms") {
  Eigen::MatrixXd t;
  for (double x : {-0.8, -0.1, 0.4, 0.95}) {
    legendre_1d(3, x, t);
    CHECK(t(0, 0) == doctest::Approx(1.0));
    CHECK(t(1, 0) == doctest::Approx(x));
    CHECK(t(2, 0) == doctest::Approx(0.5 * (3.0 * x * x - 1.0)).epsilon(1e-14));
    CHECK(t(3, 0) == doctest::Approx(0.5 * (5.0 * x * x * x - 3.0 * x)).epsilon(1e-14));
    CHECK(t(2, 1) == doctest::Approx(3.0 * x).epsilon(1e-14));
    CHECK(t(3, 1) == doctest::Approx(0.5 * (15.0 * x * x - 3.0)).epsilon(1e-14));
    CHECK(t(2, 2) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(t(3, 2) == doctest::Approx(15.0 * x).epsilon(1e-14));
  }
}

TEST_CASE("tensor basis indexing and derivatives") {
  const LegendreBasis basis(3);
  REQUIRE(basis.size() == 16);
  const double u = 0.37, v = -0.52;
  Eigen::MatrixXd rows;
  basis.eval(u, v, rows);

  // phi_k = l_i(u) l_j(v) with k = 4 i + j.
  Eigen::MatrixXd lu, lv;
  legendre_1d(3, u, lu);
  legendre_1d(3, v, lv);
  for (int i = 0; i <= 3; ++i) {
    for (int j = 0; j <= 3; ++j) {
      const int k = 4 * i + j;
      CHECK(rows(k, 0) == doctest::Approx(lu(i, 0) * lv(j, 0)).epsilon(1e-14));
      CHECK(rows(k, 1) == doctest::Approx(lu(i, 1) * lv(j, 0)).epsilon(1e-14));
      CHECK(rows(k, 5) == doctest::Approx(lu(i, 0) * lv(j, 2)).epsilon(1e-14));
    }
  }

  // Finite-difference validation of all derivative columns for a random blend.
  Rng rng(3);
  Eigen::VectorXd c(16);
  for (int i = 0; i < 16; ++i) c(i) = rng.normal();
  auto s = [&](double a, double b) { return basis.values(a, b).dot(c); };
  const double h = 1e-5;
  const Eigen::VectorXd d = rows.transpose() * c;
  CHECK(d(1) == doctest::Approx((s(u + h, v) - s(u - h, v)) / (2 * h)).epsilon(1e-8));
  CHECK(d(2) == doctest::Approx((s(u, v + h) - s(u, v - h)) / (2 * h)).epsilon(1e-8));
  CHECK(d(3) == doctest::Approx((s(u + h, v) - 2 * s(u, v) + s(u - h, v)) / (h * h)).epsilon(1e-4));
  CHECK(d(5) == doctest::Approx((s(u, v + h) - 2 * s(u, v) + s(u, v - h)) / (h * h)).epsilon(1e-4));
}

TEST_CASE("fit reproduces polynomials in the basis span exactly") {
  Rng rng(11);
  Eigen::VectorXd truth(16);
  for (int i = 0; i < 16; ++i) truth(i) = rng.normal();
  const LegendreBasis basis(3);

  NeighborhoodPatch patch;
  patch.frame.epsilon = 0.1;
  patch.frame.delta = 0.02;
  patch.input_radius_factor = 1.5;
  int idx = 0;
  for (int ir = 0; ir <= 6; ++ir) {
    const double rho = 1.4 * ir / 6.0;
    const int na = ir == 0 ? 1 : 10;
    for (int ia = 0; ia < na; ++ia) {
      const double ang = 2.0 * kPi * ia / na + 0.1;
      const double u = rho * std::cos(ang), v = rho * std::sin(ang);
      patch.coords.emplace_back(u, v, basis.values(u, v).dot(truth));
      patch.input_indices.push_back(idx++);
    }
  }
  patch.target_count = idx;

  const MongePatch fit = gmls_fit(patch);
  CHECK((fit.coeff - truth).norm() < 1e-9);
  CHECK(fit.epsilon == doctest::Approx(0.1));
  CHECK(fit.delta == doctest::Approx(0.02));
}

TEST_CASE("paraboloid curvatures are recovered exactly") {
  const double kappa = 0.8, eps = 0.2, del = 0.05;
  const auto patch = graph_patch(eps, del, 1.4, [&](double x, double y) {
    return 0.5 * kappa * (x * x + y * y);
  });
  const MongePatch fit = gmls_fit(patch);

  // At the apex: K = kappa^2, H = +kappa (upward normal), flat metric.
  const GeometryEstimate apex = extract_geometry(fit, 0.0, 0.0);
  CHECK(apex.gauss == doctest::Approx(kappa * kappa).epsilon(1e-9));
  CHECK(apex.mean == doctest::Approx(kappa).epsilon(1e-9));
  CHECK((apex.first - Eigen::Matrix2d::Identity()).norm() < 1e-9);
  CHECK((apex.normal - Eigen::Vector3d::UnitZ()).norm() < 1e-9);

  // Away from the apex, against the closed-form graph geometry.
  const double u = 0.3, v = -0.2;
  const double x = eps * u, y = eps * v;
  const double rho2 = x * x + y * y;
  const double w2 = 1.0 + kappa * kappa * rho2;
  const GeometryEstimate g = extract_geometry(fit, u, v);
  CHECK(g.gauss == doctest::Approx(kappa * kappa / (w2 * w2)).epsilon(1e-9));
  CHECK(g.mean ==
        doctest::Approx(kappa * (2.0 + kappa * kappa * rho2) / (2.0 * std::pow(w2, 1.5)))
            .epsilon(1e-9));
  CHECK(g.height == doctest::Approx(0.5 * kappa * rho2 / del).epsilon(1e-9));

  // Internal identities: K = det(I^-1 II), H = 1/2 tr(I^-1 II).
  const Eigen::Matrix2d W = g.first_inv * g.second;
  CHECK(W.determinant() == doctest::Approx(g.gauss).epsilon(1e-12));
  CHECK(0.5 * W.trace() == doctest::Approx(g.mean).epsilon(1e-12));
}

TEST_CASE("saddle sign conventions") {
  const double eps = 0.15, del = 0.03;
  const auto patch = graph_patch(eps, del, 1.3, [&](double x, double y) {
    return 0.5 * (x * x) - 0.5 * (y * y);
  });
  const GeometryEstimate g = extract_geometry(gmls_fit(patch), 0.0, 0.0);
  CHECK(g.gauss == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(g.mean == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("sphere patches estimate geometry within sane bounds") {
  const RadialShape sphere = unit_sphere();
  const PointCloud cloud = sample_quasi_uniform(sphere, 4000, 19);
  const KdTree tree(cloud.points);
  NeighborhoodConfig cfg;
  cfg.k = 30;

  ErrorAccumulator acc;
  for (int center = 100; center < 3000; center += 120) {
    const NeighborhoodPatch patch =
        make_patch(cloud.points, tree, center, cfg, cloud.normals[static_cast<size_t>(center)]);
    const MongePatch fit = gmls_fit(patch);
    const PatchTruthSet truth = patch_truth(sphere, cloud, patch);
    std::vector<GeometryEstimate> est;
    est.reserve(static_cast<size_t>(truth.size()));
    for (int t = 0; t < truth.size(); ++t)
      est.push_back(extract_geometry(fit, truth.u[static_cast<size_t>(t)],
                                     truth.v[static_cast<size_t>(t)]));
    const QuantityErrors q = patch_errors(est, truth);
    CHECK(q.gaussian < 0.1);
    CHECK(q.mean < 0.05);
    CHECK(q.normal < 2e-3);
    CHECK(q.metric_inverse < 0.05);
    CHECK(q.shape < 0.05);
    acc.add(q);

    // Estimated mean curvature keeps the outward-normal sign convention.
    const GeometryEstimate at_center = extract_geometry(fit, 0.0, 0.0);
    CHECK(at_center.mean < 0.0);
    CHECK(at_center.gauss > 0.0);
  }
  const QuantityErrors m = acc.mean();
  CHECK(m.gaussian < 0.05);
  CHECK(m.normal < 5e-4);
}

TEST_CASE("error metrics match hand-computed values") {
  PatchTruthSet truth;
  for (int t = 0; t < 4; ++t) {
    truth.u.push_back(0.1 * t);
    truth.v.push_back(-0.05 * t);
    truth.w.push_back(0.2 + 0.01 * t);
    truth.normal.push_back(Eigen::Vector3d::UnitZ());
    truth.first_inv.push_back(Eigen::Matrix2d::Identity());
    truth.second.push_back(0.3 * Eigen::Matrix2d::Identity());
    truth.gauss.push_back(2.0 + t);
    truth.mean.push_back(-1.0 - t);
    truth.valid.push_back(1);
  }

  std::vector<GeometryEstimate> est(4);
  for (int t = 0; t < 4; ++t) {
    est[static_cast<size_t>(t)].height = truth.w[static_cast<size_t>(t)];
    est[static_cast<size_t>(t)].normal = truth.normal[static_cast<size_t>(t)];
    est[static_cast<size_t>(t)].first_inv = truth.first_inv[static_cast<size_t>(t)];
    est[static_cast<size_t>(t)].second = truth.second[static_cast<size_t>(t)];
    est[static_cast<size_t>(t)].gauss = truth.gauss[static_cast<size_t>(t)];
    est[static_cast<size_t>(t)].mean = truth.mean[static_cast<size_t>(t)];
  }
  const QuantityErrors zero = patch_errors(est, truth);
  CHECK(zero.normal == doctest::Approx(0.0));
  CHECK(zero.gaussian == doctest::Approx(0.0));
  CHECK(zero.shape == doctest::Approx(0.0));

  // Uniform relative perturbation of a scalar column shows up exactly.
  for (auto& e : est) e.gauss *= 1.0 + 1e-3;
  const QuantityErrors scaled = patch_errors(est, truth);
  CHECK(scaled.gaussian == doctest::Approx(1e-3).epsilon(1e-9));

  // Invalid targets are excluded from every column.
  truth.valid[3] = 0;
  est[3].mean = 1e9;
  const QuantityErrors masked = patch_errors(est, truth);
  CHECK(masked.mean == doctest::Approx(0.0));
}

TEST_CASE("accumulator averages per-patch rows") {
  ErrorAccumulator acc;
  QuantityErrors a, b;
  a.gaussian = 0.5;
  b.gaussian = 1.5;
  a.normal = 0.1;
  b.normal = 0.3;
  acc.add(a);
  acc.add(b);
  const QuantityErrors m = acc.mean();
  CHECK(m.gaussian == doctest::Approx(1.0));
  CHECK(m.normal == doctest::Approx(0.2));
  CHECK(acc.count() == 2);
}

TEST_CASE("rank-deficient patches fall back to regularization") {
  // All inputs on the diagonal u = v: the tensor basis is rank-deficient on
  // that line, so the plain QR path cannot be used.
  NeighborhoodPatch patch;
  patch.frame.epsilon = 0.1;
  patch.frame.delta = 0.02;
  patch.input_radius_factor = 1.5;
  for (int i = 0; i < 24; ++i) {
    const double t = -1.2 + 2.4 * i / 23.0;
    patch.coords.emplace_back(t, t, 0.3 * t);
    patch.input_indices.push_back(i);
  }
  patch.target_count = 24;
  const MongePatch fit = gmls_fit(patch);
  REQUIRE(fit.coeff.allFinite());
  // The fitted surface still reproduces the heights along the line.
  CHECK(fit.height(0.5, 0.5) == doctest::Approx(0.15).epsilon(1e-4));
}

TEST_CASE("fit rejects undersized patches") {
  NeighborhoodPatch patch;
  patch.frame.epsilon = 0.1;
  patch.frame.delta = 0.02;
  for (int i = 0; i < 10; ++i) {
    patch.coords.emplace_back(0.1 * i, -0.1 * i, 0.0);
    patch.input_indices.push_back(i);
  }
  patch.target_count = 10;
  CHECK_THROWS_AS((void)gmls_fit(patch), NumericalError);
}

TEST_CASE("relative difference helper") {
  Eigen::VectorXd a(3), b(3);
  a << 1.0, 2.0, 2.0;
  b << 1.0, 2.0, 2.0;
  CHECK(relative_l2(a, b) == doctest::Approx(0.0));
  a(0) += 0.3;
  CHECK(relative_l2(a, b) == doctest::Approx(0.1).epsilon(1e-12));
}
