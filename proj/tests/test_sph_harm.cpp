#include <cmath>
#include <vector>

#include "doctest.h"
#include "pcgeom/numeric.hpp"
#include "pcgeom/quadrature.hpp"
#include "pcgeom/rng.hpp"
#include "pcgeom/sph_harm.hpp"

using namespace pcgeom;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("low-order closed forms") {
  // Convention: m > 0 rows carry sqrt(2) cos(m phi), m < 0 rows sqrt(2) sin(|m| phi),
  // with Condon-Shortley phase inside the associated Legendre functions.
  const double theta = 0.83, phi = 2.1;
  const double x = std::cos(theta), s = std::sin(theta);
  CHECK(eval_real_sh(0, 0, theta, phi).val == doctest::Approx(0.5 / std::sqrt(kPi)).epsilon(1e-12));
  CHECK(eval_real_sh(1, 0, theta, phi).val ==
        doctest::Approx(std::sqrt(3.0 / (4.0 * kPi)) * x).epsilon(1e-12));
  CHECK(eval_real_sh(1, 1, theta, phi).val ==
        doctest::Approx(-std::sqrt(3.0 / (4.0 * kPi)) * s * std::cos(phi)).epsilon(1e-12));
  CHECK(eval_real_sh(1, -1, theta, phi).val ==
        doctest::Approx(-std::sqrt(3.0 / (4.0 * kPi)) * s * std::sin(phi)).epsilon(1e-12));
  CHECK(eval_real_sh(2, 0, theta, phi).val ==
        doctest::Approx(std::sqrt(5.0 / (16.0 * kPi)) * (3.0 * x * x - 1.0)).epsilon(1e-12));
}

TEST_CASE("addition theorem fixes normalization for all orders") {
  // sum_m Y_lm(dir)^2 = (2l+1)/(4 pi), independent of direction and of
  // any sign convention.
  for (double theta : {0.3, 1.1, 2.6}) {
    for (double phi : {0.0, 0.9, 4.4}) {
      for (int l = 0; l <= 8; ++l) {
        double sum = 0.0;
        for (int m = -l; m <= l; ++m) {
          const double y = eval_real_sh(l, m, theta, phi).val;
          sum += y * y;
        }
        CHECK(sum == doctest::Approx((2.0 * l + 1.0) / (4.0 * kPi)).epsilon(1e-11));
      }
    }
  }
}

TEST_CASE("orthonormality under product quadrature") {
  // Gauss-Legendre in cos(theta) (exact for polynomial degree <= 2*16-1)
  // crossed with a uniform phi grid (exact for trig modes below 64).
  const int L = 4;
  const GaussLegendre gl(16);
  const int nphi = 64;
  const int nb = (L + 1) * (L + 1);
  std::vector<double> gram(static_cast<size_t>(nb) * nb, 0.0);
  std::vector<double> vals;
  for (int iq = 0; iq < 16; ++iq) {
    const double theta = std::acos(gl.nodes[static_cast<size_t>(iq)]);
    for (int ip = 0; ip < nphi; ++ip) {
      const double phi = 2.0 * kPi * (ip + 0.5) / nphi;
      eval_real_sh_all_values(L, theta, phi, vals);
      const double w = gl.weights[static_cast<size_t>(iq)] * (2.0 * kPi / nphi);
      for (int a = 0; a < nb; ++a)
        for (int b = a; b < nb; ++b)
          gram[static_cast<size_t>(a) * nb + b] += w * vals[static_cast<size_t>(a)] *
                                                   vals[static_cast<size_t>(b)];
    }
  }
  for (int a = 0; a < nb; ++a) {
    for (int b = a; b < nb; ++b) {
      const double expect = (a == b) ? 1.0 : 0.0;
      CHECK(gram[static_cast<size_t>(a) * nb + b] == doctest::Approx(expect).epsilon(1e-10));
    }
  }
}

TEST_CASE("derivatives match central differences") {
  const int L = 5;
  std::vector<double> coeff(static_cast<size_t>((L + 1) * (L + 1)), 0.0);
  Rng rng(31);
  for (auto& c : coeff) c = rng.normal();

  const double theta = 0.7, phi = 1.1, h = 1e-5;
  const ShDerivs d = eval_real_sh_sum(L, coeff, theta, phi);
  auto f = [&](double t, double p) { return eval_real_sh_sum(L, coeff, t, p).val; };

  const double dt = (f(theta + h, phi) - f(theta - h, phi)) / (2.0 * h);
  const double dp = (f(theta, phi + h) - f(theta, phi - h)) / (2.0 * h);
  const double dtt = (f(theta + h, phi) - 2.0 * f(theta, phi) + f(theta - h, phi)) / (h * h);
  const double dpp = (f(theta, phi + h) - 2.0 * f(theta, phi) + f(theta, phi - h)) / (h * h);
  const double dtp = (f(theta + h, phi + h) - f(theta + h, phi - h) - f(theta - h, phi + h) +
                      f(theta - h, phi - h)) /
                     (4.0 * h * h);
  CHECK(d.dt == doctest::Approx(dt).epsilon(1e-7));
  CHECK(d.dp == doctest::Approx(dp).epsilon(1e-7));
  CHECK(d.dtt == doctest::Approx(dtt).epsilon(1e-5));
  CHECK(d.dpp == doctest::Approx(dpp).epsilon(1e-5));
  CHECK(d.dtp == doctest::Approx(dtp).epsilon(1e-5));
}

TEST_CASE("single-term sum reproduces the individual harmonic") {
  const int L = 6;
  std::vector<double> coeff(static_cast<size_t>((L + 1) * (L + 1)), 0.0);
  coeff[static_cast<size_t>(sh_index(3, 2))] = 1.0;
  const ShDerivs a = eval_real_sh_sum(L, coeff, 0.9, 0.4);
  const ShDerivs b = eval_real_sh(3, 2, 0.9, 0.4);
  CHECK(a.val == doctest::Approx(b.val).epsilon(1e-13));
  CHECK(a.dt == doctest::Approx(b.dt).epsilon(1e-13));
  CHECK(a.dpp == doctest::Approx(b.dpp).epsilon(1e-13));
}

TEST_CASE("value-only paths agree with the derivative path") {
  const int L = 7;
  std::vector<double> coeff(static_cast<size_t>((L + 1) * (L + 1)), 0.0);
  Rng rng(8);
  for (auto& c : coeff) c = rng.normal();
  const double theta = 1.3, phi = 5.0;
  const double full = eval_real_sh_sum(L, coeff, theta, phi).val;
  CHECK(eval_real_sh_value_sum(L, coeff, theta, phi) == doctest::Approx(full).epsilon(1e-13));

  std::vector<double> vals;
  eval_real_sh_all_values(L, theta, phi, vals);
  REQUIRE(static_cast<int>(vals.size()) == (L + 1) * (L + 1));
  double dot = 0.0;
  for (size_t i = 0; i < vals.size(); ++i) dot += vals[i] * coeff[i];
  CHECK(dot == doctest::Approx(full).epsilon(1e-12));
}

TEST_CASE("value path stays finite at the poles") {
  std::vector<double> coeff(16, 0.25);
  CHECK(std::isfinite(eval_real_sh_value_sum(3, coeff, 0.0, 0.3)));
  CHECK(std::isfinite(eval_real_sh_value_sum(3, coeff, kPi, 0.3)));
  CHECK_THROWS_AS((void)eval_real_sh_sum(3, coeff, 0.0, 0.3), NumericalError);
}
