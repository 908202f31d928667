#include "pcgeom/sph_harm.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pcgeom/numeric.hpp"

namespace pcgeom {
namespace {

// Associated Legendre values P_l^m(x) for all 0 <= m <= l <= L at one x,
// together with first and second x-derivatives, Condon-Shortley phase
// included. Index by p(l, m) = l(l+1)/2 + m. The derivative columns use
//   (x^2 - 1) P'_l^m = l x P_l^m - (l + m) P_{l-1}^m
// and the associated Legendre ODE for P''.
struct LegendreTable {
  int max_degree;
  std::vector<double> p, dp, ddp;

  static int idx(int l, int m) { return l * (l + 1) / 2 + m; }

  LegendreTable(int L, double x, double s2, bool with_derivatives) : max_degree(L) {
    int n = (L + 1) * (L + 2) / 2;
    p.assign(n, 0.0);

    p[idx(0, 0)] = 1.0;
    double s = std::sqrt(s2);
    for (int m = 1; m <= L; ++m)
      p[idx(m, m)] = -static_cast<double>(2 * m - 1) * s * p[idx(m - 1, m - 1)];
    for (int m = 0; m < L; ++m) p[idx(m + 1, m)] = x * static_cast<double>(2 * m + 1) * p[idx(m, m)];
    for (int m = 0; m <= L; ++m)
      for (int l = m + 2; l <= L; ++l)
        p[idx(l, m)] = (x * static_cast<double>(2 * l - 1) * p[idx(l - 1, m)] -
                        static_cast<double>(l + m - 1) * p[idx(l - 2, m)]) /
                       static_cast<double>(l - m);

    if (!with_derivatives) return;
    dp.assign(n, 0.0);
    ddp.assign(n, 0.0);
    for (int l = 0; l <= L; ++l)
      for (int m = 0; m <= l; ++m) {
        double pl = p[idx(l, m)];
        double pl1 = (l - 1 >= m) ? p[idx(l - 1, m)] : 0.0;
        double d = (static_cast<double>(l) * x * pl - static_cast<double>(l + m) * pl1) / (-s2);
        dp[idx(l, m)] = d;
        ddp[idx(l, m)] =
            (2.0 * x * d - (static_cast<double>(l) * static_cast<double>(l + 1) -
                            static_cast<double>(m) * static_cast<double>(m) / s2) *
                               pl) /
            s2;
      }
  }
};

double normalization(int l, int m) {
  double log_ratio = std::lgamma(static_cast<double>(l - m + 1)) -
                     std::lgamma(static_cast<double>(l + m + 1));
  return std::sqrt((2.0 * l + 1.0) / (4.0 * std::numbers::pi) * std::exp(log_ratio));
}

struct Angular {
  // cos(m phi), sin(m phi) and the two theta profiles T = P(cos theta),
  // T' = -s P'(x), T'' = -x P'(x) + s^2 P''(x).
  double t, t1, t2, c, s, m;
};

ShDerivs combine(const Angular& a) {
  ShDerivs out;
  out.val = a.t * a.c;
  out.dt = a.t1 * a.c;
  out.dp = a.t * a.s;
  out.dtt = a.t2 * a.c;
  out.dtp = a.t1 * a.s;
  out.dpp = -a.m * a.m * a.t * a.c;
  return out;
}

}  // namespace

ShDerivs eval_real_sh(int l, int m, double theta, double phi) {
  std::vector<double> coeff(static_cast<std::size_t>((l + 1) * (l + 1)), 0.0);
  if (std::abs(m) > l) throw std::domain_error("eval_real_sh: |m| > l");
  coeff[static_cast<std::size_t>(sh_index(l, m))] = 1.0;
  return eval_real_sh_sum(l, coeff, theta, phi);
}

ShDerivs eval_real_sh_sum(int max_degree, const std::vector<double>& coeff, double theta,
                          double phi) {
  int L = max_degree;
  if (coeff.size() != static_cast<std::size_t>((L + 1) * (L + 1)))
    throw std::invalid_argument("eval_real_sh_sum: coefficient count != (L+1)^2");
  double x = std::cos(theta);
  double s = std::sin(theta);
  if (std::abs(s) < 1e-12)
    throw NumericalError("eval_real_sh_sum: sin(theta) below 1e-12; use the rotated chart");
  double s2 = s * s;

  LegendreTable tab(L, x, s2, true);

  // cos(m phi), sin(m phi) by recurrence.
  std::vector<double> cm(static_cast<std::size_t>(L + 1)), sm(static_cast<std::size_t>(L + 1));
  double cp = std::cos(phi), sp = std::sin(phi);
  cm[0] = 1.0;
  sm[0] = 0.0;
  for (int m = 1; m <= L; ++m) {
    cm[static_cast<std::size_t>(m)] = cm[static_cast<std::size_t>(m - 1)] * cp - sm[static_cast<std::size_t>(m - 1)] * sp;
    sm[static_cast<std::size_t>(m)] = sm[static_cast<std::size_t>(m - 1)] * cp + cm[static_cast<std::size_t>(m - 1)] * sp;
  }

  const double sqrt2 = std::numbers::sqrt2;
  ShDerivs acc;
  for (int l = 0; l <= L; ++l) {
    for (int m = 0; m <= l; ++m) {
      double cneg = (m > 0) ? coeff[static_cast<std::size_t>(sh_index(l, -m))] : 0.0;
      double cpos = coeff[static_cast<std::size_t>(sh_index(l, m))];
      if (cpos == 0.0 && cneg == 0.0) continue;

      double norm = normalization(l, m) * (m > 0 ? sqrt2 : 1.0);
      int k = LegendreTable::idx(l, m);
      double t = norm * tab.p[static_cast<std::size_t>(k)];
      double t1 = norm * (-s * tab.dp[static_cast<std::size_t>(k)]);
      double t2 = norm * (-x * tab.dp[static_cast<std::size_t>(k)] + s2 * tab.ddp[static_cast<std::size_t>(k)]);
      double md = static_cast<double>(m);

      if (cpos != 0.0) {
        // cos(m phi) branch: d/dphi -> -m sin, d2/dphi2 -> -m^2 cos.
        Angular a{t, t1, t2, cm[static_cast<std::size_t>(m)], -md * sm[static_cast<std::size_t>(m)], md};
        ShDerivs y = combine(a);
        acc.val += cpos * y.val;
        acc.dt += cpos * y.dt;
        acc.dp += cpos * y.dp;
        acc.dtt += cpos * y.dtt;
        acc.dtp += cpos * y.dtp;
        acc.dpp += cpos * y.dpp;
      }
      if (cneg != 0.0) {
        // sin(m phi) branch: d/dphi -> m cos, d2/dphi2 -> -m^2 sin.
        Angular a{t, t1, t2, sm[static_cast<std::size_t>(m)], md * cm[static_cast<std::size_t>(m)], md};
        ShDerivs y = combine(a);
        acc.val += cneg * y.val;
        acc.dt += cneg * y.dt;
        acc.dp += cneg * y.dp;
        acc.dtt += cneg * y.dtt;
        acc.dtp += cneg * y.dtp;
        acc.dpp += cneg * y.dpp;
      }
    }
  }
  return acc;
}

double eval_real_sh_value_sum(int max_degree, const std::vector<double>& coeff, double theta,
                              double phi) {
  int L = max_degree;
  if (coeff.size() != static_cast<std::size_t>((L + 1) * (L + 1)))
    throw std::invalid_argument("eval_real_sh_value_sum: coefficient count != (L+1)^2");
  double x = std::cos(theta);
  double s2 = 1.0 - x * x;
  if (s2 < 0.0) s2 = 0.0;

  LegendreTable tab(L, x, s2, false);

  std::vector<double> cm(static_cast<std::size_t>(L + 1)), sm(static_cast<std::size_t>(L + 1));
  double cp = std::cos(phi), sp = std::sin(phi);
  cm[0] = 1.0;
  sm[0] = 0.0;
  for (int m = 1; m <= L; ++m) {
    cm[static_cast<std::size_t>(m)] = cm[static_cast<std::size_t>(m - 1)] * cp - sm[static_cast<std::size_t>(m - 1)] * sp;
    sm[static_cast<std::size_t>(m)] = sm[static_cast<std::size_t>(m - 1)] * cp + cm[static_cast<std::size_t>(m - 1)] * sp;
  }

  const double sqrt2 = std::numbers::sqrt2;
  double acc = 0.0;
  for (int l = 0; l <= L; ++l) {
    for (int m = 0; m <= l; ++m) {
      double cneg = (m > 0) ? coeff[static_cast<std::size_t>(sh_index(l, -m))] : 0.0;
      double cpos = coeff[static_cast<std::size_t>(sh_index(l, m))];
      if (cpos == 0.0 && cneg == 0.0) continue;
      double t = normalization(l, m) * (m > 0 ? sqrt2 : 1.0) *
                 tab.p[static_cast<std::size_t>(LegendreTable::idx(l, m))];
      if (cpos != 0.0) acc += cpos * t * cm[static_cast<std::size_t>(m)];
      if (cneg != 0.0) acc += cneg * t * sm[static_cast<std::size_t>(m)];
    }
  }
  return acc;
}

void eval_real_sh_all_values(int max_degree, double theta, double phi, std::vector<double>& out) {
  int L = max_degree;
  out.assign(static_cast<std::size_t>((L + 1) * (L + 1)), 0.0);
  double x = std::cos(theta);
  double s2 = 1.0 - x * x;
  if (s2 < 0.0) s2 = 0.0;

  LegendreTable tab(L, x, s2, false);

  std::vector<double> cm(static_cast<std::size_t>(L + 1)), sm(static_cast<std::size_t>(L + 1));
  double cp = std::cos(phi), sp = std::sin(phi);
  cm[0] = 1.0;
  sm[0] = 0.0;
  for (int m = 1; m <= L; ++m) {
    cm[static_cast<std::size_t>(m)] = cm[static_cast<std::size_t>(m - 1)] * cp - sm[static_cast<std::size_t>(m - 1)] * sp;
    sm[static_cast<std::size_t>(m)] = sm[static_cast<std::size_t>(m - 1)] * cp + cm[static_cast<std::size_t>(m - 1)] * sp;
  }

  const double sqrt2 = std::numbers::sqrt2;
  for (int l = 0; l <= L; ++l) {
    for (int m = 0; m <= l; ++m) {
      double t = normalization(l, m) * (m > 0 ? sqrt2 : 1.0) *
                 tab.p[static_cast<std::size_t>(LegendreTable::idx(l, m))];
      out[static_cast<std::size_t>(sh_index(l, m))] = t * cm[static_cast<std::size_t>(m)];
      if (m > 0) out[static_cast<std::size_t>(sh_index(l, -m))] = t * sm[static_cast<std::size_t>(m)];
    }
  }
}

}  // namespace pcgeom
