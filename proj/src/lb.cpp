#include "pcgeom/lb.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "pcgeom/gmls.hpp"
#include "pcgeom/kdtree.hpp"
#include "pcgeom/numeric.hpp"
#include "pcgeom/rng.hpp"

namespace pcgeom {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Same window as the height fits: supported on the whole input set.
double window_weight(double u, double v, double input_radius_factor) {
  const double rho = std::sqrt(u * u + v * v) / input_radius_factor;
  if (rho >= 1.0) return 0.0;
  const double t = 1.0 - rho;
  const double t2 = t * t;
  return t2 * t2;
}

// Rescaled coordinates of the patch center inside its own patch.
Eigen::Vector3d center_coords(const NeighborhoodPatch& patch) {
  for (int t = 0; t < patch.input_count(); ++t)
    if (patch.input_indices[static_cast<std::size_t>(t)] == patch.center_index)
      return patch.coords[static_cast<std::size_t>(t)];
  throw NumericalError("lb: patch does not contain its own center");
}

// First fundamental form and its coordinate derivatives at one chart point.
struct ChartMetric {
  Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d gu = Eigen::Matrix2d::Zero();  // d/du of g
  Eigen::Matrix2d gv = Eigen::Matrix2d::Zero();  // d/dv of g
};

// Inverse metric and first-order coefficients of the Laplace-Beltrami
// expansion  g^{ab} d_a d_b + c^b d_b  computed from the metric jets.
struct LbCoefficients {
  Eigen::Matrix2d gi = Eigen::Matrix2d::Zero();
  double c1 = 0.0;
  double c2 = 0.0;
};

LbCoefficients lb_coefficients(const ChartMetric& m) {
  const double det = m.g(0, 0) * m.g(1, 1) - m.g(0, 1) * m.g(0, 1);
  if (!(det > 1e-300)) throw NumericalError("lb: degenerate patch metric");
  LbCoefficients out;
  out.gi(0, 0) = m.g(1, 1) / det;
  out.gi(1, 1) = m.g(0, 0) / det;
  out.gi(0, 1) = out.gi(1, 0) = -m.g(0, 1) / det;
  const double det_u =
      m.gu(0, 0) * m.g(1, 1) + m.g(0, 0) * m.gu(1, 1) - 2.0 * m.g(0, 1) * m.gu(0, 1);
  const double det_v =
      m.gv(0, 0) * m.g(1, 1) + m.g(0, 0) * m.gv(1, 1) - 2.0 * m.g(0, 1) * m.gv(0, 1);
  const Eigen::Matrix2d dgi_u = -out.gi * m.gu * out.gi;
  const Eigen::Matrix2d dgi_v = -out.gi * m.gv * out.gi;
  out.c1 = dgi_u(0, 0) + dgi_v(1, 0) + (out.gi(0, 0) * det_u + out.gi(1, 0) * det_v) / (2.0 * det);
  out.c2 = dgi_u(0, 1) + dgi_v(1, 1) + (out.gi(0, 1) * det_u + out.gi(1, 1) * det_v) / (2.0 * det);
  return out;
}

// Metric jets of the graph chart (u, v) -> o + eps u psi1 + eps v psi2 +
// delta s(u, v) psi3, from the fitted height's scaled derivatives.
ChartMetric graph_metric(const MongePatch& fit, double u, double v) {
  Eigen::MatrixXd rows;
  fit.basis.eval(u, v, rows);
  const double su = rows.col(1).dot(fit.coeff);
  const double sv = rows.col(2).dot(fit.coeff);
  const double suu = rows.col(3).dot(fit.coeff);
  const double suv = rows.col(4).dot(fit.coeff);
  const double svv = rows.col(5).dot(fit.coeff);
  const double e2 = fit.epsilon * fit.epsilon;
  const double d2 = fit.delta * fit.delta;
  ChartMetric m;
  m.g(0, 0) = e2 + d2 * su * su;
  m.g(1, 1) = e2 + d2 * sv * sv;
  m.g(0, 1) = m.g(1, 0) = d2 * su * sv;
  m.gu(0, 0) = 2.0 * d2 * su * suu;
  m.gu(1, 1) = 2.0 * d2 * sv * suv;
  m.gu(0, 1) = m.gu(1, 0) = d2 * (suu * sv + su * suv);
  m.gv(0, 0) = 2.0 * d2 * su * suv;
  m.gv(1, 1) = 2.0 * d2 * sv * svv;
  m.gv(0, 1) = m.gv(1, 0) = d2 * (suv * sv + su * svv);
  return m;
}

// Weighted least-squares moment matrix of the unknown's local fit together
// with the solve handles, with the same damping fallback as the height fits.
class StencilSolver {
 public:
  StencilSolver(const Eigen::MatrixXd& phi, const Eigen::VectorXd& weights) {
    const int nb = static_cast<int>(phi.cols());
    Eigen::MatrixXd moment = Eigen::MatrixXd::Zero(nb, nb);
    for (int t = 0; t < phi.rows(); ++t)
      moment.noalias() += weights(t) * phi.row(t).transpose() * phi.row(t);
    ldlt_.compute(moment);
    if (ldlt_.info() != Eigen::Success || !ldlt_.isPositive()) {
      const double mu = 1e-10 * moment.trace() / static_cast<double>(nb);
      if (!(mu > 0.0)) throw NumericalError("lb: degenerate stencil moment matrix");
      moment.diagonal().array() += mu;
      ldlt_.compute(moment);
      if (ldlt_.info() != Eigen::Success)
        throw NumericalError("lb: stencil moment matrix is not solvable");
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd y = ldlt_.solve(rhs);
    if (!y.allFinite()) throw NumericalError("lb: non-finite stencil solve");
    return y;
  }

 private:
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
};

int nearest_dof_column(const KdTree& tree, const std::vector<Eigen::Vector3d>& points, int i,
                       const std::vector<int>& col_of) {
  const int n = static_cast<int>(points.size());
  int want = 8;
  while (true) {
    const auto hits = tree.knn(points[static_cast<std::size_t>(i)], std::min(want, n));
    for (const auto& h : hits) {
      const int j = h.second;
      if (col_of[static_cast<std::size_t>(j)] >= 0) return col_of[static_cast<std::size_t>(j)];
    }
    if (want >= n) throw NumericalError("lb: no degrees of freedom near point");
    want *= 4;
  }
}

// Jacobi-preconditioned conjugate residual on the normal equations.
Eigen::VectorXd normal_equations_cr(const Eigen::SparseMatrix<double, Eigen::RowMajor>& A,
                                    const Eigen::VectorXd& b, double tol, int max_iter,
                                    std::vector<double>& history, double& final_residual,
                                    int& iterations) {
  const int cols = static_cast<int>(A.cols());
  history.clear();
  Eigen::VectorXd atb = A.transpose() * b;
  const double atb_norm = atb.norm();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(cols);
  iterations = 0;
  final_residual = 0.0;
  if (atb_norm == 0.0) {
    history.push_back(0.0);
    return x;
  }

  Eigen::VectorXd minv(cols);
  minv.setZero();
  for (int r = 0; r < A.outerSize(); ++r)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(A, r); it; ++it)
      minv(it.col()) += it.value() * it.value();
  for (int j = 0; j < cols; ++j) minv(j) = minv(j) > 0.0 ? 1.0 / minv(j) : 1.0;

  const auto apply = [&A](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return A.transpose() * (A * v);
  };

  Eigen::VectorXd r = atb;
  Eigen::VectorXd z = minv.cwiseProduct(r);
  double rz0 = r.dot(z);
  if (!(rz0 > 0.0)) throw NumericalError("lb solve: preconditioned residual is not positive");
  history.push_back(1.0);
  Eigen::VectorXd p = z;
  Eigen::VectorXd az = apply(z);
  Eigen::VectorXd ap = az;
  double zaz = z.dot(az);

  for (int it = 1; it <= max_iter; ++it) {
    const Eigen::VectorXd map = minv.cwiseProduct(ap);
    const double denom = ap.dot(map);
    if (!(denom > 0.0) || !(zaz > 0.0)) break;  // stagnation; report non-convergence
    const double alpha = zaz / denom;
    x += alpha * p;
    r -= alpha * ap;
    z = minv.cwiseProduct(r);
    history.push_back(std::sqrt(std::max(r.dot(z), 0.0) / rz0));
    iterations = it;

    if (r.norm() / atb_norm < tol) {
      // Trust only a recomputed residual for the convergence decision.
      const Eigen::VectorXd r_true = atb - apply(x);
      const double rel_true = r_true.norm() / atb_norm;
      if (rel_true < tol) {
        final_residual = rel_true;
        return x;
      }
      r = r_true;  // recursion drifted: restart the directions
      z = minv.cwiseProduct(r);
      p = z;
      az = apply(z);
      ap = az;
      zaz = z.dot(az);
      continue;
    }

    const Eigen::VectorXd az_new = apply(z);
    const double zaz_new = z.dot(az_new);
    const double beta = zaz_new / zaz;
    p = z + beta * p;
    ap = az_new + beta * ap;
    zaz = zaz_new;
  }

  final_residual = (atb - apply(x)).norm() / atb_norm;
  std::ostringstream msg;
  msg << "lb solve: no convergence after " << iterations << " iterations, relative residual "
      << final_residual << " (target " << tol << "); preconditioned history tail:";
  const std::size_t tail = std::min<std::size_t>(history.size(), 5);
  for (std::size_t j = history.size() - tail; j < history.size(); ++j) msg << " " << history[j];
  throw NumericalError(msg.str());
}

}  // namespace

void LbConfig::validate() const {
  neighborhood.validate();
  if (degree < 1 || degree > 6) throw ConfigError("lb: degree must be in [1, 6]");
  if (!(dof_fraction > 0.0) || dof_fraction > 1.0)
    throw ConfigError("lb: dof_fraction must be in (0, 1]");
  if (!(tol > 0.0)) throw ConfigError("lb: tol must be positive");
  if (max_iter < 1) throw ConfigError("lb: max_iter must be at least 1");
}

LbProblem make_lb_problem(PointCloud cloud, std::vector<double> f, PatchEstimator estimator,
                          LbConfig config) {
  config.validate();
  const int n = static_cast<int>(cloud.size());
  if (n <= config.neighborhood.k)
    throw ConfigError("lb: cloud must have more points than the neighborhood size");
  if (cloud.normals.size() != cloud.points.size())
    throw ConfigError("lb: cloud must carry reference normals");
  if (static_cast<int>(f.size()) != n)
    throw ConfigError("lb: right-hand side size does not match the cloud");
  for (double v : f)
    if (!std::isfinite(v)) throw ConfigError("lb: right-hand side has non-finite entries");
  if (!estimator) throw ConfigError("lb: estimator is empty");

  const int n_dof = static_cast<int>(std::llround(config.dof_fraction * n));
  const int nb = (config.degree + 1) * (config.degree + 1);
  if (n_dof < nb) throw ConfigError("lb: too few degrees of freedom for the fit basis");

  LbProblem problem;
  problem.cloud = std::move(cloud);
  problem.f = std::move(f);
  problem.estimator = std::move(estimator);
  problem.config = config;
  Rng rng(mix64(config.seed, 0x646f66ULL));
  problem.dof = rng.sample_without_replacement(n, n_dof);
  std::sort(problem.dof.begin(), problem.dof.end());
  return problem;
}

LbSystem assemble_lb_system(const LbProblem& problem) {
  const int n = static_cast<int>(problem.cloud.size());
  const int n_dof = static_cast<int>(problem.dof.size());
  const auto& points = problem.cloud.points;

  std::vector<int> col_of(static_cast<std::size_t>(n), -1);
  for (int c = 0; c < n_dof; ++c) col_of[static_cast<std::size_t>(problem.dof[c])] = c;

  const KdTree tree(points);
  const LegendreBasis ubasis(problem.config.degree);
  const int nb = ubasis.size();

  LbSystem system;
  system.dof_points = problem.dof;

  std::vector<Eigen::Triplet<double>> pde_triplets;
  std::vector<Eigen::Triplet<double>> eval_triplets;
  pde_triplets.reserve(static_cast<std::size_t>(n) * 48);
  eval_triplets.reserve(static_cast<std::size_t>(n) * 8);
  std::vector<double> rhs_values;
  rhs_values.reserve(static_cast<std::size_t>(n));
  std::vector<double> row_norms;
  row_norms.reserve(static_cast<std::size_t>(n));

  Eigen::MatrixXd basis_rows;
  for (int i = 0; i < n; ++i) {
    const int own_col = col_of[static_cast<std::size_t>(i)];
    try {
      const NeighborhoodPatch patch = make_patch(points, tree, i, problem.config.neighborhood,
                                                 problem.cloud.normals[static_cast<std::size_t>(i)]);
      const MongePatch fit = problem.estimator(patch);
      const Eigen::Vector3d cc = center_coords(patch);
      const LbCoefficients coeffs = lb_coefficients(graph_metric(fit, cc.x(), cc.y()));

      // Unknown-fit stencil: degrees of freedom among the patch inputs.
      std::vector<int> stencil_cols;
      std::vector<double> stencil_w;
      std::vector<Eigen::Vector2d> stencil_uv;
      for (int t = 0; t < patch.input_count(); ++t) {
        const int j = patch.input_indices[static_cast<std::size_t>(t)];
        const int col = col_of[static_cast<std::size_t>(j)];
        if (col < 0) continue;
        const Eigen::Vector3d& c = patch.coords[static_cast<std::size_t>(t)];
        const double w = window_weight(c.x(), c.y(), patch.input_radius_factor);
        if (w <= 0.0) continue;
        stencil_cols.push_back(col);
        stencil_w.push_back(w);
        stencil_uv.emplace_back(c.x(), c.y());
      }
      const int m = static_cast<int>(stencil_cols.size());
      if (m < nb) throw NumericalError("lb: stencil has too few degrees of freedom");

      Eigen::MatrixXd phi(m, nb);
      Eigen::VectorXd weights(m);
      for (int t = 0; t < m; ++t) {
        phi.row(t) = ubasis.values(stencil_uv[static_cast<std::size_t>(t)].x(),
                                   stencil_uv[static_cast<std::size_t>(t)].y())
                         .transpose();
        weights(t) = stencil_w[static_cast<std::size_t>(t)];
      }
      const StencilSolver solver(phi, weights);

      ubasis.eval(cc.x(), cc.y(), basis_rows);
      Eigen::VectorXd d(nb);
      for (int b = 0; b < nb; ++b)
        d(b) = coeffs.gi(0, 0) * basis_rows(b, 3) + 2.0 * coeffs.gi(0, 1) * basis_rows(b, 4) +
               coeffs.gi(1, 1) * basis_rows(b, 5) + coeffs.c1 * basis_rows(b, 1) +
               coeffs.c2 * basis_rows(b, 2);
      const Eigen::VectorXd y = solver.solve(d);

      const int row = static_cast<int>(rhs_values.size());
      double norm2 = 0.0;
      for (int t = 0; t < m; ++t) {
        const double value = weights(t) * phi.row(t).dot(y);
        if (!std::isfinite(value)) throw NumericalError("lb: non-finite row value");
        pde_triplets.emplace_back(row, stencil_cols[static_cast<std::size_t>(t)], value);
        norm2 += value * value;
      }
      row_norms.push_back(std::sqrt(norm2));
      rhs_values.push_back(-problem.f[static_cast<std::size_t>(i)]);
      system.row_points.push_back(i);

      if (own_col >= 0) {
        eval_triplets.emplace_back(i, own_col, 1.0);
      } else {
        const Eigen::VectorXd ye = solver.solve(basis_rows.col(0));
        for (int t = 0; t < m; ++t) {
          const double value = weights(t) * phi.row(t).dot(ye);
          if (!std::isfinite(value)) throw NumericalError("lb: non-finite readout value");
          eval_triplets.emplace_back(i, stencil_cols[static_cast<std::size_t>(t)], value);
        }
      }
    } catch (const NumericalError&) {
      system.dropped_points.push_back(i);
      if (own_col >= 0)
        eval_triplets.emplace_back(i, own_col, 1.0);
      else
        eval_triplets.emplace_back(i, nearest_dof_column(tree, points, i, col_of), 1.0);
    }
  }

  if (100 * static_cast<int>(system.dropped_points.size()) > n) {
    std::ostringstream msg;
    msg << "lb: " << system.dropped_points.size() << " of " << n << " collocation rows failed";
    throw NumericalError(msg.str());
  }

  std::vector<double> sorted_norms = row_norms;
  std::sort(sorted_norms.begin(), sorted_norms.end());
  if (sorted_norms.empty()) throw NumericalError("lb: no collocation rows were assembled");
  const double median = sorted_norms[(sorted_norms.size() - 1) / 2];
  system.constraint_scale = median * std::sqrt(static_cast<double>(n_dof));

  const int pde_rows = static_cast<int>(rhs_values.size());
  const double entry = system.constraint_scale / static_cast<double>(n_dof);
  for (int c = 0; c < n_dof; ++c) pde_triplets.emplace_back(pde_rows, c, entry);
  system.row_points.push_back(-1);

  system.matrix.resize(pde_rows + 1, n_dof);
  system.matrix.setFromTriplets(pde_triplets.begin(), pde_triplets.end());
  system.evaluation.resize(n, n_dof);
  system.evaluation.setFromTriplets(eval_triplets.begin(), eval_triplets.end());
  system.rhs.resize(pde_rows + 1);
  for (int r = 0; r < pde_rows; ++r) system.rhs(r) = rhs_values[static_cast<std::size_t>(r)];
  system.rhs(pde_rows) = 0.0;
  return system;
}

LbSolution solve_lb_system(const LbSystem& system, double tol, int max_iter) {
  return solve_lb_system(system, system.rhs, tol, max_iter);
}

LbSolution solve_lb_system(const LbSystem& system, const Eigen::VectorXd& rhs, double tol,
                           int max_iter) {
  if (system.matrix.rows() == 0 || system.matrix.cols() == 0)
    throw ConfigError("lb solve: empty system");
  if (rhs.size() != system.matrix.rows())
    throw ConfigError("lb solve: right-hand side length does not match the system");
  LbSolution out;
  Eigen::VectorXd x = normal_equations_cr(system.matrix, rhs, tol, max_iter,
                                          out.residual_history, out.final_residual,
                                          out.iterations);
  Eigen::VectorXd u = system.evaluation.rows() > 0 ? (system.evaluation * x).eval() : x;
  const double mean = u.mean();
  out.u = u.array() - mean;
  out.u_dof = x.array() - mean;
  return out;
}

LbSolution solve_lb(const LbProblem& problem) {
  const LbSystem system = assemble_lb_system(problem);
  return solve_lb_system(system, problem.config.tol, problem.config.max_iter);
}

std::vector<double> generate_rhs(std::uint64_t seed, const PointCloud& cloud) {
  constexpr int kModes = 10;
  Rng rng(mix64(seed, 0x726873ULL));
  double a[3][kModes + 1];
  double b[3][kModes + 1];
  for (int d = 0; d < 3; ++d) {
    a[d][0] = rng.normal();
    for (int m = 1; m <= kModes; ++m) {
      a[d][m] = rng.normal();
      b[d][m] = rng.normal();
    }
  }

  const std::size_t n = cloud.size();
  std::vector<double> f(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double prod = 1.0;
    for (int d = 0; d < 3; ++d) {
      const double xd = cloud.points[i](d);
      double series = a[d][0];
      for (int m = 1; m <= kModes; ++m) {
        const double arg = kPi * m * xd;
        series += a[d][m] * std::cos(arg) + b[d][m] * std::sin(arg);
      }
      prod *= series;
    }
    f[i] = prod;
  }
  if (f.empty()) return f;

  const auto [lo_it, hi_it] = std::minmax_element(f.begin(), f.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi - lo > 1e-12)) {
    std::fill(f.begin(), f.end(), 0.0);
    return f;
  }
  KahanSum sum;
  for (double& v : f) {
    v = -20.0 + 40.0 * (v - lo) / (hi - lo);
    sum.add(v);
  }
  const double mean = sum.value() / static_cast<double>(n);
  for (double& v : f) v -= mean;
  return f;
}

AmbientField random_trig_field(std::uint64_t seed, int modes, int max_component) {
  if (modes < 1) throw ConfigError("trig field: modes must be at least 1");
  if (max_component < 1) throw ConfigError("trig field: max_component must be at least 1");
  struct Data {
    std::vector<Eigen::Vector3d> wave;
    std::vector<double> amp;
    std::vector<double> phase;
  };
  auto data = std::make_shared<Data>();
  Rng rng(mix64(seed, 0x747267ULL));
  const std::int64_t c = max_component;
  for (int j = 0; j < modes; ++j) {
    Eigen::Vector3d k = Eigen::Vector3d::Zero();
    while (k.squaredNorm() == 0.0)
      k = Eigen::Vector3d(static_cast<double>(rng.uniform_int(-c, c)),
                          static_cast<double>(rng.uniform_int(-c, c)),
                          static_cast<double>(rng.uniform_int(-c, c)));
    data->wave.push_back(kPi * k);
    data->amp.push_back(rng.normal());
    data->phase.push_back(rng.uniform(0.0, 2.0 * kPi));
  }

  AmbientField field;
  field.value = [data](const Eigen::Vector3d& x) {
    double s = 0.0;
    for (std::size_t j = 0; j < data->wave.size(); ++j)
      s += data->amp[j] * std::cos(data->wave[j].dot(x) + data->phase[j]);
    return s;
  };
  field.gradient = [data](const Eigen::Vector3d& x) {
    Eigen::Vector3d g = Eigen::Vector3d::Zero();
    for (std::size_t j = 0; j < data->wave.size(); ++j)
      g -= data->amp[j] * std::sin(data->wave[j].dot(x) + data->phase[j]) * data->wave[j];
    return g;
  };
  field.hessian = [data](const Eigen::Vector3d& x) {
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    for (std::size_t j = 0; j < data->wave.size(); ++j)
      h -= data->amp[j] * std::cos(data->wave[j].dot(x) + data->phase[j]) * data->wave[j] *
           data->wave[j].transpose();
    return h;
  };
  return field;
}

AmbientField solid_harmonic_field(int l, int m) {
  AmbientField f;
  const double c1 = std::sqrt(3.0 / (4.0 * kPi));
  const double c20 = std::sqrt(5.0 / (16.0 * kPi));
  const double c21 = std::sqrt(15.0 / (4.0 * kPi));
  const double c22 = std::sqrt(15.0 / (16.0 * kPi));
  const auto constant_hessian = [](const Eigen::Matrix3d& h) {
    return [h](const Eigen::Vector3d&) { return h; };
  };
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();

  if (l == 1 && m == 0) {
    f.value = [c1](const Eigen::Vector3d& x) { return c1 * x.z(); };
    f.gradient = [c1](const Eigen::Vector3d&) { return Eigen::Vector3d(0, 0, c1); };
    f.hessian = constant_hessian(h);
  } else if (l == 1 && m == 1) {
    f.value = [c1](const Eigen::Vector3d& x) { return -c1 * x.x(); };
    f.gradient = [c1](const Eigen::Vector3d&) { return Eigen::Vector3d(-c1, 0, 0); };
    f.hessian = constant_hessian(h);
  } else if (l == 1 && m == -1) {
    f.value = [c1](const Eigen::Vector3d& x) { return -c1 * x.y(); };
    f.gradient = [c1](const Eigen::Vector3d&) { return Eigen::Vector3d(0, -c1, 0); };
    f.hessian = constant_hessian(h);
  } else if (l == 2 && m == 0) {
    f.value = [c20](const Eigen::Vector3d& x) {
      return c20 * (2.0 * x.z() * x.z() - x.x() * x.x() - x.y() * x.y());
    };
    f.gradient = [c20](const Eigen::Vector3d& x) {
      return Eigen::Vector3d(-2.0 * c20 * x.x(), -2.0 * c20 * x.y(), 4.0 * c20 * x.z());
    };
    h.diagonal() << -2.0 * c20, -2.0 * c20, 4.0 * c20;
    f.hessian = constant_hessian(h);
  } else if (l == 2 && m == 1) {
    f.value = [c21](const Eigen::Vector3d& x) { return -c21 * x.x() * x.z(); };
    f.gradient = [c21](const Eigen::Vector3d& x) {
      return Eigen::Vector3d(-c21 * x.z(), 0.0, -c21 * x.x());
    };
    h(0, 2) = h(2, 0) = -c21;
    f.hessian = constant_hessian(h);
  } else if (l == 2 && m == -1) {
    f.value = [c21](const Eigen::Vector3d& x) { return -c21 * x.y() * x.z(); };
    f.gradient = [c21](const Eigen::Vector3d& x) {
      return Eigen::Vector3d(0.0, -c21 * x.z(), -c21 * x.y());
    };
    h(1, 2) = h(2, 1) = -c21;
    f.hessian = constant_hessian(h);
  } else if (l == 2 && m == 2) {
    f.value = [c22](const Eigen::Vector3d& x) {
      return c22 * (x.x() * x.x() - x.y() * x.y());
    };
    f.gradient = [c22](const Eigen::Vector3d& x) {
      return Eigen::Vector3d(2.0 * c22 * x.x(), -2.0 * c22 * x.y(), 0.0);
    };
    h.diagonal() << 2.0 * c22, -2.0 * c22, 0.0;
    f.hessian = constant_hessian(h);
  } else if (l == 2 && m == -2) {
    f.value = [c21](const Eigen::Vector3d& x) { return c21 * x.x() * x.y(); };
    f.gradient = [c21](const Eigen::Vector3d& x) {
      return Eigen::Vector3d(c21 * x.y(), c21 * x.x(), 0.0);
    };
    h(0, 1) = h(1, 0) = c21;
    f.hessian = constant_hessian(h);
  } else {
    throw ConfigError("solid harmonic field: supported degrees are l = 1, 2");
  }
  return f;
}

double exact_surface_laplacian(const Shape& shape, int chart, double u, double v,
                               const AmbientField& field) {
  const ChartJet jet = shape.jet(chart, u, v);
  const Eigen::Vector3d grad = field.gradient(jet.p);
  const Eigen::Matrix3d hess = field.hessian(jet.p);

  const double fu = grad.dot(jet.du);
  const double fv = grad.dot(jet.dv);
  const double fuu = jet.du.dot(hess * jet.du) + grad.dot(jet.duu);
  const double fuv = jet.du.dot(hess * jet.dv) + grad.dot(jet.duv);
  const double fvv = jet.dv.dot(hess * jet.dv) + grad.dot(jet.dvv);

  ChartMetric m;
  m.g(0, 0) = jet.du.dot(jet.du);
  m.g(1, 1) = jet.dv.dot(jet.dv);
  m.g(0, 1) = m.g(1, 0) = jet.du.dot(jet.dv);
  m.gu(0, 0) = 2.0 * jet.duu.dot(jet.du);
  m.gu(1, 1) = 2.0 * jet.duv.dot(jet.dv);
  m.gu(0, 1) = m.gu(1, 0) = jet.duu.dot(jet.dv) + jet.du.dot(jet.duv);
  m.gv(0, 0) = 2.0 * jet.duv.dot(jet.du);
  m.gv(1, 1) = 2.0 * jet.dvv.dot(jet.dv);
  m.gv(0, 1) = m.gv(1, 0) = jet.duv.dot(jet.dv) + jet.du.dot(jet.dvv);

  const LbCoefficients coeffs = lb_coefficients(m);
  return coeffs.gi(0, 0) * fuu + 2.0 * coeffs.gi(0, 1) * fuv + coeffs.gi(1, 1) * fvv +
         coeffs.c1 * fu + coeffs.c2 * fv;
}

namespace {

// f = -Laplacian_S u_exact and the restricted truth at every point's clean
// chart coordinates, both shifted to zero sample mean.
void manufactured_data(const Shape& shape, const PointCloud& cloud, const AmbientField& u_exact,
                       std::vector<double>& f, Eigen::VectorXd& truth) {
  const std::size_t n = cloud.size();
  if (cloud.chart_coords.size() != n || cloud.chart_ids.size() != n)
    throw ConfigError("manufactured test: cloud lacks generating chart coordinates");

  f.resize(n);
  truth.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const int chart = cloud.chart_ids[i];
    const double cu = cloud.chart_coords[i][0];
    const double cv = cloud.chart_coords[i][1];
    f[i] = -exact_surface_laplacian(shape, chart, cu, cv, u_exact);
    truth(static_cast<Eigen::Index>(i)) = u_exact.value(shape.jet(chart, cu, cv).p);
  }

  KahanSum fsum;
  for (double v : f) fsum.add(v);
  const double fmean = fsum.value() / static_cast<double>(n);
  for (double& v : f) v -= fmean;
  // An exactly constant field projects to exactly zero; subtracting a
  // rounded mean would leave ulp-level dust with a meaningless error ratio.
  if (truth.maxCoeff() - truth.minCoeff() == 0.0)
    truth.setZero();
  else
    truth.array() -= truth.mean();
}

}  // namespace

ManufacturedResult manufactured_test(const Shape& shape, const PointCloud& cloud,
                                     const AmbientField& u_exact, const PatchEstimator& estimator,
                                     const LbConfig& config) {
  std::vector<double> f;
  Eigen::VectorXd truth;
  manufactured_data(shape, cloud, u_exact, f, truth);

  ManufacturedResult result;
  result.u_exact = truth;
  result.solution = solve_lb(make_lb_problem(cloud, std::move(f), estimator, config));
  result.relative_error = relative_l2(result.solution.u, truth);
  return result;
}

ManufacturedResult manufactured_on_system(const Shape& shape, const PointCloud& cloud,
                                          const AmbientField& u_exact, const LbSystem& system,
                                          double tol, int max_iter) {
  std::vector<double> f;
  Eigen::VectorXd truth;
  manufactured_data(shape, cloud, u_exact, f, truth);
  if (system.row_points.size() != static_cast<std::size_t>(system.matrix.rows()))
    throw ConfigError("manufactured test: system row map is inconsistent");

  Eigen::VectorXd rhs(system.matrix.rows());
  for (Eigen::Index r = 0; r < rhs.size(); ++r) {
    const int point = system.row_points[static_cast<std::size_t>(r)];
    if (point < 0) {
      rhs(r) = 0.0;  // the mean-zero constraint row
    } else if (point < static_cast<int>(cloud.size())) {
      rhs(r) = -f[static_cast<std::size_t>(point)];
    } else {
      throw ConfigError("manufactured test: system references a point outside the cloud");
    }
  }

  ManufacturedResult result;
  result.u_exact = truth;
  result.solution = solve_lb_system(system, rhs, tol, max_iter);
  result.relative_error = relative_l2(result.solution.u, truth);
  return result;
}

FilterResult gnp_filter(const PointCloud& cloud, const PatchEstimator& estimator,
                        const NeighborhoodConfig& cfg, double alpha) {
  cfg.validate();
  if (!(alpha > 0.0)) throw ConfigError("filter: alpha must be positive");
  const int n = static_cast<int>(cloud.size());
  if (n <= cfg.k) throw ConfigError("filter: cloud must have more points than the neighborhood");
  if (cloud.normals.size() != cloud.points.size())
    throw ConfigError("filter: cloud must carry reference normals");

  const KdTree tree(cloud.points);
  std::vector<std::uint8_t> keep(static_cast<std::size_t>(n), 1);
  FilterResult result;
  for (int i = 0; i < n; ++i) {
    try {
      const NeighborhoodPatch patch =
          make_patch(cloud.points, tree, i, cfg, cloud.normals[static_cast<std::size_t>(i)]);
      const MongePatch fit = estimator(patch);
      const Eigen::Vector3d cc = center_coords(patch);
      if (std::abs(cc.z() - fit.height(cc.x(), cc.y())) > alpha) {
        keep[static_cast<std::size_t>(i)] = 0;
        result.removed.push_back(i);
      }
    } catch (const NumericalError&) {
      // Points we cannot reconstruct stay in the cloud.
    }
  }

  PointCloud& out = result.cloud;
  out.shape_ref = cloud.shape_ref;
  out.sample_seed = cloud.sample_seed;
  out.noise_mode = cloud.noise_mode;
  out.noise_sigma = cloud.noise_sigma;
  out.outlier_fraction = cloud.outlier_fraction;
  out.noise_seed = cloud.noise_seed;
  for (int i = 0; i < n; ++i) {
    if (!keep[static_cast<std::size_t>(i)]) continue;
    const std::size_t si = static_cast<std::size_t>(i);
    out.points.push_back(cloud.points[si]);
    if (!cloud.normals.empty()) out.normals.push_back(cloud.normals[si]);
    if (!cloud.chart_coords.empty()) out.chart_coords.push_back(cloud.chart_coords[si]);
    if (!cloud.chart_ids.empty()) out.chart_ids.push_back(cloud.chart_ids[si]);
    if (!cloud.outlier_mask.empty()) out.outlier_mask.push_back(cloud.outlier_mask[si]);
  }
  return result;
}

}  // namespace pcgeom
