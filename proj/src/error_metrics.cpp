#include "pcgeom/error_metrics.hpp"

#include <cmath>

namespace pcgeom {

int PatchTruthSet::valid_count() const {
  int n = 0;
  for (uint8_t f : valid) n += f ? 1 : 0;
  return n;
}

PatchTruthSet patch_truth(const Shape& shape, const PointCloud& cloud,
                          const NeighborhoodPatch& patch) {
  PatchTruthSet out;
  const int nt = patch.target_count;
  out.u.reserve(nt);
  out.v.reserve(nt);
  out.w.reserve(nt);
  out.normal.reserve(nt);
  out.first_inv.reserve(nt);
  out.second.reserve(nt);
  out.gauss.reserve(nt);
  out.mean.reserve(nt);
  out.valid.reserve(nt);
  for (int t = 0; t < nt; ++t) {
    const int idx = patch.target_cloud_index(t);
    const int chart = cloud.chart_ids[static_cast<size_t>(idx)];
    const auto& cc = cloud.chart_coords[static_cast<size_t>(idx)];
    const ChartJet jet = shape.jet(chart, cc[0], cc[1]);
    const GeometricTruth truth = truth_in_frame(exact_geometry(jet), jet, patch.frame);
    const Eigen::Vector3d clean = patch.frame.local_coords(jet.p);
    out.u.push_back(clean.x());
    out.v.push_back(clean.y());
    out.w.push_back(clean.z());
    out.normal.push_back(truth.normal);
    out.first_inv.push_back(truth.first_inv);
    out.second.push_back(truth.second);
    out.gauss.push_back(truth.gauss);
    out.mean.push_back(truth.mean);
    out.valid.push_back(cloud.is_outlier(idx) ? 0 : 1);
  }
  return out;
}

double relative_l2(const Eigen::VectorXd& pred, const Eigen::VectorXd& ref) {
  return (pred - ref).norm() / (ref.norm() + 1e-30);
}

QuantityErrors patch_errors(const std::vector<GeometryEstimate>& estimates,
                            const PatchTruthSet& truth) {
  const int nt = truth.size();
  if (static_cast<int>(estimates.size()) != nt)
    throw NumericalError("patch_errors: estimate/truth length mismatch");
  const int nv = truth.valid_count();
  if (nv == 0) throw NumericalError("patch_errors: no valid targets");

  KahanSum angle;
  // Stacked sums of squares, truth norms alongside predictions.
  double d_inv = 0.0, r_inv = 0.0;
  double d_h = 0.0, r_h = 0.0;
  double d_k = 0.0, r_k = 0.0;
  double d_m = 0.0, r_m = 0.0;
  for (int t = 0; t < nt; ++t) {
    if (!truth.valid[static_cast<size_t>(t)]) continue;
    const GeometryEstimate& e = estimates[static_cast<size_t>(t)];
    const size_t st = static_cast<size_t>(t);
    angle.add(1.0 - e.normal.dot(truth.normal[st]));
    d_inv += (e.first_inv - truth.first_inv[st]).squaredNorm();
    r_inv += truth.first_inv[st].squaredNorm();
    d_h += sqr(e.height - truth.w[st]);
    r_h += sqr(truth.w[st]);
    d_k += sqr(e.gauss - truth.gauss[st]);
    r_k += sqr(truth.gauss[st]);
    d_m += sqr(e.mean - truth.mean[st]);
    r_m += sqr(truth.mean[st]);
  }
  QuantityErrors q;
  q.normal = angle.value() / static_cast<double>(nv);
  q.metric_inverse = std::sqrt(d_inv) / (std::sqrt(r_inv) + 1e-30);
  q.shape = std::sqrt(d_h) / (std::sqrt(r_h) + 1e-30);
  q.gaussian = std::sqrt(d_k) / (std::sqrt(r_k) + 1e-30);
  q.mean = std::sqrt(d_m) / (std::sqrt(r_m) + 1e-30);
  return q;
}

void ErrorAccumulator::add(const QuantityErrors& e) {
  normal_.add(e.normal);
  metric_inverse_.add(e.metric_inverse);
  shape_.add(e.shape);
  gaussian_.add(e.gaussian);
  mean_.add(e.mean);
  ++n_;
}

QuantityErrors ErrorAccumulator::mean() const {
  if (n_ == 0) throw NumericalError("ErrorAccumulator: empty mean");
  const double inv = 1.0 / static_cast<double>(n_);
  QuantityErrors q;
  q.normal = normal_.value() * inv;
  q.metric_inverse = metric_inverse_.value() * inv;
  q.shape = shape_.value() * inv;
  q.gaussian = gaussian_.value() * inv;
  q.mean = mean_.value() * inv;
  return q;
}

}  // namespace pcgeom
