#include "pcgeom/monge.hpp"

#include <cmath>

#include "pcgeom/graph_math.hpp"
#include "pcgeom/numeric.hpp"

namespace pcgeom {

GeometryEstimate extract_geometry(const MongePatch& patch, const Eigen::MatrixXd& basis_rows) {
  if (patch.coeff.size() != basis_rows.rows())
    throw NumericalError("extract_geometry: coefficient/basis size mismatch");
  const Eigen::VectorXd d = basis_rows.transpose() * patch.coeff;  // [s, su, sv, suu, suv, svv]

  const double ratio = patch.delta / patch.epsilon;
  const double ratio2 = patch.delta / (patch.epsilon * patch.epsilon);
  const double jet[6] = {d(0), d(1), d(2), d(3), d(4), d(5)};
  const GraphOutputs<double> o = graph_outputs(jet, ratio, ratio2);

  GeometryEstimate g;
  g.height = o.s;
  g.normal = Eigen::Vector3d(o.eta0, o.eta1, o.eta2);
  g.first << o.i00, o.i01, o.i01, o.i11;
  g.first_inv << o.iinv00, o.iinv01, o.iinv01, o.iinv11;
  g.second << o.ii00, o.ii01, o.ii01, o.ii11;
  g.gauss = o.gauss;
  g.mean = o.mean;
  return g;
}

GeometryEstimate extract_geometry(const MongePatch& patch, double u, double v) {
  Eigen::MatrixXd rows;
  patch.basis.eval(u, v, rows);
  return extract_geometry(patch, rows);
}

}  // namespace pcgeom
