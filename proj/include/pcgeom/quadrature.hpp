#pragma once

#include <vector>

namespace pcgeom {

// Gauss-Legendre nodes/weights on [-1, 1]; exact for polynomials through
// degree 2n-1. Newton iteration on the Legendre recurrence.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
  explicit GaussLegendre(int n);
};

}  // namespace pcgeom
