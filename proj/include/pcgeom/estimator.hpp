#pragma once

#include <cstdint>
#include <functional>

#include "pcgeom/gnp.hpp"
#include "pcgeom/monge.hpp"
#include "pcgeom/patch.hpp"

namespace pcgeom {

// A pluggable local-surface estimator: rescaled neighborhood in, height
// fit out. Both the flow and the collocation solver consume this.
using PatchEstimator = std::function<MongePatch(const NeighborhoodPatch&)>;

PatchEstimator make_gmls_estimator(int degree = 3);

// Wraps a trained network; the seed fixes its neighbor subsets.
PatchEstimator make_gnp_estimator(GnpModel model, std::uint64_t seed);

}  // namespace pcgeom
