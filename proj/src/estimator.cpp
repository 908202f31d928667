#include "pcgeom/estimator.hpp"

#include <memory>

#include "pcgeom/gmls.hpp"

namespace pcgeom {

PatchEstimator make_gmls_estimator(int degree) {
  return [degree](const NeighborhoodPatch& patch) { return gmls_fit(patch, degree); };
}

PatchEstimator make_gnp_estimator(GnpModel model, std::uint64_t seed) {
  auto shared = std::make_shared<const GnpModel>(std::move(model));
  return [shared, seed](const NeighborhoodPatch& patch) {
    return gnp_forward(*shared, patch, seed);
  };
}

}  // namespace pcgeom
