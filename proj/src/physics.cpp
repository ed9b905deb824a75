#include "bimode/physics.hpp"

namespace bimode {

std::vector<double> PhysicalConfig::region_indices() const {
    std::vector<double> n{n_cladding};
    n.insert(n.end(), inclusion_indices.begin(), inclusion_indices.end());
    return n;
}

void PhysicalConfig::validate() const {
    if (!(wavelength > 0.0)) throw ValidationError("physics: wavelength must be positive");
    if (!(n_cladding > 0.0)) throw ValidationError("physics: cladding index must be positive");
    for (double n : inclusion_indices) {
        if (!(n > 0.0)) throw ValidationError("physics: inclusion indices must be positive");
    }
}

}  // namespace bimode
