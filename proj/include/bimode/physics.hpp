#pragma once

#include "bimode/common.hpp"

#include <vector>

namespace bimode {

struct PhysicalConfig {
    double wavelength = 0.0;  // m
    double n_cladding = 1.0;
    std::vector<double> inclusion_indices;  // region i >= 1 -> inclusion_indices[i-1]

    double k_vacuum() const { return 2.0 * pi / wavelength; }
    std::vector<double> region_indices() const;
    void validate() const;
};

}  // namespace bimode
